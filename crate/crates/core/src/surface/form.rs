//! One-forms known through a chart coefficient, and the cycles they are
//! integrated over.

use std::fmt;
use std::sync::Arc;

use crate::conformal::ConformalMap;
use crate::error::{Error, Result};
use crate::numerics::{circle_integral, CircleContour, FormCoefficients};
use crate::C64;

type Coefficient = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A pole of a meromorphic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub at: C64,
    pub order: u32,
}

/// `a(w) dw`, or `conj(a(w)) dw̄` when `conjugate` is set.
///
/// Evaluators return non-finite values where the form is undefined; the
/// quadrature routines turn those into errors.
#[derive(Clone)]
pub struct OneForm {
    coefficient: Coefficient,
    conjugate: bool,
    poles: Vec<Pole>,
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneForm")
            .field("conjugate", &self.conjugate)
            .field("poles", &self.poles)
            .finish_non_exhaustive()
    }
}

impl OneForm {
    pub fn holomorphic<F>(coefficient: F) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        Self { coefficient: Arc::new(coefficient), conjugate: false, poles: Vec::new() }
    }

    /// `conj(a(w)) dw̄` for the holomorphic coefficient `a`.
    pub fn antiholomorphic<F>(coefficient: F) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        Self { coefficient: Arc::new(coefficient), conjugate: true, poles: Vec::new() }
    }

    pub fn with_poles(mut self, poles: Vec<Pole>) -> Self {
        self.poles = poles;
        self
    }

    pub fn zero() -> Self {
        Self::holomorphic(|_| C64::new(0.0, 0.0))
    }

    pub fn is_conjugate(&self) -> bool {
        self.conjugate
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// Holomorphic coefficient `a(w)` (before conjugation).
    pub fn coefficient_at(&self, w: C64) -> C64 {
        (self.coefficient)(w)
    }

    /// Coefficient of `dw` (holomorphic) or of `dw̄` (antiholomorphic).
    pub fn eval(&self, w: C64) -> C64 {
        let a = (self.coefficient)(w);
        if self.conjugate {
            a.conj()
        } else {
            a
        }
    }

    pub fn conjugated(&self) -> Self {
        Self { coefficient: self.coefficient.clone(), conjugate: !self.conjugate, poles: self.poles.clone() }
    }

    /// Pull-back `f^*`: `a(f(ζ)) f'(ζ) dζ` (and its conjugate).
    pub fn pullback(&self, map: &ConformalMap<f64>) -> Self {
        let a = self.coefficient.clone();
        let map = map.clone();
        Self {
            coefficient: Arc::new(move |zeta| {
                let (w, dw) = map.value_and_derivative(zeta);
                a(w) * dw
            }),
            conjugate: self.conjugate,
            poles: Vec::new(),
        }
    }

    /// `s · self`; for antiholomorphic forms `s` multiplies `conj(a) dw̄`.
    pub fn scaled(&self, s: C64) -> Self {
        let a = self.coefficient.clone();
        let s = if self.conjugate { s.conj() } else { s };
        Self { coefficient: Arc::new(move |w| a(w) * s), conjugate: self.conjugate, poles: self.poles.clone() }
    }

    pub fn add(&self, other: &OneForm) -> Result<Self> {
        if self.conjugate != other.conjugate {
            return Err(Error::Invalid("cannot add holomorphic and antiholomorphic forms".into()));
        }
        let (a, b) = (self.coefficient.clone(), other.coefficient.clone());
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Ok(Self { coefficient: Arc::new(move |w| a(w) + b(w)), conjugate: self.conjugate, poles })
    }

    pub fn sub(&self, other: &OneForm) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// `Σ c_i ω_i` over holomorphic forms.
    pub fn combination(terms: &[(C64, OneForm)]) -> Result<Self> {
        terms.iter().try_fold(Self::zero(), |acc, (c, f)| acc.add(&f.scaled(*c)))
    }
}

impl FormCoefficients<f64> for OneForm {
    fn coefficient(&self, w: C64) -> C64 {
        (self.coefficient)(w)
    }

    fn is_antiholomorphic(&self) -> bool {
        self.conjugate
    }
}

/// Which homology class a [`Cycle`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    A(usize),
    B(usize),
    Boundary(usize),
}

/// Sampled closed path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CyclePath {
    Circle(CircleContour<f64>),
    /// Straight segment closing up on the torus (`end − start` is a lattice
    /// vector); integrated with the periodic trapezoid rule.
    Segment { start: C64, end: C64, nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub kind: CycleKind,
    pub path: CyclePath,
}

impl Cycle {
    pub fn points(&self) -> Vec<C64> {
        match self.path {
            CyclePath::Circle(c) => (0..c.nodes()).map(|j| c.point(j)).collect(),
            CyclePath::Segment { start, end, nodes } => {
                (0..nodes).map(|j| start + (end - start) * (j as f64 / nodes as f64)).collect()
            }
        }
    }
}

/// `∫_cycle form`.
pub fn period(form: &OneForm, cycle: &Cycle) -> Result<C64> {
    let points = cycle.points();
    let spacing = match cycle.path {
        CyclePath::Circle(c) => c.radius() * std::f64::consts::TAU / c.nodes() as f64,
        CyclePath::Segment { start, end, nodes } => (end - start).norm() / nodes as f64,
    };
    for pole in form.poles() {
        if let Some(node) = points.iter().position(|p| (p - pole.at).norm() < 1e-9 * spacing.max(1.0)) {
            return Err(Error::PoleOnPath { node });
        }
    }
    let raw = match cycle.path {
        CyclePath::Circle(c) => circle_integral(|w| form.coefficient_at(w), &c).map_err(|e| match e {
            Error::NonFinite { node, .. } => Error::PoleOnPath { node },
            other => other,
        })?,
        CyclePath::Segment { start, end, nodes } => {
            let step = (end - start) / nodes as f64;
            let mut acc = C64::new(0.0, 0.0);
            for (j, w) in points.iter().enumerate() {
                let v = form.coefficient_at(*w);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::PoleOnPath { node: j });
                }
                acc += v * step;
            }
            acc
        }
    };
    Ok(if form.is_conjugate() { raw.conj() } else { raw })
}
