//! Cap maps `f: 𝔻 → Ω` and disjoint families of them.
//!
//! Only families with a documented injectivity range are offered:
//!
//! | kind | map | injective for |
//! |------|-----|---------------|
//! | affine | `b + sζ` | `s ≠ 0` |
//! | joukowski-ellipse | `b + sζ/(1 − aζ²)` (reciprocal of the Joukowski ellipse map) | `|a| < 1` |
//! | polynomial-perturbation | `b + s(ζ + Σ c_j ζ^j)` | `Σ j|c_j| < 1` |
//! | moebius-composed | `(A f + B)/(C f + D)` | pole of the Möbius map outside `cl f(𝔻)` |
//!
//! All boundaries are analytic curves, hence quasicircles.

use num_complex::Complex;

use crate::error::{pair, Error, Result};
use crate::numerics::{extract_taylor, lit, unit_root, winding_number, PowerSeries, Real};

const SEED_TABLE: usize = 64;
const NEWTON_STEPS: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
const BOUNDARY_SAMPLES: usize = 256;

/// Parametrized family a [`ConformalMap`] belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind<T> {
    Affine { center: Complex<T>, scale: Complex<T> },
    JoukowskiEllipse { center: Complex<T>, scale: Complex<T>, a: Complex<T> },
    /// `coefficients[i]` multiplies `ζ^{i+2}`.
    PolynomialPerturbation { center: Complex<T>, scale: Complex<T>, coefficients: Vec<Complex<T>> },
    MoebiusComposed { moebius: [Complex<T>; 4], inner: Box<MapKind<T>> },
}

impl<T: Real> MapKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Affine { .. } => "affine",
            MapKind::JoukowskiEllipse { .. } => "joukowski-ellipse",
            MapKind::PolynomialPerturbation { .. } => "polynomial-perturbation",
            MapKind::MoebiusComposed { .. } => "moebius-composed",
        }
    }

    fn value_and_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let one = Complex::new(T::one(), T::zero());
        match self {
            MapKind::Affine { center, scale } => (center + scale * z, *scale),
            MapKind::JoukowskiEllipse { center, scale, a } => {
                let den = one - a * z * z;
                let v = z / den;
                let d = (one + a * z * z) / (den * den);
                (center + scale * v, scale * d)
            }
            MapKind::PolynomialPerturbation { center, scale, coefficients } => {
                // Horner on z + Σ c_j z^j together with its derivative.
                let mut p = Complex::new(T::zero(), T::zero());
                let mut dp = Complex::new(T::zero(), T::zero());
                for c in coefficients.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + c;
                }
                // p(z) = Σ c_{j} z^{j-2}; value z + z² p, derivative 1 + 2z p + z² p'.
                let v = z + z * z * p;
                let d = one + z * p * lit::<T>(2.0) + z * z * dp;
                (center + scale * v, scale * d)
            }
            MapKind::MoebiusComposed { moebius: [a, b, c, d], inner } => {
                let (u, du) = inner.value_and_derivative(z);
                let den = c * u + d;
                ((a * u + b) / den, (a * d - b * c) / (den * den) * du)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let tiny = lit::<T>(1e-300f64.max(f64::MIN_POSITIVE));
        match self {
            MapKind::Affine { scale, .. } => {
                if scale.norm() <= tiny {
                    return Err(Error::InvalidParameter("affine scale must be nonzero".into()));
                }
            }
            MapKind::JoukowskiEllipse { scale, a, .. } => {
                if scale.norm() <= tiny {
                    return Err(Error::InvalidParameter("joukowski-ellipse scale must be nonzero".into()));
                }
                if a.norm() >= T::one() {
                    return Err(Error::InvalidParameter(format!(
                        "joukowski-ellipse parameter must satisfy |a| < 1, got |a| = {}",
                        a.norm()
                    )));
                }
            }
            MapKind::PolynomialPerturbation { scale, coefficients, .. } => {
                if scale.norm() <= tiny {
                    return Err(Error::InvalidParameter(
                        "polynomial-perturbation scale must be nonzero".into(),
                    ));
                }
                let bound = coefficients
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, c)| acc + c.norm() * lit::<T>((i + 2) as f64));
                if bound >= T::one() {
                    return Err(Error::InvalidParameter(format!(
                        "polynomial-perturbation needs Σ j|c_j| < 1, got {bound}"
                    )));
                }
            }
            MapKind::MoebiusComposed { moebius: [a, b, c, d], inner } => {
                inner.validate()?;
                if (a * d - b * c).norm() <= tiny {
                    return Err(Error::InvalidParameter("Möbius determinant vanishes".into()));
                }
                if c.norm() > tiny {
                    let pole = -d / c;
                    let path: Vec<_> = (0..BOUNDARY_SAMPLES)
                        .map(|j| inner.value_and_derivative(unit_root(j, BOUNDARY_SAMPLES)).0)
                        .collect();
                    let gap = path.iter().fold(T::infinity(), |m, p| m.min((p - pole).norm()));
                    if winding_number(&path, pole) != 0 || gap < lit::<T>(1e-6) {
                        return Err(Error::InvalidParameter(
                            "Möbius pole lies in the closure of the inner cap".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Analytic injection of the unit disk into a chart of the target surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap<T> {
    kind: MapKind<T>,
    center_image: Complex<T>,
    taylor: PowerSeries<T>,
    seeds: Vec<(Complex<T>, Complex<T>)>,
}

impl<T: Real> ConformalMap<T> {
    /// Validates parameters, checks `f' ≠ 0` on a 32×64 polar grid and spot-checks
    /// injectivity on boundary samples.
    pub fn new(kind: MapKind<T>) -> Result<Self> {
        kind.validate()?;
        let zero = Complex::new(T::zero(), T::zero());
        let center_image = kind.value_and_derivative(zero).0;

        let scale = (0..BOUNDARY_SAMPLES)
            .map(|j| (kind.value_and_derivative(unit_root(j, BOUNDARY_SAMPLES)).0 - center_image).norm())
            .fold(T::zero(), T::max);
        for i in 0..32 {
            let r = lit::<T>((i as f64 + 0.5) / 32.0);
            for j in 0..64 {
                let z = unit_root::<T>(j, 64) * r;
                let d = kind.value_and_derivative(z).1;
                if !(d.norm() > lit::<T>(1e-12) * scale) {
                    return Err(Error::InvalidParameter(format!(
                        "{} map has vanishing derivative near {:?}",
                        kind.name(),
                        pair(z)
                    )));
                }
            }
        }
        let boundary: Vec<_> = (0..BOUNDARY_SAMPLES)
            .map(|j| kind.value_and_derivative(unit_root(j, BOUNDARY_SAMPLES)).0)
            .collect();
        for i in 0..boundary.len() {
            for j in i + 1..boundary.len() {
                if (boundary[i] - boundary[j]).norm() <= lit::<T>(1e-9) * scale {
                    return Err(Error::InvalidParameter(format!(
                        "{} map is not injective on the boundary sample",
                        kind.name()
                    )));
                }
            }
        }

        let mut seeds = Vec::with_capacity(SEED_TABLE * SEED_TABLE);
        for i in 0..SEED_TABLE {
            let r = lit::<T>(i as f64 / SEED_TABLE as f64);
            for j in 0..SEED_TABLE {
                let z = unit_root::<T>(j, SEED_TABLE) * r;
                seeds.push((z, kind.value_and_derivative(z).0));
            }
        }
        let taylor = extract_taylor(|z| kind.value_and_derivative(z).0, zero, lit::<T>(0.5), 16)?;
        Ok(Self { kind, center_image, taylor, seeds })
    }

    pub fn affine(center: Complex<T>, scale: Complex<T>) -> Result<Self> {
        Self::new(MapKind::Affine { center, scale })
    }

    pub fn joukowski_ellipse(center: Complex<T>, scale: Complex<T>, a: Complex<T>) -> Result<Self> {
        Self::new(MapKind::JoukowskiEllipse { center, scale, a })
    }

    pub fn polynomial(center: Complex<T>, scale: Complex<T>, coefficients: Vec<Complex<T>>) -> Result<Self> {
        Self::new(MapKind::PolynomialPerturbation { center, scale, coefficients })
    }

    /// `g ∘ self` for the Möbius map `g(u) = (a u + b)/(c u + d)`.
    pub fn moebius_composed(&self, moebius: [Complex<T>; 4]) -> Result<Self> {
        Self::new(MapKind::MoebiusComposed { moebius, inner: Box::new(self.kind.clone()) })
    }

    /// `self + shift`.
    pub fn translated(&self, shift: Complex<T>) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        self.moebius_composed([one, shift, zero, one])
    }

    pub fn kind(&self) -> &MapKind<T> {
        &self.kind
    }

    /// `f(0)`, the distinguished point of the cap.
    pub fn center_image(&self) -> Complex<T> {
        self.center_image
    }

    /// Taylor data of `f` about 0 (radius 0.5, order 16).
    pub fn taylor(&self) -> &PowerSeries<T> {
        &self.taylor
    }

    fn check_disk(zeta: Complex<T>) -> Result<()> {
        if zeta.norm() < T::one() {
            Ok(())
        } else {
            Err(Error::OutsideDisk { point: pair(zeta) })
        }
    }

    pub fn evaluate(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        Self::check_disk(zeta)?;
        Ok(self.eval_unchecked(zeta))
    }

    pub fn derivative(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        Self::check_disk(zeta)?;
        Ok(self.derivative_unchecked(zeta))
    }

    /// `f(ζ)` without the `|ζ| < 1` guard; every built-in family extends
    /// analytically across the unit circle.
    pub fn eval_unchecked(&self, zeta: Complex<T>) -> Complex<T> {
        self.kind.value_and_derivative(zeta).0
    }

    pub fn derivative_unchecked(&self, zeta: Complex<T>) -> Complex<T> {
        self.kind.value_and_derivative(zeta).1
    }

    pub fn value_and_derivative(&self, zeta: Complex<T>) -> (Complex<T>, Complex<T>) {
        self.kind.value_and_derivative(zeta)
    }

    /// Boundary curve `f(e^{iθ_j})`, `j < nodes`.
    pub fn boundary(&self, nodes: usize) -> Vec<Complex<T>> {
        (0..nodes).map(|j| self.eval_unchecked(unit_root(j, nodes))).collect()
    }

    /// `max |f(e^{iθ}) − f(0)|` over a boundary sample.
    pub fn outer_radius(&self) -> T {
        self.boundary(BOUNDARY_SAMPLES)
            .into_iter()
            .map(|w| (w - self.center_image).norm())
            .fold(T::zero(), T::max)
    }

    /// Whether `w` lies in the closed image of the disk (boundary polygon test).
    pub fn contains(&self, w: Complex<T>) -> bool {
        winding_number(&self.boundary(BOUNDARY_SAMPLES), w) != 0
    }

    /// Nearest entry of the forward table `(ζ, f(ζ))`.
    pub fn seed_for(&self, w: Complex<T>) -> Complex<T> {
        self.seeds
            .iter()
            .fold((T::infinity(), self.seeds[0].0), |(best, z), (zeta, fz)| {
                let d = (fz - w).norm();
                if d < best {
                    (d, *zeta)
                } else {
                    (best, z)
                }
            })
            .1
    }

    /// `f⁻¹(w)` by Newton iteration seeded from the forward table.
    pub fn invert(&self, w: Complex<T>) -> Result<Complex<T>> {
        self.invert_from(w, self.seed_for(w))
    }

    /// `f⁻¹(w)` by Newton iteration from `seed` (at most 50 steps).
    pub fn invert_from(&self, w: Complex<T>, seed: Complex<T>) -> Result<Complex<T>> {
        let tol = lit::<T>(NEWTON_TOL) * T::one().max(w.norm());
        let mut z = seed;
        let mut residual = T::infinity();
        for _ in 0..NEWTON_STEPS {
            let (v, d) = self.kind.value_and_derivative(z);
            let r = v - w;
            residual = r.norm();
            if residual < tol {
                return Ok(z);
            }
            z = z - r / d;
            if !(z.re.is_finite() && z.im.is_finite()) {
                break;
            }
        }
        let (v, _) = self.kind.value_and_derivative(z);
        let last = (v - w).norm();
        if last < tol {
            return Ok(z);
        }
        Err(Error::NoConvergence { iterate: pair(z), residual: crate::numerics::to_f64(residual.min(last)) })
    }
}

/// Ordered family of caps with pairwise disjoint closures.
#[derive(Debug, Clone, PartialEq)]
pub struct CapFamily<T> {
    maps: Vec<ConformalMap<T>>,
    separation: T,
}

impl<T: Real> CapFamily<T> {
    /// Rejects families whose closed images intersect or come closer than
    /// `separation` (checked on boundary samples).
    pub fn new(maps: Vec<ConformalMap<T>>, separation: T) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidParameter("a cap family needs at least one cap".into()));
        }
        let boundaries: Vec<_> = maps.iter().map(|m| m.boundary(BOUNDARY_SAMPLES)).collect();
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                let apart = boundaries[j].iter().all(|p| winding_number(&boundaries[i], *p) == 0)
                    && boundaries[i].iter().all(|p| winding_number(&boundaries[j], *p) == 0);
                let gap = boundaries[i]
                    .iter()
                    .flat_map(|p| boundaries[j].iter().map(move |q| (p - q).norm()))
                    .fold(T::infinity(), T::min);
                if !apart || gap < separation {
                    return Err(Error::CapOverlap { first: i, second: j });
                }
            }
        }
        Ok(Self { maps, separation })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[ConformalMap<T>] {
        &self.maps
    }

    pub fn get(&self, k: usize) -> Result<&ConformalMap<T>> {
        self.maps.get(k).ok_or(Error::CapIndex { index: k, caps: self.maps.len() })
    }

    pub fn separation(&self) -> T {
        self.separation
    }

    /// Index of the cap whose closure contains `w`.
    pub fn containing(&self, w: Complex<T>) -> Option<usize> {
        self.maps.iter().position(|m| m.contains(w))
    }
}
