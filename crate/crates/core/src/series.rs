//! Faber–Tietz series of a holomorphic form on the capped surface.
//!
//! The decomposition `ν = Σ ε_k β_k + Σ c_j γ_j + Σ h^k_m α^m_k` is computed
//! in three steps: boundary periods give `ε`, the a- and b-periods of what is
//! left give `c`, and the rest is projected onto the Faber–Tietz forms by a
//! Gram least-squares solve.
//!
//! L² pairings over the complement of the caps are evaluated through Stokes'
//! theorem. For holomorphic `u = dF_u`, `v` with vanishing boundary periods
//!
//! ```text
//! (u, v) = 2∬ a_u ā_v dA = −2π Σ_caps Σ_{n≠0} û_n conj(v̂_n) / n
//!                          + i [A_u conj(B_v) − B_u conj(A_v)]   (torus)
//! ```
//!
//! where `û_n` are the Fourier coefficients of `u` on each cap boundary,
//! parametrized counter-clockwise by `θ ↦ f_k(e^{iθ})`, and `A, B` are the
//! periods over the edges of the fundamental parallelogram. The rule is
//! spectrally accurate for forms that continue analytically across the cap
//! boundaries.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faber::{BasisTag, FaberEvaluator};
use crate::numerics::{fourier_coefficients, least_squares, HermitianMatrix};
use crate::surface::{period, Cycle, CyclePath, OneForm, Surface};
use crate::C64;

/// Agreement demanded between two representative circles of a boundary class.
pub const PERIOD_TOLERANCE: f64 = 1e-9;
/// Slack allowed before a residual increase is reported.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-10;

/// A holomorphic form on the complement of the caps, to be expanded.
#[derive(Debug, Clone)]
pub struct TargetForm {
    pub form: OneForm,
    pub description: String,
}

impl TargetForm {
    pub fn new(form: OneForm, description: impl Into<String>) -> Result<Self> {
        if form.is_conjugate() {
            return Err(Error::Invalid("target forms must be holomorphic".into()));
        }
        Ok(Self { form, description: description.into() })
    }

    /// `−π K(w, a) dw`: on the sphere `dw / (w − a)²`, on the torus its
    /// elliptic analogue. `a` must lie inside a cap.
    pub fn double_pole(surface: &Surface, a: C64) -> Result<Self> {
        if surface.cap_containing(a).is_none() {
            return Err(Error::InvalidParameter(format!("double-pole location {a} must lie inside a cap")));
        }
        let s = surface.clone();
        let form = OneForm::holomorphic(move |w| -PI * s.kernel_unchecked(w, a));
        Self::new(form, format!("double pole at {a}"))
    }
}

/// Options of [`project_faber`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Truncation orders for the residual history; the largest is `M`.
    pub truncations: Vec<u32>,
    /// Samples per cap boundary.
    pub boundary_nodes: usize,
    /// Samples per parallelogram edge (torus).
    pub cycle_nodes: usize,
}

impl SeriesOptions {
    pub fn up_to(order: u32) -> Self {
        Self { truncations: vec![order], ..Self::default() }
    }

    pub fn order(&self) -> u32 {
        self.truncations.iter().copied().max().unwrap_or(0)
    }
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { truncations: vec![5, 10, 20, 40], boundary_nodes: 256, cycle_nodes: 256 }
    }
}

/// Coefficients of one truncated projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub order: u32,
    pub l2_residual: f64,
    /// `h[m − 1][k]`.
    pub h: Vec<Vec<C64>>,
    pub condition: f64,
    pub regularized: bool,
}

/// Evaluators of all Faber–Tietz forms of a surface.
#[derive(Debug, Clone)]
pub struct FaberBasis {
    surface: Arc<Surface>,
    evaluators: Vec<Arc<FaberEvaluator>>,
}

impl FaberBasis {
    pub fn new(surface: Arc<Surface>) -> Result<Self> {
        let evaluators = (0..surface.cap_count())
            .map(|k| FaberEvaluator::new(surface.clone(), k).map(Arc::new))
            .collect::<Result<_>>()?;
        Ok(Self { surface, evaluators })
    }

    pub fn surface(&self) -> &Arc<Surface> {
        &self.surface
    }

    pub fn evaluator(&self, k: usize) -> Result<&Arc<FaberEvaluator>> {
        self.evaluators.get(k).ok_or(Error::CapIndex { index: k, caps: self.evaluators.len() })
    }

    /// `values[k][m − 1] = α^m_k(z)`.
    pub fn eval_all(&self, z: C64, order: u32) -> Result<Vec<Vec<C64>>> {
        self.evaluators.iter().map(|e| e.eval_orders(z, order)).collect()
    }
}

/// Result of [`project_faber`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesDecomposition {
    /// `ε_k` for all `n` caps; the last is determined by the others.
    pub epsilon: Vec<C64>,
    /// Holomorphic cycle coefficients (length `g`).
    pub c: Vec<C64>,
    /// Antiholomorphic cycle coefficients, for diagnostics.
    pub d: Vec<C64>,
    /// `h[m − 1][k]` at the largest truncation.
    pub h: Vec<Vec<C64>>,
    pub order: u32,
    pub residual_history: Vec<Truncation>,
    pub gram_condition: f64,
    pub regularized: bool,
    #[serde(skip)]
    basis: Option<FaberBasis>,
}

impl SeriesDecomposition {
    pub fn basis(&self) -> Option<&FaberBasis> {
        self.basis.as_ref()
    }

    pub fn truncation(&self, order: u32) -> Option<&Truncation> {
        self.residual_history.iter().find(|t| t.order == order)
    }

    pub fn residual(&self) -> f64 {
        self.residual_history.last().map_or(f64::NAN, |t| t.l2_residual)
    }

    /// `dz` coefficient of the partial sum of order `order` at `z`.
    pub fn partial_sum(&self, z: C64, order: u32) -> Result<C64> {
        let basis = self.basis.as_ref().ok_or_else(|| Error::Invalid("decomposition carries no basis".into()))?;
        let trunc = self
            .truncation(order)
            .ok_or_else(|| Error::InvalidParameter(format!("no truncation of order {order} was computed")))?;
        let s = basis.surface();
        let mut total = C64::new(0.0, 0.0);
        let n = s.cap_count();
        for k in 0..n.saturating_sub(1) {
            total += self.epsilon[k] * s.beta_form(k)?.eval(z);
        }
        for (cj, g) in self.c.iter().zip(s.gamma_basis()) {
            total += cj * g.eval(z);
        }
        if order > 0 {
            let values = basis.eval_all(z, order)?;
            for (m, row) in trunc.h.iter().enumerate() {
                for (k, h) in row.iter().enumerate() {
                    total += h * values[k][m];
                }
            }
        }
        Ok(total)
    }

    /// Flattened coefficient list `(tag, value)` (ε over `k < n − 1`).
    pub fn coefficients(&self) -> Vec<(BasisTag, C64)> {
        let n = self.epsilon.len();
        let mut out: Vec<(BasisTag, C64)> =
            self.epsilon.iter().take(n.saturating_sub(1)).enumerate().map(|(k, e)| (BasisTag::Beta(k), *e)).collect();
        out.extend(self.c.iter().enumerate().map(|(j, c)| (BasisTag::Gamma(j), *c)));
        for (m, row) in self.h.iter().enumerate() {
            for (k, h) in row.iter().enumerate() {
                out.push((BasisTag::Alpha { cap: k, m: m as u32 + 1 }, *h));
            }
        }
        out
    }
}

/// `ε_k = (1/2πi) ∫_{∂_k} ν`, checked on two circles per cap.
pub fn boundary_coefficients(target: &TargetForm, surface: &Surface) -> Result<Vec<C64>> {
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    (0..surface.cap_count())
        .map(|k| {
            let [inner, outer] = surface.boundary_cycles(k)?;
            let (p, q) = (period(&target.form, &inner)?, period(&target.form, &outer)?);
            let difference = (p - q).norm();
            let tolerance = PERIOD_TOLERANCE * p.norm().max(1.0);
            if difference > tolerance {
                return Err(Error::QuadratureDisagreement { difference, tolerance });
            }
            Ok(q / two_pi_i)
        })
        .collect()
}

/// Splits the a/b-periods `(A, B)` of a form with vanishing boundary periods
/// as `A = c + d`, `B = τc + τ̄d`; empty on the sphere.
pub fn cycle_coefficients(form: &OneForm, surface: &Surface) -> Result<(Vec<C64>, Vec<C64>)> {
    let Some(lattice) = surface.lattice() else {
        return Ok((Vec::new(), Vec::new()));
    };
    for k in 0..surface.cap_count() {
        let [_, outer] = surface.boundary_cycles(k)?;
        let p = period(form, &outer)?;
        if p.norm() > 1e-8 * form_scale(form, &outer).max(1.0) {
            return Err(Error::Invalid(format!("boundary period {p:e} around cap {k} does not vanish")));
        }
    }
    let (a_cycle, b_cycle) = (surface.a_cycle().expect("torus"), surface.b_cycle().expect("torus"));
    let (a, b) = (period(form, &a_cycle)?, period(form, &b_cycle)?);
    Ok(split_periods(lattice.tau(), a, b))
}

fn split_periods(tau: C64, a: C64, b: C64) -> (Vec<C64>, Vec<C64>) {
    let det = tau - tau.conj();
    assert!(det.norm() > 0.0, "Im tau > 0 makes the period system regular");
    let c = (b - tau.conj() * a) / det;
    (vec![c], vec![a - c])
}

fn form_scale(form: &OneForm, cycle: &Cycle) -> f64 {
    cycle.points().iter().map(|w| form.eval(*w).norm()).fold(0.0, f64::max)
}

/// Spectral representation of a form: Fourier data on every cap boundary
/// and parallelogram periods.
#[derive(Debug, Clone, PartialEq)]
struct Spectral {
    caps: Vec<Vec<C64>>,
    a: C64,
    b: C64,
}

impl Spectral {
    fn combine(&self, s: C64, other: &Spectral) -> Spectral {
        Spectral {
            caps: self.caps.iter().zip(&other.caps).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + s * q).collect()).collect(),
            a: self.a + s * other.a,
            b: self.b + s * other.b,
        }
    }
}

/// `(u, v)` from spectral data.
fn pairing(u: &Spectral, v: &Spectral, torus: bool) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for (uc, vc) in u.caps.iter().zip(&v.caps) {
        let n = uc.len() as i64;
        for (idx, (p, q)) in uc.iter().zip(vc).enumerate() {
            let freq = if (idx as i64) <= n / 2 { idx as i64 } else { idx as i64 - n };
            if freq != 0 {
                total -= 2.0 * PI * p * q.conj() / freq as f64;
            }
        }
    }
    if torus {
        total += C64::new(0.0, 1.0) * (u.a * v.b.conj() - u.b * v.a.conj());
    }
    total
}

/// Sample points of the spectral rule.
struct Layout {
    /// `(w, dw/dθ)` on each cap boundary.
    caps: Vec<Vec<(C64, C64)>>,
    /// `(w, Δw)` on the a- and b-edges.
    a_edge: Vec<(C64, C64)>,
    b_edge: Vec<(C64, C64)>,
}

impl Layout {
    fn new(surface: &Surface, options: &SeriesOptions) -> Result<Self> {
        let n = options.boundary_nodes;
        if n < 32 {
            return Err(Error::InvalidParameter(format!("boundary nodes must be at least 32, got {n}")));
        }
        let caps = surface
            .caps()
            .maps()
            .iter()
            .map(|map| {
                (0..n)
                    .map(|j| {
                        let eta = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                        let (w, dw) = map.value_and_derivative(eta);
                        (w, dw * C64::new(0.0, 1.0) * eta)
                    })
                    .collect()
            })
            .collect();
        let edge = |cycle: Option<Cycle>| match cycle.map(|c| c.path) {
            Some(CyclePath::Segment { start, end, .. }) => {
                let m = options.cycle_nodes;
                let step = (end - start) / m as f64;
                (0..m).map(|j| (start + step * j as f64, step)).collect()
            }
            _ => Vec::new(),
        };
        Ok(Self { caps, a_edge: edge(surface.a_cycle()), b_edge: edge(surface.b_cycle()) })
    }

    fn points(&self) -> Vec<C64> {
        self.caps.iter().flatten().chain(&self.a_edge).chain(&self.b_edge).map(|(w, _)| *w).collect()
    }

    /// Spectral data from values at [`Layout::points`] (in that order).
    fn spectral(&self, values: &[C64]) -> Spectral {
        let mut offset = 0;
        let mut caps = Vec::with_capacity(self.caps.len());
        for cap in &self.caps {
            let g: Vec<C64> = cap.iter().zip(&values[offset..]).map(|((_, dw), a)| a * dw).collect();
            caps.push(fourier_coefficients(&g));
            offset += cap.len();
        }
        let mut edge = |samples: &[(C64, C64)]| {
            let s: C64 = samples.iter().zip(&values[offset..]).map(|((_, dw), a)| a * dw).sum();
            offset += samples.len();
            s
        };
        let a = edge(&self.a_edge);
        let b = edge(&self.b_edge);
        Spectral { caps, a, b }
    }
}

fn finite(values: &[C64], what: &str) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(node) => Err(Error::Invalid(format!("{what} is not finite at sample {node}"))),
        None => Ok(()),
    }
}

/// Faber–Tietz decomposition of `target` with truncations `options.truncations`.
pub fn project_faber(target: &TargetForm, surface: &Surface, options: &SeriesOptions) -> Result<SeriesDecomposition> {
    let basis = FaberBasis::new(Arc::new(surface.clone()))?;
    project_with_basis(target, &basis, options)
}

/// [`project_faber`] with prebuilt evaluators.
pub fn project_with_basis(target: &TargetForm, basis: &FaberBasis, options: &SeriesOptions) -> Result<SeriesDecomposition> {
    let surface = basis.surface().as_ref();
    let order = options.order();
    if order == 0 {
        return Err(Error::InvalidParameter("truncation order must be positive".into()));
    }
    let n = surface.cap_count();
    let torus = surface.lattice().is_some();

    let epsilon = boundary_coefficients(target, surface)?;
    let mut nu_beta = target.form.clone();
    for k in 0..n.saturating_sub(1) {
        nu_beta = nu_beta.sub(&surface.beta_form(k)?.scaled(epsilon[k]))?;
    }
    let (c, d) = cycle_coefficients(&nu_beta, surface)?;
    let mut nu0 = nu_beta;
    for (cj, g) in c.iter().zip(surface.gamma_basis()) {
        nu0 = nu0.sub(&g.scaled(*cj))?;
    }

    let layout = Layout::new(surface, options)?;
    let points = layout.points();
    let target_values: Vec<C64> = points.par_iter().map(|w| nu0.eval(*w)).collect();
    finite(&target_values, "target form")?;
    let target_spec = layout.spectral(&target_values);

    // table[p][k][m − 1]
    let table: Vec<Vec<Vec<C64>>> = points.par_iter().map(|w| basis.eval_all(*w, order)).collect::<Result<_>>()?;
    let dim = order as usize * n;
    let basis_spec: Vec<Spectral> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let (m, k) = (i / n, i % n);
            let values: Vec<C64> = table.iter().map(|row| row[k][m]).collect();
            layout.spectral(&values)
        })
        .collect();
    for (i, s) in basis_spec.iter().enumerate() {
        if s.caps.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Invalid(format!("basis element {i} is not finite on the sample")));
        }
    }

    let mut gram = HermitianMatrix::<f64>::zeros(dim);
    for i in 0..dim {
        for j in 0..=i {
            let v = pairing(&basis_spec[i], &basis_spec[j], torus);
            gram[(j, i)] = v;
            gram[(i, j)] = v.conj();
        }
        gram[(i, i)] = C64::new(gram[(i, i)].re, 0.0);
    }
    let rhs: Vec<C64> = basis_spec.iter().map(|b| pairing(&target_spec, b, torus)).collect();

    let mut orders: Vec<u32> = options.truncations.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut history = Vec::with_capacity(orders.len());
    for &m_trunc in &orders {
        let size = m_trunc as usize * n;
        let solution = least_squares(&gram.leading(size), &rhs[..size])?;
        let mut residual = target_spec.clone();
        for (i, x) in solution.x.iter().enumerate() {
            residual = residual.combine(-x, &basis_spec[i]);
        }
        let l2 = pairing(&residual, &residual, torus).re.max(0.0).sqrt();
        let h = solution.x.chunks(n).map(|row| row.to_vec()).collect();
        history.push(Truncation {
            order: m_trunc,
            l2_residual: l2,
            h,
            condition: solution.condition,
            regularized: solution.flagged(),
        });
    }
    let scale = pairing(&target_spec, &target_spec, torus).re.max(0.0).sqrt().max(1.0);
    for pair in history.windows(2) {
        if pair[1].l2_residual > pair[0].l2_residual + MONOTONICITY_TOLERANCE * scale {
            return Err(Error::ResidualIncrease {
                order: pair[1].order as usize,
                previous: pair[0].l2_residual,
                current: pair[1].l2_residual,
            });
        }
    }
    let last = history.last().expect("at least one truncation").clone();
    Ok(SeriesDecomposition {
        epsilon,
        c,
        d,
        h: last.h.clone(),
        order,
        gram_condition: last.condition,
        regularized: last.regularized,
        residual_history: history,
        basis: Some(basis.clone()),
    })
}

/// `sup_z |ν(z) − S_M(z)|` over `points`, each at distance `≥ margin` from
/// the caps.
pub fn uniform_error(target: &TargetForm, decomposition: &SeriesDecomposition, points: &[C64], margin: f64, order: u32) -> Result<f64> {
    let basis = decomposition.basis().ok_or_else(|| Error::Invalid("decomposition carries no basis".into()))?;
    let surface = basis.surface();
    points
        .par_iter()
        .map(|z| {
            let dist = surface.distance_to_caps(*z);
            if surface.cap_containing(*z).is_some() || dist < margin {
                return Err(Error::InvalidParameter(format!(
                    "point {z} is within {margin} of a cap (distance {dist:.3e})"
                )));
            }
            Ok((target.form.eval(*z) - decomposition.partial_sum(*z, order)?).norm())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Biholomorphism of the ambient surface used by [`invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transport {
    /// `z ↦ (az + b)/(cz + d)` on the sphere.
    Moebius([C64; 4]),
    /// `z ↦ z + s` (sphere or torus).
    Translation(C64),
}

impl Transport {
    pub fn apply(&self, z: C64) -> C64 {
        match *self {
            Transport::Moebius([a, b, c, d]) => (a * z + b) / (c * z + d),
            Transport::Translation(s) => z + s,
        }
    }

    fn inverse(&self) -> Transport {
        match *self {
            Transport::Moebius([a, b, c, d]) => Transport::Moebius([d, -b, -c, a]),
            Transport::Translation(s) => Transport::Translation(-s),
        }
    }

    fn derivative(&self, z: C64) -> C64 {
        match *self {
            Transport::Moebius([a, b, c, d]) => (a * d - b * c) / ((c * z + d) * (c * z + d)),
            Transport::Translation(_) => C64::new(1.0, 0.0),
        }
    }

    /// Image of a point on the Riemann sphere (`None` is `∞`).
    fn apply_extended(&self, z: Option<C64>) -> Option<C64> {
        match (*self, z) {
            (Transport::Translation(_), None) => None,
            (Transport::Moebius([a, _, c, _]), None) => (c.norm() > 0.0).then(|| a / c),
            (t, Some(z)) => match t {
                Transport::Moebius([_, _, c, d]) if (c * z + d).norm() == 0.0 => None,
                _ => Some(t.apply(z)),
            },
        }
    }

    /// The surface with every datum moved by the transport.
    pub fn transport_surface(&self, surface: &Surface) -> Result<Surface> {
        let caps = surface
            .caps()
            .maps()
            .iter()
            .map(|m| match *self {
                Transport::Moebius(g) => m.moebius_composed(g),
                Transport::Translation(s) => m.translated(s),
            })
            .collect::<Result<Vec<_>>>()?;
        let family = crate::conformal::CapFamily::new(caps, surface.caps().separation())?;
        let w0 = self
            .apply_extended(Some(surface.normalization_point()))
            .ok_or_else(|| Error::InvalidParameter("transport sends w0 to infinity".into()))?;
        match (surface.lattice(), *self) {
            (None, _) => Surface::sphere(family, self.apply_extended(surface.base_point()), w0),
            (Some(l), Transport::Translation(s)) => Surface::torus(
                l.tau(),
                family,
                surface.base_point().expect("torus base point") + s,
                w0,
                surface.corner() + s,
                surface.margin(),
            ),
            (Some(_), Transport::Moebius(_)) => {
                Err(Error::InvalidParameter("only translations act on the torus".into()))
            }
        }
    }

    /// `(g⁻¹)^* ν`, the target on the transported surface.
    pub fn transport_form(&self, form: &OneForm) -> OneForm {
        let inv = self.inverse();
        let form = form.clone();
        OneForm::holomorphic(move |w| form.eval(inv.apply(w)) * inv.derivative(w))
    }
}

/// `max |coefficient(ν) − coefficient((g⁻¹)^*ν on g(surface))|`.
pub fn invariance_check(surface: &Surface, transport: Transport, target: &TargetForm, options: &SeriesOptions) -> Result<f64> {
    let moved_surface = transport.transport_surface(surface)?;
    let moved_target = TargetForm::new(transport.transport_form(&target.form), format!("transported {}", target.description))?;
    let a = project_faber(target, surface, options)?;
    let b = project_faber(&moved_target, &moved_surface, options)?;
    let (ca, cb) = (a.coefficients(), b.coefficients());
    if ca.len() != cb.len() {
        return Err(Error::Dimension { expected: ca.len(), got: cb.len() });
    }
    Ok(ca.iter().zip(&cb).map(|((_, x), (_, y))| (x - y).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{CapFamily, ConformalMap};
    use crate::faber::faber_tietz_form;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn identity_sphere() -> Surface {
        let cap = ConformalMap::affine(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        Surface::sphere(CapFamily::new(vec![cap], 0.0).unwrap(), None, c(5.0, 0.0)).unwrap()
    }

    fn joukowski() -> (Surface, ConformalMap<f64>) {
        let cap = ConformalMap::joukowski_ellipse(c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)).unwrap();
        (Surface::sphere(CapFamily::new(vec![cap.clone()], 0.0).unwrap(), None, c(4.0, 4.0)).unwrap(), cap)
    }

    fn two_cap_sphere() -> Surface {
        let a = ConformalMap::affine(c(0.0, 0.0), c(0.3, 0.0)).unwrap();
        let b = ConformalMap::affine(c(1.0, 0.0), c(0.3, 0.0)).unwrap();
        Surface::sphere(CapFamily::new(vec![a, b], 0.1).unwrap(), None, c(3.0, 3.0)).unwrap()
    }

    fn torus() -> Surface {
        let a = ConformalMap::affine(c(0.3, 0.35), c(0.12, 0.0)).unwrap();
        let b = ConformalMap::joukowski_ellipse(c(0.7, 0.7), c(0.12, 0.0), c(0.25, 0.0)).unwrap();
        Surface::torus(c(0.1, 1.05), CapFamily::new(vec![a, b], 0.05).unwrap(), c(0.5, 0.95), c(0.15, 0.8), c(0.0, 0.0), 0.05)
            .unwrap()
    }

    #[test]
    fn identity_norm_of_inverse_square() {
        // ‖z^{−2} dz‖² = 2∬_{|z|>1} |z|^{−4} dA = 2π
        let s = identity_sphere();
        let layout = Layout::new(&s, &SeriesOptions::default()).unwrap();
        let values: Vec<C64> = layout.points().iter().map(|z| 1.0 / (z * z)).collect();
        let spec = layout.spectral(&values);
        assert!((pairing(&spec, &spec, false) - 2.0 * PI).norm() < 1e-12);
    }

    #[test]
    fn basis_element_round_trip() {
        let s = identity_sphere();
        let nu = TargetForm::new(faber_tietz_form(&s, 0, 1).unwrap().form, "alpha 1").unwrap();
        let dec = project_faber(&nu, &s, &SeriesOptions { truncations: vec![1, 4, 8], ..Default::default() }).unwrap();
        assert!((dec.h[0][0] - 1.0).norm() < 1e-10);
        assert!(dec.h[1..].iter().flatten().all(|h| h.norm() < 1e-10));
        assert!(dec.residual() < 1e-10);
        assert!(dec.epsilon[0].norm() < 1e-12);
        let pts = [c(2.0, 0.0), c(0.0, -3.0)];
        assert!(uniform_error(&nu, &dec, &pts, 0.5, 1).unwrap() < 1e-9);
    }

    #[test]
    fn joukowski_double_pole_matches_generating_expansion() {
        let (s, cap) = joukowski();
        let eta_a = c(0.6, 0.0);
        let a = cap.evaluate(eta_a).unwrap();
        let nu = TargetForm::double_pole(&s, a).unwrap();
        let dec = project_faber(&nu, &s, &SeriesOptions::default()).unwrap();
        let res: Vec<f64> = dec.residual_history.iter().map(|t| t.l2_residual).collect();
        assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
        assert!(res[3] < 1e-6, "{res:?}");
        // h_m = η_a^{m−1} / f'(η_a)
        let fp = cap.derivative(eta_a).unwrap();
        for m in 1..=6 {
            let expect = eta_a.powu(m - 1) / fp;
            assert!((dec.h[m as usize - 1][0] - expect).norm() < 1e-7, "m={m}");
        }
    }

    #[test]
    fn boundary_coefficient_examples() {
        let s = two_cap_sphere();
        let beta = TargetForm::new(s.beta_form(0).unwrap(), "beta").unwrap();
        let eps = boundary_coefficients(&beta, &s).unwrap();
        assert!((eps[0] - 1.0).norm() < 1e-12 && (eps[1] + 1.0).norm() < 1e-12);
        let exact = OneForm::holomorphic(|z| -1.0 / (z * z));
        let eps = boundary_coefficients(&TargetForm::new(exact.clone(), "exact").unwrap(), &s).unwrap();
        assert!(eps.iter().all(|e| e.norm() < 1e-12));
        let combo = s.beta_form(0).unwrap().scaled(c(2.0, 0.0)).add(&exact).unwrap();
        let eps = boundary_coefficients(&TargetForm::new(combo, "combo").unwrap(), &s).unwrap();
        assert!((eps[0] - 2.0).norm() < 1e-12);
    }

    #[test]
    fn cycle_coefficient_examples() {
        let t = torus();
        let dw = t.gamma_basis()[0].clone();
        let (cc, dd) = cycle_coefficients(&dw, &t).unwrap();
        assert!((cc[0] - 1.0).norm() < 1e-12 && dd[0].norm() < 1e-12);
        let (cc, dd) = cycle_coefficients(&dw.conjugated(), &t).unwrap();
        assert!(cc[0].norm() < 1e-12 && (dd[0] - 1.0).norm() < 1e-12);
        let l = t.lattice().unwrap();
        let exact = OneForm::holomorphic(move |w| l.kernel(w - c(0.3, 0.35)) - l.kernel(w - c(0.7, 0.7)));
        let (cc, dd) = cycle_coefficients(&exact, &t).unwrap();
        assert!(cc[0].norm() < 1e-10 && dd[0].norm() < 1e-10);
        // a single double pole has periods of antiholomorphic type
        let kernel = OneForm::holomorphic(move |w| l.kernel(w - c(0.3, 0.35)));
        let (cc, dd) = cycle_coefficients(&kernel, &t).unwrap();
        assert!(cc[0].norm() < 1e-10 && dd[0].norm() > 0.1);
        assert!(cycle_coefficients(&dw, &two_cap_sphere()).unwrap().0.is_empty());
    }

    #[test]
    fn torus_non_faber_target() {
        let t = torus();
        let nu = t.beta_form(0).unwrap().add(&t.gamma_basis()[0]).unwrap();
        let dec = project_faber(&TargetForm::new(nu, "beta + gamma").unwrap(), &t, &SeriesOptions::up_to(6)).unwrap();
        assert!((dec.epsilon[0] - 1.0).norm() < 1e-10);
        assert!((dec.c[0] - 1.0).norm() < 1e-10);
        assert!(dec.h.iter().flatten().all(|h| h.norm() < 1e-8));
        assert!(dec.residual() < 1e-8);
    }

    #[test]
    fn faber_periods_are_antiholomorphic_type() {
        let t = torus();
        let a = faber_tietz_form(&t, 1, 2).unwrap();
        let (cc, dd) = cycle_coefficients(&a.form, &t).unwrap();
        assert!(cc[0].norm() < 1e-10, "{cc:?} {dd:?}");
    }

    #[test]
    fn identity_transport_is_exact() {
        let (s, cap) = joukowski();
        let nu = TargetForm::double_pole(&s, cap.evaluate(c(0.5, 0.1)).unwrap()).unwrap();
        let opts = SeriesOptions::up_to(8);
        let dev = invariance_check(&s, Transport::Translation(c(0.0, 0.0)), &nu, &opts).unwrap();
        assert_eq!(dev, 0.0);
    }
}
