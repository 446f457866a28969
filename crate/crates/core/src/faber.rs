//! Faber–Tietz forms `α^m_k`, their principal parts, and the classical
//! Faber polynomials of a single cap on the sphere.
//!
//! Faber–Tietz forms are kept as contour evaluators. One evaluation at `z`
//! samples the reduced Schiffer integral once and returns every order
//! `m ≤ M` through a single FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::conformal::ConformalMap;
use crate::error::{Error, Result};
use crate::numerics::{extract_laurent, winding_number};
use crate::schiffer::{contour_row, CONTOUR_NODES};
use crate::surface::{OneForm, Pole, Surface};
use crate::C64;

/// Contour radius used for points outside the cap.
pub const OUTER_RADIUS: f64 = 0.9;
/// Default expansion radius of [`principal_part`].
pub const DEFAULT_RHO: f64 = 0.5;
/// Default order of the regular head reported by [`principal_part`].
pub const DEFAULT_HEAD: usize = 8;
/// Default cap on `m` for principal-part extraction: the coefficients grow
/// like `ρ^{−m}` and double precision saturates beyond it.
pub const DEFAULT_MAX_ORDER: u32 = 24;
const EXTRA_TAIL: usize = 4;
const INNER_FRACTION: f64 = 0.9;
const MIN_PREIMAGE: f64 = 1e-3;

/// Which term of a Faber–Tietz series a form represents (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisTag {
    Beta(usize),
    Gamma(usize),
    Alpha { cap: usize, m: u32 },
}

impl BasisTag {
    pub fn name(&self) -> &'static str {
        match self {
            BasisTag::Beta(_) => "beta",
            BasisTag::Gamma(_) => "gamma",
            BasisTag::Alpha { .. } => "alpha",
        }
    }
}

/// How a basis element is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Construction {
    ClosedForm,
    /// Reduced Schiffer integral with `nodes` trapezoid points.
    ContourReduction { nodes: usize, outer_radius: f64 },
}

#[derive(Debug, Clone)]
pub struct FaberBasisElement {
    pub tag: BasisTag,
    pub form: OneForm,
    pub construction: Construction,
}

/// Principal part `Σ_j c_j (z − center)^{−j}`, `coefficients[j − 1] = c_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentTail {
    pub center: C64,
    pub coefficients: Vec<C64>,
}

impl LaurentTail {
    pub fn eval(&self, z: C64) -> C64 {
        let u = 1.0 / (z - self.center);
        self.coefficients.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| (acc + c) * u)
    }

    /// `d/dz` of [`LaurentTail::eval`].
    pub fn derivative(&self, z: C64) -> C64 {
        let u = 1.0 / (z - self.center);
        let mut power = u * u;
        let mut acc = C64::new(0.0, 0.0);
        for (i, c) in self.coefficients.iter().enumerate() {
            acc -= c * power * (i + 1) as f64;
            power *= u;
        }
        acc
    }

    /// Coefficient of `(z − center)^{−j}` (zero past the stored length).
    pub fn coefficient(&self, j: usize) -> C64 {
        if j == 0 {
            return C64::new(0.0, 0.0);
        }
        self.coefficients.get(j - 1).copied().unwrap_or_default()
    }
}

/// Laurent expansion of a pulled-back Faber–Tietz form about `ζ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalPart {
    pub m: u32,
    pub rho: f64,
    /// Coefficients of `ζ^{−1} … ζ^{−(m+1+4)}`.
    pub tail: LaurentTail,
    /// Coefficients of `ζ^0 … ζ^J`.
    pub head: Vec<C64>,
}

impl PrincipalPart {
    /// Coefficient of `ζ^{−(m+1)}`, which should equal `m`.
    pub fn leading(&self) -> C64 {
        self.tail.coefficient(self.m as usize + 1)
    }

    /// `max(|c_{−(m+1)} − m|, |c_{−j}| for j > m + 1)`.
    pub fn pole_error(&self) -> f64 {
        let lead = self.m as usize + 1;
        let mut err = (self.leading() - self.m as f64).norm();
        for j in lead + 1..=self.tail.coefficients.len() {
            err = err.max(self.tail.coefficient(j).norm());
        }
        err
    }
}

/// Batched evaluator of `α^m_k`, all `m` at once.
pub struct FaberEvaluator {
    surface: Arc<Surface>,
    cap: usize,
    nodes: usize,
    // (i/2) f'(η_l) iη_l Δθ and f(η_l) on |η| = OUTER_RADIUS
    outer_weights: Vec<C64>,
    outer_images: Vec<C64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FaberEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaberEvaluator").field("cap", &self.cap).field("nodes", &self.nodes).finish()
    }
}

impl FaberEvaluator {
    pub fn new(surface: Arc<Surface>, cap: usize) -> Result<Self> {
        Self::with_nodes(surface, cap, CONTOUR_NODES)
    }

    pub fn with_nodes(surface: Arc<Surface>, cap: usize, nodes: usize) -> Result<Self> {
        if nodes < 64 || !nodes.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("contour nodes must be a power of two >= 64, got {nodes}")));
        }
        let map = surface.cap(cap)?;
        let step = 2.0 * PI / nodes as f64;
        let (mut outer_weights, mut outer_images) = (Vec::with_capacity(nodes), Vec::with_capacity(nodes));
        for l in 0..nodes {
            let eta = C64::from_polar(OUTER_RADIUS, step * l as f64);
            let (w, dw) = map.value_and_derivative(eta);
            outer_images.push(w);
            outer_weights.push(C64::new(0.0, 0.5) * dw * C64::new(0.0, 1.0) * eta * step);
        }
        let fft = FftPlanner::new().plan_fft_forward(nodes);
        Ok(Self { surface, cap, nodes, outer_weights, outer_images, fft })
    }

    pub fn surface(&self) -> &Arc<Surface> {
        &self.surface
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Largest order returned without aliasing.
    pub fn max_order(&self) -> u32 {
        (self.nodes / 4) as u32
    }

    /// Contour radius used at `z`: [`OUTER_RADIUS`] off the cap, a fixed
    /// fraction of `|f⁻¹(z)|` inside it.
    pub fn radius_for(&self, z: C64) -> Result<f64> {
        let map = self.surface.cap(self.cap)?;
        let zr = self.surface.representative_near(z, map.center_image());
        if !map.contains(zr) && winding_number(&self.outer_images, zr) == 0 {
            return Ok(OUTER_RADIUS);
        }
        let eta = map.invert(zr)?;
        if eta.norm() < MIN_PREIMAGE {
            return Err(Error::Coincident(format!("evaluation point {z} at the pole of the form")));
        }
        Ok(OUTER_RADIUS.min(INNER_FRACTION * eta.norm()))
    }

    /// `[α^1(z), …, α^M(z)]`, coefficients of `dz`.
    pub fn eval_orders(&self, z: C64, max_m: u32) -> Result<Vec<C64>> {
        if max_m > self.max_order() {
            return Err(Error::InvalidParameter(format!(
                "order {max_m} exceeds the evaluator limit {}",
                self.max_order()
            )));
        }
        let r0 = self.radius_for(z)?;
        let mut row = if r0 == OUTER_RADIUS {
            let map = self.surface.cap(self.cap)?;
            let zr = self.surface.representative_near(z, map.center_image());
            let row: Vec<C64> = self
                .outer_weights
                .iter()
                .zip(&self.outer_images)
                .map(|(c, w)| c * self.surface.kernel_unchecked(*w, zr))
                .collect();
            if let Some(node) = row.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::PoleOnPath { node });
            }
            row
        } else {
            contour_row(&self.surface, self.cap, z, r0, self.nodes)?
        };
        self.fft.process(&mut row);
        let mut scale = 1.0;
        Ok((1..=max_m as usize)
            .map(|m| {
                scale /= r0;
                row[m] * scale
            })
            .collect())
    }

    pub fn eval(&self, z: C64, m: u32) -> Result<C64> {
        if m == 0 {
            return Err(Error::InvalidParameter("Faber-Tietz order must be positive".into()));
        }
        Ok(self.eval_orders(z, m)?[m as usize - 1])
    }

    /// `α^m_k` as a [`FaberBasisElement`] sharing this evaluator.
    pub fn element(self: &Arc<Self>, m: u32) -> Result<FaberBasisElement> {
        if m == 0 || m > self.max_order() {
            return Err(Error::InvalidParameter(format!("Faber-Tietz order must lie in 1..={}", self.max_order())));
        }
        let eval = self.clone();
        let zk = self.surface.cap(self.cap)?.center_image();
        let form = OneForm::holomorphic(move |z| eval.eval(z, m).unwrap_or(C64::new(f64::NAN, f64::NAN)))
            .with_poles(vec![Pole { at: zk, order: m + 1 }]);
        Ok(FaberBasisElement {
            tag: BasisTag::Alpha { cap: self.cap, m },
            form,
            construction: Construction::ContourReduction { nodes: self.nodes, outer_radius: OUTER_RADIUS },
        })
    }
}

/// `α^m_k = 𝐓(f_k⁻¹)^* e^m_k`, extended meromorphically to the whole surface
/// minus `z_k`.
pub fn faber_tietz_form(surface: &Surface, k: usize, m: u32) -> Result<FaberBasisElement> {
    Arc::new(FaberEvaluator::new(Arc::new(surface.clone()), k)?).element(m)
}

/// `β_k` as a basis element.
pub fn beta_element(surface: &Surface, k: usize) -> Result<FaberBasisElement> {
    Ok(FaberBasisElement { tag: BasisTag::Beta(k), form: surface.beta_form(k)?, construction: Construction::ClosedForm })
}

/// The holomorphic basis as basis elements.
pub fn gamma_elements(surface: &Surface) -> Vec<FaberBasisElement> {
    surface
        .gamma_basis()
        .into_iter()
        .enumerate()
        .map(|(j, form)| FaberBasisElement { tag: BasisTag::Gamma(j), form, construction: Construction::ClosedForm })
        .collect()
}

/// Laurent expansion of `f_k^* α^m_k` on `|ζ| = ρ` ([`DEFAULT_RHO`]).
pub fn principal_part(element: &FaberBasisElement, map: &ConformalMap<f64>, head: usize) -> Result<PrincipalPart> {
    principal_part_at(element, map, head, DEFAULT_RHO, DEFAULT_MAX_ORDER)
}

pub fn principal_part_at(
    element: &FaberBasisElement,
    map: &ConformalMap<f64>,
    head: usize,
    rho: f64,
    max_order: u32,
) -> Result<PrincipalPart> {
    let m = match element.tag {
        BasisTag::Alpha { m, .. } => m,
        other => return Err(Error::Invalid(format!("principal part requested for a {} form", other.name()))),
    };
    if m > max_order {
        return Err(Error::InvalidParameter(format!("order {m} exceeds the configured cap {max_order}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("expansion radius must lie in (0, 1), got {rho}")));
    }
    let depth = m as usize + 1 + EXTRA_TAIL;
    let nodes = (2 * (depth + head + 1)).next_power_of_two().max(128);
    let form = &element.form;
    let coefficients = extract_laurent(
        |zeta| {
            let (w, dw) = map.value_and_derivative(zeta);
            form.eval(w) * dw
        },
        C64::new(0.0, 0.0),
        rho,
        nodes,
        -(depth as i64),
        head as i64,
    )
    .map_err(|e| match e {
        Error::NonFinite { .. } => Error::Invalid(format!("expansion circle |ζ| = {rho} meets a singularity")),
        other => other,
    })?;
    // index i of `coefficients` is the power i − depth
    let tail = LaurentTail { center: C64::new(0.0, 0.0), coefficients: coefficients[..depth].iter().rev().copied().collect() };
    Ok(PrincipalPart { m, rho, tail, head: coefficients[depth..].to_vec() })
}

/// Faber polynomial `Φ^m(z) = (1/2πi) ∮_{|η| = r0} η^{−m} f'(η) / (f(η) − z) dη`
/// as a polynomial in `1/(z − f(0))`.
pub fn faber_polynomial(map: &ConformalMap<f64>, m: u32, r0: f64) -> Result<LaurentTail> {
    const NODES: usize = 512;
    const FIT_TOL: f64 = 1e-8;
    if m == 0 {
        return Err(Error::InvalidParameter("Faber polynomial order must be positive".into()));
    }
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidParameter(format!("contour radius must lie in (0, 1), got {r0}")));
    }
    let center = map.center_image();
    let step = 2.0 * PI / NODES as f64;
    let samples: Vec<(C64, C64)> = (0..NODES)
        .map(|l| {
            let eta = C64::from_polar(r0, step * l as f64);
            let (w, dw) = map.value_and_derivative(eta);
            // η^{−m} f'(η) dη / (2πi) = η^{−m} f'(η) η Δθ / 2π
            (w, eta.powi(-(m as i32)) * dw * eta * step / (2.0 * PI))
        })
        .collect();
    let reach = samples.iter().map(|(w, _)| (w - center).norm()).fold(0.0, f64::max);
    let phi = |z: C64| samples.iter().map(|(w, c)| c / (w - z)).sum::<C64>();
    let depth = m as usize + EXTRA_TAIL;
    let coefficients = extract_laurent(phi, center, 2.0 * reach, 128.max(4 * depth), -(depth as i64), EXTRA_TAIL as i64)?;
    // index i is the power i − depth
    let scale = coefficients[depth - m as usize].norm().max(f64::MIN_POSITIVE);
    let mut misfit = 0.0f64;
    for (i, c) in coefficients.iter().enumerate() {
        let power = i as i64 - depth as i64;
        if power >= 0 || power < -(m as i64) {
            misfit = misfit.max(c.norm() * (2.0 * reach).powi(power as i32));
        }
    }
    let reference = scale * (2.0 * reach).powi(-(m as i32));
    if misfit > FIT_TOL * reference.max(1.0) {
        return Err(Error::Invalid(format!(
            "Faber polynomial tail fit inconsistent (misfit {misfit:.3e}); increase r0 or check the map"
        )));
    }
    Ok(LaurentTail { center, coefficients: (1..=m as usize).map(|j| coefficients[depth - j]).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::CapFamily;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sphere(map: ConformalMap<f64>) -> Surface {
        Surface::sphere(CapFamily::new(vec![map], 0.0).unwrap(), None, c(7.0, 7.0)).unwrap()
    }

    #[test]
    fn identity_cap_gives_inverse_square() {
        let s = sphere(ConformalMap::affine(c(0.0, 0.0), c(1.0, 0.0)).unwrap());
        let a = faber_tietz_form(&s, 0, 1).unwrap();
        assert!((a.form.eval(c(2.0, 0.0)) - 0.25).norm() < 1e-13);
        assert_eq!(a.form.poles(), &[Pole { at: c(0.0, 0.0), order: 2 }]);
        // inside the cap the same formula continues
        assert!((a.form.eval(c(0.5, 0.0)) - 4.0).norm() < 1e-10);
    }

    #[test]
    fn affine_cap_principal_parts() {
        let map = ConformalMap::affine(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        let s = sphere(map.clone());
        for m in 1..=5 {
            let a = faber_tietz_form(&s, 0, m).unwrap();
            let p = principal_part(&a, &map, DEFAULT_HEAD).unwrap();
            assert!(p.pole_error() < 1e-9, "m={m}: {}", p.pole_error());
            // f^*α^m = m ζ^{−m−1} dζ exactly
            assert!(p.head.iter().all(|h| h.norm() < 1e-9));
        }
    }

    #[test]
    fn joukowski_principal_part() {
        let map = ConformalMap::joukowski_ellipse(c(0.2, -0.1), c(0.8, 0.3), c(0.25, 0.1)).unwrap();
        let s = sphere(map.clone());
        let a = faber_tietz_form(&s, 0, 1).unwrap();
        let p = principal_part(&a, &map, DEFAULT_HEAD).unwrap();
        assert!((p.leading() - 1.0).norm() < 1e-9);
        assert!(p.pole_error() < 1e-9);
    }

    #[test]
    fn affine_faber_polynomials() {
        let r = 0.5;
        let map = ConformalMap::affine(c(0.0, 0.0), c(r, 0.0)).unwrap();
        for m in 1..=6 {
            let phi = faber_polynomial(&map, m, 0.7).unwrap();
            for j in 1..=m as usize {
                let expect = if j == m as usize { -r.powi(m as i32) } else { 0.0 };
                assert!((phi.coefficient(j) - expect).norm() < 1e-12, "m={m} j={j}");
            }
            let z = c(1.3, -0.4);
            assert!((phi.eval(z) + (r / z).powi(m as i32)).norm() < 1e-12);
        }
    }

    #[test]
    fn faber_derivative_is_faber_tietz_form() {
        let map = ConformalMap::polynomial(c(0.1, 0.0), c(1.0, 0.2), vec![c(0.1, 0.05), c(0.05, 0.0)]).unwrap();
        let s = sphere(map.clone());
        let eval = Arc::new(FaberEvaluator::new(Arc::new(s), 0).unwrap());
        for m in 1..=6 {
            let phi = faber_polynomial(&map, m, 0.6).unwrap();
            for z in [c(2.0, 1.0), c(-1.7, 0.4), c(0.3, -1.9)] {
                let a = eval.eval(z, m).unwrap();
                assert!((phi.derivative(z) - a).norm() < 1e-10, "m={m} z={z}");
            }
        }
    }

    #[test]
    fn holomorphic_across_other_caps() {
        let a = ConformalMap::affine(c(0.0, 0.0), c(0.4, 0.0)).unwrap();
        let b = ConformalMap::joukowski_ellipse(c(1.5, 0.5), c(0.4, 0.0), c(0.2, 0.0)).unwrap();
        let s = Surface::sphere(CapFamily::new(vec![a, b.clone()], 0.1).unwrap(), None, c(5.0, 5.0)).unwrap();
        let alpha = faber_tietz_form(&s, 0, 3).unwrap();
        let coefficients = extract_laurent(
            |zeta| {
                let (w, dw) = b.value_and_derivative(zeta);
                alpha.form.eval(w) * dw
            },
            c(0.0, 0.0),
            0.7,
            128,
            -6,
            0,
        )
        .unwrap();
        assert!(coefficients[..6].iter().all(|x| x.norm() < 1e-10));
    }

    #[test]
    fn torus_forms_have_no_residue() {
        let cap = ConformalMap::affine(c(0.5, 0.5), c(0.15, 0.0)).unwrap();
        let s = Surface::torus(c(0.05, 1.0), CapFamily::new(vec![cap.clone()], 0.0).unwrap(), c(0.1, 0.9), c(0.9, 0.1), c(0.0, 0.0), 0.05)
            .unwrap();
        for m in 1..=3 {
            let a = faber_tietz_form(&s, 0, m).unwrap();
            let p = principal_part(&a, &cap, DEFAULT_HEAD).unwrap();
            assert!(p.tail.coefficient(1).norm() < 1e-9);
            assert!(p.pole_error() < 1e-9, "m={m}: {}", p.pole_error());
            // doubly periodic
            let z = c(0.2, 0.3);
            let tau = s.lattice().unwrap().tau();
            assert!((a.form.eval(z + tau) - a.form.eval(z)).norm() < 1e-10);
        }
    }

    #[test]
    fn moebius_invariance() {
        let map = ConformalMap::joukowski_ellipse(c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)).unwrap();
        let g = [c(2.0, 1.0), c(1.0, 0.0), c(0.1, 0.0), c(1.0, 0.0)];
        let moved = map.moebius_composed(g).unwrap();
        let s = sphere(map);
        let t = Surface::sphere(CapFamily::new(vec![moved], 0.0).unwrap(), None, c(0.0, 4.0)).unwrap();
        let (a, b) = (faber_tietz_form(&s, 0, 2).unwrap(), faber_tietz_form(&t, 0, 2).unwrap());
        let gz = |z: C64| (g[0] * z + g[1]) / (g[2] * z + g[3]);
        let dg = |z: C64| (g[0] * g[3] - g[1] * g[2]) / ((g[2] * z + g[3]) * (g[2] * z + g[3]));
        for z in [c(2.0, 0.5), c(-1.5, 1.0), c(0.0, -2.0)] {
            assert!((b.form.eval(gz(z)) * dg(z) - a.form.eval(z)).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let map = ConformalMap::affine(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let s = sphere(map.clone());
        assert!(faber_tietz_form(&s, 0, 0).is_err());
        assert!(faber_tietz_form(&s, 1, 1).is_err());
        let beta_like = FaberBasisElement { tag: BasisTag::Gamma(0), form: OneForm::zero(), construction: Construction::ClosedForm };
        assert!(principal_part(&beta_like, &map, 4).is_err());
        assert!(faber_polynomial(&map, 0, 0.5).is_err());
    }
}
