//! The Schiffer operator `𝐓` from antiholomorphic data on the caps to
//! holomorphic forms on the complement.
//!
//! Sign convention: the `dz` coefficient of `𝐓ᾱ` at `z` is
//! `−∬_Ω K(w, z) b̄(w) dA_w` with `K` the kernel of
//! [`Surface::schiffer_kernel`]. With it the identity cap sends `dz̄` to
//! `z^{−2} dz`, and the pulled-back monomial forms carry the principal part
//! `+m ζ^{−m−1}`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{winding_number, DiskGrid};
use crate::surface::Surface;
use crate::C64;

/// Relative disagreement tolerated between a disk grid and its refinement.
pub const AREA_TOLERANCE: f64 = 1e-9;
/// Trapezoid nodes of the reduced contour integral.
pub const CONTOUR_NODES: usize = 512;

type Coefficient = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Antiholomorphic datum on the caps, given in disk coordinates: on cap `k`
/// it is `conj(b_k(η)) dη̄` for holomorphic `b_k` on `𝔻`.
#[derive(Clone, Default)]
pub struct AntiHolomorphicDatum {
    parts: Vec<(usize, Coefficient)>,
}

impl std::fmt::Debug for AntiHolomorphicDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AntiHolomorphicDatum").field("caps", &self.caps()).finish()
    }
}

impl AntiHolomorphicDatum {
    pub fn new() -> Self {
        Self::default()
    }

    /// `conj(b(η)) dη̄` on cap `cap`.
    pub fn from_fn<F>(cap: usize, b: F) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        Self { parts: vec![(cap, Arc::new(b))] }
    }

    /// `e^m_k = conj(d(η^m)) = m η̄^{m−1} dη̄` on cap `k`.
    pub fn monomial(cap: usize, m: u32) -> Self {
        let mf = m as f64;
        Self::from_fn(cap, move |eta| eta.powu(m.saturating_sub(1)) * mf)
    }

    /// Multiplies the datum by `s`.
    pub fn scaled(&self, s: C64) -> Self {
        let sc = s.conj();
        let parts = self
            .parts
            .iter()
            .map(|(k, b)| {
                let b = b.clone();
                (*k, Arc::new(move |eta| b(eta) * sc) as Coefficient)
            })
            .collect();
        Self { parts }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self { parts }
    }

    /// Caps carrying a nonzero part, sorted and deduplicated.
    pub fn caps(&self) -> Vec<usize> {
        let mut caps: Vec<usize> = self.parts.iter().map(|(k, _)| *k).collect();
        caps.sort_unstable();
        caps.dedup();
        caps
    }

    /// Coefficient of `dη̄` on cap `cap` at `η`.
    pub fn eval(&self, cap: usize, eta: C64) -> C64 {
        self.parts.iter().filter(|(k, _)| *k == cap).map(|(_, b)| b(eta).conj()).sum()
    }
}

/// `dz` coefficient of `𝐓ᾱ` at `z ∈ Σ` by area quadrature over each cap,
/// checked against the refined grid.
pub fn apply_schiffer(surface: &Surface, datum: &AntiHolomorphicDatum, z: C64, grid: &DiskGrid<f64>) -> Result<C64> {
    if let Some(cap) = surface.cap_containing(z) {
        return Err(Error::InsideCap { cap, point: (z.re, z.im) });
    }
    for k in datum.caps() {
        surface.cap(k)?;
    }
    let coarse = area_value(surface, datum, z, grid)?;
    let fine = area_value(surface, datum, z, &grid.refined()?)?;
    let difference = (fine - coarse).norm();
    let tolerance = AREA_TOLERANCE * fine.norm().max(1.0);
    if difference > tolerance {
        return Err(Error::QuadratureDisagreement { difference, tolerance });
    }
    Ok(fine)
}

fn area_value(surface: &Surface, datum: &AntiHolomorphicDatum, z: C64, grid: &DiskGrid<f64>) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for k in datum.caps() {
        let map = surface.cap(k)?;
        total -= grid.integrate(|eta| {
            let (w, dw) = map.value_and_derivative(eta);
            surface.kernel_unchecked(w, z) * dw * datum.eval(k, eta)
        })?;
    }
    Ok(total)
}

/// Samples `P_l` with `𝐓(f_k⁻¹)^* e^m_k (z) = Σ_l P_l η_l^{−m}` on the circle
/// `|η| = r0`, `η_l = r0 e^{2πil/N}`.
pub(crate) fn contour_row(surface: &Surface, cap: usize, z: C64, r0: f64, nodes: usize) -> Result<Vec<C64>> {
    let map = surface.cap(cap)?;
    let zr = surface.representative_near(z, map.center_image());
    let step = 2.0 * PI / nodes as f64;
    let mut images = Vec::with_capacity(nodes);
    let mut row = Vec::with_capacity(nodes);
    for l in 0..nodes {
        let eta = C64::from_polar(r0, step * l as f64);
        let (w, dw) = map.value_and_derivative(eta);
        images.push(w);
        // (i/2) · K · f' · (dη/dθ) · Δθ
        row.push(C64::new(0.0, 0.5) * surface.kernel_unchecked(w, zr) * dw * C64::new(0.0, 1.0) * eta * step);
    }
    if winding_number(&images, zr) != 0 {
        return Err(Error::InsideContour { cap, point: (z.re, z.im) });
    }
    if let Some(node) = row.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::PoleOnPath { node });
    }
    Ok(row)
}

/// `𝐓` applied to `(f_k⁻¹)^* e^m_k`, evaluated at `z` by the reduced contour
/// integral over `f_k(|η| = r0)`; valid for every `z` outside that curve.
pub fn schiffer_contour(surface: &Surface, cap: usize, m: u32, z: C64, r0: f64) -> Result<C64> {
    schiffer_contour_with_nodes(surface, cap, m, z, r0, CONTOUR_NODES)
}

pub fn schiffer_contour_with_nodes(surface: &Surface, cap: usize, m: u32, z: C64, r0: f64, nodes: usize) -> Result<C64> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidParameter(format!("contour radius must lie in (0, 1), got {r0}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("monomial order must be positive".into()));
    }
    let row = contour_row(surface, cap, z, r0, nodes)?;
    let step = 2.0 * PI / nodes as f64;
    let scale = r0.powi(-(m as i32));
    Ok(row
        .iter()
        .enumerate()
        .map(|(l, p)| p * C64::from_polar(scale, -step * (l as f64) * m as f64))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{CapFamily, ConformalMap};
    use crate::numerics::fourier_coefficients;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn identity_sphere() -> Surface {
        let cap = ConformalMap::affine(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        Surface::sphere(CapFamily::new(vec![cap], 0.0).unwrap(), None, c(5.0, 0.0)).unwrap()
    }

    fn joukowski_sphere(q: Option<C64>) -> Surface {
        let cap = ConformalMap::joukowski_ellipse(c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)).unwrap();
        Surface::sphere(CapFamily::new(vec![cap], 0.0).unwrap(), q, c(4.0, 4.0)).unwrap()
    }

    fn grid() -> DiskGrid<f64> {
        DiskGrid::new(40, 128).unwrap()
    }

    #[test]
    fn mean_value_oracle() {
        let s = identity_sphere();
        let d = AntiHolomorphicDatum::monomial(0, 1);
        for z in [c(2.0, 0.0), c(-2.0, 0.0), c(1.0, 1.0)] {
            let t = apply_schiffer(&s, &d, z, &grid()).unwrap();
            assert!((t - 1.0 / (z * z)).norm() < 1e-12, "{z}: {t}");
            let tc = schiffer_contour(&s, 0, 1, z, 0.6).unwrap();
            assert!((tc - 1.0 / (z * z)).norm() < 1e-12);
        }
        let t = apply_schiffer(&s, &d.scaled(c(3.0, 0.0)), c(2.0, 0.0), &grid()).unwrap();
        assert!((t - 0.75).norm() < 1e-12);
    }

    #[test]
    fn rejects_points_in_caps() {
        let s = identity_sphere();
        let d = AntiHolomorphicDatum::monomial(0, 1);
        assert!(matches!(apply_schiffer(&s, &d, c(0.5, 0.0), &grid()), Err(Error::InsideCap { .. })));
        assert!(matches!(schiffer_contour(&s, 0, 1, c(0.3, 0.0), 0.6), Err(Error::InsideContour { .. })));
        // inside the cap but outside the contour is fine
        assert!(schiffer_contour(&s, 0, 1, c(0.8, 0.0), 0.6).is_ok());
    }

    #[test]
    fn contour_matches_area_on_joukowski_cap() {
        let s = joukowski_sphere(None);
        for m in 1..=5 {
            let d = AntiHolomorphicDatum::monomial(0, m);
            for z in [c(2.0, 0.3), c(-1.2, -1.1), c(0.1, 1.4)] {
                let area = apply_schiffer(&s, &d, z, &grid()).unwrap();
                for r0 in [0.4, 0.6, 0.8] {
                    let contour = schiffer_contour(&s, 0, m, z, r0).unwrap();
                    assert!((area - contour).norm() < 1e-10, "m={m} z={z} r0={r0}");
                }
            }
        }
    }

    #[test]
    fn independent_of_base_point() {
        let a = joukowski_sphere(None);
        let b = joukowski_sphere(Some(c(-3.0, 2.0)));
        let d = AntiHolomorphicDatum::monomial(0, 2);
        let z = c(1.5, -0.7);
        let fine = DiskGrid::new(64, 256).unwrap();
        let ta = apply_schiffer(&a, &d, z, &fine).unwrap();
        let tb = apply_schiffer(&b, &d, z, &fine).unwrap();
        assert!((ta - tb).norm() < 1e-12);
    }

    #[test]
    fn linear_in_datum() {
        let s = joukowski_sphere(None);
        let (d1, d2) = (AntiHolomorphicDatum::monomial(0, 1), AntiHolomorphicDatum::monomial(0, 3));
        let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
        let z = c(1.1, 1.3);
        let combo = apply_schiffer(&s, &d1.scaled(a).add(&d2.scaled(b)), z, &grid()).unwrap();
        let sep = a * apply_schiffer(&s, &d1, z, &grid()).unwrap() + b * apply_schiffer(&s, &d2, z, &grid()).unwrap();
        assert!((combo - sep).norm() < 1e-11);
    }

    #[test]
    fn output_is_holomorphic() {
        let s = joukowski_sphere(None);
        let center = c(1.8, 0.4);
        let n = 32;
        let samples: Vec<C64> = (0..n)
            .map(|j| {
                let z = center + C64::from_polar(0.2, 2.0 * PI * j as f64 / n as f64);
                schiffer_contour(&s, 0, 3, z, 0.8).unwrap()
            })
            .collect();
        let hat = fourier_coefficients(&samples);
        for coefficient in &hat[n / 2 + 1..] {
            assert!(coefficient.norm() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_is_detected() {
        let s = joukowski_sphere(None);
        let d = AntiHolomorphicDatum::monomial(0, 4);
        let coarse = DiskGrid::new(3, 8).unwrap();
        assert!(matches!(
            apply_schiffer(&s, &d, c(1.6, 0.0), &coarse),
            Err(Error::QuadratureDisagreement { .. })
        ));
    }
}
