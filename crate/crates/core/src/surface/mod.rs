//! Capped spheres and tori: Green's function, Schiffer kernel, the
//! meromorphic forms `β_k`, the holomorphic basis `γ_j` and homology cycles.
//!
//! Chart conventions: the sphere is handled in the affine chart `ℂ` with the
//! base point `q` optionally at `∞`; the torus `ℂ/(ℤ + τℤ)` is handled in the
//! universal cover, with every cap inside the fundamental parallelogram
//! `corner + [0,1] + [0,1]τ` at a fixed margin from its edges.
//!
//! Kernel normalization: [`Surface::schiffer_kernel`] returns
//! `(2/π) ∂_z∂_w 𝒢(w; z, q)`, which is `−1/(π (w − z)²)` on the sphere.

mod form;
mod theta;

pub use form::{period, Cycle, CycleKind, CyclePath, OneForm, Pole};
pub use theta::Lattice;

use std::f64::consts::PI;

use crate::conformal::{CapFamily, ConformalMap};
use crate::error::{Error, Result};
use crate::numerics::CircleContour;
use crate::C64;

/// Default distance kept between torus caps and the parallelogram edges.
pub const DEFAULT_MARGIN: f64 = 0.05;
const COINCIDENCE: f64 = 1e-12;
const CYCLE_NODES: usize = 256;
const BOUNDARY_SAMPLES: usize = 256;

/// Ambient compact surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ambient {
    Sphere,
    Torus(Lattice),
}

/// A compact surface of genus 0 or 1 with disjoint caps.
#[derive(Debug, Clone)]
pub struct Surface {
    ambient: Ambient,
    caps: CapFamily<f64>,
    base_point: Option<C64>,
    normalization: C64,
    corner: C64,
    margin: f64,
}

impl Surface {
    /// Capped sphere; `base_point = None` puts `q` at `∞`.
    pub fn sphere(caps: CapFamily<f64>, base_point: Option<C64>, normalization: C64) -> Result<Self> {
        let s = Self { ambient: Ambient::Sphere, caps, base_point, normalization, corner: C64::new(0.0, 0.0), margin: 0.0 };
        s.check_off_caps("base point q", base_point)?;
        s.check_off_caps("normalization point w0", Some(normalization))?;
        if base_point.is_some_and(|q| (q - normalization).norm() < COINCIDENCE) {
            return Err(Error::Coincident("q and w0".into()));
        }
        Ok(s)
    }

    /// Capped torus `ℂ/(ℤ + τℤ)` with fundamental parallelogram at `corner`.
    pub fn torus(
        tau: C64,
        caps: CapFamily<f64>,
        base_point: C64,
        normalization: C64,
        corner: C64,
        margin: f64,
    ) -> Result<Self> {
        let lattice = Lattice::new(tau)?;
        let s = Self {
            ambient: Ambient::Torus(lattice),
            caps,
            base_point: Some(base_point),
            normalization,
            corner,
            margin,
        };
        for (k, map) in s.caps.maps().iter().enumerate() {
            for w in map.boundary(BOUNDARY_SAMPLES) {
                let (u, v) = s.cell_coordinates(w);
                let d = [v * tau.im, (1.0 - v) * tau.im, u * tau.im / tau.norm(), (1.0 - u) * tau.im / tau.norm()];
                if d.iter().any(|x| *x < margin) {
                    return Err(Error::InvalidParameter(format!(
                        "cap {k} leaves the fundamental parallelogram (margin {margin})"
                    )));
                }
            }
        }
        // Lattice translates of distinct caps must stay apart as well.
        for i in 0..s.caps.len() {
            for j in 0..s.caps.len() {
                for shift in s.translates().into_iter().filter(|t| t.norm() > 0.0) {
                    let bi = s.caps.maps()[i].boundary(64);
                    if bi.iter().any(|w| s.caps.maps()[j].contains(*w + shift)) {
                        return Err(Error::CapOverlap { first: i, second: j });
                    }
                }
            }
        }
        s.check_off_caps("base point q", Some(base_point))?;
        s.check_off_caps("normalization point w0", Some(normalization))?;
        if lattice.distance_to_lattice(base_point - normalization) < COINCIDENCE {
            return Err(Error::Coincident("q and w0".into()));
        }
        Ok(s)
    }

    fn check_off_caps(&self, what: &str, point: Option<C64>) -> Result<()> {
        if let Some(p) = point {
            if let Some(k) = self.cap_containing(p) {
                return Err(Error::InvalidParameter(format!("{what} {p} lies inside cap {k}")));
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        match self.ambient {
            Ambient::Sphere => 0,
            Ambient::Torus(_) => 1,
        }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn lattice(&self) -> Option<Lattice> {
        match self.ambient {
            Ambient::Sphere => None,
            Ambient::Torus(l) => Some(l),
        }
    }

    pub fn caps(&self) -> &CapFamily<f64> {
        &self.caps
    }

    pub fn cap(&self, k: usize) -> Result<&ConformalMap<f64>> {
        self.caps.get(k)
    }

    pub fn cap_count(&self) -> usize {
        self.caps.len()
    }

    /// Base point `q` (`None` is `∞` on the sphere).
    pub fn base_point(&self) -> Option<C64> {
        self.base_point
    }

    pub fn normalization_point(&self) -> C64 {
        self.normalization
    }

    pub fn corner(&self) -> C64 {
        self.corner
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Same surface with another base point.
    pub fn with_base_point(&self, q: Option<C64>) -> Result<Self> {
        match self.ambient {
            Ambient::Sphere => Self::sphere(self.caps.clone(), q, self.normalization),
            Ambient::Torus(l) => {
                let q = q.ok_or_else(|| Error::InvalidParameter("torus base point must be finite".into()))?;
                Self::torus(l.tau(), self.caps.clone(), q, self.normalization, self.corner, self.margin)
            }
        }
    }

    /// Coordinates `(u, v)` with `w = corner + u + vτ` (torus); `(re, im)` on the sphere.
    pub fn cell_coordinates(&self, w: C64) -> (f64, f64) {
        match self.ambient {
            Ambient::Sphere => (w.re, w.im),
            Ambient::Torus(l) => {
                let d = w - self.corner;
                let v = d.im / l.tau().im;
                (d.re - v * l.tau().re, v)
            }
        }
    }

    /// Lattice vectors `a + bτ`, `a, b ∈ {−1, 0, 1}` (just `0` on the sphere).
    pub fn translates(&self) -> Vec<C64> {
        match self.ambient {
            Ambient::Sphere => vec![C64::new(0.0, 0.0)],
            Ambient::Torus(l) => {
                let mut v = Vec::with_capacity(9);
                for a in -1..=1 {
                    for b in -1..=1 {
                        v.push(l.tau() * b as f64 + a as f64);
                    }
                }
                v
            }
        }
    }

    /// Representative of `z` (modulo the lattice) closest to `target`.
    pub fn representative_near(&self, z: C64, target: C64) -> C64 {
        match self.ambient {
            Ambient::Sphere => z,
            Ambient::Torus(l) => target + l.reduce(z - target).0,
        }
    }

    /// Index of the closed cap containing `z`.
    pub fn cap_containing(&self, z: C64) -> Option<usize> {
        self.caps
            .maps()
            .iter()
            .position(|m| m.contains(self.representative_near(z, m.center_image())))
    }

    /// Distance from `z` to the nearest cap boundary (any lattice translate).
    pub fn distance_to_caps(&self, z: C64) -> f64 {
        self.caps
            .maps()
            .iter()
            .flat_map(|m| {
                let zr = self.representative_near(z, m.center_image());
                m.boundary(BOUNDARY_SAMPLES).into_iter().map(move |w| (w - zr).norm())
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn coincide(&self, a: C64, b: C64) -> bool {
        match self.ambient {
            Ambient::Sphere => (a - b).norm() < COINCIDENCE,
            Ambient::Torus(l) => l.distance_to_lattice(a - b) < COINCIDENCE,
        }
    }

    /// `𝒢(w, w0; z, q)` with the surface's own `q`.
    pub fn green(&self, w: C64, z: C64) -> Result<f64> {
        self.green_with_base(w, z, self.base_point)
    }

    /// Green's function with `−log` singularity at `z`, `+log` singularity
    /// at `q`, vanishing at `w = w0`.
    pub fn green_with_base(&self, w: C64, z: C64, q: Option<C64>) -> Result<f64> {
        if self.coincide(w, z) {
            return Err(Error::Coincident(format!("w = z = {z}")));
        }
        if let Some(q) = q {
            if self.coincide(w, q) {
                return Err(Error::Coincident(format!("w = q = {q}")));
            }
            if self.coincide(z, q) {
                return Err(Error::Coincident(format!("z = q = {q}")));
            }
        }
        let w0 = self.normalization;
        match self.ambient {
            Ambient::Sphere => {
                let raw = |x: C64| match q {
                    Some(q) => ((z - w0) * (x - q) / ((x - z) * (q - w0))).norm().ln(),
                    None => ((z - w0) / (x - z)).norm().ln(),
                };
                if self.coincide(w, w0) {
                    return Ok(raw(w) - raw(w0));
                }
                Ok(raw(w))
            }
            Ambient::Torus(l) => {
                let q = q.ok_or_else(|| Error::InvalidParameter("torus Green's function needs a finite q".into()))?;
                let raw = |x: C64| -l.periodic_log(x - z) + l.periodic_log(x - q);
                Ok(raw(w) - raw(w0))
            }
        }
    }

    /// `(2/π) ∂_z∂_w 𝒢(w; z, q)`; independent of `q` and `w0`.
    pub fn schiffer_kernel(&self, w: C64, z: C64) -> Result<C64> {
        if self.coincide(w, z) {
            return Err(Error::Coincident(format!("kernel at w = z = {z}")));
        }
        Ok(self.kernel_unchecked(w, z))
    }

    #[inline]
    pub(crate) fn kernel_unchecked(&self, w: C64, z: C64) -> C64 {
        match self.ambient {
            Ambient::Sphere => {
                let d = w - z;
                -1.0 / (PI * d * d)
            }
            Ambient::Torus(l) => l.kernel(w - z),
        }
    }

    /// Meromorphic `β_k` (0-based `k < n − 1`): residue `+1` at `z_k`, `−1` at `z_{n−1}`.
    pub fn beta_form(&self, k: usize) -> Result<OneForm> {
        let n = self.caps.len();
        if n < 2 {
            return Err(Error::InvalidParameter("beta forms need at least two caps".into()));
        }
        if k + 1 >= n {
            return Err(Error::CapIndex { index: k, caps: n - 1 });
        }
        let zk = self.caps.maps()[k].center_image();
        let zn = self.caps.maps()[n - 1].center_image();
        let poles = vec![Pole { at: zk, order: 1 }, Pole { at: zn, order: 1 }];
        Ok(match self.ambient {
            Ambient::Sphere => OneForm::holomorphic(move |w| 1.0 / (w - zk) - 1.0 / (w - zn)),
            Ambient::Torus(l) => OneForm::holomorphic(move |w| l.log_derivative(w - zk) - l.log_derivative(w - zn)),
        }
        .with_poles(poles))
    }

    /// a-normalized holomorphic basis: empty on the sphere, `[dw]` on the torus.
    pub fn gamma_basis(&self) -> Vec<OneForm> {
        match self.ambient {
            Ambient::Sphere => Vec::new(),
            Ambient::Torus(_) => vec![OneForm::holomorphic(|_| C64::new(1.0, 0.0))],
        }
    }

    /// Bottom edge of the fundamental parallelogram.
    pub fn a_cycle(&self) -> Option<Cycle> {
        self.lattice().map(|_| Cycle {
            kind: CycleKind::A(0),
            path: CyclePath::Segment { start: self.corner, end: self.corner + 1.0, nodes: CYCLE_NODES },
        })
    }

    /// Left edge of the fundamental parallelogram.
    pub fn b_cycle(&self) -> Option<Cycle> {
        self.lattice().map(|l| Cycle {
            kind: CycleKind::B(0),
            path: CyclePath::Segment { start: self.corner, end: self.corner + l.tau(), nodes: CYCLE_NODES },
        })
    }

    /// Two circles about `z_k` that enclose cap `k` and no other cap
    /// (lattice translates included).
    pub fn boundary_cycles(&self, k: usize) -> Result<[Cycle; 2]> {
        let map = self.caps.get(k)?;
        let zk = map.center_image();
        let inner = map.outer_radius();
        let mut obstacle = f64::INFINITY;
        for (j, other) in self.caps.maps().iter().enumerate() {
            for shift in self.translates() {
                if j == k && shift.norm() == 0.0 {
                    continue;
                }
                for w in other.boundary(BOUNDARY_SAMPLES) {
                    obstacle = obstacle.min((w + shift - zk).norm());
                }
            }
        }
        if !obstacle.is_finite() {
            obstacle = 2.0 * inner;
        }
        let gap = obstacle - inner;
        if gap <= 0.0 {
            return Err(Error::Invalid(format!(
                "no circle about the center of cap {k} separates it from the other caps"
            )));
        }
        let circle = |r: f64| -> Result<Cycle> {
            Ok(Cycle { kind: CycleKind::Boundary(k), path: CyclePath::Circle(CircleContour::new(zk, r, CYCLE_NODES)?) })
        };
        Ok([circle(inner + gap / 3.0)?, circle(inner + 2.0 * gap / 3.0)?])
    }

    /// `Π = ∫_b γ` of the a-normalized basis (torus only).
    pub fn period_matrix(&self) -> Result<Option<C64>> {
        match (self.gamma_basis().first(), self.b_cycle()) {
            (Some(g), Some(b)) => Ok(Some(period(g, &b)?)),
            _ => Ok(None),
        }
    }

}
