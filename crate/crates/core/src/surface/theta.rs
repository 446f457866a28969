//! Jacobi `θ₁` on the lattice `ℤ + τℤ` and the doubly periodic pieces built
//! from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

const MAX_TERMS: usize = 40;

/// The lattice `ℤ + τℤ` with `Im τ > 0`, nome `q = e^{iπτ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    tau: C64,
}

impl Lattice {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lattice parameter tau must have Im tau > 0, got {tau}"
            )));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    /// Splits `u = r + a + bτ` with `r` in the centred fundamental cell.
    pub fn reduce(&self, u: C64) -> (C64, f64, f64) {
        let b = (u.im / self.tau.im).round();
        let v = u - self.tau * b;
        let a = v.re.round();
        (v - a, a, b)
    }

    /// `(θ₁, θ₁', θ₁'')` at the complex argument `x` (derivatives in `x`).
    pub fn theta1(&self, x: C64) -> (C64, C64, C64) {
        let mut t = C64::new(0.0, 0.0);
        let mut dt = C64::new(0.0, 0.0);
        let mut ddt = C64::new(0.0, 0.0);
        for n in 0..MAX_TERMS {
            let half = n as f64 + 0.5;
            let weight = (C64::i() * PI * self.tau * half * half).exp() * if n % 2 == 0 { 2.0 } else { -2.0 };
            let k = 2.0 * n as f64 + 1.0;
            let (s, c) = ((x * k).sin(), (x * k).cos());
            let term = weight * s;
            t += term;
            dt += weight * c * k;
            ddt -= term * (k * k);
            if n >= 2 && (weight.norm() * (k * k) * s.norm().max(c.norm())) < 1e-18 * t.norm().max(dt.norm()) {
                break;
            }
        }
        (t, dt, ddt)
    }

    /// Doubly periodic `log|θ₁(πu)| − π (Im u)² / Im τ`; behaves like
    /// `log|u| + const` at the lattice points.
    pub fn periodic_log(&self, u: C64) -> f64 {
        let (r, _, _) = self.reduce(u);
        let (t, _, _) = self.theta1(r * PI);
        t.norm().ln() - PI * r.im * r.im / self.tau.im
    }

    /// `d/du log θ₁(πu)`: simple poles of residue 1 at the lattice, additive
    /// quasi-period `−2πi` under `u ↦ u + τ`.
    pub fn log_derivative(&self, u: C64) -> C64 {
        let (r, _, b) = self.reduce(u);
        let (t, dt, _) = self.theta1(r * PI);
        dt / t * PI - C64::new(0.0, 2.0 * PI * b)
    }

    /// Elliptic kernel `π (log θ₁)''(πu) + 1/Im τ`; equals `−1/(π u²) + O(1)`
    /// at `u = 0`.
    pub fn kernel(&self, u: C64) -> C64 {
        let (r, _, _) = self.reduce(u);
        let (t, dt, ddt) = self.theta1(r * PI);
        let l = dt / t;
        (ddt / t - l * l) * PI + 1.0 / self.tau.im
    }

    /// Distance from `u` to the nearest lattice point.
    pub fn distance_to_lattice(&self, u: C64) -> f64 {
        let (r, _, _) = self.reduce(u);
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                best = best.min((r - a as f64 - self.tau * b as f64).norm());
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> Lattice {
        Lattice::new(C64::new(0.2, 1.1)).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(Lattice::new(C64::new(0.0, -1.0)).is_err());
        assert!(Lattice::new(C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn theta_quasi_periodicity() {
        let l = lattice();
        let x = C64::new(0.3, 0.2);
        let (t, _, _) = l.theta1(x);
        let (tp, _, _) = l.theta1(x + PI);
        assert!((tp + t).norm() < 1e-13);
        // θ₁(x + πτ) = −q⁻¹ e^{−2ix} θ₁(x)
        let q = (C64::i() * PI * l.tau()).exp();
        let (tt, _, _) = l.theta1(x + l.tau() * PI);
        assert!((tt + t * (C64::i() * x * -2.0).exp() / q).norm() < 1e-12);
    }

    #[test]
    fn theta_derivatives_match_differences() {
        let l = lattice();
        let x = C64::new(0.4, -0.3);
        let h = 1e-5;
        let (_, dt, ddt) = l.theta1(x);
        let fd = (l.theta1(x + h).0 - l.theta1(x - h).0) / (2.0 * h);
        let fdd = (l.theta1(x + h).1 - l.theta1(x - h).1) / (2.0 * h);
        assert!((fd - dt).norm() < 1e-8);
        assert!((fdd - ddt).norm() < 1e-8);
    }

    #[test]
    fn kernel_is_elliptic_with_double_pole() {
        let l = lattice();
        let u = C64::new(0.31, 0.17);
        let k = l.kernel(u);
        assert!((l.kernel(u + 1.0) - k).norm() < 1e-10);
        assert!((l.kernel(u + l.tau()) - k).norm() < 1e-10);
        let small = C64::new(1e-3, 5e-4);
        let k0 = l.kernel(small) + 1.0 / (PI * small * small);
        let k1 = l.kernel(small * 0.5) + 1.0 / (PI * small * small * 0.25);
        assert!((k0 - k1).norm() < 1e-4);
    }

    #[test]
    fn log_derivative_quasi_periods() {
        let l = lattice();
        let u = C64::new(0.1, 0.4);
        let z = l.log_derivative(u);
        assert!((l.log_derivative(u + 1.0) - z).norm() < 1e-11);
        assert!((l.log_derivative(u + l.tau()) - z + C64::new(0.0, 2.0 * PI)).norm() < 1e-11);
    }
}
