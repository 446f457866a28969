//! Power- and Laurent-series coefficients from uniform circle samples.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::{is_finite, lit, unit_root, Real};
use crate::error::{pair, Error, Result};

/// Truncated Taylor series around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    pub center: Complex<T>,
    pub coefficients: Vec<Complex<T>>,
    /// Radius on which the coefficients were sampled.
    pub radius: T,
}

impl<T: Real> PowerSeries<T> {
    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let x = z - self.center;
        self.coefficients
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * lit::<T>(j as f64))
            .collect();
        Self { center: self.center, coefficients, radius: self.radius }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Discrete Fourier coefficients `ĝ_n = (1/N) Σ_j g_j e^{-2πi nj/N}` of equispaced
/// samples, for `n = 0..N` (indices past `N/2` are the negative frequencies).
pub fn fourier_coefficients<T: Real>(samples: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    if n == 0 {
        return buf;
    }
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = T::one() / lit::<T>(n as f64);
    for v in &mut buf {
        *v = *v * scale;
    }
    buf
}

fn sample_circle<T, F>(f: F, center: Complex<T>, radius: T, nodes: usize) -> Result<Vec<Complex<T>>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    (0..nodes)
        .map(|j| {
            let w = center + unit_root::<T>(j, nodes) * radius;
            let v = f(w);
            if is_finite(v) {
                Ok(v)
            } else {
                Err(Error::NonFinite { node: j, point: pair(w) })
            }
        })
        .collect()
}

/// Taylor coefficients `c_0..c_order` of `f` about `center`, sampled on the
/// circle of the given radius.
pub fn extract_taylor<T, F>(f: F, center: Complex<T>, radius: T, order: usize) -> Result<PowerSeries<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter("Taylor radius must be positive".into()));
    }
    let nodes = (2 * (order + 1)).max(64).next_power_of_two();
    let samples = sample_circle(f, center, radius, nodes)?;
    let hat = fourier_coefficients(&samples);
    let mut scale = T::one();
    let coefficients = hat
        .iter()
        .take(order + 1)
        .map(|c| {
            let v = c * scale;
            scale = scale / radius;
            v
        })
        .collect();
    Ok(PowerSeries { center, coefficients, radius })
}

/// Laurent coefficients `c_j`, `j ∈ lo..=hi`, of `f` on the circle
/// `|w - center| = radius` sampled with `nodes` points.
pub fn extract_laurent<T, F>(
    f: F,
    center: Complex<T>,
    radius: T,
    nodes: usize,
    lo: i64,
    hi: i64,
) -> Result<Vec<Complex<T>>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    if lo > hi || (hi - lo + 1) as usize > nodes {
        return Err(Error::InvalidParameter(format!(
            "Laurent index range {lo}..={hi} does not fit {nodes} nodes"
        )));
    }
    let samples = sample_circle(f, center, radius, nodes)?;
    let hat = fourier_coefficients(&samples);
    let n = nodes as i64;
    Ok((lo..=hi)
        .map(|j| hat[j.rem_euclid(n) as usize] * radius.powi(-(j as i32)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    const ZERO: C = C { re: 0.0, im: 0.0 };

    #[test]
    fn identity_coefficients() {
        let s = extract_taylor(|z: C| z, ZERO, 0.5, 4).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0, 0.0];
        for (c, e) in s.coefficients.iter().zip(expect) {
            assert!((c - e).norm() < 1e-14);
        }
    }

    #[test]
    fn exponential_maclaurin() {
        let s = extract_taylor(|z: C| z.exp(), ZERO, 0.5, 10).unwrap();
        let mut fact = 1.0;
        for (j, c) in s.coefficients.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            assert!((c - 1.0 / fact).norm() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn geometric_series() {
        let s = extract_taylor(|z: C| (C::new(1.0, 0.0) - z).inv(), ZERO, 0.5, 12).unwrap();
        for c in &s.coefficients {
            assert!((c - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluation_at_center_is_constant_term() {
        let s = extract_taylor(|z: C| (z * 2.0).sin() + 3.0, C::new(0.1, 0.2), 0.5, 16).unwrap();
        assert_eq!(s.eval(s.center), s.coefficients[0]);
    }

    #[test]
    fn laurent_of_pole() {
        let c = extract_laurent(|z: C| z.powi(-3) * 2.0 + z, ZERO, 0.7, 64, -5, 2).unwrap();
        // indices -5..=2
        assert!((c[2] - 2.0).norm() < 1e-13);
        assert!((c[6] - 1.0).norm() < 1e-13);
        assert!(c[0].norm() < 1e-13 && c[5].norm() < 1e-13);
    }
}
