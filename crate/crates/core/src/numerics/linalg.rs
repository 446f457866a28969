//! Dense Hermitian solves for Gram systems.

use num_complex::Complex;

use super::{lit, Real};
use crate::error::{Error, Result};

/// Dense square complex matrix, row-major. Only Hermitian use is intended.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex<T>>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)].re)
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k.min(self.n), |i, j| self[(i, j)])
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * x[j])
            })
            .collect()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Lower Cholesky factor, or `None` if the matrix is not numerically
    /// positive definite.
    fn cholesky(&self) -> Option<Vec<Complex<T>>> {
        let n = self.n;
        let mut l = vec![Complex::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d = d - l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = Complex::new(d, T::zero());
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        Some(l)
    }
}

impl<T> std::ops::Index<(usize, usize)> for HermitianMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for HermitianMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

fn cholesky_solve<T: Real>(l: &[Complex<T>], n: usize, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i].conj() * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

fn normalize<T: Real>(v: &mut [Complex<T>]) -> T {
    let norm = v.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
    norm
}

fn start_vector<T: Real>(n: usize) -> Vec<Complex<T>> {
    (0..n)
        .map(|i| Complex::new(T::one() + lit::<T>(0.1 * i as f64 / n as f64), lit::<T>(0.01 * i as f64)))
        .collect()
}

const POWER_STEPS: usize = 200;

/// Outcome of a Gram solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution<T> {
    pub x: Vec<Complex<T>>,
    /// Condition estimate of the diagonally scaled Gram matrix
    /// (`∞` when it is not numerically positive definite).
    pub condition: T,
    /// Tikhonov shift applied to the scaled system, if any.
    pub regularization: Option<T>,
}

impl<T: Real> LeastSquaresSolution<T> {
    /// Condition above the regularization threshold.
    pub fn flagged(&self) -> bool {
        self.regularization.is_some()
    }
}

/// Minimizes the quadratic residual induced by `gram`, i.e. solves
/// `gram · x = rhs` for a Hermitian positive semidefinite Gram matrix.
///
/// The system is Jacobi-scaled first. When the scaled condition estimate
/// exceeds `1e12` (or the factorization breaks down) a Tikhonov shift of
/// `1e-12 · trace` is added and the result is flagged.
pub fn least_squares<T: Real>(gram: &HermitianMatrix<T>, rhs: &[Complex<T>]) -> Result<LeastSquaresSolution<T>> {
    let n = gram.dim();
    if rhs.len() != n {
        return Err(Error::Dimension { expected: n, got: rhs.len() });
    }
    if n == 0 {
        return Ok(LeastSquaresSolution { x: Vec::new(), condition: T::one(), regularization: None });
    }
    let scale: Vec<T> = (0..n)
        .map(|i| {
            let d = gram[(i, i)].re;
            if d > T::zero() {
                T::one() / d.sqrt()
            } else {
                T::one()
            }
        })
        .collect();
    let scaled = HermitianMatrix::from_fn(n, |i, j| gram[(i, j)] * (scale[i] * scale[j]));
    let b: Vec<Complex<T>> = rhs.iter().zip(&scale).map(|(r, s)| r * *s).collect();

    let limit = lit::<T>(1e12);
    let (factor, condition) = match scaled.cholesky() {
        Some(l) => {
            let cond = condition_estimate(&scaled, &l);
            (Some(l), cond)
        }
        None => (None, T::infinity()),
    };
    let (l, regularization) = match factor {
        Some(l) if condition <= limit => (l, None),
        _ => {
            let shift = lit::<T>(1e-12) * scaled.trace();
            let mut shifted = scaled.clone();
            for i in 0..n {
                shifted[(i, i)] = shifted[(i, i)] + shift;
            }
            let l = shifted.cholesky().ok_or_else(|| {
                Error::Invalid("Gram matrix is not positive semidefinite".into())
            })?;
            (l, Some(shift))
        }
    };
    let y = cholesky_solve(&l, n, &b);
    let x = y.iter().zip(&scale).map(|(v, s)| v * *s).collect();
    Ok(LeastSquaresSolution { x, condition, regularization })
}

fn condition_estimate<T: Real>(m: &HermitianMatrix<T>, l: &[Complex<T>]) -> T {
    let n = m.dim();
    let mut v = start_vector::<T>(n);
    normalize(&mut v);
    let mut largest = T::zero();
    for _ in 0..POWER_STEPS {
        let mut w = m.mul_vec(&v);
        largest = normalize(&mut w);
        v = w;
    }
    let mut v = start_vector::<T>(n);
    normalize(&mut v);
    let mut inverse_largest = T::zero();
    for _ in 0..POWER_STEPS {
        let mut w = cholesky_solve(l, n, &v);
        inverse_largest = normalize(&mut w);
        v = w;
    }
    largest * inverse_largest
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn identity_returns_rhs() {
        let rhs = vec![C::new(1.0, 2.0), C::new(-3.0, 0.5)];
        let sol = least_squares(&HermitianMatrix::identity(2), &rhs).unwrap();
        for (a, b) in sol.x.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((sol.condition - 1.0).abs() < 1e-12);
        assert!(!sol.flagged());
    }

    #[test]
    fn diagonal_system() {
        let g = HermitianMatrix::from_rows(&[vec![c(2.0), c(0.0)], vec![c(0.0), c(4.0)]]).unwrap();
        let sol = least_squares(&g, &[c(2.0), c(4.0)]).unwrap();
        assert!((sol.x[0] - 1.0).norm() < 1e-15 && (sol.x[1] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn monomial_gram_on_disk() {
        // {dz, z dz} on 𝔻: Gram diag(2π, π); pairings of (1+z)dz are (2π, π).
        let g = HermitianMatrix::from_rows(&[vec![c(2.0 * PI), c(0.0)], vec![c(0.0), c(PI)]]).unwrap();
        let sol = least_squares(&g, &[c(2.0 * PI), c(PI)]).unwrap();
        assert!((sol.x[0] - 1.0).norm() < 1e-14 && (sol.x[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn singular_gram_is_regularized() {
        let g = HermitianMatrix::from_rows(&[vec![c(1.0), c(1.0)], vec![c(1.0), c(1.0)]]).unwrap();
        let sol = least_squares(&g, &[c(1.0), c(1.0)]).unwrap();
        assert!(sol.flagged());
        // Minimum-norm-like solution still reproduces the rhs.
        let r = g.mul_vec(&sol.x);
        assert!((r[0] - 1.0).norm() < 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(least_squares(&HermitianMatrix::<f64>::identity(2), &[c(1.0)]).is_err());
    }
}
