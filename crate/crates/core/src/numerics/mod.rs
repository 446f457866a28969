//! Floating-point substrate: contour and area quadrature, power-series
//! coefficient extraction and Hermitian least squares.
//!
//! Everything here is generic over the real scalar `T` ([`Real`]), so the
//! same rules run in `f32` or `f64`. The higher layers of the crate fix
//! `T = f64`.

mod linalg;
mod quadrature;
mod taylor;

pub use linalg::{least_squares, HermitianMatrix, LeastSquaresSolution};
pub use quadrature::{
    area_pairing, circle_integral, winding_number, CircleContour, DiskGrid, FormCoefficients,
    GaussLegendre,
};
pub use taylor::{extract_laurent, extract_taylor, fourier_coefficients, PowerSeries};

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real scalar usable by every numerical routine of the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lossy conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in T")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `e^{iθ}` for the `j`-th of `n` equispaced angles.
#[inline]
pub(crate) fn unit_root<T: Real>(j: usize, n: usize) -> Complex<T> {
    let theta = T::TAU() * lit::<T>(j as f64) / lit::<T>(n as f64);
    Complex::from_polar(T::one(), theta)
}
