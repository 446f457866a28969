//! Trapezoid rules on circles and product Gauss-Legendre/trapezoid rules on
//! the unit disk.

use num_complex::Complex;

use super::{is_finite, lit, unit_root, Real};
use crate::conformal::ConformalMap;
use crate::error::{pair, Error, Result};

/// Circle `|w - center| = radius` sampled at `nodes` equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleContour<T> {
    center: Complex<T>,
    radius: T,
    nodes: usize,
}

impl<T: Real> CircleContour<T> {
    pub const MIN_NODES: usize = 16;

    pub fn new(center: Complex<T>, radius: T, nodes: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        if nodes < Self::MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "circle needs at least {} nodes, got {nodes}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { center, radius, nodes })
    }

    pub fn center(&self) -> Complex<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Same circle with twice as many nodes.
    pub fn refined(&self) -> Self {
        Self { nodes: 2 * self.nodes, ..*self }
    }

    /// Node `j` on the circle.
    pub fn point(&self, j: usize) -> Complex<T> {
        self.center + unit_root::<T>(j, self.nodes) * self.radius
    }

    /// `(w_j, dw_j)` pairs: the nodes with their trapezoid weight already
    /// folded into the line element `i (w_j - c) 2π/N`.
    pub fn weighted_nodes(&self) -> impl Iterator<Item = (Complex<T>, Complex<T>)> + '_ {
        let step = T::TAU() / lit::<T>(self.nodes as f64);
        (0..self.nodes).map(move |j| {
            let offset = unit_root::<T>(j, self.nodes) * self.radius;
            (self.center + offset, Complex::<T>::i() * offset * step)
        })
    }
}

/// Counterclockwise `∮ integrand(w) dw` by the trapezoid rule.
pub fn circle_integral<T, F>(integrand: F, contour: &CircleContour<T>) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    let mut acc = Complex::new(T::zero(), T::zero());
    for (j, (w, dw)) in contour.weighted_nodes().enumerate() {
        let value = integrand(w);
        if !is_finite(value) {
            return Err(Error::NonFinite { node: j, point: pair(w) });
        }
        acc = acc + value * dw;
    }
    Ok(acc)
}

/// Winding number of the closed polygon `path` around `point`.
pub fn winding_number<T: Real>(path: &[Complex<T>], point: Complex<T>) -> i64 {
    if path.is_empty() {
        return 0;
    }
    let mut total = T::zero();
    for (j, a) in path.iter().enumerate() {
        let b = path[(j + 1) % path.len()];
        total = total + ((b - point) / (*a - point)).arg();
    }
    (total / T::TAU()).round().to_i64().unwrap_or(0)
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule; nodes come from Newton iteration on `P_n` in `f64`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Gauss-Legendre rule needs n >= 1".into()));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            // Tricomi initial guess for the i-th root of P_n on [-1, 1].
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(lit::<T>(0.5 * (1.0 - x)));
            weights.push(lit::<T>(0.5 * w));
        }
        // Ascending order on [0, 1].
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫_0^1 g(x) dx`.
    pub fn integrate<F: Fn(T) -> T>(&self, g: F) -> T {
        self.iter().fold(T::zero(), |acc, (x, w)| acc + w * g(x))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Polar product rule on the unit disk: Gauss-Legendre in the radius,
/// trapezoid in the angle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid<T> {
    radial: GaussLegendre<T>,
    angular: usize,
}

impl<T: Real> DiskGrid<T> {
    pub fn new(radial_levels: usize, angular_nodes: usize) -> Result<Self> {
        if angular_nodes == 0 {
            return Err(Error::InvalidParameter("disk grid needs angular nodes".into()));
        }
        Ok(Self { radial: GaussLegendre::new(radial_levels)?, angular: angular_nodes })
    }

    pub fn radial_levels(&self) -> usize {
        self.radial.len()
    }

    pub fn angular_nodes(&self) -> usize {
        self.angular
    }

    /// Grid with both resolutions doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.radial.len(), 2 * self.angular)
    }

    /// Nodes `ζ` with area weights `dA`; the weights sum to `π`.
    pub fn points(&self) -> Vec<(Complex<T>, T)> {
        let dtheta = T::TAU() / lit::<T>(self.angular as f64);
        let mut out = Vec::with_capacity(self.radial.len() * self.angular);
        for (r, wr) in self.radial.iter() {
            for j in 0..self.angular {
                out.push((unit_root::<T>(j, self.angular) * r, wr * r * dtheta));
            }
        }
        out
    }

    /// `∬_𝔻 g dA`.
    pub fn integrate<F>(&self, g: F) -> Result<Complex<T>>
    where
        F: Fn(Complex<T>) -> Complex<T>,
    {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, (zeta, w)) in self.points().into_iter().enumerate() {
            let v = g(zeta);
            if !is_finite(v) {
                return Err(Error::NonFinite { node: j, point: pair(zeta) });
            }
            acc = acc + v * w;
        }
        Ok(acc)
    }
}

/// A one-form `a(w) dw` or `conj(a(w)) dw̄` known through its coefficient.
pub trait FormCoefficients<T: Real> {
    /// The holomorphic coefficient `a(w)`.
    fn coefficient(&self, w: Complex<T>) -> Complex<T>;
    /// `true` when the form is `conj(a) dw̄`.
    fn is_antiholomorphic(&self) -> bool;
}

/// Hodge pairing `∬ ω₁ ∧ ∗ω̄₂` over `map(𝔻)`, pulled back to the disk.
///
/// For two holomorphic forms this is `i∬ ω₁ ∧ ω̄₂ = 2∬ a₁ ā₂ dA`; holomorphic
/// and antiholomorphic forms are orthogonal. The value is computed on `grid`
/// and on its refinement; the refined value is returned unless the two
/// disagree by more than `tolerance · max(1, |value|)`.
pub fn area_pairing<T, A, B>(
    first: &A,
    second: &B,
    map: &ConformalMap<T>,
    grid: &DiskGrid<T>,
    tolerance: T,
) -> Result<Complex<T>>
where
    T: Real,
    A: FormCoefficients<T> + ?Sized,
    B: FormCoefficients<T> + ?Sized,
{
    if first.is_antiholomorphic() != second.is_antiholomorphic() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let anti = first.is_antiholomorphic();
    let two = lit::<T>(2.0);
    let integrand = |zeta: Complex<T>| {
        let w = map.eval_unchecked(zeta);
        let dw = map.derivative_unchecked(zeta);
        let a = first.coefficient(w) * dw;
        let b = second.coefficient(w) * dw;
        if anti {
            a.conj() * b * two
        } else {
            a * b.conj() * two
        }
    };
    let coarse = grid.integrate(integrand)?;
    let fine = grid.refined()?.integrate(integrand)?;
    let difference = (fine - coarse).norm();
    let scale = T::one().max(fine.norm());
    if difference > tolerance * scale {
        return Err(Error::QuadratureDisagreement {
            difference: super::to_f64(difference),
            tolerance: super::to_f64(tolerance * scale),
        });
    }
    Ok(fine)
}
