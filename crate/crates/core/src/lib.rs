pub mod conformal;
pub mod error;
pub mod faber;
pub mod io;
pub mod numerics;
pub mod schiffer;
pub mod series;
pub mod surface;

pub use error::{Error, Result};

/// Double-precision complex scalar used above the numerics layer.
pub type C64 = num_complex::Complex<f64>;

/// Cap map over `f64`.
pub type Map64 = conformal::ConformalMap<f64>;
/// Cap family over `f64`.
pub type CapFamily64 = conformal::CapFamily<f64>;
/// Circle quadrature over `f64`.
pub type Contour64 = numerics::CircleContour<f64>;
/// Disk area quadrature over `f64`.
pub type DiskGrid64 = numerics::DiskGrid<f64>;
