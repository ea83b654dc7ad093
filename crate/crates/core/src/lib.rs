//! Electric and magnetic potential fields of images.
//!
//! Pixels are treated as charges; potentials are the convolution of the
//! image with a kernel `1/r^(n-2)` (or `-ln r` for `n = 2`). On top of that
//! sit a shape analyser that picks out concave/convex regions and centre
//! points from on-contour potential and field values, and a stroke
//! analyser that magnetizes thin strokes along their orientation.

pub mod convolve;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod oracle;
mod par;
pub mod shape;
pub mod stroke;
pub mod synth;

pub use convolve::{convolve_same, Engine};
pub use error::{Error, Result};
pub use field::{
    check_gauss_closure, electric_field, electric_potential, magnetic_potential, ChargeImage,
    FieldMap, FieldOptions, GaussReport, KernelSize, MagneticResult,
};
pub use grid::{ComplexGrid, Connectivity, Mask, RealGrid};
pub use kernel::{build_kernel, KernelKind, KernelSpec, PotentialKernel};
pub use par::is_parallel;
