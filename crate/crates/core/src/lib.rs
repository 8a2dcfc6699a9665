//! Pattern selection by moving triggers in the complex Ginzburg-Landau
//! equation.

pub mod banded;
pub mod continuation;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod ode;
pub mod scaling;
pub mod blowup;
pub mod predict;
pub mod simulate;

pub use dispersion::CGLParams;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scaling::ScaledParams;
