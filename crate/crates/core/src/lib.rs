//! Numerical workbench for finite-dimensional real operator algebras and real
//! Jordan operator algebras.
//!
//! Everything is represented concretely: elements are dense real matrices,
//! spaces are subspaces of `M_n` with a trace-orthonormal basis, and complex
//! objects live in the real block embedding `x + iy ↦ [[x, -y], [y, x]]`.

pub mod algebra;
pub mod catalog;
pub mod complexify;
pub mod cones;
pub mod error;
pub mod functionals;
pub mod maps;
pub mod matcore;
pub mod sampling;

mod dense;
mod optimize;

pub use error::{Error, Result};
pub use matcore::{RealMatrix, RectMatrix, ToleranceConfig};
