//! Weak Galerkin discretization of the 2D time-harmonic Maxwell equations in
//! electric-field and magnetic-field saddle-point form.

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod cli;
pub mod error;
pub mod manufactured;
pub mod mesh;
pub mod solver;
pub mod weakops;

pub use error::{Error, Result};
pub use num_complex::Complex64;
