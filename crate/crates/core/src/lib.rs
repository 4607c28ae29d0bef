//! Symmetric-hyperbolic formulations of upper-convected Maxwell
//! viscoelasticity and polyconvex elastodynamics in 2D Lagrangian form.

pub mod error;
pub mod material;
pub mod relaxation;
pub mod scenarios;
pub mod solver;
pub mod symmetrizer;
pub mod system;
pub mod tensor;

pub use error::{Error, Result};
