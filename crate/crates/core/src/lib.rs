//! Incompressible Navier-Stokes flow on compact surfaces (unit sphere, flat
//! torus) in vorticity-streamfunction form, with a selectable vector
//! diffusion operator (Bochner, Hodge, deformation) and a diagnostic suite
//! built around Killing fields.

pub mod diagnostics;
pub mod error;
mod gauss;
pub mod geometry;
pub mod killing;
pub mod operators;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use gauss::gauss_legendre;
