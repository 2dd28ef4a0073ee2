//! Numerical toolkit for minimal conformally flat hypersurfaces of R^4.
//!
//! Such hypersurfaces correspond to leaves of a three-dimensional distribution on an
//! algebraic variety in R^6. This crate samples the variety, traces leaves with the
//! flows of three commuting vector fields, rebuilds the hypersurface by integrating the
//! Gauss–Weingarten frame equations, and checks the result against closed-form cones
//! over the Clifford torus.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod integrator;
pub mod oracles;
pub mod parallel;
pub mod verify;
pub mod variety;

pub use error::{Error, Result};
