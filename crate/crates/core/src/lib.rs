//! Numerical convex geometry and affine functional inequalities.

pub mod affine_energy;
pub mod bodies;
pub mod error;
pub mod funcspace;
pub mod inequalities;
pub mod linalg;
pub mod normalization;
pub mod optim;
pub mod qmc;
pub mod scenario;
pub mod spherequad;

pub use error::{Error, Result};
