//! Positivity-preserving finite volume solver for aggregation-diffusion equations.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod mesh;
pub mod model;
pub mod flux;
pub mod nonlocal;
pub mod reconstruct;
pub mod timestep;

pub use error::{Error, Result};
