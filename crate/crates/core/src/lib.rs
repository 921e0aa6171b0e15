//! Passive discrete-time systems with Pontryagin state spaces.

pub mod colligation;
pub mod eigen;
pub mod error;
pub mod example;
pub mod indefinite;
pub mod io;
pub mod julia;
pub mod matrix;
pub mod products;
pub mod random;
pub mod sampling;
pub mod schur;

pub use error::{Error, Result};
