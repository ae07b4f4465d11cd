//! Numerical laboratory for quantum Rényi divergences on finite-dimensional
//! algebras.

pub mod algebra;
pub mod divergences;
pub mod error;
pub mod fixtures;
pub mod gicar;
pub mod hypothesis;
pub mod io;
pub mod linalg;
pub mod measured;
pub mod optim;
pub mod random;
pub mod variational;

pub use divergences::{ExtReal, FdState};
pub use error::{Error, Result};
pub use linalg::{HermMatrix, Projection};
