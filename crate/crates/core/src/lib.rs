//! Solvers and verifiers for expected variational inequalities over polytopes.

pub mod analysis;
pub mod endomap;
pub mod error;
pub mod evicore;
pub mod games;
pub mod io;
pub mod linsolve;
pub mod polytope;
pub mod solvers;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::ToleranceConfig;
