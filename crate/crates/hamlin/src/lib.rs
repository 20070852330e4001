//! Numerical toolkit for Hamiltonian block encodings: product formulas,
//! group-commutator multiplication, dominated polynomial approximation,
//! singular value transformation, overlap estimation and fermionic
//! sum-of-squares simulation, all checked against dense matrix oracles.

pub mod blockenc;
pub mod corela;
pub mod error;
pub mod estimate;
pub mod fermions;
pub mod formulas;
pub mod hqsvt;
pub mod polyapprox;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
