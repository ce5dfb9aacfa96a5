//! Model computations around magnetic Dirac operators on contact manifolds:
//! Clifford algebra, Landau levels, Mehler kernels, return-map classification,
//! Weyl-algebra normal forms and two-sided trace comparisons.

pub mod clifford;
pub mod error;
pub mod gutzwiller;
pub mod heatkernel;
pub mod landau;
pub mod quad;
pub mod symplectic;
pub mod weylseries;

pub use error::{Error, Result};
