//! First-party linear algebra: sparse complex storage, a sparse Hermitian
//! `LDLᴴ` with RCM preordering, and dense Hermitian eigen-kernels.

pub mod csc;
pub mod dense;
pub mod ldlt;

pub use csc::CscMatrix;
pub use dense::{CMat, DenseError};
pub use ldlt::{FactorError, LdltFactor};
