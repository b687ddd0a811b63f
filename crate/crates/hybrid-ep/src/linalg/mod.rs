//! Dense linear algebra kernels: LAPACK-backed real nonsymmetric
//! eigendecomposition, a complex LU solver, and a Padé scaling-and-squaring
//! matrix exponential. Everything here works on small dense matrices
//! (dimension ≲ 100), so clarity wins over blocking tricks.

pub mod eig;
pub mod expm;
pub mod lu;

pub use eig::{eig, hermitian_eigenvalues, Eig};
pub use expm::matrix_exp;
pub use lu::{Lu, solve};
