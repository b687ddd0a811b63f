//! Simulation library for a flux qubit coupled to a small NV ensemble through
//! an asymmetric (non-Hermitian but quasi-Hermitian) ladder coupling.
//!
//! The model lives on the product space of a two-level qubit and a collective
//! spin `S = N/2`. The asymmetry parameter `alpha` scales the lowering half of
//! the coupling; sweeping it drives pairs of real eigenvalues through
//! exceptional points into complex-conjugate pairs, with the usual
//! non-Hermitian phenomenology downstream: power-law-corrected decay near the
//! EP, steady states selected by the largest imaginary part, and
//! Schrödinger-cat-like steady states on a locus where the steady spin
//! expectation collapses to zero.
//!
//! Everything is expressed in GHz and ns (no 2*pi baked in), matching the
//! zero-field-splitting scale `D = 2.88 GHz` of NV centers.
//!
//! Module map:
//! - [`params`]: model parameters, derived quantities, validation
//! - [`basis`]: parity-ordered product basis bookkeeping
//! - [`model`]: Hamiltonian assembly (spin form and bosonized form)
//! - [`analytic`]: closed-form N = 2 block spectra via the cubic resolvent
//! - [`linalg`]: dense eigensolver (LAPACK dgeev), LU solves, matrix exponential
//! - [`spectral`]: numerical spectra, multiset comparison, coalescence metrics
//! - [`epscan`]: exceptional-point location, cat locus, N-dependence collapse
//! - [`dynamics`]: non-unitary propagators (three independent routes) and decay fits
//! - [`observables`]: reduced densities, spin moments, squeezing, survival
//! - [`wigner`]: spin Wigner functions and cat-state decomposition


pub mod analytic;
pub mod basis;
pub mod dynamics;
pub mod epscan;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod params;
pub mod spectral;
pub mod wigner;

pub use params::{DerivedParams, ModelParams};

/// Errors surfaced by the library.
///
/// `Invalid` covers parameter/validation problems; `Numerical` covers
/// convergence failures and ill-conditioned requests (e.g. asking the
/// diagonalizing propagator route for a defective Hamiltonian).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
