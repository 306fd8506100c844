//! Exact mean-square errors, explicit error bounds and burn-in planning for
//! Markov chain Monte Carlo estimates of `S(f) = sum_x f(x) pi(x)` on finite,
//! reversible, ergodic chains.
//!
//! Conventions: the chain starts at `X_0 ~ nu`, runs `N = n + n0` transitions
//! and the estimator `S_{n,n0}(f)` averages `f(X_{n0+1}), ..., f(X_{n0+n})`.
//! Under this convention the error-transfer identity in [`exact`] is exact and
//! every bound in [`bounds`] applies as stated.

pub mod bounds;
pub mod burnin;
pub mod chain_file;
pub mod convergence;
pub mod error;
pub mod exact;
pub mod numeric;
pub mod simulate;
pub mod spectral;
pub mod suite;

pub use error::{CertifyError, Result};
pub use exact::EstimatorSpec;
pub use spectral::{
    Distribution, ErgodicChain, LpNorm, ReversibleChain, SpectralDecomposition, StateFunction,
    StateSpace, TransitionMatrix,
};

/// Numerical tolerances shared by validation and certification code.
pub mod tol {
    /// Row sums and distribution totals.
    pub const ROW_TOL: f64 = 1e-12;
    /// Detailed balance residual.
    pub const REV_TOL: f64 = 1e-10;
    /// Stationarity residual `max |piP - pi|`.
    pub const STAT_TOL: f64 = 1e-10;
    /// Spectral residuals (orthonormality, `P u = beta u`).
    pub const SPEC_TOL: f64 = 1e-8;
    /// Smallest admissible stationary mass; below it the density constants
    /// `||1/pi||_inf` and `||nu/pi - 1||_inf` certify nothing.
    pub const MIN_MASS: f64 = 1e-300;
}
