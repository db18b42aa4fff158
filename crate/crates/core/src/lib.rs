//! Eigenvalue diffusions of invariant matrix ensembles in non-confining
//! potentials.
//!
//! The library covers two one-parameter families of potentials on the real
//! line: a cubic `V_a(x) = x^3/3 - a x` tilted by `a`, and a quartic
//! `U_g(x) = x^2/2 + g x^4` with a destabilizing quartic coefficient
//! `g < 0`. In both families the potential well is only metastable, yet the
//! associated N-particle eigenvalue diffusion admits a stationary spectral
//! density once the escaping particles are recycled (cubic) or killed.
//!
//! Modules:
//! - [`model`]: potentials, drifts, critical couplings.
//! - [`cubicsolve`]: closed-form real-coefficient cubic roots and the
//!   distinguished saddle roots used by the stationary solutions.
//! - [`equilibrium`]: stationary Stieltjes transforms, spectral densities
//!   and stationary flux rates.
//! - [`stieltjes`]: branch-cut square root, quadrature Stieltjes
//!   transforms, density inversion, principal values, Nevanlinna checks.
//! - [`dynamics`]: Burgers evolution of the Stieltjes transform by
//!   characteristics.
//! - [`simulate`]: finite-N stochastic engines (eigenvalue SDE and full
//!   matrix Langevin) with explosion restart/kill handling.
//! - [`analysis`]: histograms, L1 distances, tail and edge-exponent fits.
//! - [`output`]: deterministic CSV/JSON/SVG emission helpers.
//! - [`verify`]: the end-to-end verification suite.

pub mod analysis;
pub mod cubicsolve;
pub mod dynamics;
pub mod equilibrium;
pub mod model;
pub mod output;
pub mod simulate;
pub mod stieltjes;
pub mod svg;
pub mod verify;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside a routine's domain of validity.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An iterative routine failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// Requested solution does not exist (e.g. no probability density).
    #[error("no solution: {0}")]
    NoSolution(String),
    /// Filesystem or serialization failure while emitting artifacts.
    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
