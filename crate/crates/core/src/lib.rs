//! Lubin–Tate coefficient polynomials for L = Q_{p²} (π = p, q = p²), a
//! finite-precision model of the torsion field K_n = L(t_n), a solver for the
//! period Ω, and checkers for the valuation formula val_p(P_k(Ω)) = w(k) and
//! the identities and congruences around it.

pub mod local_model;
pub mod lubin_tate;
pub mod monna;
pub mod omega_solver;
pub mod padic_core;
pub mod report;
pub mod series;
pub mod verifier;

pub use local_model::{LocalNum, Tower, TowerSpec};
pub use lubin_tate::{GaussProfile, LTModel, ModelKind};
pub use monna::{monna, w, PropertyReport};
pub use omega_solver::{OmegaCert, SolverConfig};
pub use padic_core::{IndexVector, Params, Rational, ValueV};
pub use report::{Status, VerdictRecord};
pub use series::{CoefficientRing, YPoly, ZSeries};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
