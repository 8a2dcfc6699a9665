//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Newton iteration did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("speed c = {c} is not below the linear spreading speed {c_lin}; no absolute-spectrum crossing")]
    NoCrossing { c: f64, c_lin: f64 },

    #[error("wavenumber |k| = {0} must be below 1")]
    InvalidWavenumber(f64),

    #[error("no root with |k| < 1 and negative group velocity")]
    NoAdmissibleRoot,

    #[error("two roots with |k| < 1 and negative group velocity: {0} and {1}")]
    Ambiguous(f64, f64),

    #[error("1 + alpha*gamma = {0} <= 0: the scaled formulation is unavailable, use the unscaled simulator")]
    BenjaminFeirRegime(f64),

    #[error("m^2 = {0} is not positive")]
    NonPositiveM(f64),

    #[error("no admissible wave-train equilibrium for the scaled parameters")]
    NoWaveTrain,

    #[error("unexpected number of unstable eigenvalues at the wave train: {0}")]
    UnstableDimension(usize),

    #[error("neither branch of the unstable manifold reached R = {delta} within zeta = {zeta_max}")]
    WrongBranch { delta: f64, zeta_max: f64 },

    #[error("degenerate front: |z_star + 1| = {0}")]
    DegenerateFront(f64),

    #[error("solution of the Riccati equation passes through z = infinity near zeta = {0}")]
    PoleOnPath(f64),

    #[error("speed c = {c} must be below c_lin = {c_lin}")]
    SpeedTooLarge { c: f64, c_lin: f64 },

    #[error("wavenumber expansion unavailable for alpha = gamma")]
    ExpansionUnavailable,

    #[error("the closed-form expansions are stated for chi_minus = 1 (got {0})")]
    UnsupportedTriggerLevel(f64),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("solution blew up at t = {t} (max |A| = {max_abs:.3e})")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("amplitude {min_abs:.3e} below 1e-3 inside the measurement window (defect present)")]
    AmplitudeTooSmall { min_abs: f64 },

    #[error("no point with |A| >= {0}")]
    NoInterface(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Newton solver diverged: {reason} (residual {residual:.3e} after {iterations} iterations)")]
    NewtonDiverged { reason: String, residual: f64, iterations: usize },

    #[error("singular linear system")]
    Singular,

    #[error("continuation step failed at c = {c}: {reason}")]
    StepFailure { c: f64, reason: String },

    #[error("continuation left the admissible domain: {0}")]
    BranchLeftDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
