use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("phase list has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("constraint system with n = {n}, L = {len} is infeasible: {reason}")]
    Infeasible { n: usize, len: usize, reason: String },

    #[error("residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("Jacobian is singular (|det J| = {det:.3e})")]
    SingularJacobian { det: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("target γ = {gamma} is inconsistent with θ_T = {theta_t} and θ₀ = {theta0}")]
    GammaMismatch { gamma: f64, theta_t: f64, theta0: f64 },

    #[error("resource limit reached: {0}")]
    ResourceLimit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
