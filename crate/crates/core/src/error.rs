use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FloquetError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    /// The matrix handed to the spectral solver is not symplectic. For
    /// propagators built by this crate this indicates an internal bug.
    #[error("matrix is not symplectic (max |M^T J M - J| = {deviation:e})")]
    NonSymplecticInput { deviation: f64 },

    #[error("parameters are dynamically stable (mu_L = {mu_l:e}); quantity is only defined in the unstable regime")]
    NotUnstable { mu_l: f64 },

    #[error("dominant eigenvector has vanishing q1 component (|u1| = {u1:e})")]
    DegenerateEigenvector { u1: f64 },

    #[error("insufficient data for fit: {points} points, at least {required} required")]
    InsufficientData { points: usize, required: usize },

    #[error("Riccati frame became singular (|det N| = {det:e})")]
    SingularN { det: f64 },

    #[error("RK4 step rejected at period {period}: parameter magnitude {magnitude:e} exceeds limit, use the exact propagator")]
    StepRejected { period: usize, magnitude: f64 },

    #[error("state is not normalizable (det Re Omega = {det:e})")]
    NonNormalizable { det: f64 },

    #[error("reduced kernel is outside the thermal family (Re chi / eta = {ratio})")]
    NotThermalForm { ratio: f64 },

    #[error("effective temperature undefined: reduced state is pure (eta = 0)")]
    Undefined,
}

pub type Result<T> = std::result::Result<T, FloquetError>;
