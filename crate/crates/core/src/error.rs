use thiserror::Error;

/// Failures raised while building grids and form factors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("momentum cutoff must be positive and finite, got {0}")]
    NonPositiveCutoff(f64),
    #[error("node count must be even and at least 8, got {0}")]
    BadCount(usize),
    #[error("form factor width must be positive and finite, got {0}")]
    NonPositiveWidth(f64),
    #[error("form factor envelope has negligible mass on the grid ({0:e})")]
    DegenerateMass(f64),
    #[error("form factor length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Failures raised by the self-consistency solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("mean-field iteration did not converge (last Δ_M = {last}, residual = {residual:e})")]
    MeanFieldNonConvergence { last: f64, residual: f64 },
    #[error("no transition in range [{t_lo}, {t_hi}]: mixed branch at T_lo = {exists_lo}, at T_hi = {exists_hi}")]
    NoTransition {
        t_lo: f64,
        t_hi: f64,
        exists_lo: bool,
        exists_hi: bool,
    },
    #[error("bound requires λ_B < 0, got {0}")]
    BoundRequiresAttraction(f64),
}

/// Failures raised by the exact Fock-space oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("mode set must hold between 1 and {max} pairs, got {got}")]
    PairCount { max: usize, got: usize },
    #[error("mode parameters must be finite")]
    NonFinite,
}

/// Failures raised by the scaling-limit probe.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("insufficient dynamic range: {usable} usable ladder points, need at least {required}")]
    InsufficientDynamicRange { usable: usize, required: usize },
}

/// Failures raised while validating a sweep.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("a sweep takes at most 2 axes, got {0}")]
    TooManyAxes(usize),
    #[error("axis {0} appears more than once")]
    DuplicateAxis(&'static str),
    #[error("axis {name} needs at least 2 steps, got {steps}")]
    TooFewSteps { name: &'static str, steps: usize },
    #[error("axis {0} bounds must be finite")]
    NonFiniteBounds(&'static str),
}
