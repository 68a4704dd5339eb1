use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors returned by the synthesis, switching and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("control bounds must satisfy u1 >= 1 and u2 >= 1 (got u1 = {u1}, u2 = {u2})")]
    InvalidBounds { u1: f64, u2: f64 },

    #[error("target gamma must be finite and > 1 (got {0})")]
    InvalidTarget(f64),

    #[error("state leaves the domain x1 > 0 (x1 = {x1})")]
    OutOfDomain { x1: f64 },

    /// Closed-form propagation overflowed the floating range.
    #[error("closed-form propagation overflowed at t = {t}")]
    Overflow { t: f64 },

    /// Backward X-flow driven to the edge of the domain.
    #[error("flow reaches the domain limit x1 -> 0+ at t = {t}")]
    DomainLimit { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// X-arc from a YX junction with (x2/x1)^2 <= u1 never reaches a conjugate point.
    #[error("no conjugate time on X-arc: ratio s = {s} <= u1 = {u1}")]
    NoConjugateTime { s: f64, u1: f64 },

    #[error("conjugate time {tau} exceeds cap {cap}")]
    ConjugateTimeTooLarge { tau: f64, cap: f64 },

    /// A radicand in the switching-point maps is negative.
    #[error("infeasible switching configuration: {0}")]
    Infeasible(String),

    #[error("no turn ratio solves the transcendental equation for n = {n}")]
    NoSolution { n: u32 },

    #[error("root finder did not reach residual {tol} (best {residual})")]
    NoConvergence { tol: f64, residual: f64 },

    #[error("T_n - T_m does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("strategy with {n} turns is infeasible at gamma = {gamma}")]
    InfeasibleCandidate { n: u32, gamma: f64 },

    #[error("schedule has no switch to anchor the adjoint; pass an explicit anchor")]
    NotAnchorable,

    #[error("integration came within x1_min of the boundary (t = {t}, x1 = {x1})")]
    DomainProximity { t: f64, x1: f64 },

    #[error("invalid integration step {0}")]
    InvalidStep(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}
