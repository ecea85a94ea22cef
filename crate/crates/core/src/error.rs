use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid input parameters (dimensions, material constants, time step…).
    #[error("configuration error: {0}")]
    Config(String),

    /// Degenerate or inverted geometry.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// J ≤ 0 encountered while evaluating an element.
    #[error("inverted element {element} at quadrature point {qp} (J = {jacobian:e})")]
    InvertedElement {
        element: usize,
        qp: usize,
        jacobian: f64,
    },

    /// A mesh lookup returned nothing usable.
    #[error("query error: {0}")]
    Query(String),

    /// Mesh or state failed an invariant check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Two constraints disagree on the value of one degree of freedom.
    #[error("conflicting constraints on dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    /// The linear system could not be factorized.
    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    /// Newton iteration did not converge even after all time-step halvings.
    #[error("time step failed at t = {time} s after {halvings} halvings: {reason}")]
    StepFailure {
        time: f64,
        halvings: u32,
        reason: String,
        /// Residual norms of the last attempted Newton iteration sequence.
        history: alloc::vec::Vec<f64>,
    },

    /// A post-processing quantity is not defined for the given input.
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    /// The requested problem exceeds a guard (e.g. dense oracle size).
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
