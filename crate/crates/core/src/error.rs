use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside the declared domain of a map, or an inverse
    /// evaluation failed to converge.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular Jacobian (|det| = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("singular velocity Hessian (|det| = {det:e})")]
    SingularHessian { det: f64 },

    /// The smallest two singular values of a lowering operator are too close
    /// to single out a ground state.
    #[error("degenerate kernel: smallest singular values {smallest:e} and {next:e}")]
    DegenerateKernel { smallest: f64, next: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("state left the admissible region at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
