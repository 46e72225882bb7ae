use thiserror::Error;

/// Failure modes of the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// A quadrature did not reach its tolerance.
    #[error("accuracy error: {quantity} did not converge (error estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    Accuracy {
        quantity: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A computation would exceed its configured work or memory budget.
    #[error("resource budget exceeded: {what} needs {required} but the budget is {budget}")]
    Budget {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    /// A quantity that is real or positive analytically came out otherwise.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// The master-equation integrator drifted beyond its tolerance.
    #[error("integrator accuracy error: {what} = {value:.3e}; try a smaller step")]
    Integrator { what: &'static str, value: f64 },

    /// Evaluating a curve failed at one interval.
    #[error("evaluation at tau = {tau} failed: {source}")]
    Evaluation { tau: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>) -> Self {
        Error::Domain {
            what,
            value: value.into(),
        }
    }

    pub(crate) fn at_tau(tau: f64, source: Error) -> Self {
        Error::Evaluation {
            tau,
            source: Box::new(source),
        }
    }

    /// The innermost error, looking through evaluation wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Evaluation { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
