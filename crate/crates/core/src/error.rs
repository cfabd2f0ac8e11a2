use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside the domain ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// Adaptive integration stopped before reaching the requested tolerance.
    /// The best estimate is attached.
    #[error("integration did not converge: estimate {estimate:e} with error {abs_error:e}")]
    Accuracy { estimate: f64, abs_error: f64 },

    #[error("at least two samples are needed to estimate an error, got {0}")]
    TooFewSamples(u64),

    #[error("dt * max collapse eigenvalue = {0} exceeds the stability limit 0.1")]
    Unstable(f64),

    #[error("density matrix left the positive cone: smallest eigenvalue {0:e}")]
    Positivity(f64),

    /// Too few surviving samples to form an estimate.
    #[error("statistics unreliable: {0}")]
    Unreliable(&'static str),

    #[error("{0}")]
    Invalid(&'static str),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            requirement,
        }
    }
}
