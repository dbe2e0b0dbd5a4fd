use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("capacity exceeded: {needed} nodes requested, budget is {budget}")]
    Capacity { needed: usize, budget: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("factorization failed at pivot {pivot}: {reason}")]
    Factorization { pivot: usize, reason: String },

    #[error("subdomain {id}: {source}")]
    Subdomain {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("residual sparsity violated at iteration {iteration}: |r| = {value:e} outside the overlap support")]
    SparsityViolation { iteration: usize, value: f64 },

    #[error("linear algebra backend: {0}")]
    Backend(String),
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn in_subdomain(self, id: usize) -> Self {
        Error::Subdomain {
            id,
            source: Box::new(self),
        }
    }
}
