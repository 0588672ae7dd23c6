use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters violate a model or operation invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },

    /// An enumeration or memory budget would be exceeded.
    #[error("budget exceeded in {what}: {required} > {limit}")]
    Budget {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    /// Linearly dependent lattice basis.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The observation has zero likelihood under every hypothesis.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("ill-conditioned estimate: {0}")]
    IllConditioned(String),

    #[error("estimator `{name}` failed on trial {trial}: {source}")]
    Trial {
        name: String,
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown estimator `{name}`; registered estimators: {registry}")]
    UnknownEstimator { name: String, registry: String },

    #[error("estimator `{estimator}` does not apply to the {model} model")]
    Unsupported { estimator: String, model: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn budget(what: &'static str, required: u128, limit: u128) -> Self {
        Error::Budget {
            what,
            required,
            limit,
        }
    }

    /// True for configuration mistakes a user can fix by editing arguments.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Param { .. } | Error::UnknownEstimator { .. } | Error::Unsupported { .. }
        )
    }
}
