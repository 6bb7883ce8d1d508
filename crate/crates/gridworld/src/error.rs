use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown prior `{0}`; expected one of BD, DD, half, correlated")]
    UnknownPrior(String),

    #[error("unknown agent `{0}`; expected one of {1}")]
    UnknownAgent(String, String),

    #[error("{0} must be at least 1")]
    Zero(&'static str),

    #[error("posterior {0} for the mother's answer has no belief state")]
    Unrepresentable(String),

    #[error(transparent)]
    Core(#[from] rewardrig_core::Error),
}
