use thiserror::Error;

use crate::classify::RiggingWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Symbols, lengths or horizon specs that do not fit together.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or table that breaks its own invariants.
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    /// Conditioning on a history the prior assigns zero probability.
    #[error("posterior undefined: history `{history}` has zero probability under the prior")]
    UndefinedPosterior { history: String },

    #[error("{what} count {count} exceeds the enumeration cap {cap}")]
    SizeCap { what: &'static str, count: u128, cap: u128 },

    #[error("input process is riggable: {0}")]
    Riggable(Box<RiggingWitness>),

    #[error("input process is unriggable; {0}")]
    Unriggable(String),

    #[error("reward function is outside the relabeling domain (affine hull of its pool)")]
    OutsideDomain,
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}
