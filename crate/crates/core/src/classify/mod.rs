//! Riggable / unriggable / uninfluenceable classification and reward-sacrifice detection.

mod sacrifice;
mod uninfluenceable;
mod unriggable;

pub use sacrifice::{check_sacrifice, find_sacrifice, ImageMode, SacrificeHit, SacrificeVerdict};
pub use uninfluenceable::{
    check_uninfluenceable, check_uninfluenceable_with_cap, infer_process, EnvConditional, InfluenceVerdict,
    DEFAULT_LP_VARIABLE_CAP,
};
pub use unriggable::{check_unriggable, check_unriggable_oracle, RiggingWitness, UnrigVerdict};
