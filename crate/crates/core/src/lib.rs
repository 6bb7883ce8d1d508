//! Exact rational analysis of reward-function learning processes: histories
//! and priors, learning processes and their values, the riggable /
//! unriggable / uninfluenceable classification, and the constructions that
//! turn one kind of process into another.

pub mod classify;
pub mod constructions;
pub mod environment;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod policy;
pub mod probability;
pub mod process;
pub mod random;
pub mod rational;
pub mod reward;
pub mod scenario;
pub mod simplex;
pub mod spec;
pub mod value;

pub use environment::{Environment, Prior};
pub use error::{Error, Result};
pub use policy::Policy;
pub use process::LearningProcess;
pub use rational::Rational;
pub use reward::RewardFunction;
pub use scenario::Scenario;
pub use spec::{Action, History, HorizonSpec, Obs};
