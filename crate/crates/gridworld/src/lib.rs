//! The parental-advice gridworld: a 4×3 grid where an agent may ask either
//! parent which career to pursue before walking to the money or the
//! stethoscope. Standard and counterfactual agents learn by tabular
//! Q-learning; an exact oracle gives the values they should converge to.

pub mod belief;
pub mod episode;
pub mod error;
pub mod formal;
pub mod grid;
pub mod oracle;
pub mod qlearn;
pub mod stats;

pub use belief::{lookup, registry, Belief, BeliefRule, PriorTag, World};
pub use episode::GridModel;
pub use error::{Error, Result};
pub use qlearn::{q_learning_run, QConfig, QTable, RunSeries};
pub use stats::{aggregate_runs, RunStats, SeriesStats};
