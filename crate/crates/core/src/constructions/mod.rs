//! Constructions that turn one kind of learning process into another, each
//! verified exactly before its report is returned.

mod counterfactual;
mod relabel;
mod uninfluenceable;
mod unriggable;

use num_traits::Zero;

pub use counterfactual::{counterfactual_eta, counterfactual_process, Counterfactual};
pub use relabel::{apply_relabeling, sacrifice_relabeling, AffineRelabeling, Sacrifice, SacrificeRelabeling};
pub use uninfluenceable::{unriggable_to_uninfluenceable, verify_enlargement, Enlargement, Uninfluenceable};
pub use unriggable::{make_unriggable, translation_offsets, Unriggable};

use crate::classify::EnvConditional;
use crate::environment::Prior;
use crate::error::Result;
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::scenario::Scenario;
use crate::spec::History;

/// One named verification step.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest exact deviation, for checks that compare values.
    pub residual: Option<Rational>,
}

impl CheckResult {
    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            residual: None,
        }
    }

    /// Passes iff the residual is exactly zero.
    pub fn exact(name: impl Into<String>, residual: Rational) -> Self {
        CheckResult {
            name: name.into(),
            passed: residual.is_zero(),
            residual: Some(residual),
        }
    }
}

/// The policy pair and history of a demonstrated certain sacrifice.
#[derive(Clone, Debug)]
pub struct SacrificeDemo {
    pub history: History,
    pub optimal: Policy,
    pub better: Policy,
}

/// Output of a construction together with the checks run on it.
#[derive(Clone, Debug, Default)]
pub struct ConstructionReport {
    pub kind: String,
    pub process: Option<LearningProcess>,
    pub prior: Option<Prior>,
    pub eta: Option<EnvConditional>,
    pub relabeling: Option<AffineRelabeling>,
    pub sacrifice: Option<SacrificeDemo>,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
}

impl ConstructionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A construction selectable by name.
pub trait Construction: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Whether a default policy is used (falling back to the scenario's, then to action 0).
    fn uses_policy(&self) -> bool {
        false
    }
    fn run(&self, scenario: &Scenario, policy: Option<&Policy>) -> Result<ConstructionReport>;
}

static REGISTRY: [&dyn Construction; 4] = [&Counterfactual, &Unriggable, &Uninfluenceable, &Sacrifice];

pub fn registry() -> &'static [&'static dyn Construction] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static dyn Construction> {
    REGISTRY.iter().copied().find(|c| c.name() == name)
}

pub(crate) fn pick_policy(scenario: &Scenario, policy: Option<&Policy>) -> Policy {
    policy.cloned().unwrap_or_else(|| scenario.default_policy_or_first())
}
