use std::sync::Arc;

use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::spec::HorizonSpec;

/// A learning process together with the prior it is analysed under.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub prior: Prior,
    pub process: LearningProcess,
    /// Default policy for constructions that need one.
    pub default_policy: Option<Policy>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, prior: Prior, process: LearningProcess) -> Result<Self> {
        if **prior.spec() != **process.spec() {
            return Err(Error::Domain("prior and process use different horizon specs".into()));
        }
        Ok(Scenario {
            name: name.into(),
            prior,
            process,
            default_policy: None,
        })
    }

    pub fn with_default_policy(mut self, policy: Policy) -> Result<Self> {
        if **policy.spec() != **self.spec() {
            return Err(Error::Domain("default policy uses a different horizon spec".into()));
        }
        self.default_policy = Some(policy);
        Ok(self)
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        self.prior.spec()
    }

    /// The explicit default policy, or the lowest-index deterministic one.
    pub fn default_policy_or_first(&self) -> Policy {
        self.default_policy
            .clone()
            .unwrap_or_else(|| Policy::constant(self.spec().clone(), crate::spec::Action(0)))
    }
}
