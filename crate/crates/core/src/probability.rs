//! The history calculus as free functions over policies, environments and priors.

use crate::environment::{Environment, Prior};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::rational::Rational;
use crate::spec::{Action, History, Obs};

fn check_env(h: &History, env: &Environment) -> Result<()> {
    env.spec().check(h)
}

/// `P(h | π, μ)`; `1` for the empty history.
pub fn history_prob(h: &History, policy: &Policy, env: &Environment) -> Result<Rational> {
    check_env(h, env)?;
    if **policy.spec() != **env.spec() {
        return Err(Error::Domain(
            "policy and environment use different horizon specs".into(),
        ));
    }
    Ok(env.history_prob(h, policy))
}

/// `P(h | μ)`, the probability of `h` when its own actions are played.
pub fn history_prob_actions(h: &History, env: &Environment) -> Result<Rational> {
    check_env(h, env)?;
    Ok(env.history_prob_actions(h))
}

/// `P(h | ξ) = Σ_μ P(μ | ξ) P(h | μ)`.
pub fn prior_history_prob(h: &History, prior: &Prior) -> Result<Rational> {
    prior.spec().check(h)?;
    Ok(prior.history_prob(h))
}

/// `P(μ | h, ξ)` for the environment at `env_index`.
pub fn posterior_env(env_index: usize, h: &History, prior: &Prior) -> Result<Rational> {
    prior.spec().check(h)?;
    if env_index >= prior.len() {
        return Err(Error::Domain(format!("no environment with index {env_index}")));
    }
    Ok(prior.posterior(h)?.swap_remove(env_index))
}

/// `P(o | h a, ξ)`.
pub fn predictive(o: Obs, h: &History, a: Action, prior: &Prior) -> Result<Rational> {
    prior.spec().check(h)?;
    if h.len() >= prior.spec().horizon() {
        return Err(Error::Domain("no action follows a complete history".into()));
    }
    Ok(prior.predictive(h, a)?.swap_remove(o.0))
}

/// `P(o | h a, ξ)` for every possible decision node, action and observation,
/// computed in one pass down the possible-history tree.
#[derive(Clone, Debug)]
pub struct PredictiveTable {
    spec: std::sync::Arc<crate::spec::HorizonSpec>,
    possible: Vec<bool>,
    /// By decision-node index, then action, then observation.
    table: Vec<Option<Vec<Vec<Rational>>>>,
}

impl PredictiveTable {
    pub fn new(prior: &Prior) -> Self {
        let spec = prior.spec().clone();
        let mut out = PredictiveTable {
            possible: vec![false; spec.history_count()],
            table: vec![None; spec.decision_node_count()],
            spec,
        };
        let weights: Vec<Rational> = prior.weights().to_vec();
        if weights.iter().any(|w| !num_traits::Zero::is_zero(w)) {
            out.visit(prior, &History::empty(), weights);
        }
        out
    }

    fn visit(&mut self, prior: &Prior, h: &History, weights: Vec<Rational>) {
        use num_traits::Zero;
        self.possible[self.spec.index(h)] = true;
        if h.len() == self.spec.horizon() {
            return;
        }
        let total = crate::rational::sum(&weights);
        let mut rows = Vec::with_capacity(self.spec.num_actions());
        for a in self.spec.actions() {
            let mut row = Vec::with_capacity(self.spec.num_observations());
            for o in self.spec.observations() {
                let next: Vec<Rational> = prior
                    .envs()
                    .iter()
                    .zip(&weights)
                    .map(|(e, w)| {
                        if w.is_zero() {
                            Rational::zero()
                        } else {
                            w * e.obs_prob(h, a, o)
                        }
                    })
                    .collect();
                let mass = crate::rational::sum(&next);
                if !mass.is_zero() {
                    self.visit(prior, &h.child(a, o), next);
                }
                row.push(mass / &total);
            }
            rows.push(row);
        }
        self.table[self.spec.index(h)] = Some(rows);
    }

    pub fn spec(&self) -> &std::sync::Arc<crate::spec::HorizonSpec> {
        &self.spec
    }

    /// `P(h | ξ) > 0`.
    pub fn is_possible(&self, h: &History) -> bool {
        self.possible[self.spec.index(h)]
    }

    /// Possibility flags by history index.
    pub fn possible_flags(&self) -> &[bool] {
        &self.possible
    }

    /// `P(· | h a, ξ)`; undefined at impossible `h`.
    pub fn get(&self, h: &History, a: Action) -> Result<&[Rational]> {
        match self.table.get(self.spec.index(h)) {
            Some(Some(rows)) => Ok(&rows[a.0]),
            Some(None) => Err(Error::UndefinedPosterior {
                history: self.spec.format_history(h),
            }),
            None => Err(Error::Domain("no action follows a complete history".into())),
        }
    }
}
