//! Environments, priors over finite environment sets, and the probability
//! calculus on histories that they induce.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::policy::{Policy, DEFAULT_ENUMERATION_CAP};
use crate::rational::{self, Rational};
use crate::spec::{Action, History, HorizonSpec, Obs};

#[derive(Clone, Debug)]
pub struct Environment {
    name: String,
    spec: Arc<HorizonSpec>,
    kernel: Kernel,
    deterministic: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Kernel {
    /// Observation on turn `l` as a function of the first `l` actions,
    /// indexed by [`HorizonSpec::action_sequence_index`].
    ActionDriven(Vec<Obs>),
    /// Distribution over observations per `(decision node, action)`.
    Table(Vec<Vec<Rational>>),
}

impl Environment {
    /// A deterministic environment whose `l`-th observation depends only on
    /// the first `l` actions.
    pub fn deterministic(name: impl Into<String>, spec: Arc<HorizonSpec>, observe: impl Fn(&[Action]) -> Obs) -> Self {
        let table = (1..=spec.horizon())
            .flat_map(|l| spec.action_sequences_of_len(l))
            .map(|seq| observe(&seq))
            .collect();
        Environment {
            name: name.into(),
            spec,
            kernel: Kernel::ActionDriven(table),
            deterministic: true,
        }
    }

    /// From an observation table indexed by action-sequence index.
    pub fn from_observation_table(name: impl Into<String>, spec: Arc<HorizonSpec>, table: Vec<Obs>) -> Result<Self> {
        if table.len() != spec.action_sequence_count() {
            return Err(Error::invalid(
                "environment",
                format!(
                    "observation table needs {} entries, got {}",
                    spec.action_sequence_count(),
                    table.len()
                ),
            ));
        }
        if table.iter().any(|o| o.0 >= spec.num_observations()) {
            return Err(Error::Domain("environment observation outside the alphabet".into()));
        }
        Ok(Environment {
            name: name.into(),
            spec,
            kernel: Kernel::ActionDriven(table),
            deterministic: true,
        })
    }

    /// A general environment; `kernel(h, a)` is the distribution of the next observation.
    pub fn stochastic(
        name: impl Into<String>,
        spec: Arc<HorizonSpec>,
        kernel: impl Fn(&History, Action) -> Vec<Rational>,
    ) -> Result<Self> {
        let name = name.into();
        let mut table = Vec::with_capacity(spec.decision_node_count() * spec.num_actions());
        for i in 0..spec.decision_node_count() {
            let h = spec.history_at(i);
            for a in spec.actions() {
                let d = kernel(&h, a);
                if d.len() != spec.num_observations() || !rational::is_probability_vector(&d) {
                    return Err(Error::invalid(
                        "environment",
                        format!(
                            "`{name}`: observation distribution after `{}` then `{}` is not a probability vector",
                            spec.format_history(&h),
                            spec.action_name(a)
                        ),
                    ));
                }
                table.push(d);
            }
        }
        let deterministic = table.iter().all(|d| d.iter().any(One::is_one));
        Ok(Environment {
            name,
            spec,
            kernel: Kernel::Table(table),
            deterministic,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `P(o | h a, μ)`.
    pub fn obs_prob(&self, h: &History, a: Action, o: Obs) -> Rational {
        match &self.kernel {
            Kernel::ActionDriven(table) => {
                let mut seq = h.actions();
                seq.push(a);
                if table[self.spec.action_sequence_index(&seq)] == o {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Kernel::Table(table) => table[self.spec.index(h) * self.spec.num_actions() + a.0][o.0].clone(),
        }
    }

    pub fn obs_distribution(&self, h: &History, a: Action) -> Vec<Rational> {
        self.spec.observations().map(|o| self.obs_prob(h, a, o)).collect()
    }

    /// Observation table by action-sequence index, for action-driven environments.
    pub fn observation_table(&self) -> Option<&[Obs]> {
        match &self.kernel {
            Kernel::ActionDriven(t) => Some(t),
            Kernel::Table(_) => None,
        }
    }

    /// `P(h_m | μ) = P(h_m | a(h_m), μ)`.
    pub fn history_prob_actions(&self, h: &History) -> Rational {
        let mut p = Rational::one();
        let mut prefix = History::empty();
        for &(a, o) in h.steps() {
            p *= self.obs_prob(&prefix, a, o);
            if p.is_zero() {
                break;
            }
            prefix = prefix.child(a, o);
        }
        p
    }

    /// `P(h_m | π, μ) = ∏ P(a_i | h^{i-1}, π) P(o_i | h^{i-1} a_i, μ)`.
    pub fn history_prob(&self, h: &History, policy: &Policy) -> Rational {
        let mut p = Rational::one();
        let mut prefix = History::empty();
        for &(a, o) in h.steps() {
            p *= policy.action_prob(&prefix, a) * self.obs_prob(&prefix, a, o);
            if p.is_zero() {
                break;
            }
            prefix = prefix.child(a, o);
        }
        p
    }
}

/// `|O|^(Σ_l |A|^l)`, saturating.
pub fn deterministic_environment_count(spec: &HorizonSpec) -> u128 {
    let base = spec.num_observations() as u128;
    let mut count: u128 = 1;
    for _ in 0..spec.action_sequence_count() {
        count = count.saturating_mul(base);
    }
    count
}

/// Name for a deterministic environment from its observation table:
/// `mu_BD` when observations are single characters, `mu_(BB)(DB)` otherwise.
pub fn table_name(spec: &HorizonSpec, table: &[Obs]) -> String {
    let names: Vec<&str> = table.iter().map(|&o| spec.obs_name(o)).collect();
    if names.iter().all(|n| n.chars().count() == 1) {
        format!("mu_{}", names.concat())
    } else {
        let parts: String = names.iter().map(|n| format!("({n})")).collect();
        format!("mu_{parts}")
    }
}

/// All deterministic environments, i.e. all prefix-consistent maps from
/// action sequences to observation sequences, in odometer order over the
/// action-sequence slots (first slot most significant).
pub fn enumerate_deterministic_environments(spec: &Arc<HorizonSpec>, cap: u128) -> Result<Vec<Environment>> {
    let count = deterministic_environment_count(spec);
    if count > cap {
        return Err(Error::SizeCap {
            what: "deterministic environment",
            count,
            cap,
        });
    }
    let slots = spec.action_sequence_count();
    let no = spec.num_observations();
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; slots];
    loop {
        let table: Vec<Obs> = digits.iter().map(|&d| Obs(d)).collect();
        let name = table_name(spec, &table);
        out.push(Environment {
            name,
            spec: spec.clone(),
            kernel: Kernel::ActionDriven(table),
            deterministic: true,
        });
        let mut pos = slots;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < no {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Convenience wrapper using [`DEFAULT_ENUMERATION_CAP`].
pub fn all_deterministic_environments(spec: &Arc<HorizonSpec>) -> Result<Vec<Environment>> {
    enumerate_deterministic_environments(spec, DEFAULT_ENUMERATION_CAP)
}

/// A rational-weighted mixture `ξ` over a finite environment set.
#[derive(Clone, Debug)]
pub struct Prior {
    spec: Arc<HorizonSpec>,
    envs: Vec<Environment>,
    weights: Vec<Rational>,
}

impl Prior {
    pub fn new(envs: Vec<Environment>, weights: Vec<Rational>) -> Result<Self> {
        let spec = envs
            .first()
            .ok_or_else(|| Error::invalid("prior", "no environments"))?
            .spec
            .clone();
        if envs.len() != weights.len() {
            return Err(Error::invalid("prior", "one weight per environment required"));
        }
        if envs.iter().any(|e| *e.spec != *spec) {
            return Err(Error::Domain(
                "environments in a prior must share one horizon spec".into(),
            ));
        }
        for (i, e) in envs.iter().enumerate() {
            if envs[..i].iter().any(|f| f.name == e.name) {
                return Err(Error::invalid("prior", format!("duplicate environment `{}`", e.name)));
            }
        }
        if !rational::is_probability_vector(&weights) {
            return Err(Error::invalid(
                "prior",
                format!(
                    "weights must be non-negative and sum to 1 (sum is {})",
                    rational::format(&rational::sum(&weights))
                ),
            ));
        }
        Ok(Prior { spec, envs, weights })
    }

    /// All mass on `envs[index]`.
    pub fn point_mass(envs: Vec<Environment>, index: usize) -> Result<Self> {
        let weights = (0..envs.len())
            .map(|i| if i == index { Rational::one() } else { Rational::zero() })
            .collect();
        Self::new(envs, weights)
    }

    pub fn uniform(envs: Vec<Environment>) -> Result<Self> {
        let w = rational::ratio(1, envs.len().max(1) as i64);
        let weights = vec![w; envs.len()];
        Self::new(envs, weights)
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    pub fn envs(&self) -> &[Environment] {
        &self.envs
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn env_index(&self, name: &str) -> Option<usize> {
        self.envs.iter().position(|e| e.name == name)
    }

    /// `P(μ | ξ) P(h | μ)` for every environment.
    pub fn joint_weights(&self, h: &History) -> Vec<Rational> {
        self.envs
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| {
                if w.is_zero() {
                    Rational::zero()
                } else {
                    w * e.history_prob_actions(h)
                }
            })
            .collect()
    }

    /// `P(h | ξ)`.
    pub fn history_prob(&self, h: &History) -> Rational {
        rational::sum(&self.joint_weights(h))
    }

    pub fn is_possible(&self, h: &History) -> bool {
        !self.history_prob(h).is_zero()
    }

    fn undefined(&self, h: &History) -> Error {
        Error::UndefinedPosterior {
            history: self.spec.format_history(h),
        }
    }

    /// `P(μ | h, ξ)` for every environment.
    pub fn posterior(&self, h: &History) -> Result<Vec<Rational>> {
        let joint = self.joint_weights(h);
        let total = rational::sum(&joint);
        if total.is_zero() {
            return Err(self.undefined(h));
        }
        Ok(joint.into_iter().map(|w| w / &total).collect())
    }

    /// `P(o | h a, ξ)` for every observation.
    pub fn predictive(&self, h: &History, a: Action) -> Result<Vec<Rational>> {
        let post = self.posterior(h)?;
        Ok(self
            .spec
            .observations()
            .map(|o| {
                self.envs
                    .iter()
                    .zip(&post)
                    .filter(|(_, p)| !p.is_zero())
                    .fold(Rational::zero(), |acc, (e, p)| acc + p * e.obs_prob(h, a, o))
            })
            .collect())
    }

    /// Complete histories `h_n ⊒ h_m` with `P(h_n | h_m, π, ξ) > 0`, with
    /// those probabilities (which sum to one).
    pub fn continuation(&self, from: &History, policy: &Policy) -> Result<Vec<(History, Rational)>> {
        let post = self.posterior(from)?;
        let mut out = Vec::new();
        self.continue_from(from, post, policy, &mut out);
        Ok(out)
    }

    fn continue_from(&self, h: &History, weights: Vec<Rational>, policy: &Policy, out: &mut Vec<(History, Rational)>) {
        if h.len() == self.spec.horizon() {
            out.push((h.clone(), rational::sum(&weights)));
            return;
        }
        for (a, pa) in policy.support(h) {
            for o in self.spec.observations() {
                let next: Vec<Rational> = self
                    .envs
                    .iter()
                    .zip(&weights)
                    .map(|(e, w)| {
                        if w.is_zero() {
                            Rational::zero()
                        } else {
                            w * &pa * e.obs_prob(h, a, o)
                        }
                    })
                    .collect();
                if next.iter().any(|w| !w.is_zero()) {
                    self.continue_from(&h.child(a, o), next, policy, out);
                }
            }
        }
    }

    /// `P(h_n | h_m, π, ξ)` for a single complete history.
    pub fn continuation_prob(&self, to: &History, from: &History, policy: &Policy) -> Result<Rational> {
        let post = self.posterior(from)?;
        if !from.is_prefix_of(to) {
            return Ok(Rational::zero());
        }
        let mut total = Rational::zero();
        for (e, w) in self.envs.iter().zip(post) {
            if w.is_zero() {
                continue;
            }
            let mut p = w;
            let mut prefix = from.clone();
            for &(a, o) in &to.steps()[from.len()..] {
                p *= policy.action_prob(&prefix, a) * e.obs_prob(&prefix, a, o);
                if p.is_zero() {
                    break;
                }
                prefix = prefix.child(a, o);
            }
            total += p;
        }
        Ok(total)
    }

    /// Possibility flag for every history, by [`HorizonSpec::index`].
    pub fn possible_histories(&self) -> Vec<bool> {
        let mut flags = vec![false; self.spec.history_count()];
        self.mark_possible(&History::empty(), self.weights.clone(), &mut flags);
        flags
    }

    fn mark_possible(&self, h: &History, weights: Vec<Rational>, flags: &mut [bool]) {
        flags[self.spec.index(h)] = true;
        if h.len() == self.spec.horizon() {
            return;
        }
        for a in self.spec.actions() {
            for o in self.spec.observations() {
                let next: Vec<Rational> = self
                    .envs
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
                if next.iter().any(|w| !w.is_zero()) {
                    self.mark_possible(&h.child(a, o), next, flags);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn deterministic_enumeration_counts() {
        let s = HorizonSpec::new(["M", "F"], ["B", "D"], 1).unwrap();
        let envs = all_deterministic_environments(&s).unwrap();
        let names: Vec<_> = envs.iter().map(|e| e.name().to_string()).collect();
        assert_eq!(names, ["mu_BB", "mu_BD", "mu_DB", "mu_DD"]);

        let s = HorizonSpec::new(["a"], ["x", "y"], 1).unwrap();
        assert_eq!(all_deterministic_environments(&s).unwrap().len(), 2);

        let s = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        assert_eq!(all_deterministic_environments(&s).unwrap().len(), 64);
        assert!(matches!(
            enumerate_deterministic_environments(&s, 63),
            Err(Error::SizeCap { count: 64, .. })
        ));
    }

    #[test]
    fn multi_char_names_are_parenthesized() {
        let s = HorizonSpec::new(["M", "F"], ["BB", "BD"], 1).unwrap();
        let envs = all_deterministic_environments(&s).unwrap();
        assert_eq!(envs[1].name(), "mu_(BB)(BD)");
    }

    #[test]
    fn stochastic_environment_validation() {
        let s = HorizonSpec::new(["a"], ["x", "y"], 1).unwrap();
        assert!(Environment::stochastic("coin", s.clone(), |_, _| vec![ratio(1, 2), ratio(1, 2)]).is_ok());
        assert!(Environment::stochastic("bad", s, |_, _| vec![ratio(1, 2), ratio(1, 3)]).is_err());
    }

    #[test]
    fn prior_rejects_bad_weights() {
        let s = HorizonSpec::new(["M", "F"], ["B", "D"], 1).unwrap();
        let envs = all_deterministic_environments(&s).unwrap();
        assert!(Prior::new(envs.clone(), vec![ratio(1, 2); 4]).is_err());
        assert!(Prior::new(envs, vec![ratio(3, 2), ratio(-1, 2), ratio(0, 1), ratio(0, 1)]).is_err());
    }
}
