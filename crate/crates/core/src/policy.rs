use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::spec::{Action, History, HorizonSpec};

/// Default cap on the number of objects any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// A (possibly stochastic) choice of action at every history shorter than the horizon.
#[derive(Clone, Debug)]
pub struct Policy {
    spec: Arc<HorizonSpec>,
    rule: Rule,
}

#[derive(Clone, Debug, PartialEq)]
enum Rule {
    Deterministic(Vec<Action>),
    Stochastic(Vec<Vec<Rational>>),
}

impl PartialEq for Policy {
    fn eq(&self, other: &Self) -> bool {
        if self.spec != other.spec {
            return false;
        }
        match (&self.rule, &other.rule) {
            (Rule::Deterministic(a), Rule::Deterministic(b)) => a == b,
            _ => (0..self.spec.decision_node_count()).all(|i| {
                let h = self.spec.history_at(i);
                self.distribution(&h) == other.distribution(&h)
            }),
        }
    }
}

impl Policy {
    /// One action per decision node, in history-index order.
    pub fn deterministic(spec: Arc<HorizonSpec>, choices: Vec<Action>) -> Result<Self> {
        if choices.len() != spec.decision_node_count() {
            return Err(Error::invalid(
                "policy",
                format!("expected {} choices, got {}", spec.decision_node_count(), choices.len()),
            ));
        }
        if choices.iter().any(|a| a.0 >= spec.num_actions()) {
            return Err(Error::Domain("policy action outside the alphabet".into()));
        }
        Ok(Policy {
            spec,
            rule: Rule::Deterministic(choices),
        })
    }

    pub fn from_fn(spec: Arc<HorizonSpec>, choose: impl Fn(&History) -> Action) -> Self {
        let choices = (0..spec.decision_node_count())
            .map(|i| choose(&spec.history_at(i)))
            .collect();
        Policy {
            spec,
            rule: Rule::Deterministic(choices),
        }
    }

    pub fn stochastic_from_fn(spec: Arc<HorizonSpec>, dist: impl Fn(&History) -> Vec<Rational>) -> Result<Self> {
        let mut dists = Vec::with_capacity(spec.decision_node_count());
        for i in 0..spec.decision_node_count() {
            let h = spec.history_at(i);
            let d = dist(&h);
            if d.len() != spec.num_actions() || !rational::is_probability_vector(&d) {
                return Err(Error::invalid(
                    "policy",
                    format!(
                        "action distribution at `{}` is not a probability vector",
                        spec.format_history(&h)
                    ),
                ));
            }
            dists.push(d);
        }
        Ok(Policy {
            spec,
            rule: Rule::Stochastic(dists),
        })
    }

    pub fn constant(spec: Arc<HorizonSpec>, action: Action) -> Self {
        Self::from_fn(spec, |_| action)
    }

    /// Takes `seq[i]` on turn `i + 1` whatever was observed; the last action
    /// repeats if `seq` is shorter than the horizon. This is the policy `a(h)`.
    pub fn action_sequence(spec: Arc<HorizonSpec>, seq: &[Action]) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::invalid("policy", "empty action sequence"));
        }
        if seq.iter().any(|a| a.0 >= spec.num_actions()) {
            return Err(Error::Domain("policy action outside the alphabet".into()));
        }
        let seq = seq.to_vec();
        Ok(Self::from_fn(spec, move |h| seq[h.len().min(seq.len() - 1)]))
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.rule, Rule::Deterministic(_))
    }

    /// The action taken at `h` when the policy is deterministic there.
    pub fn choice(&self, h: &History) -> Option<Action> {
        match &self.rule {
            Rule::Deterministic(c) => Some(c[self.spec.index(h)]),
            Rule::Stochastic(d) => {
                let dist = &d[self.spec.index(h)];
                dist.iter().position(One::is_one).map(Action)
            }
        }
    }

    pub fn action_prob(&self, h: &History, a: Action) -> Rational {
        match &self.rule {
            Rule::Deterministic(c) => {
                if c[self.spec.index(h)] == a {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Rule::Stochastic(d) => d[self.spec.index(h)][a.0].clone(),
        }
    }

    pub fn distribution(&self, h: &History) -> Vec<Rational> {
        self.spec.actions().map(|a| self.action_prob(h, a)).collect()
    }

    /// Actions with positive probability at `h`.
    pub fn support(&self, h: &History) -> Vec<(Action, Rational)> {
        match &self.rule {
            Rule::Deterministic(c) => vec![(c[self.spec.index(h)], Rational::one())],
            Rule::Stochastic(d) => d[self.spec.index(h)]
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(i, p)| (Action(i), p.clone()))
                .collect(),
        }
    }

    /// A copy that plays `a` at `h` with certainty and is unchanged elsewhere.
    pub fn with_choice(&self, h: &History, a: Action) -> Policy {
        let idx = self.spec.index(h);
        let rule = match &self.rule {
            Rule::Deterministic(c) => {
                let mut c = c.clone();
                c[idx] = a;
                Rule::Deterministic(c)
            }
            Rule::Stochastic(d) => {
                let mut d = d.clone();
                d[idx] = (0..self.spec.num_actions())
                    .map(|i| if i == a.0 { Rational::one() } else { Rational::zero() })
                    .collect();
                Rule::Stochastic(d)
            }
        };
        Policy {
            spec: self.spec.clone(),
            rule,
        }
    }

    /// Deterministic choices per decision node, if deterministic.
    pub fn choices(&self) -> Option<&[Action]> {
        match &self.rule {
            Rule::Deterministic(c) => Some(c),
            Rule::Stochastic(_) => None,
        }
    }
}

/// `|A|^(number of decision nodes)`, saturating at `u128::MAX`.
pub fn deterministic_policy_count(spec: &HorizonSpec) -> u128 {
    let base = spec.num_actions() as u128;
    let mut count: u128 = 1;
    for _ in 0..spec.decision_node_count() {
        count = count.saturating_mul(base);
    }
    count
}

/// Every deterministic policy exactly once, in odometer order over decision nodes.
pub fn enumerate_deterministic_policies(spec: &Arc<HorizonSpec>, cap: u128) -> Result<Vec<Policy>> {
    let count = deterministic_policy_count(spec);
    if count > cap {
        return Err(Error::SizeCap {
            what: "deterministic policy",
            count,
            cap,
        });
    }
    let nodes = spec.decision_node_count();
    let na = spec.num_actions();
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; nodes];
    loop {
        out.push(Policy {
            spec: spec.clone(),
            rule: Rule::Deterministic(digits.iter().map(|&d| Action(d)).collect()),
        });
        // increment, last node fastest
        let mut pos = nodes;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < na {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn enumeration_counts() {
        let s = HorizonSpec::new(["M", "F"], ["B", "D"], 1).unwrap();
        assert_eq!(enumerate_deterministic_policies(&s, 1000).unwrap().len(), 2);
        let s = HorizonSpec::new(["only"], ["B", "D"], 3).unwrap();
        assert_eq!(enumerate_deterministic_policies(&s, 1000).unwrap().len(), 1);
        let s = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        let all = enumerate_deterministic_policies(&s, 1000).unwrap();
        assert_eq!(all.len(), 32);
        let distinct: HashSet<Vec<Action>> = all.iter().map(|p| p.choices().unwrap().to_vec()).collect();
        assert_eq!(distinct.len(), 32);
    }

    #[test]
    fn enumeration_cap() {
        let s = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        match enumerate_deterministic_policies(&s, 31) {
            Err(Error::SizeCap { count, .. }) => assert_eq!(count, 32),
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn action_sequence_policy_ignores_observations() {
        let s = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        let p = Policy::action_sequence(s.clone(), &[Action(1), Action(0)]).unwrap();
        assert_eq!(p.choice(&History::empty()), Some(Action(1)));
        for h in s.histories_of_len(1) {
            assert_eq!(p.choice(&h), Some(Action(0)));
        }
    }

    #[test]
    fn stochastic_policies_validate() {
        let s = HorizonSpec::new(["a", "b"], ["x"], 1).unwrap();
        let ok = Policy::stochastic_from_fn(s.clone(), |_| vec![rational::ratio(1, 3), rational::ratio(2, 3)]).unwrap();
        assert_eq!(ok.support(&History::empty()).len(), 2);
        assert!(Policy::stochastic_from_fn(s, |_| vec![rational::ratio(1, 3), rational::ratio(1, 3)]).is_err());
    }
}
