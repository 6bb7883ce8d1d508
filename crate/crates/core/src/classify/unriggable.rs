use std::fmt;

use num_traits::Zero;

use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::policy::{enumerate_deterministic_policies, Policy};
use crate::probability::PredictiveTable;
use crate::process::LearningProcess;
use crate::reward::RewardFunction;
use crate::spec::{Action, History};
use crate::value::{extend_expectation, one_step, ExtendedExpectation};

/// A possible history where the choice of action changes the expected
/// reward function: `E_a(h) ≠ E_a'(h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiggingWitness {
    pub history: History,
    pub action: Action,
    pub alternative: Action,
    /// `Σ_o P(o | h a, ξ) E(h a o)`.
    pub expectation: RewardFunction,
    /// The same for the alternative action.
    pub alternative_expectation: RewardFunction,
    /// A complete history where the two expectations differ.
    pub differing_at: History,
}

impl fmt::Display for RiggingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = self.expectation.spec();
        let h = spec.format_history(&self.history);
        let h = if h.is_empty() {
            "the empty history".to_string()
        } else {
            format!("`{h}`")
        };
        write!(
            f,
            "at {h}, action `{}` leads to expected reward {:?} but `{}` leads to {:?} (they differ at `{}`)",
            spec.action_name(self.action),
            self.expectation,
            spec.action_name(self.alternative),
            self.alternative_expectation,
            spec.format_history(&self.differing_at),
        )
    }
}

impl RiggingWitness {
    fn new(history: History, action: Action, alternative: Action, e1: RewardFunction, e2: RewardFunction) -> Self {
        let spec = e1.spec().clone();
        let differing_at = spec
            .complete_histories()
            .iter()
            .zip(e1.values().iter().zip(e2.values()))
            .find(|(_, (x, y))| x != y)
            .map(|(h, _)| h.clone())
            .expect("witness expectations differ somewhere");
        RiggingWitness {
            history,
            action,
            alternative,
            expectation: e1,
            alternative_expectation: e2,
            differing_at,
        }
    }

    /// Recomputes both one-step expectations from scratch via the defining
    /// sums and checks that they still differ.
    pub fn verify(&self, rho: &LearningProcess, prior: &Prior) -> Result<bool> {
        let spec = rho.spec();
        let mut exps = Vec::new();
        for a in [self.action, self.alternative] {
            let pred = prior.predictive(&self.history, a)?;
            let mut total = RewardFunction::zero(spec.clone());
            for o in spec.observations() {
                if pred[o.0].is_zero() {
                    continue;
                }
                let child = self.history.child(a, o);
                // any policy works below a witness: its descendants are unriggable
                let pol = Policy::constant(spec.clone(), Action(0));
                let e = crate::value::extended_expectation_at(&child, rho, &pol, prior)?;
                total = total.plus(&e.scaled(&pred[o.0]))?;
            }
            exps.push(total);
        }
        Ok(exps[0] == self.expectation
            && exps[1] == self.alternative_expectation
            && exps[0].value(&self.differing_at) != exps[1].value(&self.differing_at))
    }
}

#[derive(Clone, Debug)]
pub struct UnrigVerdict {
    pub unriggable: bool,
    /// The deepest failing node when riggable.
    pub witness: Option<RiggingWitness>,
    /// The policy-independent extended expectation when unriggable.
    pub extended: Option<ExtendedExpectation>,
}

impl UnrigVerdict {
    fn riggable(w: RiggingWitness) -> Self {
        UnrigVerdict {
            unriggable: false,
            witness: Some(w),
            extended: None,
        }
    }

    /// `Err(Error::Riggable)` unless unriggable.
    pub fn into_result(self) -> Result<ExtendedExpectation> {
        match (self.unriggable, self.witness, self.extended) {
            (true, _, Some(e)) => Ok(e),
            (_, Some(w), _) => Err(Error::Riggable(Box::new(w))),
            _ => unreachable!("verdicts carry a witness or an expectation"),
        }
    }
}

fn check_specs(rho: &LearningProcess, prior: &Prior) -> Result<()> {
    if **rho.spec() != **prior.spec() {
        return Err(Error::Domain("process and prior use different horizon specs".into()));
    }
    Ok(())
}

/// Bottom-up check that `E_a(h)` does not depend on `a` at any possible
/// interior history. Fails at the deepest offending node (first in index
/// order at that depth).
pub fn check_unriggable(rho: &LearningProcess, prior: &Prior) -> Result<UnrigVerdict> {
    check_specs(rho, prior)?;
    let spec = rho.spec().clone();
    let pred = PredictiveTable::new(prior);
    let mut values: Vec<Option<RewardFunction>> = vec![None; spec.history_count()];
    for h in spec.complete_histories() {
        if pred.is_possible(h) {
            values[spec.index(h)] = Some(rho.expectation(h)?);
        }
    }
    for m in (0..spec.horizon()).rev() {
        for h in spec.histories_of_len(m) {
            if !pred.is_possible(&h) {
                continue;
            }
            let per_action = spec
                .actions()
                .map(|a| one_step(&spec, &pred, &h, a, |c| values[spec.index(c)].as_ref()))
                .collect::<Result<Vec<_>>>()?;
            if let Some(k) = per_action.iter().position(|e| *e != per_action[0]) {
                let w = RiggingWitness::new(h, Action(0), Action(k), per_action[0].clone(), per_action[k].clone());
                return Ok(UnrigVerdict::riggable(w));
            }
            let i = spec.index(&h);
            values[i] = per_action.into_iter().next();
        }
    }
    Ok(UnrigVerdict {
        unriggable: true,
        witness: None,
        extended: Some(ExtendedExpectation::from_values(spec, None, values)),
    })
}

/// Independent check: enumerate deterministic policies and compare the
/// defining sums `Σ P(h_n | h_m, π, ξ) e_ρ(h_n)` across them at every
/// possible interior history, deepest first.
pub fn check_unriggable_oracle(rho: &LearningProcess, prior: &Prior, cap: u128) -> Result<UnrigVerdict> {
    check_specs(rho, prior)?;
    let spec = rho.spec().clone();
    let policies = enumerate_deterministic_policies(&spec, cap)?;
    for m in (0..spec.horizon()).rev() {
        for h in spec.histories_of_len(m) {
            if !prior.is_possible(&h) {
                continue;
            }
            let first = crate::value::extended_expectation_at(&h, rho, &policies[0], prior)?;
            for p in &policies[1..] {
                let e = crate::value::extended_expectation_at(&h, rho, p, prior)?;
                if e != first {
                    let a = policies[0].choice(&h).expect("deterministic");
                    let b = p.choice(&h).expect("deterministic");
                    // below the deepest failure the expectation depends only on the first action
                    let (a, b, e1, e2) = if a <= b { (a, b, first, e) } else { (b, a, e, first) };
                    return Ok(UnrigVerdict::riggable(RiggingWitness::new(h, a, b, e1, e2)));
                }
            }
        }
    }
    let pol = policies.into_iter().next().expect("at least one policy");
    let mut ext = extend_expectation(rho, prior, &pol)?;
    ext = ExtendedExpectation::from_values(
        spec.clone(),
        None,
        (0..spec.history_count())
            .map(|i| ext.get(&spec.history_at(i)).ok().cloned())
            .collect(),
    );
    Ok(UnrigVerdict {
        unriggable: true,
        witness: None,
        extended: Some(ext),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ParentalPrior};
    use crate::policy::DEFAULT_ENUMERATION_CAP;
    use crate::rational::ratio;
    use crate::reward::affine_combine;

    #[test]
    fn parental_verdicts() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let v = check_unriggable(&sc.process, &sc.prior).unwrap();
        assert!(v.unriggable);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        let half = affine_combine(&[(ratio(1, 2), &rb), (ratio(1, 2), &rd)]).unwrap();
        let e = v.extended.unwrap();
        assert_eq!(*e.get(&History::empty()).unwrap(), half);
        assert!(e.martingale_residual(&sc.prior).unwrap().is_zero());

        let sc = fixtures::parental(ParentalPrior::Xi3);
        let v = check_unriggable(&sc.process, &sc.prior).unwrap();
        assert!(!v.unriggable);
        let w = v.witness.unwrap();
        assert_eq!(w.history, History::empty());
        assert_eq!(sc.spec().action_name(w.action), "M");
        assert_eq!(sc.spec().action_name(w.alternative), "F");
        assert_eq!(w.expectation, rb);
        assert_eq!(w.alternative_expectation, rd);
        assert!(w.verify(&sc.process, &sc.prior).unwrap());
    }

    #[test]
    fn chess_is_unriggable() {
        let sc = fixtures::chess();
        assert!(check_unriggable(&sc.process, &sc.prior).unwrap().unriggable);
        assert!(
            check_unriggable_oracle(&sc.process, &sc.prior, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .unriggable
        );
    }

    #[test]
    fn oracle_examples() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        assert!(check_unriggable_oracle(&sc.process, &sc.prior, 100).unwrap().unriggable);
        let sc = fixtures::parental(ParentalPrior::Xi3);
        let v = check_unriggable_oracle(&sc.process, &sc.prior, 100).unwrap();
        assert!(!v.unriggable);
        assert!(v.witness.unwrap().verify(&sc.process, &sc.prior).unwrap());
        assert!(matches!(
            check_unriggable_oracle(&sc.process, &sc.prior, 1),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn single_action_spec_is_unriggable() {
        let s = crate::spec::HorizonSpec::new(["a"], ["x", "y"], 2).unwrap();
        let r1 = RewardFunction::from_fn(s.clone(), |h| crate::rational::int(h.observations()[0].0 as i64));
        let r2 = RewardFunction::from_fn(s.clone(), |h| crate::rational::int(h.observations()[1].0 as i64 * 3));
        let rho = LearningProcess::from_fn(s.clone(), |h| {
            if h.observations()[1].0 == 0 {
                vec![(r1.clone(), crate::rational::int(1))]
            } else {
                vec![(r2.clone(), crate::rational::int(1))]
            }
        })
        .unwrap();
        let env =
            crate::environment::Environment::stochastic("coin", s, |_, _| vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let prior = Prior::point_mass(vec![env], 0).unwrap();
        assert!(check_unriggable(&rho, &prior).unwrap().unriggable);
        assert!(check_unriggable_oracle(&rho, &prior, 10).unwrap().unriggable);
    }
}
