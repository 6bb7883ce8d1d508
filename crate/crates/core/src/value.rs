//! Extended expectations, policy values and optimal policies.

use std::sync::Arc;

use num_traits::Zero;

use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::probability::PredictiveTable;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::reward::{affine_combine, RewardFunction};
use crate::spec::{Action, History, HorizonSpec};

/// `E(h_m) = Σ_{h_n} P(h_n | h_m, π, ξ) e_ρ(h_n)` at every possible history.
#[derive(Clone, Debug)]
pub struct ExtendedExpectation {
    spec: Arc<HorizonSpec>,
    policy: Option<Policy>,
    /// By history index; `None` at histories impossible under the prior.
    values: Vec<Option<RewardFunction>>,
}

impl ExtendedExpectation {
    pub(crate) fn from_values(
        spec: Arc<HorizonSpec>,
        policy: Option<Policy>,
        values: Vec<Option<RewardFunction>>,
    ) -> Self {
        debug_assert_eq!(values.len(), spec.history_count());
        ExtendedExpectation { spec, policy, values }
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    /// The policy the expectation was extended with; `None` when it was
    /// certified policy-independent.
    pub fn policy(&self) -> Option<&Policy> {
        self.policy.as_ref()
    }

    pub fn get(&self, h: &History) -> Result<&RewardFunction> {
        self.spec.check(h)?;
        self.values[self.spec.index(h)]
            .as_ref()
            .ok_or_else(|| Error::UndefinedPosterior {
                history: self.spec.format_history(h),
            })
    }

    pub fn is_defined(&self, h: &History) -> bool {
        self.values[self.spec.index(h)].is_some()
    }

    /// `(history, E(history))` over every possible history, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (History, &RewardFunction)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|r| (self.spec.history_at(i), r)))
    }

    /// Largest `|Σ_o P(o | h a, ξ) E(h a o) − E(h)|` over possible interior
    /// `h`, every action `a` and every complete history; zero exactly when
    /// the one-step martingale identity holds everywhere.
    pub fn martingale_residual(&self, prior: &Prior) -> Result<Rational> {
        let pred = PredictiveTable::new(prior);
        let mut worst = Rational::zero();
        for i in 0..self.spec.decision_node_count() {
            let h = self.spec.history_at(i);
            let Some(here) = &self.values[i] else { continue };
            for a in self.spec.actions() {
                let step = one_step(&self.spec, &pred, &h, a, |c| self.values[self.spec.index(c)].as_ref())?;
                worst = worst.max(step.max_abs_diff(here)?);
            }
        }
        Ok(worst)
    }
}

/// `Σ_o P(o | h a, ξ) E(h a o)` over observations with positive predictive probability.
pub(crate) fn one_step<'a>(
    spec: &Arc<HorizonSpec>,
    pred: &PredictiveTable,
    h: &History,
    a: Action,
    child: impl Fn(&History) -> Option<&'a RewardFunction>,
) -> Result<RewardFunction> {
    let probs = pred.get(h, a)?;
    let mut terms = Vec::new();
    for o in spec.observations() {
        let p = &probs[o.0];
        if p.is_zero() {
            continue;
        }
        let c = h.child(a, o);
        let e = child(&c).ok_or_else(|| Error::UndefinedPosterior {
            history: spec.format_history(&c),
        })?;
        terms.push((p.clone(), e));
    }
    affine_combine(&terms)
}

fn check_specs(rho: &LearningProcess, prior: &Prior) -> Result<()> {
    if **rho.spec() != **prior.spec() {
        return Err(Error::Domain("process and prior use different horizon specs".into()));
    }
    Ok(())
}

fn check_policy(pol: &Policy, spec: &HorizonSpec) -> Result<()> {
    if **pol.spec() != *spec {
        return Err(Error::Domain("policy uses a different horizon spec".into()));
    }
    Ok(())
}

/// `e_ρ` extended to every possible history along `pol`, bottom-up.
pub fn extend_expectation(rho: &LearningProcess, prior: &Prior, pol: &Policy) -> Result<ExtendedExpectation> {
    check_specs(rho, prior)?;
    let spec = rho.spec().clone();
    check_policy(pol, &spec)?;
    let pred = PredictiveTable::new(prior);
    let mut values: Vec<Option<RewardFunction>> = vec![None; spec.history_count()];
    for h in spec.complete_histories() {
        if pred.is_possible(h) {
            values[spec.index(h)] = Some(rho.expectation(h)?);
        }
    }
    for i in (0..spec.decision_node_count()).rev() {
        let h = spec.history_at(i);
        if !pred.is_possible(&h) {
            continue;
        }
        let mut terms = Vec::new();
        for (a, pa) in pol.support(&h) {
            let e = one_step(&spec, &pred, &h, a, |c| values[spec.index(c)].as_ref())?;
            terms.push((pa, e));
        }
        let terms: Vec<(Rational, &RewardFunction)> = terms.iter().map(|(p, e)| (p.clone(), e)).collect();
        values[i] = Some(affine_combine(&terms)?);
    }
    Ok(ExtendedExpectation::from_values(spec, Some(pol.clone()), values))
}

/// `E(h_m)` straight from the defining sum over complete continuations.
pub fn extended_expectation_at(
    h_m: &History,
    rho: &LearningProcess,
    pol: &Policy,
    prior: &Prior,
) -> Result<RewardFunction> {
    check_specs(rho, prior)?;
    check_policy(pol, rho.spec())?;
    rho.spec().check(h_m)?;
    let cont = prior.continuation(h_m, pol)?;
    let exps: Vec<RewardFunction> = cont.iter().map(|(h, _)| rho.expectation(h)).collect::<Result<_>>()?;
    let terms: Vec<(Rational, &RewardFunction)> = cont.iter().zip(&exps).map(|((_, p), e)| (p.clone(), e)).collect();
    affine_combine(&terms)
}

/// `V(h_m, ρ, π, ξ) = Σ_{h_n} P(h_n | h_m, π, ξ) Σ_R P(R | h_n, ρ) R(h_n)`.
pub fn value(h_m: &History, rho: &LearningProcess, pol: &Policy, prior: &Prior) -> Result<Rational> {
    check_specs(rho, prior)?;
    check_policy(pol, rho.spec())?;
    rho.spec().check(h_m)?;
    let eff = rho.effective_reward();
    Ok(prior
        .continuation(h_m, pol)?
        .iter()
        .fold(Rational::zero(), |acc, (h, p)| acc + p * eff.value(h)))
}

/// The same value by backward induction on `R^ρ`.
pub fn value_by_backward_induction(
    h_m: &History,
    rho: &LearningProcess,
    pol: &Policy,
    prior: &Prior,
) -> Result<Rational> {
    check_specs(rho, prior)?;
    check_policy(pol, rho.spec())?;
    rho.spec().check(h_m)?;
    let pred = PredictiveTable::new(prior);
    if !pred.is_possible(h_m) {
        return Err(Error::UndefinedPosterior {
            history: rho.spec().format_history(h_m),
        });
    }
    let eff = rho.effective_reward();
    induct(rho.spec(), &pred, h_m, &eff, &|h| pol.support(h))
}

fn induct(
    spec: &Arc<HorizonSpec>,
    pred: &PredictiveTable,
    h: &History,
    eff: &RewardFunction,
    actions: &dyn Fn(&History) -> Vec<(Action, Rational)>,
) -> Result<Rational> {
    if h.len() == spec.horizon() {
        return Ok(eff.value(h).clone());
    }
    let mut v = Rational::zero();
    for (a, pa) in actions(h) {
        let probs = pred.get(h, a)?;
        for o in spec.observations() {
            if !probs[o.0].is_zero() {
                v += &pa * &probs[o.0] * induct(spec, pred, &h.child(a, o), eff, actions)?;
            }
        }
    }
    Ok(v)
}

/// Optimal action values by backward induction on `R^ρ` at every possible
/// decision node; `None` at impossible ones.
#[derive(Clone, Debug)]
pub struct OptimalSolution {
    pub policy: Policy,
    /// `V*(h)` by history index.
    pub values: Vec<Option<Rational>>,
    /// `Q*(h, a)` by decision-node index.
    pub action_values: Vec<Option<Vec<Rational>>>,
}

impl OptimalSolution {
    pub fn value_at(&self, h: &History) -> Option<&Rational> {
        self.values[self.policy.spec().index(h)].as_ref()
    }

    pub fn root_value(&self) -> &Rational {
        self.values[0].as_ref().expect("the empty history is always possible")
    }
}

/// Backward induction over the possible-history tree; ties go to the lowest
/// action index, and impossible nodes take action 0.
pub fn solve_optimal(rho: &LearningProcess, prior: &Prior) -> Result<OptimalSolution> {
    check_specs(rho, prior)?;
    let spec = rho.spec().clone();
    let pred = PredictiveTable::new(prior);
    let eff = rho.effective_reward();
    let mut values: Vec<Option<Rational>> = vec![None; spec.history_count()];
    for h in spec.complete_histories() {
        if pred.is_possible(h) {
            values[spec.index(h)] = Some(eff.value(h).clone());
        }
    }
    let mut choices = vec![Action(0); spec.decision_node_count()];
    let mut action_values = vec![None; spec.decision_node_count()];
    for i in (0..spec.decision_node_count()).rev() {
        let h = spec.history_at(i);
        if !pred.is_possible(&h) {
            continue;
        }
        let mut q = Vec::with_capacity(spec.num_actions());
        for a in spec.actions() {
            let probs = pred.get(&h, a)?;
            let mut v = Rational::zero();
            for o in spec.observations() {
                if !probs[o.0].is_zero() {
                    let c = values[spec.index(&h.child(a, o))]
                        .as_ref()
                        .expect("positive-probability children are possible");
                    v += &probs[o.0] * c;
                }
            }
            q.push(v);
        }
        let mut best = 0;
        for (a, v) in q.iter().enumerate() {
            if *v > q[best] {
                best = a;
            }
        }
        choices[i] = Action(best);
        values[i] = Some(q[best].clone());
        action_values[i] = Some(q);
    }
    Ok(OptimalSolution {
        policy: Policy::deterministic(spec, choices)?,
        values,
        action_values,
    })
}

/// `π^ρ`, a deterministic maximiser of `V(h_0, ρ, ·, ξ)`.
pub fn optimal_policy(rho: &LearningProcess, prior: &Prior) -> Result<Policy> {
    Ok(solve_optimal(rho, prior)?.policy)
}

/// `max_π V(h_0, ρ, π, ξ)`.
pub fn optimal_value(rho: &LearningProcess, prior: &Prior) -> Result<Rational> {
    Ok(solve_optimal(rho, prior)?.root_value().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ParentalPrior};
    use crate::policy::enumerate_deterministic_policies;
    use crate::rational::{int, ratio};

    fn ask(sc: &crate::scenario::Scenario, who: &str) -> Policy {
        Policy::constant(sc.spec().clone(), sc.spec().action_by_name(who).unwrap())
    }

    #[test]
    fn extended_expectation_examples() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        let half = affine_combine(&[(ratio(1, 2), &rb), (ratio(1, 2), &rd)]).unwrap();
        for who in ["M", "F"] {
            let e = extend_expectation(&sc.process, &sc.prior, &ask(&sc, who)).unwrap();
            assert_eq!(*e.get(&History::empty()).unwrap(), half);
        }

        let sc = fixtures::parental(ParentalPrior::Xi3);
        let em = extend_expectation(&sc.process, &sc.prior, &ask(&sc, "M")).unwrap();
        assert_eq!(*em.get(&History::empty()).unwrap(), rb);
        let ef = extend_expectation(&sc.process, &sc.prior, &ask(&sc, "F")).unwrap();
        assert_eq!(*ef.get(&History::empty()).unwrap(), rd);
        let md = sc.spec().parse_history("MD").unwrap();
        assert!(matches!(em.get(&md), Err(Error::UndefinedPosterior { .. })));
    }

    #[test]
    fn value_examples() {
        let h0 = History::empty();
        let sc = fixtures::parental(ParentalPrior::Xi3);
        assert_eq!(value(&h0, &sc.process, &ask(&sc, "M"), &sc.prior).unwrap(), int(10));
        assert_eq!(value(&h0, &sc.process, &ask(&sc, "F"), &sc.prior).unwrap(), int(1));
        let sc2 = fixtures::parental(ParentalPrior::Xi2);
        assert_eq!(
            value(&h0, &sc2.process, &ask(&sc2, "M"), &sc2.prior).unwrap(),
            ratio(11, 2)
        );
        let md = sc.spec().parse_history("MD").unwrap();
        assert!(matches!(
            value(&md, &sc.process, &ask(&sc, "M"), &sc.prior),
            Err(Error::UndefinedPosterior { .. })
        ));
    }

    #[test]
    fn optimal_policy_examples() {
        let sc = fixtures::parental(ParentalPrior::Xi3);
        let sol = solve_optimal(&sc.process, &sc.prior).unwrap();
        assert_eq!(sol.policy, ask(&sc, "M"));
        assert_eq!(*sol.root_value(), int(10));

        let sc = fixtures::parental(ParentalPrior::Xi2);
        let sol = solve_optimal(&sc.process, &sc.prior).unwrap();
        assert_eq!(sol.policy, ask(&sc, "M"));
        assert_eq!(*sol.root_value(), ratio(11, 2));

        let s = HorizonSpec::new(["only"], ["x", "y"], 2).unwrap();
        let r = RewardFunction::from_fn(s.clone(), |h| int(h.observations()[1].0 as i64));
        let env = crate::environment::Environment::deterministic("mu", s.clone(), |_| crate::spec::Obs(1));
        let prior = Prior::point_mass(vec![env], 0).unwrap();
        let sol = solve_optimal(&LearningProcess::point_mass(r), &prior).unwrap();
        assert_eq!(sol.policy, Policy::constant(s, Action(0)));
        assert_eq!(*sol.root_value(), int(1));
    }

    #[test]
    fn definition_sum_matches_induction_on_fixtures() {
        for sc in fixtures::all() {
            let pols = enumerate_deterministic_policies(sc.spec(), 64).unwrap();
            let best = optimal_value(&sc.process, &sc.prior).unwrap();
            for p in &pols {
                let h0 = History::empty();
                let v = value(&h0, &sc.process, p, &sc.prior).unwrap();
                assert_eq!(v, value_by_backward_induction(&h0, &sc.process, p, &sc.prior).unwrap());
                assert!(best >= v, "{}", sc.name);
                let e = extend_expectation(&sc.process, &sc.prior, p).unwrap();
                for (h, r) in e.iter() {
                    assert_eq!(*r, extended_expectation_at(&h, &sc.process, p, &sc.prior).unwrap());
                }
            }
        }
    }
}
