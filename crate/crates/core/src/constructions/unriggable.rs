use num_traits::One;

use super::{pick_policy, CheckResult, Construction, ConstructionReport};
use crate::classify::check_unriggable;
use crate::environment::Prior;
use crate::error::Result;
use crate::policy::Policy;
use crate::probability::PredictiveTable;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::simplex::{find_feasible, Feasibility};
use crate::spec::History;
use crate::value::{extend_expectation, one_step};

/// Cumulative translation `D(h)` at every history, by history index:
/// `D(h_0) = 0` and, below a possible `h_m`,
/// `D(h_m a o) = D(h_m) + E(h_m) − Σ_o' P(o' | h_m a, ξ) E(h_m a o')`
/// with `E` the expectation of `ρ` extended along `pol`. Impossible nodes
/// pass their offset on unchanged.
pub fn translation_offsets(rho: &LearningProcess, prior: &Prior, pol: &Policy) -> Result<Vec<RewardFunction>> {
    let spec = rho.spec().clone();
    let ext = extend_expectation(rho, prior, pol)?;
    let pred = PredictiveTable::new(prior);
    let mut offsets = vec![RewardFunction::zero(spec.clone()); spec.history_count()];
    for i in 0..spec.decision_node_count() {
        let h = spec.history_at(i);
        let here = offsets[i].clone();
        for a in spec.actions() {
            let d = if pred.is_possible(&h) {
                let step = one_step(&spec, &pred, &h, a, |c| ext.get(c).ok())?;
                here.plus(&ext.get(&h)?.minus(&step)?)?
            } else {
                here.clone()
            };
            for o in spec.observations() {
                offsets[spec.index(&h.child(a, o))] = d.clone();
            }
        }
    }
    Ok(offsets)
}

/// Translates the distribution at each `h_n` by `D(h_n)`, which makes the
/// process unriggable while keeping its expectation at `h_0` under `pol`.
pub fn make_unriggable(rho: &LearningProcess, prior: &Prior, pol: &Policy) -> Result<LearningProcess> {
    let spec = rho.spec().clone();
    let offsets = translation_offsets(rho, prior, pol)?;
    rho.translated(|h| offsets[spec.index(h)].clone(), |_| None)
}

/// Whether `r` lies in the affine hull of `pool`, and whether it lies in its convex hull.
pub(crate) fn hull_membership(pool: &[RewardFunction], r: &RewardFunction) -> (bool, bool) {
    let points: Vec<&[Rational]> = pool.iter().map(|p| p.values()).collect();
    let affine = crate::linalg::affine_coefficients(&points, r.values()).is_some();
    let mut rows: Vec<Vec<Rational>> = (0..r.values().len())
        .map(|k| pool.iter().map(|p| p.values()[k].clone()).collect())
        .collect();
    rows.push(vec![Rational::one(); pool.len()]);
    let mut rhs = r.values().to_vec();
    rhs.push(Rational::one());
    let convex = matches!(find_feasible(&rows, &rhs), Feasibility::Feasible(_));
    (affine, convex)
}

pub struct Unriggable;

impl Construction for Unriggable {
    fn name(&self) -> &'static str {
        "unriggable"
    }

    fn summary(&self) -> &'static str {
        "translate each history's distribution so the expected reward function becomes a martingale"
    }

    fn uses_policy(&self) -> bool {
        true
    }

    fn run(&self, scenario: &Scenario, policy: Option<&Policy>) -> Result<ConstructionReport> {
        let pol = pick_policy(scenario, policy);
        let (rho, prior) = (&scenario.process, &scenario.prior);
        let out = make_unriggable(rho, prior, &pol)?;
        let mut checks = Vec::new();
        let verdict = check_unriggable(&out, prior)?;
        checks.push(CheckResult::flag("output is unriggable", verdict.unriggable));
        if let Some(ext) = &verdict.extended {
            checks.push(CheckResult::exact(
                "martingale identity at every possible interior history",
                ext.martingale_residual(prior)?,
            ));
        }
        let before = extend_expectation(rho, prior, &pol)?;
        let after = extend_expectation(&out, prior, &pol)?;
        checks.push(CheckResult::exact(
            "expectation at the empty history under the default policy is preserved",
            before
                .get(&History::empty())?
                .max_abs_diff(after.get(&History::empty())?)?,
        ));
        let mut outside_convex = Vec::new();
        let mut all_affine = true;
        for r in out.image(Some(prior)) {
            let (affine, convex) = hull_membership(rho.pool(), &r);
            all_affine &= affine;
            if !convex {
                outside_convex.push(format!("{r:?}"));
            }
        }
        checks.push(CheckResult::flag(
            "image lies in the affine hull of the input pool",
            all_affine,
        ));
        let mut notes = Vec::new();
        let moved = out.pool().iter().filter(|r| !rho.pool().contains(r)).count();
        notes.push(format!("{moved} translated reward function(s) introduced"));
        if !outside_convex.is_empty() {
            notes.push(format!(
                "outside the convex hull of the input pool: {}",
                outside_convex.join(", ")
            ));
        }
        Ok(ConstructionReport {
            kind: self.name().into(),
            process: Some(out),
            prior: Some(prior.clone()),
            checks,
            notes,
            ..Default::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ParentalPrior};
    use crate::rational::{int, ratio};
    use crate::reward::affine_combine;

    #[test]
    fn translation_example_matches_the_worked_values() {
        let sc = fixtures::translation_example();
        let s = sc.spec().clone();
        let pol = sc.default_policy.clone().unwrap();
        let out = make_unriggable(&sc.process, &sc.prior, &pol).unwrap();
        let r = &sc.process.pool()[0];
        let r2 = sc.process.pool().iter().find(|x| *x != r).unwrap();
        let (r, r2) = if r.label() == Some("R") { (r, r2) } else { (r2, r) };
        let a2o = s.parse_history("a' o").unwrap();
        let a2o2 = s.parse_history("a' o'").unwrap();
        let left = affine_combine(&[(ratio(3, 2), r), (ratio(-1, 2), r2)]).unwrap();
        let mid = affine_combine(&[(ratio(1, 2), r), (ratio(1, 2), r2)]).unwrap();
        assert_eq!(out.prob(&a2o, &left), int(1));
        assert_eq!(out.prob(&a2o2, &mid), int(1));
        let ao = s.parse_history("a o").unwrap();
        assert_eq!(out.prob(&ao, r), int(1));
        assert!(check_unriggable(&out, &sc.prior).unwrap().unriggable);

        let points: Vec<&[Rational]> = vec![r.values(), r2.values()];
        let c = crate::linalg::affine_coefficients(&points, left.values()).unwrap();
        assert!(c.iter().any(num_traits::Signed::is_negative));
        assert_eq!(hull_membership(sc.process.pool(), &left), (true, false));
        let report = Unriggable.run(&sc, None).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn unriggable_input_is_unchanged() {
        for p in [ParentalPrior::Xi1, ParentalPrior::Xi2] {
            let sc = fixtures::parental(p);
            for a in sc.spec().actions() {
                let pol = Policy::constant(sc.spec().clone(), a);
                let out = make_unriggable(&sc.process, &sc.prior, &pol).unwrap();
                assert_eq!(out.pool(), sc.process.pool());
                for h in sc.spec().complete_histories() {
                    assert_eq!(out.distribution(h), sc.process.distribution(h));
                }
                assert!(translation_offsets(&sc.process, &sc.prior, &pol)
                    .unwrap()
                    .iter()
                    .all(RewardFunction::is_zero));
            }
        }
    }

    #[test]
    fn parental_xi3_ask_mother() {
        let sc = fixtures::parental(ParentalPrior::Xi3);
        let (rb, _) = fixtures::parental_rewards(sc.spec());
        let m = Policy::constant(sc.spec().clone(), sc.spec().action_by_name("M").unwrap());
        let out = make_unriggable(&sc.process, &sc.prior, &m).unwrap();
        for a in sc.spec().actions() {
            let p = Policy::constant(sc.spec().clone(), a);
            let e = extend_expectation(&out, &sc.prior, &p).unwrap();
            assert_eq!(*e.get(&History::empty()).unwrap(), rb);
        }
    }
}
