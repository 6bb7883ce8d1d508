use num_traits::{One, Signed, Zero};

use super::{pick_policy, CheckResult, Construction, ConstructionReport};
use crate::classify::{check_uninfluenceable, check_unriggable, infer_process, EnvConditional};
use crate::environment::{Environment, Prior};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::spec::History;

/// `P(R | η_π, μ) = Σ_{h_n} P(h_n | π, μ) P(R | h_n, ρ)` for each environment.
pub fn counterfactual_eta(rho: &LearningProcess, pol: &Policy, envs: &[Environment]) -> Result<EnvConditional> {
    if **pol.spec() != **rho.spec() || envs.iter().any(|e| **e.spec() != **rho.spec()) {
        return Err(Error::Domain(
            "process, policy and environments must share one horizon spec".into(),
        ));
    }
    let mut dists = Vec::with_capacity(envs.len());
    for env in envs {
        let single = Prior::new(vec![env.clone()], vec![Rational::one()])?;
        let mut d: Vec<(RewardFunction, Rational)> = Vec::new();
        for (h, p) in single.continuation(&History::empty(), pol)? {
            for (i, w) in rho.distribution(&h) {
                d.push((rho.pool()[*i].clone(), &p * w));
            }
        }
        dists.push(d);
    }
    EnvConditional::new(envs.iter().map(|e| e.name().to_string()).collect(), dists)
}

/// `η_π` and the process `ρ_π` it induces under `prior`.
pub fn counterfactual_process(
    rho: &LearningProcess,
    pol: &Policy,
    prior: &Prior,
) -> Result<(EnvConditional, LearningProcess)> {
    let eta = counterfactual_eta(rho, pol, prior.envs())?;
    let process = infer_process(&eta, prior)?;
    Ok((eta, process))
}

/// Largest deviation of `Σ_μ P(R | η, μ) P(μ | h_n, ξ)` from `P(R | h_n, ρ)`
/// over possible complete histories, computed from the posterior directly.
pub(crate) fn inference_residual(eta: &EnvConditional, rho: &LearningProcess, prior: &Prior) -> Result<Rational> {
    let mut worst = Rational::zero();
    for h in rho.spec().complete_histories() {
        let Ok(post) = prior.posterior(h) else { continue };
        for r in rho.pool().iter().chain(eta.pool()) {
            let inferred = post
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (e, p)| acc + p * eta.prob(e, r));
            worst = worst.max((inferred - rho.prob(h, r)).abs());
        }
    }
    Ok(worst)
}

pub struct Counterfactual;

impl Construction for Counterfactual {
    fn name(&self) -> &'static str {
        "counterfactual"
    }

    fn summary(&self) -> &'static str {
        "uninfluenceable process from what a fixed default policy would have learnt in each environment"
    }

    fn uses_policy(&self) -> bool {
        true
    }

    fn run(&self, scenario: &Scenario, policy: Option<&Policy>) -> Result<ConstructionReport> {
        let pol = pick_policy(scenario, policy);
        let (eta, process) = counterfactual_process(&scenario.process, &pol, &scenario.prior)?;
        let mut checks = vec![CheckResult::exact(
            "eta reproduces the constructed process at every possible history",
            inference_residual(&eta, &process, &scenario.prior)?,
        )];
        let mut notes = Vec::new();
        match check_uninfluenceable(&process, &scenario.prior) {
            Ok(v) => checks.push(CheckResult::flag(
                "exact LP certifies uninfluenceable",
                v.uninfluenceable,
            )),
            Err(Error::SizeCap { count, cap, .. }) => {
                notes.push(format!("LP certification skipped: {count} variables exceed cap {cap}"))
            }
            Err(e) => return Err(e),
        }
        let unrig = check_unriggable(&process, &scenario.prior)?;
        checks.push(CheckResult::flag("constructed process is unriggable", unrig.unriggable));
        Ok(ConstructionReport {
            kind: self.name().into(),
            process: Some(process),
            prior: Some(scenario.prior.clone()),
            eta: Some(eta),
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
    use crate::rational::int;

    #[test]
    fn ask_mother_in_bd_is_point_mass_on_rb() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        let m = Policy::constant(sc.spec().clone(), sc.spec().action_by_name("M").unwrap());
        let eta = counterfactual_eta(&sc.process, &m, sc.prior.envs()).unwrap();
        assert_eq!(eta.prob(1, &rb), int(1));
        assert_eq!(eta.prob(2, &rd), int(1));
    }

    #[test]
    fn constant_process_gives_constant_eta() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let (rb, _) = fixtures::parental_rewards(sc.spec());
        let rho = LearningProcess::point_mass(rb.clone());
        for who in ["M", "F"] {
            let p = Policy::constant(sc.spec().clone(), sc.spec().action_by_name(who).unwrap());
            let eta = counterfactual_eta(&rho, &p, sc.prior.envs()).unwrap();
            for e in 0..eta.len() {
                assert_eq!(eta.expectation(e), rb);
            }
        }
    }

    #[test]
    fn report_passes_on_all_fixtures() {
        for sc in fixtures::all() {
            let report = Counterfactual.run(&sc, None).unwrap();
            assert!(report.passed(), "{}: {:?}", sc.name, report.checks);
        }
    }
}
