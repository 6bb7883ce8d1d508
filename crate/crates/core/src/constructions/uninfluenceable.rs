use num_traits::{One, Signed, Zero};

use super::{CheckResult, Construction, ConstructionReport};
use crate::classify::{check_uninfluenceable, check_unriggable, infer_process, EnvConditional};
use crate::environment::{enumerate_deterministic_environments, Environment, Prior};
use crate::error::{Error, Result};
use crate::policy::{Policy, DEFAULT_ENUMERATION_CAP};
use crate::probability::PredictiveTable;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::spec::{Action, History, HorizonSpec};

/// The enlarged environment class `M′` (all deterministic environments),
/// its prior `ξ′`, the reward map `η′` and the process `ρ′` it induces.
#[derive(Clone, Debug)]
pub struct Enlargement {
    pub prior: Prior,
    pub eta: EnvConditional,
    pub process: LearningProcess,
}

/// The history a deterministic environment produces for an action sequence.
fn generated_history(spec: &HorizonSpec, env: &Environment, actions: &[Action]) -> History {
    let table = env
        .observation_table()
        .expect("deterministic environments are action-driven");
    let mut h = History::empty();
    for l in 1..=actions.len() {
        h = h.child(actions[l - 1], table[spec.action_sequence_index(&actions[..l])]);
    }
    h
}

/// Builds `ξ′` and `η′` for an unriggable `ρ`:
/// `ξ′(μ) = ∏_{a^l} P(μ(a^l) | h_μ(a^{l−1}) a_l, ξ)` and
/// `η′(μ) = E(h_0) + Σ_{a^l} τ(h_μ(a^l))` with `τ(h) = E(h) − E(h^{−})`
/// (zero at impossible `h`), `E` being the policy-independent extended expectation.
pub fn unriggable_to_uninfluenceable(rho: &LearningProcess, prior: &Prior, cap: u128) -> Result<Enlargement> {
    let spec = rho.spec().clone();
    let ext = check_unriggable(rho, prior)?.into_result()?;
    let envs = enumerate_deterministic_environments(&spec, cap)?;
    let pred = PredictiveTable::new(prior);

    let mut tau = vec![RewardFunction::zero(spec.clone()); spec.history_count()];
    for (h, e) in ext.iter() {
        if let Some(parent) = h.len().checked_sub(1).map(|k| h.prefix(k)) {
            tau[spec.index(&h)] = e.minus(ext.get(&parent)?)?;
        }
    }
    let root = ext.get(&History::empty())?.clone();

    let sequences: Vec<Vec<Action>> = (1..=spec.horizon())
        .flat_map(|l| spec.action_sequences_of_len(l))
        .collect();
    let mut weights = Vec::with_capacity(envs.len());
    let mut rewards = Vec::with_capacity(envs.len());
    for env in &envs {
        let mut w = Rational::one();
        for seq in &sequences {
            let h = generated_history(&spec, env, &seq[..seq.len() - 1]);
            let a = *seq.last().expect("non-empty");
            let o = env.observation_table().expect("deterministic")[spec.action_sequence_index(seq)];
            w *= &pred.get(&h, a)?[o.0];
            if w.is_zero() {
                break;
            }
        }
        weights.push(w);
        let mut r = root.clone();
        for seq in &sequences {
            let h = generated_history(&spec, env, seq);
            let t = &tau[spec.index(&h)];
            if !t.is_zero() {
                r = r.plus(t)?;
            }
        }
        rewards.push(r);
    }
    let names: Vec<String> = envs.iter().map(|e| e.name().to_string()).collect();
    let new_prior = Prior::new(envs, weights)?;
    let eta = EnvConditional::point_masses(names, rewards)?;
    let process = infer_process(&eta, &new_prior)?;
    Ok(Enlargement {
        prior: new_prior,
        eta,
        process,
    })
}

/// The three verification clauses, plus LP certification when small enough.
pub fn verify_enlargement(
    rho: &LearningProcess,
    prior: &Prior,
    out: &Enlargement,
) -> Result<(Vec<CheckResult>, Vec<String>)> {
    let spec = rho.spec().clone();
    let old = PredictiveTable::new(prior);
    let new = PredictiveTable::new(&out.prior);
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let same_support = old.possible_flags() == new.possible_flags();
    let mut worst = Rational::zero();
    for i in 0..spec.decision_node_count() {
        let h = spec.history_at(i);
        if !old.is_possible(&h) || !new.is_possible(&h) {
            continue;
        }
        for a in spec.actions() {
            for (p, q) in old.get(&h, a)?.iter().zip(new.get(&h, a)?) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    checks.push(CheckResult::flag(
        "same possible histories under both priors",
        same_support,
    ));
    checks.push(CheckResult::exact(
        "transition probabilities agree at every possible history",
        worst,
    ));

    let mut worst = Rational::zero();
    for h in spec.complete_histories() {
        if old.is_possible(h) {
            worst = worst.max(rho.expectation(h)?.max_abs_diff(&out.process.expectation(h)?)?);
        }
    }
    checks.push(CheckResult::exact(
        "expectations agree at every possible complete history",
        worst,
    ));

    checks.push(CheckResult::exact(
        "eta reproduces the constructed process at every possible history",
        super::counterfactual::inference_residual(&out.eta, &out.process, &out.prior)?,
    ));
    checks.push(CheckResult::flag(
        "constructed process is unriggable",
        check_unriggable(&out.process, &out.prior)?.unriggable,
    ));
    match check_uninfluenceable(&out.process, &out.prior) {
        Ok(v) => checks.push(CheckResult::flag(
            "exact LP certifies uninfluenceable",
            v.uninfluenceable,
        )),
        Err(Error::SizeCap { count, cap, .. }) => {
            notes.push(format!("LP certification skipped: {count} variables exceed cap {cap}"))
        }
        Err(e) => return Err(e),
    }
    Ok((checks, notes))
}

pub struct Uninfluenceable;

impl Construction for Uninfluenceable {
    fn name(&self) -> &'static str {
        "uninfluenceable"
    }

    fn summary(&self) -> &'static str {
        "enlarge the environment class to all deterministic environments so an unriggable process becomes uninfluenceable"
    }

    fn run(&self, scenario: &Scenario, _policy: Option<&Policy>) -> Result<ConstructionReport> {
        let out = unriggable_to_uninfluenceable(&scenario.process, &scenario.prior, DEFAULT_ENUMERATION_CAP)?;
        let (checks, mut notes) = verify_enlargement(&scenario.process, &scenario.prior, &out)?;
        let zero = out.prior.weights().iter().filter(|w| w.is_zero()).count();
        notes.insert(
            0,
            format!(
                "{} deterministic environments, {zero} with zero prior weight",
                out.prior.len()
            ),
        );
        Ok(ConstructionReport {
            kind: self.name().into(),
            process: Some(out.process),
            prior: Some(out.prior),
            eta: Some(out.eta),
            checks,
            notes,
            ..Default::default()
        })
    }
}
