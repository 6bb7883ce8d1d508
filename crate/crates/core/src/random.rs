//! Random small scenarios for property tests and fuzzing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::classify::{infer_process, EnvConditional};
use crate::constructions::make_unriggable;
use crate::environment::{Environment, Prior};
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::rational::{int, Rational};
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::spec::{Action, HorizonSpec, Obs};

/// `(|A|, |O|, n)` shapes with at most 32 deterministic policies.
pub const SHAPES: [(usize, usize, usize); 9] = [
    (1, 2, 1),
    (1, 3, 2),
    (2, 1, 1),
    (2, 2, 1),
    (2, 3, 1),
    (3, 2, 1),
    (3, 3, 1),
    (2, 1, 2),
    (2, 2, 2),
];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Arbitrary,
    /// Built from a random `η` through the inference equation.
    Uninfluenceable,
    /// An arbitrary process passed through the translation construction.
    Unriggable,
}

fn weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Rational> {
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|w| Rational::new(w.into(), total.into())).collect();
        }
    }
}

fn reward_dist<R: Rng + ?Sized>(rng: &mut R, rewards: &[RewardFunction]) -> Vec<(RewardFunction, Rational)> {
    if rng.gen_bool(0.5) {
        vec![(rewards.choose(rng).expect("non-empty").clone(), int(1))]
    } else {
        rewards.iter().cloned().zip(weights(rng, rewards.len())).collect()
    }
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R) -> std::sync::Arc<HorizonSpec> {
    let (na, no, n) = *SHAPES.choose(rng).expect("non-empty");
    let actions: Vec<String> = (0..na).map(|i| format!("a{i}")).collect();
    let obs: Vec<String> = (0..no).map(|i| format!("o{i}")).collect();
    HorizonSpec::new(actions, obs, n).expect("valid shape")
}

pub fn random_prior<R: Rng + ?Sized>(rng: &mut R, spec: &std::sync::Arc<HorizonSpec>) -> Prior {
    let count = rng.gen_range(1..=4);
    let mut envs = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("mu{i}");
        if rng.gen_bool(0.5) {
            let table: Vec<Obs> = (0..spec.action_sequence_count())
                .map(|_| Obs(rng.gen_range(0..spec.num_observations())))
                .collect();
            envs.push(Environment::from_observation_table(name, spec.clone(), table).expect("valid table"));
        } else {
            let mut kernels = Vec::new();
            for _ in 0..spec.decision_node_count() * spec.num_actions() {
                kernels.push(weights(rng, spec.num_observations()));
            }
            let na = spec.num_actions();
            let env = Environment::stochastic(name, spec.clone(), |h, a| kernels[spec.index(h) * na + a.0].clone())
                .expect("valid kernel");
            envs.push(env);
        }
    }
    let w = weights(rng, count);
    Prior::new(envs, w).expect("valid prior")
}

pub fn random_rewards<R: Rng + ?Sized>(rng: &mut R, spec: &std::sync::Arc<HorizonSpec>) -> Vec<RewardFunction> {
    let count = rng.gen_range(1..=3);
    (0..count)
        .map(|i| {
            let table = (0..spec.complete_count()).map(|_| int(rng.gen_range(-3..=5))).collect();
            RewardFunction::new(spec.clone(), table)
                .expect("sized table")
                .with_label(format!("R{i}"))
        })
        .collect()
}

pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, kind: ScenarioKind) -> Scenario {
    let spec = random_spec(rng);
    let prior = random_prior(rng, &spec);
    let rewards = random_rewards(rng, &spec);
    let process = match kind {
        ScenarioKind::Arbitrary | ScenarioKind::Unriggable => {
            let dists: Vec<_> = spec
                .complete_histories()
                .iter()
                .map(|_| reward_dist(rng, &rewards))
                .collect();
            let rho = LearningProcess::from_fn(spec.clone(), |h| dists[spec.complete_index(h)].clone())
                .expect("valid distributions");
            if kind == ScenarioKind::Unriggable {
                let pol = random_policy(rng, &spec);
                make_unriggable(&rho, &prior, &pol).expect("construction succeeds")
            } else {
                rho
            }
        }
        ScenarioKind::Uninfluenceable => {
            let names = prior.envs().iter().map(|e| e.name().to_string()).collect();
            let dists = (0..prior.len()).map(|_| reward_dist(rng, &rewards)).collect();
            let eta = EnvConditional::new(names, dists).expect("valid eta");
            infer_process(&eta, &prior).expect("matching prior")
        }
    };
    Scenario::new(format!("random-{kind:?}").to_lowercase(), prior, process).expect("shared spec")
}

pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, spec: &std::sync::Arc<HorizonSpec>) -> Policy {
    let choices = (0..spec.decision_node_count())
        .map(|_| Action(rng.gen_range(0..spec.num_actions())))
        .collect();
    Policy::deterministic(spec.clone(), choices).expect("sized choices")
}
