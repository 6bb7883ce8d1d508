//! The worked scenarios: parental career advice under its four priors, the
//! coin-flip chess game, the penalised-mother variant, the two-action
//! translation counterexample and the total-information variant.

use std::sync::Arc;

use crate::environment::{all_deterministic_environments, Environment, Prior};
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::rational::{int, ratio, Rational};
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::spec::{Action, History, HorizonSpec, Obs};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ParentalPrior {
    /// Half on `μ_BB`, half on `μ_DD`: the parents agree.
    Xi1,
    /// Uniform over the four environments.
    Xi2,
    /// All mass on `μ_BD` (also called `ξ_BD`).
    Xi3,
    /// All mass on `μ_DD`.
    Dd,
}

impl ParentalPrior {
    pub fn weights(self) -> [Rational; 4] {
        let q = |n, d| ratio(n, d);
        match self {
            ParentalPrior::Xi1 => [q(1, 2), q(0, 1), q(0, 1), q(1, 2)],
            ParentalPrior::Xi2 => [q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
            ParentalPrior::Xi3 => [q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
            ParentalPrior::Dd => [q(0, 1), q(0, 1), q(0, 1), q(1, 1)],
        }
    }
}

pub fn parental_spec() -> Arc<HorizonSpec> {
    HorizonSpec::new(["M", "F"], ["B", "D"], 1).expect("valid spec")
}

/// `(R_B, R_D)` with `R_B ≡ 10`, `R_D ≡ 1`.
pub fn parental_rewards(spec: &Arc<HorizonSpec>) -> (RewardFunction, RewardFunction) {
    (
        RewardFunction::constant(spec.clone(), int(10)).with_label("R_B"),
        RewardFunction::constant(spec.clone(), int(1)).with_label("R_D"),
    )
}

/// `μ_BB, μ_BD, μ_DB, μ_DD`, mother's answer first.
pub fn parental_environments(spec: &Arc<HorizonSpec>) -> Vec<Environment> {
    all_deterministic_environments(spec).expect("four environments")
}

/// The child adopts whichever career the asked parent names.
pub fn parental_process(spec: &Arc<HorizonSpec>, rb: &RewardFunction, rd: &RewardFunction) -> LearningProcess {
    LearningProcess::from_fn(spec.clone(), |h| {
        let (_, o) = h.steps()[0];
        let r = if o == Obs(0) { rb } else { rd };
        vec![(r.clone(), int(1))]
    })
    .expect("valid process")
}

pub fn parental(prior: ParentalPrior) -> Scenario {
    let spec = parental_spec();
    let (rb, rd) = parental_rewards(&spec);
    let prior_dist = Prior::new(parental_environments(&spec), prior.weights().to_vec()).unwrap();
    let name = match prior {
        ParentalPrior::Xi1 => "parental_xi1",
        ParentalPrior::Xi2 => "parental_xi2",
        ParentalPrior::Xi3 => "parental_xi3",
        ParentalPrior::Dd => "parental_xiDD",
    };
    Scenario::new(name, prior_dist, parental_process(&spec, &rb, &rd)).unwrap()
}

/// `ξ_3` with a penalty of 1 on both reward functions for asking the mother.
pub fn penalty() -> Scenario {
    let spec = parental_spec();
    let penalised = |base: i64| {
        move |h: &History| {
            if h.steps()[0].0 == Action(0) {
                int(base - 1)
            } else {
                int(base)
            }
        }
    };
    let rb = RewardFunction::from_fn(spec.clone(), penalised(10)).with_label("R_B");
    let rd = RewardFunction::from_fn(spec.clone(), penalised(1)).with_label("R_D");
    let prior = Prior::new(parental_environments(&spec), ParentalPrior::Xi3.weights().to_vec()).unwrap();
    Scenario::new("penalty", prior, parental_process(&spec, &rb, &rd)).unwrap()
}

/// A coin picks the side (`H`: white, `T`: black); action `inv` swaps which
/// of `R_W`, `R_Bk` the agent ends up with. Reward values are the outcome
/// probabilities when the agent plays for its assigned reward: even odds
/// when trying to win, certain loss when trying to lose.
pub fn chess() -> Scenario {
    let spec = HorizonSpec::new(["0", "inv"], ["H", "T"], 1).unwrap();
    let table = |h: &History| -> (Rational, Rational) {
        // (R_W, R_Bk) values at h
        match h.steps()[0] {
            (Action(0), _) => (ratio(1, 2), ratio(1, 2)),
            (Action(1), Obs(0)) => (int(0), int(1)),
            (_, _) => (int(1), int(0)),
        }
    };
    let rw = RewardFunction::from_fn(spec.clone(), |h| table(h).0).with_label("R_W");
    let rbk = RewardFunction::from_fn(spec.clone(), |h| table(h).1).with_label("R_Bk");
    let heads = Environment::deterministic("mu_H", spec.clone(), |_| Obs(0));
    let tails = Environment::deterministic("mu_T", spec.clone(), |_| Obs(1));
    let prior = Prior::uniform(vec![heads, tails]).unwrap();
    let process = LearningProcess::from_fn(spec.clone(), |h| {
        let (a, o) = h.steps()[0];
        let white_reward = (o == Obs(0)) != (a == Action(1));
        vec![(if white_reward { rw.clone() } else { rbk.clone() }, int(1))]
    })
    .unwrap();
    Scenario::new("chess", prior, process).unwrap()
}

/// Two actions, a fair coin independent of the action; `a` forces `R`,
/// `a'` lets the coin choose between `R` and `R'`. Default policy: always `a`.
pub fn translation_example() -> Scenario {
    let spec = HorizonSpec::new(["a", "a'"], ["o", "o'"], 1).unwrap();
    let values = |vals: [i64; 4]| RewardFunction::new(spec.clone(), vals.iter().map(|&v| int(v)).collect()).unwrap();
    // complete histories in order: a o, a o', a' o, a' o'
    let r = values([1, 2, 3, 4]).with_label("R");
    let r2 = values([4, 3, 2, 1]).with_label("R'");
    let envs = vec![
        Environment::deterministic("mu_o", spec.clone(), |_| Obs(0)),
        Environment::deterministic("mu_o'", spec.clone(), |_| Obs(1)),
    ];
    let prior = Prior::uniform(envs).unwrap();
    let process = LearningProcess::from_fn(spec.clone(), |h| match h.steps()[0] {
        (Action(1), Obs(1)) => vec![(r2.clone(), int(1))],
        _ => vec![(r.clone(), int(1))],
    })
    .unwrap();
    Scenario::new("appendixB1", prior, process)
        .unwrap()
        .with_default_policy(Policy::constant(spec, Action(0)))
        .unwrap()
}

/// Both parents' answers are revealed whichever parent is asked; the
/// reward is fixed by the asked parent's answer. Observations are
/// `(mother, father)` pairs.
pub fn total_information() -> Scenario {
    let spec = HorizonSpec::new(["M", "F"], ["BB", "BD", "DB", "DD"], 1).unwrap();
    let (rb, rd) = parental_rewards(&spec);
    let envs: Vec<Environment> = (0..4)
        .map(|o| {
            let name = format!("mu_{}", spec.obs_name(Obs(o)));
            Environment::deterministic(name, spec.clone(), move |_| Obs(o))
        })
        .collect();
    let prior = Prior::uniform(envs).unwrap();
    let process = LearningProcess::from_fn(spec.clone(), |h| {
        let (a, o) = h.steps()[0];
        let answers = spec.obs_name(o).as_bytes();
        let answer = if a == Action(0) { answers[0] } else { answers[1] };
        vec![(if answer == b'B' { rb.clone() } else { rd.clone() }, int(1))]
    })
    .unwrap();
    Scenario::new("total_information", prior, process).unwrap()
}

/// Every bundled scenario, by name.
pub fn all() -> Vec<Scenario> {
    vec![
        parental(ParentalPrior::Xi1),
        parental(ParentalPrior::Xi2),
        parental(ParentalPrior::Xi3),
        parental(ParentalPrior::Dd),
        chess(),
        penalty(),
        translation_example(),
        total_information(),
    ]
}
