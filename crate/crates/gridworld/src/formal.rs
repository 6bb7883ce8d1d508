//! The gridworld as an exact finite-horizon scenario: observations are the
//! parents' answers, reward functions score whole trajectories, and the
//! standard agent's learning process adopts the first answer heard.

use rewardrig_core::rational::{int, ratio};
use rewardrig_core::spec::{Action, History, HorizonSpec, Obs};
use rewardrig_core::{Environment, LearningProcess, Policy, Prior, RewardFunction, Scenario};

use crate::belief::{Belief, PriorTag, Standard, World};
use crate::episode::{nominal_bonus, GridModel, Outcome};
use crate::error::Result;
use crate::grid::{step_cost, Answer, Move, Site};

pub const SILENT: Obs = Obs(0);

fn answer_obs(answer: Answer) -> Obs {
    match answer {
        Answer::Banker => Obs(1),
        Answer::Doctor => Obs(2),
    }
}

/// Outcome, steps taken, and the observation after the last action (`None`
/// when the episode ended before it).
fn trace(model: &GridModel, actions: &[Action], world: &World) -> (Outcome, usize, Option<Obs>) {
    let mut state = model.start();
    let mut obs = None;
    for (i, a) in actions.iter().enumerate() {
        let before = state.revealed;
        let outcome = model.transition(&mut state, Move::ALL[a.0], world);
        let heard = match model.layout().site(state.cell) {
            Site::Parent(p) if before.answer(p).is_none() => state.revealed.answer(p),
            _ => None,
        };
        obs = Some(heard.map_or(SILENT, answer_obs));
        if outcome.is_terminal() {
            let obs = if i + 1 == actions.len() { obs } else { None };
            return (outcome, i + 1, obs);
        }
    }
    (Outcome::Moved, actions.len(), obs)
}

fn environment(model: &GridModel, spec: &std::sync::Arc<HorizonSpec>, world: World) -> Environment {
    Environment::deterministic(world.name(), spec.clone(), |actions| {
        trace(model, actions, &world).2.unwrap_or(SILENT)
    })
}

fn reward(model: &GridModel, spec: &std::sync::Arc<HorizonSpec>, belief: Belief) -> RewardFunction {
    let any_world = World::ALL[0];
    RewardFunction::from_fn(spec.clone(), |h| {
        let (outcome, steps, _) = trace(model, &h.actions(), &any_world);
        step_cost() * int(steps as i64) + nominal_bonus(outcome, belief)
    })
    .with_label(if belief == Belief::Banker { "R_B" } else { "R_D" })
}

/// The gridworld cut to `horizon` steps, with the standard learning process.
pub fn formal_scenario(prior: PriorTag, horizon: usize) -> Result<Scenario> {
    let spec = HorizonSpec::new(["N", "S", "E", "W"], ["-", "B", "D"], horizon)?;
    let model = GridModel::new(&Standard, prior)?;
    let envs: Vec<Environment> = World::ALL.iter().map(|w| environment(&model, &spec, *w)).collect();
    let rb = reward(&model, &spec, Belief::Banker);
    let rd = reward(&model, &spec, Belief::Doctor);
    let process = LearningProcess::from_fn(spec.clone(), |h: &History| {
        match h.observations().into_iter().find(|o| *o != SILENT) {
            Some(Obs(1)) => vec![(rb.clone(), int(1))],
            Some(_) => vec![(rd.clone(), int(1))],
            None => vec![(rb.clone(), ratio(1, 2)), (rd.clone(), ratio(1, 2))],
        }
    })?;
    let prior_dist = Prior::new(envs, prior.weights().to_vec())?;
    let name = format!("gridworld_{}_h{horizon}", prior.name());
    Ok(Scenario::new(name, prior_dist, process)?)
}

/// The policy that always walks east.
pub fn always_east(scenario: &Scenario) -> Policy {
    Policy::constant(scenario.spec().clone(), Action(Move::East.index()))
}
