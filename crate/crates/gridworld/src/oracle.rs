//! Exact rational values of the gridworld policies the learners converge to.

use std::collections::HashMap;
use std::fmt;

use rewardrig_core::rational::{format, int, zero};
use rewardrig_core::Rational;

use crate::belief::{Belief, BeliefRule, PriorTag, Revealed, World};
use crate::episode::{nominal_bonus, true_bonus, EpisodeState, GridModel, Outcome};
use crate::error::Result;
use crate::grid::{step_cost, Cell, Move, Parent, MAX_STEPS};
use crate::qlearn::Rollout;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Candidate {
    North,
    South,
    AskFather,
    AskMother,
}

impl Candidate {
    pub const ALL: [Candidate; 4] = [
        Candidate::North,
        Candidate::South,
        Candidate::AskFather,
        Candidate::AskMother,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Candidate::North => "go north",
            Candidate::South => "go south",
            Candidate::AskFather => "ask father, then act",
            Candidate::AskMother => "ask mother, then act",
        }
    }

    fn detour(self) -> &'static [Move] {
        match self {
            Candidate::North | Candidate::South => &[],
            Candidate::AskFather => &[Move::West, Move::East],
            Candidate::AskMother => &[Move::East, Move::East, Move::West, Move::West],
        }
    }

    fn last_move(self, belief: Belief) -> Move {
        match self {
            Candidate::North => Move::North,
            Candidate::South => Move::South,
            _ if belief.money_bonus() >= belief.stethoscope_bonus() => Move::North,
            _ => Move::South,
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyValue {
    pub candidate: Candidate,
    /// Expected return under the agent's own beliefs.
    pub nominal: Rational,
    /// Expected return under the mother's answer.
    pub truth: Rational,
    /// `(world, nominal return)` for each world with positive prior weight.
    pub per_world: Vec<(World, Rational)>,
}

impl fmt::Display for PolicyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: nominal {}, true {}",
            self.candidate,
            format(&self.nominal),
            format(&self.truth)
        )
    }
}

struct Episode {
    steps: usize,
    outcome: Outcome,
    belief: Belief,
    first_asked: Option<Parent>,
}

/// What a policy does in one world, ignoring which of several equally
/// long routes it takes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub first_asked: Option<Parent>,
    pub outcome: Outcome,
    pub steps: usize,
}

impl Candidate {
    pub fn signature(self, model: &GridModel, world: &World) -> Signature {
        let ep = play(model, self, world);
        Signature {
            first_asked: ep.first_asked,
            outcome: ep.outcome,
            steps: ep.steps,
        }
    }
}

impl From<&Rollout> for Signature {
    fn from(r: &Rollout) -> Self {
        Signature {
            first_asked: r.first_asked,
            outcome: r.outcome,
            steps: r.moves.len(),
        }
    }
}

fn play(model: &GridModel, candidate: Candidate, world: &World) -> Episode {
    let mut state = model.start();
    let mut steps = 0;
    for &m in candidate.detour() {
        steps += 1;
        let outcome = model.transition(&mut state, m, world);
        if outcome.is_terminal() {
            let belief = model.belief(&state);
            let first_asked = state.revealed.first;
            return Episode {
                steps,
                outcome,
                belief,
                first_asked,
            };
        }
    }
    let belief = model.belief(&state);
    let outcome = model.transition(&mut state, candidate.last_move(belief), world);
    Episode {
        steps: steps + 1,
        outcome,
        belief,
        first_asked: state.revealed.first,
    }
}

pub fn policy_value(model: &GridModel, candidate: Candidate) -> PolicyValue {
    let mut nominal = zero();
    let mut truth = zero();
    let mut per_world = Vec::new();
    for (world, weight) in World::ALL.iter().zip(model.prior().weights()) {
        if weight == zero() {
            continue;
        }
        let ep = play(model, candidate, world);
        let cost = step_cost() * int(ep.steps as i64);
        let n = &cost + nominal_bonus(ep.outcome, ep.belief);
        nominal += &weight * &n;
        truth += &weight * (cost + true_bonus(ep.outcome, world));
        per_world.push((*world, n));
    }
    PolicyValue {
        candidate,
        nominal,
        truth,
        per_world,
    }
}

/// Nominal and true values of every candidate policy.
pub fn exact_policy_values(rule: &'static dyn BeliefRule, prior: PriorTag) -> Result<Vec<PolicyValue>> {
    let model = GridModel::new(rule, prior)?;
    Ok(Candidate::ALL.iter().map(|&c| policy_value(&model, c)).collect())
}

/// The candidate with the highest nominal value; ties go to the earlier one.
pub fn best_candidate(rule: &'static dyn BeliefRule, prior: PriorTag) -> Result<PolicyValue> {
    let values = exact_policy_values(rule, prior)?;
    let mut best = values[0].clone();
    for v in values.into_iter().skip(1) {
        if v.nominal > best.nominal {
            best = v;
        }
    }
    Ok(best)
}

/// Optimal nominal value over all policies that see every answer heard and
/// the steps left, by expectimax over the world posterior.
pub fn optimal_nominal_value(rule: &'static dyn BeliefRule, prior: PriorTag) -> Result<Rational> {
    optimal_nominal_value_within(rule, prior, MAX_STEPS)
}

pub fn optimal_nominal_value_within(rule: &'static dyn BeliefRule, prior: PriorTag, steps: usize) -> Result<Rational> {
    let model = GridModel::new(rule, prior)?;
    let mut memo = HashMap::new();
    Ok(expectimax(&model, model.start(), steps, &mut memo))
}

fn expectimax(
    model: &GridModel,
    state: EpisodeState,
    left: usize,
    memo: &mut HashMap<(Cell, Revealed, usize), Rational>,
) -> Rational {
    if left == 0 {
        return zero();
    }
    if let Some(v) = memo.get(&(state.cell, state.revealed, left)) {
        return v.clone();
    }
    let weights = model.prior().weights();
    let consistent: Vec<(World, Rational)> = World::ALL
        .iter()
        .zip(weights)
        .filter(|(w, p)| *p > zero() && state.revealed.consistent_with(w))
        .map(|(w, p)| (*w, p))
        .collect();
    let mass: Rational = consistent.iter().map(|(_, p)| p).sum();
    let belief = model.belief(&state);
    let mut best: Option<Rational> = None;
    for m in Move::ALL {
        let mut total = zero();
        for (world, p) in &consistent {
            let mut next = state;
            let outcome = model.transition(&mut next, m, world);
            let mut v = step_cost() + nominal_bonus(outcome, belief);
            if !outcome.is_terminal() {
                v += expectimax(model, next, left - 1, memo);
            }
            total += p * v;
        }
        let value = total / &mass;
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    let best = best.expect("four moves");
    memo.insert((state.cell, state.revealed, left), best.clone());
    best
}
