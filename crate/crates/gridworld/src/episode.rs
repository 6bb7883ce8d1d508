//! Episode dynamics on the belief-state MDP.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rewardrig_core::rational::{to_f64, zero};
use rewardrig_core::Rational;

use crate::belief::{Belief, BeliefRule, BeliefTable, PriorTag, Revealed, World};
use crate::error::Result;
use crate::grid::{step_cost, Cell, Layout, Move, Site, CELLS};

pub const STATES: usize = CELLS * 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Moved,
    Wall,
    Money,
    Stethoscope,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Moved
    }
}

/// Position plus everything heard so far.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct EpisodeState {
    pub cell: Cell,
    pub revealed: Revealed,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Step {
    pub outcome: Outcome,
    /// Step cost plus the belief-weighted bonus.
    pub nominal: f64,
    /// Step cost plus the bonus under the mother's answer.
    pub truth: f64,
}

pub fn nominal_bonus(outcome: Outcome, belief: Belief) -> Rational {
    match outcome {
        Outcome::Money => belief.money_bonus(),
        Outcome::Stethoscope => belief.stethoscope_bonus(),
        _ => zero(),
    }
}

pub fn true_bonus(outcome: Outcome, world: &World) -> Rational {
    nominal_bonus(outcome, Belief::of(world.mother))
}

/// The gridworld seen by one agent under one prior.
#[derive(Clone, Debug)]
pub struct GridModel {
    layout: Layout,
    prior: PriorTag,
    rule: &'static str,
    beliefs: BeliefTable,
    world_weights: [f64; 4],
    // [outcome][belief], f64 copies of the exact rewards
    nominal_reward: [[f64; 3]; 4],
}

impl GridModel {
    pub fn new(rule: &'static dyn BeliefRule, prior: PriorTag) -> Result<Self> {
        let beliefs = BeliefTable::new(rule, prior)?;
        let weights = prior.weights();
        let world_weights = [0, 1, 2, 3].map(|i| to_f64(&weights[i]));
        let mut nominal_reward = [[0.0; 3]; 4];
        for (o, outcome) in [Outcome::Moved, Outcome::Wall, Outcome::Money, Outcome::Stethoscope]
            .into_iter()
            .enumerate()
        {
            for b in Belief::ALL {
                nominal_reward[o][b.index()] = to_f64(&(step_cost() + nominal_bonus(outcome, b)));
            }
        }
        Ok(GridModel {
            layout: Layout::default(),
            prior,
            rule: rule.name(),
            beliefs,
            world_weights,
            nominal_reward,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn prior(&self) -> PriorTag {
        self.prior
    }

    pub fn rule_name(&self) -> &'static str {
        self.rule
    }

    pub fn start(&self) -> EpisodeState {
        EpisodeState {
            cell: self.layout.start,
            revealed: Revealed::default(),
        }
    }

    pub fn belief(&self, state: &EpisodeState) -> Belief {
        self.beliefs.get(&state.revealed)
    }

    /// Q-table row of a state: position × belief.
    pub fn state_index(&self, state: &EpisodeState) -> usize {
        state.cell.index() * 3 + self.belief(state).index()
    }

    pub fn world_distribution(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.world_weights).expect("prior has positive mass")
    }

    pub fn sample_world<R: Rng + ?Sized>(&self, dist: &WeightedIndex<f64>, rng: &mut R) -> World {
        World::ALL[dist.sample(rng)]
    }

    /// Moves without scoring; rewards depend on the belief before the move.
    pub fn transition(&self, state: &mut EpisodeState, m: Move, world: &World) -> Outcome {
        let Some(next) = state.cell.shifted(m) else {
            return Outcome::Wall;
        };
        state.cell = next;
        match self.layout.site(next) {
            Site::Money => Outcome::Money,
            Site::Stethoscope => Outcome::Stethoscope,
            Site::Parent(p) => {
                state.revealed.visit(p, world);
                Outcome::Moved
            }
            Site::Empty => Outcome::Moved,
        }
    }

    pub fn step(&self, state: &mut EpisodeState, m: Move, world: &World) -> Step {
        let belief = self.belief(state);
        let outcome = self.transition(state, m, world);
        let o = match outcome {
            Outcome::Moved => 0,
            Outcome::Wall => 1,
            Outcome::Money => 2,
            Outcome::Stethoscope => 3,
        };
        let truth_belief = Belief::of(world.mother);
        Step {
            outcome,
            nominal: self.nominal_reward[o][belief.index()],
            truth: self.nominal_reward[o][truth_belief.index()],
        }
    }
}
