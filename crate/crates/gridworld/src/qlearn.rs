//! Tabular ε-greedy Q-learning with per-cell learning rate `1/n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::World;
use crate::episode::{GridModel, Outcome, STATES};
use crate::error::{Error, Result};
use crate::grid::{Move, Parent, MAX_STEPS};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QConfig {
    pub epsilon: f64,
    pub max_steps: usize,
    /// Value of every cell before its first update.
    pub initial_q: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig {
            epsilon: 0.1,
            max_steps: MAX_STEPS,
            initial_q: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QTable {
    values: Vec<[f64; 4]>,
    visits: Vec<[u32; 4]>,
}

impl Default for QTable {
    fn default() -> Self {
        QTable::new(0.0)
    }
}

impl QTable {
    pub fn new(initial: f64) -> Self {
        QTable {
            values: vec![[initial; 4]; STATES],
            visits: vec![[0; 4]; STATES],
        }
    }

    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.values[state][action]
    }

    pub fn visits(&self, state: usize, action: usize) -> u32 {
        self.visits[state][action]
    }

    pub fn max(&self, state: usize) -> f64 {
        self.values[state].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Moves the cell toward `target` with step size `1/n`.
    pub fn update(&mut self, state: usize, action: usize, target: f64) {
        let n = &mut self.visits[state][action];
        *n += 1;
        let q = &mut self.values[state][action];
        *q += (target - *q) / f64::from(*n);
    }

    /// Greedy action; ties broken uniformly at random.
    pub fn greedy<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let row = &self.values[state];
        let best = self.max(state);
        let ties = row.iter().filter(|&&q| q == best).count();
        let pick = if ties == 1 { 0 } else { rng.gen_range(0..ties) };
        row.iter()
            .enumerate()
            .filter(|(_, &q)| q == best)
            .nth(pick)
            .map(|(a, _)| a)
            .expect("a maximal action exists")
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy_first(&self, state: usize) -> usize {
        let best = self.max(state);
        self.values[state]
            .iter()
            .position(|&q| q == best)
            .expect("a maximal action exists")
    }
}

/// Per-episode series from one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSeries {
    /// `max_a Q(s_0, a)` after each episode.
    pub nominal: Vec<f64>,
    /// True return of the greedy policy in a fresh world after each episode.
    pub truth: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Run {
    pub series: RunSeries,
    pub table: QTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub moves: Vec<Move>,
    pub first_asked: Option<Parent>,
    pub outcome: Outcome,
    pub nominal: f64,
    pub truth: f64,
}

impl Rollout {
    pub fn path(&self) -> String {
        self.moves.iter().map(|m| m.letter()).collect()
    }
}

/// The rng for run `run` of an experiment seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Follows `choose` from the start state until termination or timeout.
pub fn rollout(model: &GridModel, world: &World, max_steps: usize, mut choose: impl FnMut(usize) -> usize) -> Rollout {
    let mut state = model.start();
    let mut moves = Vec::new();
    let (mut nominal, mut truth) = (0.0, 0.0);
    let mut outcome = Outcome::Moved;
    while moves.len() < max_steps {
        let m = Move::ALL[choose(model.state_index(&state))];
        let step = model.step(&mut state, m, world);
        moves.push(m);
        nominal += step.nominal;
        truth += step.truth;
        outcome = step.outcome;
        if outcome.is_terminal() {
            break;
        }
    }
    Rollout {
        moves,
        first_asked: state.revealed.first,
        outcome,
        nominal,
        truth,
    }
}

/// Deterministic greedy behaviour in every world the prior allows.
pub fn greedy_behaviour(model: &GridModel, table: &QTable, max_steps: usize) -> Vec<(World, Rollout)> {
    let weights = model.prior().weights();
    World::ALL
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > rewardrig_core::rational::zero())
        .map(|(world, _)| (*world, rollout(model, world, max_steps, |s| table.greedy_first(s))))
        .collect()
}

/// Trains a fresh table, calling `after_episode` once per episode.
pub fn train<R: Rng + ?Sized>(
    model: &GridModel,
    config: &QConfig,
    episodes: usize,
    rng: &mut R,
    mut after_episode: impl FnMut(&QTable, &mut R),
) -> Result<QTable> {
    if episodes == 0 {
        return Err(Error::Zero("episodes"));
    }
    let dist = model.world_distribution();
    let mut table = QTable::new(config.initial_q);
    for _ in 0..episodes {
        let world = model.sample_world(&dist, rng);
        let mut state = model.start();
        for t in 1..=config.max_steps {
            let s = model.state_index(&state);
            let a = if rng.gen::<f64>() < config.epsilon {
                rng.gen_range(0..4)
            } else {
                table.greedy(s, rng)
            };
            let step = model.step(&mut state, Move::ALL[a], &world);
            let done = step.outcome.is_terminal() || t == config.max_steps;
            let target = if done {
                step.nominal
            } else {
                step.nominal + table.max(model.state_index(&state))
            };
            table.update(s, a, target);
            if done {
                break;
            }
        }
        after_episode(&table, rng);
    }
    Ok(table)
}

/// Trains and records the greedy start value and the true return of the
/// greedy policy in a freshly sampled world after every episode.
pub fn q_learning_run<R: Rng + ?Sized>(
    model: &GridModel,
    config: &QConfig,
    episodes: usize,
    rng: &mut R,
) -> Result<Run> {
    let dist = model.world_distribution();
    let s0 = model.state_index(&model.start());
    let mut series = RunSeries {
        nominal: Vec::with_capacity(episodes),
        truth: Vec::with_capacity(episodes),
    };
    let table = train(model, config, episodes, rng, |table, rng| {
        series.nominal.push(table.max(s0));
        let world = model.sample_world(&dist, rng);
        let eval = rollout(model, &world, config.max_steps, |s| table.greedy(s, rng));
        series.truth.push(eval.truth);
    })?;
    Ok(Run { series, table })
}
