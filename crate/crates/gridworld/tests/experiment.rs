use proptest::prelude::*;
use rewardrig_core::rational::{int, to_f64};
use rewardrig_gridworld::episode::{nominal_bonus, true_bonus};
use rewardrig_gridworld::grid::{step_cost, Move, MAX_STEPS};
use rewardrig_gridworld::qlearn::{q_learning_run, rollout, run_rng};
use rewardrig_gridworld::{aggregate_runs, lookup, registry, GridModel, PriorTag, QConfig, World};

fn model(agent: &str, prior: PriorTag) -> GridModel {
    GridModel::new(lookup(agent).unwrap(), prior).unwrap()
}

#[test]
fn aggregates_are_bit_identical_for_a_seed() {
    let m = model("standard", PriorTag::Half);
    let a = aggregate_runs(&m, &QConfig::default(), 40, 300, 11).unwrap();
    let b = aggregate_runs(&m, &QConfig::default(), 40, 300, 11).unwrap();
    assert_eq!(a, b);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.nominal.std), bits(&b.nominal.std));
    let c = aggregate_runs(&m, &QConfig::default(), 40, 300, 12).unwrap();
    assert_ne!(a, c);
}

#[test]
fn a_single_run_aggregates_to_itself() {
    let m = model("counterfactual", PriorTag::DD);
    let stats = aggregate_runs(&m, &QConfig::default(), 1, 500, 4).unwrap();
    let run = q_learning_run(&m, &QConfig::default(), 500, &mut run_rng(4, 0)).unwrap();
    assert_eq!(stats.nominal.mean, run.series.nominal);
    assert!(stats.truth.std.iter().all(|s| *s == 0.0));
}

#[test]
fn counterfactual_nominal_tracks_truth() {
    for prior in PriorTag::ALL {
        let m = model("counterfactual", prior);
        let stats = aggregate_runs(&m, &QConfig::default(), 100, 20_000, 3).unwrap();
        let (n, t) = (stats.converged_nominal(), stats.converged_truth());
        assert!((n - t).abs() < 0.15, "{prior}: nominal {n}, true {t}");
    }
}

#[test]
fn standard_agent_in_dd_overstates_its_value() {
    let m = model("standard", PriorTag::DD);
    let stats = aggregate_runs(&m, &QConfig::default(), 50, 5_000, 8).unwrap();
    assert!((stats.converged_nominal() - 4.9).abs() < 1e-9);
    assert!((stats.converged_truth() + 0.1).abs() < 0.05);
}

fn arb_moves() -> impl Strategy<Value = Vec<Move>> {
    prop::collection::vec(prop::sample::select(Move::ALL.to_vec()), 0..16)
}

proptest! {
    #[test]
    fn returns_are_step_costs_plus_the_terminal_bonus(
        moves in arb_moves(),
        agent in 0usize..2,
        prior in prop::sample::select(PriorTag::ALL.to_vec()),
        world in prop::sample::select(World::ALL.to_vec()),
    ) {
        let m = GridModel::new(registry()[agent], prior).unwrap();
        let mut it = moves.iter().cycle();
        let r = if moves.is_empty() {
            rollout(&m, &world, MAX_STEPS, |_| 0)
        } else {
            rollout(&m, &world, MAX_STEPS, |_| it.next().unwrap().index())
        };
        prop_assert!(r.moves.len() <= MAX_STEPS);
        let mut state = m.start();
        for mv in &r.moves[..r.moves.len() - 1] {
            m.transition(&mut state, *mv, &world);
        }
        let belief = m.belief(&state);
        let cost = step_cost() * int(r.moves.len() as i64);
        let nominal = to_f64(&(&cost + nominal_bonus(r.outcome, belief)));
        let truth = to_f64(&(cost + true_bonus(r.outcome, &world)));
        prop_assert!((r.nominal - nominal).abs() < 1e-9);
        prop_assert!((r.truth - truth).abs() < 1e-9);
        prop_assert!(r.outcome.is_terminal() || r.moves.len() == MAX_STEPS);
    }

    #[test]
    fn learning_is_deterministic_per_seed(seed in any::<u64>(), run in 0u64..1000, agent in 0usize..2) {
        let m = GridModel::new(registry()[agent], PriorTag::Correlated).unwrap();
        let a = q_learning_run(&m, &QConfig::default(), 50, &mut run_rng(seed, run)).unwrap();
        let b = q_learning_run(&m, &QConfig::default(), 50, &mut run_rng(seed, run)).unwrap();
        prop_assert_eq!(a.series, b.series);
    }
}
