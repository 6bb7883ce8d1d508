use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rewardrig_core::classify::{
    check_uninfluenceable, check_unriggable, check_unriggable_oracle, find_sacrifice, infer_process, ImageMode,
};
use rewardrig_core::constructions::{
    apply_relabeling, counterfactual_process, make_unriggable, sacrifice_relabeling, unriggable_to_uninfluenceable,
    verify_enlargement, AffineRelabeling,
};
use rewardrig_core::linalg::affine_coefficients;
use rewardrig_core::policy::{enumerate_deterministic_policies, DEFAULT_ENUMERATION_CAP};
use rewardrig_core::random::{random_policy, random_scenario, ScenarioKind};
use rewardrig_core::rational::{int, ratio, Rational};
use rewardrig_core::value::{extend_expectation, optimal_value, value, value_by_backward_induction};
use rewardrig_core::{History, LearningProcess, RewardFunction, Scenario};

fn scenario(seed: u64, kind: u8) -> (Scenario, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = match kind % 3 {
        0 => ScenarioKind::Arbitrary,
        1 => ScenarioKind::Uninfluenceable,
        _ => ScenarioKind::Unriggable,
    };
    (random_scenario(&mut rng, kind), rng)
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 256,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn unriggable_check_agrees_with_policy_enumeration(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        let fast = check_unriggable(&sc.process, &sc.prior).unwrap();
        let slow = check_unriggable_oracle(&sc.process, &sc.prior, 32).unwrap();
        prop_assert_eq!(fast.unriggable, slow.unriggable);
        if let (Some(a), Some(b)) = (&fast.witness, &slow.witness) {
            prop_assert_eq!(a.history.len(), b.history.len());
            prop_assert!(a.verify(&sc.process, &sc.prior).unwrap());
            prop_assert!(b.verify(&sc.process, &sc.prior).unwrap());
        }
    }

    #[test]
    fn uninfluenceable_implies_unriggable_and_eta_round_trips(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        let v = check_uninfluenceable(&sc.process, &sc.prior).unwrap();
        if kind % 3 == 1 {
            prop_assert!(v.uninfluenceable);
        }
        if let Some(eta) = v.eta {
            prop_assert!(check_unriggable(&sc.process, &sc.prior).unwrap().unriggable);
            for h in sc.spec().complete_histories() {
                let Ok(post) = sc.prior.posterior(h) else { continue };
                for r in sc.process.pool().iter().chain(eta.pool()) {
                    let inferred = post
                        .iter()
                        .enumerate()
                        .fold(Rational::zero(), |acc, (e, p)| acc + p * eta.prob(e, r));
                    prop_assert_eq!(inferred, sc.process.prob(h, r));
                }
            }
        }
    }

    #[test]
    fn unriggable_processes_are_martingales(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        let v = check_unriggable(&sc.process, &sc.prior).unwrap();
        if kind % 3 == 2 {
            prop_assert!(v.unriggable);
        }
        if let Some(e) = v.extended {
            prop_assert!(e.martingale_residual(&sc.prior).unwrap().is_zero());
            for p in enumerate_deterministic_policies(sc.spec(), 32).unwrap() {
                let along = extend_expectation(&sc.process, &sc.prior, &p).unwrap();
                for (h, r) in e.iter() {
                    prop_assert_eq!(along.get(&h).unwrap(), r);
                }
            }
        }
    }

    #[test]
    fn counterfactual_processes_are_uninfluenceable(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, mut rng) = scenario(seed, kind);
        let pol = random_policy(&mut rng, sc.spec());
        let (_, rho) = counterfactual_process(&sc.process, &pol, &sc.prior).unwrap();
        prop_assert!(check_uninfluenceable(&rho, &sc.prior).unwrap().uninfluenceable);
    }

    #[test]
    fn translation_output_is_unriggable_and_in_the_affine_hull(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, mut rng) = scenario(seed, kind);
        let pol = random_policy(&mut rng, sc.spec());
        let out = make_unriggable(&sc.process, &sc.prior, &pol).unwrap();
        prop_assert!(check_unriggable(&out, &sc.prior).unwrap().unriggable);
        let points: Vec<&[Rational]> = sc.process.pool().iter().map(|r| r.values()).collect();
        for r in out.pool() {
            prop_assert!(affine_coefficients(&points, r.values()).is_some());
        }
        let before = extend_expectation(&sc.process, &sc.prior, &pol).unwrap();
        let after = extend_expectation(&out, &sc.prior, &pol).unwrap();
        prop_assert_eq!(before.get(&History::empty()).unwrap(), after.get(&History::empty()).unwrap());
    }

    #[test]
    fn enlargement_verifies_with_zero_residual(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        if !check_unriggable(&sc.process, &sc.prior).unwrap().unriggable {
            return Ok(());
        }
        let out = unriggable_to_uninfluenceable(&sc.process, &sc.prior, DEFAULT_ENUMERATION_CAP).unwrap();
        let (checks, _) = verify_enlargement(&sc.process, &sc.prior, &out).unwrap();
        for c in checks {
            prop_assert!(c.passed, "{}: {:?}", c.name, c.residual);
        }
    }

    #[test]
    fn value_by_definition_matches_backward_induction(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        let best = optimal_value(&sc.process, &sc.prior).unwrap();
        let h0 = History::empty();
        for p in enumerate_deterministic_policies(sc.spec(), 32).unwrap() {
            let v = value(&h0, &sc.process, &p, &sc.prior).unwrap();
            prop_assert_eq!(&v, &value_by_backward_induction(&h0, &sc.process, &p, &sc.prior).unwrap());
            prop_assert!(best >= v);
        }
    }

    #[test]
    fn mixing_processes_mixes_expectations(seed in any::<u64>(), kind in any::<u8>(), q in 0i64..=4) {
        let (sc, mut rng) = scenario(seed, kind);
        let other = random_scenario(&mut rng, ScenarioKind::Arbitrary);
        let other = if **other.spec() == **sc.spec() { other.process } else { LearningProcess::point_mass(sc.process.pool()[0].clone()) };
        let q = ratio(q, 4);
        let mixed = sc.process.mix(&other, &q).unwrap();
        for h in sc.spec().complete_histories() {
            let expected = sc.process.expectation(h).unwrap().scaled(&(int(1) - &q))
                .plus(&other.expectation(h).unwrap().scaled(&q)).unwrap();
            prop_assert_eq!(mixed.expectation(h).unwrap(), expected);
        }
    }

    #[test]
    fn equal_expectations_give_equal_values(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        // spread every distribution symmetrically around its expectation
        let spread = LearningProcess::from_fn(sc.spec().clone(), |h| {
            let e = sc.process.expectation(h).unwrap();
            let d = RewardFunction::from_fn(sc.spec().clone(), |x| int((sc.spec().complete_index(x) % 3) as i64 + 1));
            vec![(e.plus(&d).unwrap(), ratio(1, 2)), (e.minus(&d).unwrap(), ratio(1, 2))]
        }).unwrap();
        prop_assert_eq!(spread.effective_reward(), sc.process.effective_reward());
        let h0 = History::empty();
        for p in enumerate_deterministic_policies(sc.spec(), 32).unwrap() {
            prop_assert_eq!(
                value(&h0, &spread, &p, &sc.prior).unwrap(),
                value(&h0, &sc.process, &p, &sc.prior).unwrap()
            );
        }
    }

    #[test]
    fn relabeling_commutes_and_preserves_riggability(seed in any::<u64>(), kind in any::<u8>(), k in 1i64..4, c in -2i64..3) {
        let (sc, _) = scenario(seed, kind);
        let shift = RewardFunction::constant(sc.spec().clone(), int(c));
        let sigma = AffineRelabeling::from_linear_part(
            sc.process.pool(),
            |r| r.scaled(&int(k)).plus(&shift),
            |d| Ok(d.scaled(&int(k))),
        ).unwrap();
        let relabeled = apply_relabeling(&sigma, &sc.process).unwrap();
        for h in sc.spec().complete_histories() {
            prop_assert_eq!(
                relabeled.expectation(h).unwrap(),
                sigma.apply(&sc.process.expectation(h).unwrap()).unwrap()
            );
        }
        prop_assert_eq!(
            check_unriggable(&relabeled, &sc.prior).unwrap().unriggable,
            check_unriggable(&sc.process, &sc.prior).unwrap().unriggable
        );
    }

    #[test]
    fn riggable_processes_admit_a_sacrifice_relabeling(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        if check_unriggable(&sc.process, &sc.prior).unwrap().unriggable {
            return Ok(());
        }
        let demo = sacrifice_relabeling(&sc.process, &sc.prior).unwrap();
        prop_assert_eq!(demo.optimal.choice(&demo.history), Some(demo.action));
        for mode in [ImageMode::Full, ImageMode::PriorRestricted] {
            let v = rewardrig_core::classify::check_sacrifice(
                &demo.optimal, &demo.better, &demo.history, &demo.relabeled, &sc.prior, mode,
            ).unwrap();
            prop_assert!(v.sacrifices);
        }
    }

    #[test]
    fn unriggable_optimum_never_sacrifices(seed in any::<u64>(), kind in any::<u8>()) {
        let (sc, _) = scenario(seed, kind);
        if !check_unriggable(&sc.process, &sc.prior).unwrap().unriggable {
            return Ok(());
        }
        for mode in [ImageMode::Full, ImageMode::PriorRestricted] {
            let hit = find_sacrifice(&sc.process, &sc.prior, mode, 32).unwrap();
            prop_assert!(hit.is_none(), "{:?} at {:?}", mode, hit.map(|h| h.history));
        }
    }
}

#[test]
fn inferred_processes_round_trip_through_the_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let sc = random_scenario(&mut rng, ScenarioKind::Uninfluenceable);
        let v = check_uninfluenceable(&sc.process, &sc.prior).unwrap();
        let eta = v.eta.expect("constructed from an eta");
        let again = infer_process(&eta, &sc.prior).unwrap();
        for h in sc.spec().complete_histories() {
            if sc.prior.is_possible(h) {
                assert_eq!(again.expectation(h).unwrap(), sc.process.expectation(h).unwrap());
            }
        }
    }
}
