//! Acceptance criteria as named checks, each timed against its budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rewardrig_cli::bundle;
use rewardrig_cli::report::{self, constructed_scenario, Labeller, Verdict};
use rewardrig_core::classify::{
    check_uninfluenceable, check_unriggable, check_unriggable_oracle, find_sacrifice, ImageMode,
};
use rewardrig_core::constructions::{self, apply_relabeling, counterfactual_process, AffineRelabeling};
use rewardrig_core::policy::deterministic_policy_count;
use rewardrig_core::random::{random_policy, random_scenario, ScenarioKind};
use rewardrig_core::rational::{format, int, ratio, zero};
use rewardrig_core::reward::affine_combine;
use rewardrig_core::{History, LearningProcess, Policy, Prior, Rational, RewardFunction, Scenario};
use rewardrig_gridworld::oracle::{best_candidate, exact_policy_values, Candidate};
use rewardrig_gridworld::{aggregate_runs, lookup, GridModel, PriorTag, QConfig};

type Check = Result<Vec<String>, Vec<String>>;

struct Findings {
    ok: Vec<String>,
    failed: Vec<String>,
}

impl Findings {
    fn new() -> Self {
        Findings {
            ok: Vec::new(),
            failed: Vec::new(),
        }
    }

    fn check(&mut self, passed: bool, what: impl Into<String>) {
        if passed {
            self.ok.push(what.into());
        } else {
            self.failed.push(what.into());
        }
    }

    fn finish(self) -> Check {
        if self.failed.is_empty() {
            return Ok(self.ok);
        }
        let total = self.ok.len() + self.failed.len();
        let mut out = vec![format!("{} of {total} findings hold; failing", self.ok.len())];
        out.extend(self.failed);
        Err(out)
    }
}

fn bundled(name: &str) -> Scenario {
    bundle::load(name).expect("bundled").expect("valid")
}

fn point_mass_on(eta: &rewardrig_core::classify::EnvConditional, env: &str, r: &RewardFunction) -> bool {
    eta.env_names()
        .iter()
        .position(|n| n == env)
        .is_some_and(|e| matches!(eta.distribution(e), [(i, p)] if eta.pool()[*i] == *r && *p == int(1)))
}

fn classification_golden_set() -> Check {
    let mut f = Findings::new();
    let xi1 = bundled("parental_xi1");
    let c = report::classify(&xi1).unwrap();
    let (rb, rd) = rewardrig_core::fixtures::parental_rewards(xi1.spec());
    let eta_ok = c
        .influence
        .as_ref()
        .and_then(|i| i.eta.as_ref())
        .is_some_and(|eta| point_mass_on(eta, "mu_BB", &rb) && point_mass_on(eta, "mu_DD", &rd));
    f.check(
        c.verdict == Verdict::Uninfluenceable && eta_ok,
        format!("xi1 {}, eta(mu_BB)=R_B, eta(mu_DD)=R_D", c.verdict),
    );

    let c = report::classify(&bundled("parental_xi2")).unwrap();
    let infeasible = c
        .influence
        .as_ref()
        .is_some_and(|i| i.eta.is_none() && !i.certificate.is_empty());
    f.check(
        c.verdict == Verdict::UnriggableInfluenceable && infeasible,
        format!("xi2 {} with an infeasibility certificate", c.verdict),
    );

    for name in ["parental_xi3", "parental_xiBD", "parental_xiDD"] {
        let c = report::classify(&bundled(name)).unwrap();
        let at_root = c
            .unriggable
            .witness
            .as_ref()
            .is_some_and(|w| w.history == History::empty());
        f.check(
            c.verdict == Verdict::Riggable && at_root,
            format!("{name} expected riggable at h0, got {}", c.verdict),
        );
    }
    let c = report::classify(&bundled("chess")).unwrap();
    f.check(c.unriggable.unriggable, format!("chess {}", c.verdict));
    f.finish()
}

fn enlargement_construction() -> Check {
    let mut f = Findings::new();
    let sc = bundled("parental_xi2");
    let (rb, rd) = rewardrig_core::fixtures::parental_rewards(sc.spec());
    let kind = constructions::lookup("uninfluenceable").unwrap();
    let out = kind.run(&sc, None).unwrap();
    f.check(out.passed(), format!("{} verification checks", out.checks.len()));
    let combo =
        |a: (i64, i64), b: (i64, i64)| affine_combine(&[(ratio(a.0, a.1), &rb), (ratio(b.0, b.1), &rd)]).unwrap();
    let eta = out.eta.as_ref().unwrap();
    let expected = [
        ("mu_BB", combo((3, 2), (-1, 2))),
        ("mu_BD", combo((1, 2), (1, 2))),
        ("mu_DB", combo((1, 2), (1, 2))),
        ("mu_DD", combo((-1, 2), (3, 2))),
    ];
    let labeller = Labeller::new(sc.process.pool());
    for (env, r) in &expected {
        f.check(
            point_mass_on(eta, env, r),
            format!("eta'({env}) = {}", labeller.describe(r)),
        );
    }
    let rho2 = out.process.as_ref().unwrap();
    let mb = sc.spec().parse_history("M B").unwrap();
    f.check(rho2.expectation(&mb).unwrap() == rb, "e'(MB) = R_B");
    for h in sc.spec().complete_histories() {
        if sc.prior.is_possible(h) && rho2.expectation(h).unwrap() != sc.process.expectation(h).unwrap() {
            f.check(false, format!("expectations differ at {}", sc.spec().format_history(h)));
        }
    }

    let ti = bundled("total_information");
    let out = kind.run(&ti, None).unwrap();
    let prior = out.prior.as_ref().unwrap();
    let uniform = prior.weights().iter().all(|w| *w == ratio(1, 16));
    f.check(
        out.passed() && prior.len() == 16 && uniform,
        format!("total information: |M'| = {}, uniform 1/16", prior.len()),
    );
    f.finish()
}

fn translation_construction() -> Check {
    let mut f = Findings::new();
    let sc = bundled("appendixB1");
    let spec = sc.spec().clone();
    let pol = Policy::constant(spec.clone(), spec.action_by_name("a").unwrap());
    let out = constructions::lookup("unriggable")
        .unwrap()
        .run(&sc, Some(&pol))
        .unwrap();
    let rho2 = out.process.as_ref().unwrap();
    let (r, r2) = (&sc.process.pool()[0], &sc.process.pool()[1]);
    let want = [
        (
            "a' o",
            affine_combine(&[(ratio(3, 2), r), (ratio(-1, 2), r2)]).unwrap(),
            "3/2 R - 1/2 R'",
        ),
        (
            "a' o'",
            affine_combine(&[(ratio(1, 2), r), (ratio(1, 2), r2)]).unwrap(),
            "1/2 R + 1/2 R'",
        ),
    ];
    for (h, target, text) in &want {
        let h = spec.parse_history(h).unwrap();
        let d = rho2.distribution(&h);
        let point = d.len() == 1 && rho2.pool()[d[0].0] == *target && d[0].1 == int(1);
        f.check(point, format!("point mass on {text} at `{}`", spec.format_history(&h)));
    }
    f.check(
        check_unriggable(rho2, &sc.prior).unwrap().unriggable,
        "output passes check_unriggable",
    );
    let flagged = out.notes.iter().any(|n| n.contains("outside the convex hull"));
    f.check(
        flagged,
        "negative affine coefficient reported (outside the convex hull)",
    );
    f.check(out.passed(), "all construction checks pass");
    let emitted = constructed_scenario(&sc, &out).unwrap().unwrap();
    f.check(
        report::classify(&emitted).unwrap().verdict != Verdict::Riggable,
        "emitted scenario re-classifies as unriggable",
    );
    f.finish()
}

/// Completions of `h` with positive probability under `pol`.
fn completions(prior: &Prior, pol: &Policy, h: &History) -> Vec<History> {
    prior
        .spec()
        .complete_histories()
        .iter()
        .filter(|c| h.is_prefix_of(c))
        .filter(|c| {
            prior
                .envs()
                .iter()
                .zip(prior.weights())
                .any(|(e, w)| *w > zero() && e.history_prob(c, pol) > zero())
        })
        .cloned()
        .collect()
}

fn sacrifice_relabeling() -> Check {
    let mut f = Findings::new();
    for name in ["parental_xi3", "penalty"] {
        let sc = bundled(name);
        let out = constructions::lookup("sacrifice").unwrap().run(&sc, None).unwrap();
        let demo = out.sacrifice.as_ref().unwrap();
        let relabeled: &LearningProcess = out.process.as_ref().unwrap();
        let bad = completions(&sc.prior, &demo.optimal, &demo.history);
        let good = completions(&sc.prior, &demo.better, &demo.history);
        let image: Vec<&RewardFunction> = relabeled.pool().iter().collect();
        let mut pairs = 0;
        let mut all = !bad.is_empty() && !good.is_empty();
        for r in &image {
            for g in &good {
                for b in &bad {
                    pairs += 1;
                    all &= r.value(g) > r.value(b);
                }
            }
        }
        let is_optimal = rewardrig_core::value::optimal_value(relabeled, &sc.prior).unwrap()
            == rewardrig_core::value::value(&History::empty(), relabeled, &demo.optimal, &sc.prior).unwrap();
        f.check(
            out.passed() && all && is_optimal,
            format!("{name}: optimal policy loses on all {pairs} (reward, completion pair) comparisons"),
        );
    }
    f.finish()
}

fn random_relabeling(rng: &mut ChaCha8Rng, pool: &[RewardFunction]) -> AffineRelabeling {
    let spec = pool[0].spec().clone();
    let n = spec.complete_count();
    let matrix: Vec<Vec<Rational>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3)))
                .collect()
        })
        .collect();
    let shift: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-5..=5))).collect();
    let linear = move |r: &RewardFunction| -> Vec<Rational> {
        matrix
            .iter()
            .map(|row| row.iter().zip(r.values()).map(|(m, v)| m * v).sum())
            .collect()
    };
    let linear2 = linear.clone();
    let spec2 = spec.clone();
    AffineRelabeling::from_linear_part(
        pool,
        move |r| {
            let v = linear(r).into_iter().zip(&shift).map(|(a, b)| a + b).collect();
            RewardFunction::new(spec.clone(), v)
        },
        move |d| RewardFunction::new(spec2.clone(), linear2(d)),
    )
    .unwrap()
}

fn property_suite() -> Check {
    let mut f = Findings::new();
    let kinds = [
        ScenarioKind::Arbitrary,
        ScenarioKind::Uninfluenceable,
        ScenarioKind::Unriggable,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0usize; 6];
    let mut failures: Vec<String> = Vec::new();
    let total = 240;
    for i in 0..total {
        let sc = random_scenario(&mut rng, kinds[i % 3]);
        let (rho, prior) = (&sc.process, &sc.prior);
        let mut fail = |what: &str| failures.push(format!("scenario {i}: {what}"));
        if deterministic_policy_count(sc.spec()) > 32 {
            fail("more than 32 deterministic policies");
        }
        let unrig = check_unriggable(rho, prior).unwrap();
        if unrig.unriggable != check_unriggable_oracle(rho, prior, 32).unwrap().unriggable {
            fail("(a) check_unriggable disagrees with policy enumeration");
        }
        counts[0] += 1;
        let inf = check_uninfluenceable(rho, prior).unwrap();
        if inf.uninfluenceable {
            counts[1] += 1;
            if !unrig.unriggable {
                fail("(b) uninfluenceable but riggable");
            }
        }
        if let Some(ext) = &unrig.extended {
            counts[2] += 1;
            if ext.martingale_residual(prior).unwrap() != zero() {
                fail("(c) martingale identity fails");
            }
            counts[3] += 1;
            for mode in [ImageMode::PriorRestricted, ImageMode::Full] {
                if find_sacrifice(rho, prior, mode, 32).unwrap().is_some() {
                    fail(&format!("(d) unriggable optimum sacrifices ({mode:?} image)"));
                }
            }
        }
        let pol = random_policy(&mut rng, sc.spec());
        let (_, cf) = counterfactual_process(rho, &pol, prior).unwrap();
        counts[4] += 1;
        if !check_uninfluenceable(&cf, prior).unwrap().uninfluenceable {
            fail("(e) counterfactual output not certified uninfluenceable");
        }
        let sigma = random_relabeling(&mut rng, rho.pool());
        let relabeled = apply_relabeling(&sigma, rho).unwrap();
        counts[5] += 1;
        for h in sc.spec().complete_histories() {
            if relabeled.expectation(h).unwrap() != sigma.apply(&rho.expectation(h).unwrap()).unwrap() {
                fail("(f) relabeling does not commute with the expectation");
                break;
            }
        }
    }
    f.check(
        failures.is_empty(),
        format!(
            "{total} scenarios; checked (a) {} (b) {} (c) {} (d) {} (e) {} (f) {}",
            counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
        ),
    );
    for msg in failures.into_iter().take(5) {
        f.check(false, msg);
    }
    f.finish()
}

const RUNS: usize = 1000;
const EPISODES: usize = 20_000;
const SEED: u64 = 0;

struct Cell {
    prior: PriorTag,
    agent: &'static str,
    nominal: f64,
    truth: Option<(f64, f64)>,
}

fn experiment_reproduction() -> Check {
    let mut f = Findings::new();
    let cells = [
        Cell {
            prior: PriorTag::BD,
            agent: "counterfactual",
            nominal: 9.9,
            truth: None,
        },
        Cell {
            prior: PriorTag::BD,
            agent: "standard",
            nominal: 9.5,
            truth: None,
        },
        Cell {
            prior: PriorTag::DD,
            agent: "counterfactual",
            nominal: 0.9,
            truth: None,
        },
        Cell {
            prior: PriorTag::DD,
            agent: "standard",
            nominal: 4.9,
            truth: Some((-0.1, 0.2)),
        },
        Cell {
            prior: PriorTag::Half,
            agent: "standard",
            nominal: 5.2,
            truth: Some((2.45, 0.3)),
        },
        Cell {
            prior: PriorTag::Half,
            agent: "counterfactual",
            nominal: 5.0,
            truth: None,
        },
        Cell {
            prior: PriorTag::Correlated,
            agent: "counterfactual",
            nominal: 5.2,
            truth: None,
        },
        Cell {
            prior: PriorTag::Correlated,
            agent: "standard",
            nominal: 5.2,
            truth: None,
        },
    ];
    let config = QConfig::default();
    let mut converged = Vec::new();
    for cell in &cells {
        let rule = lookup(cell.agent).unwrap();
        let model = GridModel::new(rule, cell.prior).unwrap();
        let stats = aggregate_runs(&model, &config, RUNS, EPISODES, SEED).unwrap();
        let (nominal, truth) = (stats.converged_nominal(), stats.converged_truth());
        f.check(
            (nominal - cell.nominal).abs() <= 0.2,
            format!(
                "{} {}: nominal {nominal:.3} vs {} +/- 0.2",
                cell.prior, cell.agent, cell.nominal
            ),
        );
        if let Some((target, tol)) = cell.truth {
            f.check(
                (truth - target).abs() <= tol,
                format!("{} {}: true {truth:.3} vs {target} +/- {tol}", cell.prior, cell.agent),
            );
        }
        converged.push(((cell.prior, cell.agent), nominal, truth));
    }
    let get = |p: PriorTag, a: &str| {
        converged
            .iter()
            .find(|((q, b), _, _)| *q == p && *b == a)
            .map(|(_, n, t)| (*n, *t))
            .unwrap()
    };
    let (bd_cf, bd_st) = (get(PriorTag::BD, "counterfactual"), get(PriorTag::BD, "standard"));
    f.check(bd_cf.0 > bd_st.0, "BD: counterfactual value above standard");
    let (dd_cf, dd_st) = (get(PriorTag::DD, "counterfactual"), get(PriorTag::DD, "standard"));
    f.check(
        dd_st.0 > dd_cf.0 && dd_cf.1 > dd_st.1,
        "DD: standard nominally higher, truly lower",
    );
    let (h_cf, h_st) = (get(PriorTag::Half, "counterfactual"), get(PriorTag::Half, "standard"));
    f.check(
        h_st.0 > h_cf.0 && h_cf.1 > h_st.1,
        "half: standard nominally higher, truly lower",
    );

    let q = |n, d| ratio(n, d);
    let exact = |p, a: &str| best_candidate(lookup(a).unwrap(), p).unwrap();
    let exact_ok = exact(PriorTag::BD, "counterfactual").nominal == q(99, 10)
        && exact(PriorTag::BD, "standard").nominal == q(19, 2)
        && exact(PriorTag::DD, "counterfactual").nominal == q(9, 10)
        && exact(PriorTag::DD, "standard").nominal == q(49, 10)
        && exact(PriorTag::DD, "standard").truth == q(-1, 10)
        && exact(PriorTag::Half, "standard").nominal == q(26, 5)
        && exact(PriorTag::Half, "standard").truth == q(49, 20)
        && exact(PriorTag::Half, "counterfactual").nominal == q(5, 1)
        && exact(PriorTag::Correlated, "standard").nominal == q(26, 5)
        && exact(PriorTag::Correlated, "counterfactual").nominal == q(26, 5);
    let father = exact_policy_values(lookup("standard").unwrap(), PriorTag::Half)
        .unwrap()
        .into_iter()
        .find(|v| v.candidate == Candidate::AskFather)
        .unwrap();
    let per_world: Vec<String> = father.per_world.iter().map(|(_, v)| format(v)).collect();
    let worlds_ok = father.per_world.iter().all(|(_, v)| *v == q(97, 10) || *v == q(7, 10))
        && father.per_world.iter().any(|(_, v)| *v == q(97, 10))
        && father.per_world.iter().any(|(_, v)| *v == q(7, 10));
    f.check(
        exact_ok && worlds_ok,
        format!(
            "exact oracle: 99/10, 19/2, 9/10, 49/10 and -1/10, 26/5, 49/20, 5; per-world {}",
            per_world.join(", ")
        ),
    );
    f.finish()
}

pub struct Criterion {
    pub name: &'static str,
    pub limit: Duration,
    run: fn() -> Check,
}

pub struct Outcome {
    pub passed: bool,
    pub elapsed: Duration,
    /// Every finding when passing, only the failed ones otherwise.
    pub details: Vec<String>,
}

impl Criterion {
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let result = (self.run)();
        let elapsed = start.elapsed();
        match result {
            Ok(details) => Outcome {
                passed: elapsed <= self.limit,
                elapsed,
                details,
            },
            Err(details) => Outcome {
                passed: false,
                elapsed,
                details,
            },
        }
    }
}

pub fn criteria() -> [Criterion; 6] {
    let c = |name, secs, run| Criterion {
        name,
        limit: Duration::from_secs(secs),
        run,
    };
    [
        c(
            "classification golden set",
            1,
            classification_golden_set as fn() -> Check,
        ),
        c(
            "unriggable to uninfluenceable construction",
            10,
            enlargement_construction,
        ),
        c("translation construction", 1, translation_construction),
        c("sacrifice relabeling", 5, sacrifice_relabeling),
        c("randomised property suite", 60, property_suite),
        c("experiment reproduction", 1800, experiment_reproduction),
    ]
}
