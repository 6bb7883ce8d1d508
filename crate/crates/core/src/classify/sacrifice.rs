use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::policy::{enumerate_deterministic_policies, Policy};
use crate::process::LearningProcess;
use crate::reward::RewardFunction;
use crate::spec::History;
use crate::value::optimal_policy;

/// Which image the sacrifice condition quantifies over.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum ImageMode {
    /// `im(ρ)`: reward functions with weight at any complete history.
    Full,
    /// `im(ρ, ξ)`: only complete histories possible under the prior count.
    #[default]
    PriorRestricted,
}

#[derive(Clone, Debug)]
pub struct SacrificeVerdict {
    pub sacrifices: bool,
    /// When not: `(good completion, bad completion, R)` with `R(good) ≤ R(bad)`.
    pub counterexample: Option<(History, History, RewardFunction)>,
    /// Completions of `h_m` under the bad and the good policy.
    pub bad_completions: Vec<History>,
    pub good_completions: Vec<History>,
}

/// Whether `pol_bad` sacrifices reward with certainty to `pol_good` on
/// `h_m`: every image reward strictly prefers every possible completion
/// under `pol_good` to every possible completion under `pol_bad`.
pub fn check_sacrifice(
    pol_bad: &Policy,
    pol_good: &Policy,
    h_m: &History,
    rho: &LearningProcess,
    prior: &Prior,
    mode: ImageMode,
) -> Result<SacrificeVerdict> {
    if **rho.spec() != **prior.spec() || **pol_bad.spec() != **rho.spec() || **pol_good.spec() != **rho.spec() {
        return Err(Error::Domain(
            "process, prior and policies must share one horizon spec".into(),
        ));
    }
    rho.spec().check(h_m)?;
    let bad: Vec<History> = prior.continuation(h_m, pol_bad)?.into_iter().map(|(h, _)| h).collect();
    let good: Vec<History> = prior.continuation(h_m, pol_good)?.into_iter().map(|(h, _)| h).collect();
    let image = match mode {
        ImageMode::Full => rho.image(None),
        ImageMode::PriorRestricted => rho.image(Some(prior)),
    };
    for r in &image {
        for g in &good {
            for b in &bad {
                if r.value(g) <= r.value(b) {
                    return Ok(SacrificeVerdict {
                        sacrifices: false,
                        counterexample: Some((g.clone(), b.clone(), r.clone())),
                        bad_completions: bad,
                        good_completions: good,
                    });
                }
            }
        }
    }
    Ok(SacrificeVerdict {
        sacrifices: true,
        counterexample: None,
        bad_completions: bad,
        good_completions: good,
    })
}

/// A history where the optimal policy sacrifices reward with certainty.
#[derive(Clone, Debug)]
pub struct SacrificeHit {
    pub history: History,
    pub optimal: Policy,
    pub better: Policy,
}

/// Searches every possible decision node and every deterministic
/// alternative for a certain sacrifice by `π^ρ`; returns the first found.
pub fn find_sacrifice(
    rho: &LearningProcess,
    prior: &Prior,
    mode: ImageMode,
    cap: u128,
) -> Result<Option<SacrificeHit>> {
    let spec = rho.spec().clone();
    let policies = enumerate_deterministic_policies(&spec, cap)?;
    let opt = optimal_policy(rho, prior)?;
    let possible = prior.possible_histories();
    for i in (0..spec.decision_node_count()).filter(|&i| possible[i]) {
        let h = spec.history_at(i);
        for p in &policies {
            if check_sacrifice(&opt, p, &h, rho, prior, mode)?.sacrifices {
                return Ok(Some(SacrificeHit {
                    history: h,
                    optimal: opt,
                    better: p.clone(),
                }));
            }
        }
    }
    Ok(None)
}
