use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::process::LearningProcess;
use crate::rational::{self, Rational};
use crate::reward::{affine_combine, RewardFunction};
use crate::simplex::{find_feasible, Feasibility};
use crate::spec::HorizonSpec;

/// Default cap on the number of LP variables `|M⁺| · |im(ρ, ξ)|`.
pub const DEFAULT_LP_VARIABLE_CAP: u128 = 4_096;

/// `P(R | η, μ)`: a distribution over reward functions for each environment.
#[derive(Clone, Debug)]
pub struct EnvConditional {
    spec: Arc<HorizonSpec>,
    env_names: Vec<String>,
    pool: Vec<RewardFunction>,
    dist: Vec<Vec<(usize, Rational)>>,
}

impl EnvConditional {
    pub fn new(env_names: Vec<String>, dists: Vec<Vec<(RewardFunction, Rational)>>) -> Result<Self> {
        if env_names.len() != dists.len() {
            return Err(Error::invalid(
                "environment conditional",
                "one distribution per environment required",
            ));
        }
        let spec = dists
            .iter()
            .flatten()
            .map(|(r, _)| r.spec().clone())
            .next()
            .ok_or_else(|| Error::invalid("environment conditional", "no reward functions"))?;
        let mut pool: Vec<RewardFunction> = Vec::new();
        let mut out = Vec::with_capacity(dists.len());
        for (name, d) in env_names.iter().zip(dists) {
            let mut merged: Vec<(usize, Rational)> = Vec::new();
            for (r, w) in d {
                if **r.spec() != *spec {
                    return Err(Error::Domain("reward functions over different horizon specs".into()));
                }
                if w.is_negative() {
                    return Err(Error::invalid(
                        "environment conditional",
                        format!("negative weight for `{name}`"),
                    ));
                }
                if w.is_zero() {
                    continue;
                }
                let i = match pool.iter().position(|p| *p == r) {
                    Some(i) => i,
                    None => {
                        pool.push(r);
                        pool.len() - 1
                    }
                };
                match merged.iter_mut().find(|(j, _)| *j == i) {
                    Some((_, acc)) => *acc += w,
                    None => merged.push((i, w)),
                }
            }
            let total = merged.iter().fold(Rational::zero(), |acc, (_, w)| acc + w);
            if !total.is_one() {
                return Err(Error::invalid(
                    "environment conditional",
                    format!("weights for `{name}` sum to {}", rational::format(&total)),
                ));
            }
            merged.sort_by_key(|(i, _)| *i);
            out.push(merged);
        }
        Ok(EnvConditional {
            spec,
            env_names,
            pool,
            dist: out,
        })
    }

    /// `η(μ)` a single reward function for each environment.
    pub fn point_masses(env_names: Vec<String>, rewards: Vec<RewardFunction>) -> Result<Self> {
        let dists = rewards.into_iter().map(|r| vec![(r, Rational::one())]).collect();
        Self::new(env_names, dists)
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    pub fn env_names(&self) -> &[String] {
        &self.env_names
    }

    pub fn len(&self) -> usize {
        self.env_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.env_names.is_empty()
    }

    pub fn pool(&self) -> &[RewardFunction] {
        &self.pool
    }

    /// `(pool index, P(R | η, μ))` for environment `env`.
    pub fn distribution(&self, env: usize) -> &[(usize, Rational)] {
        &self.dist[env]
    }

    pub fn prob(&self, env: usize, r: &RewardFunction) -> Rational {
        self.dist[env]
            .iter()
            .find(|(i, _)| self.pool[*i] == *r)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// `e_η(μ) = Σ_R P(R | η, μ) R`.
    pub fn expectation(&self, env: usize) -> RewardFunction {
        let terms: Vec<(Rational, &RewardFunction)> = self.dist[env]
            .iter()
            .map(|(i, w)| (w.clone(), &self.pool[*i]))
            .collect();
        affine_combine(&terms).expect("non-empty distribution")
    }
}

/// `P(R | h_n, ρ) = Σ_μ P(R | η, μ) P(μ | h_n, ξ)` at possible `h_n`; at
/// impossible `h_n` the prior mixture `Σ_μ P(μ | ξ) P(R | η, μ)` is used.
pub fn infer_process(eta: &EnvConditional, prior: &Prior) -> Result<LearningProcess> {
    if eta.len() != prior.len() || eta.env_names.iter().zip(prior.envs()).any(|(n, e)| n != e.name()) {
        return Err(Error::Domain(
            "environment conditional does not match the prior's environments".into(),
        ));
    }
    if **eta.spec() != **prior.spec() {
        return Err(Error::Domain(
            "environment conditional and prior use different horizon specs".into(),
        ));
    }
    let spec = prior.spec().clone();
    let mut b = LearningProcess::builder(spec.clone());
    let indices = eta
        .pool
        .iter()
        .map(|r| b.add_reward(r.clone()))
        .collect::<Result<Vec<_>>>()?;
    for h in spec.complete_histories() {
        let weights = match prior.posterior(h) {
            Ok(p) => p,
            Err(Error::UndefinedPosterior { .. }) => prior.weights().to_vec(),
            Err(e) => return Err(e),
        };
        let mut d: Vec<(usize, Rational)> = Vec::new();
        for (env, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (i, p) in &eta.dist[env] {
                let idx = indices[*i];
                let mass = w * p;
                match d.iter_mut().find(|(j, _)| *j == idx) {
                    Some((_, acc)) => *acc += mass,
                    None => d.push((idx, mass)),
                }
            }
        }
        b.set(h, d)?;
    }
    b.build()
}

#[derive(Clone, Debug)]
pub struct InfluenceVerdict {
    pub uninfluenceable: bool,
    /// A feasible `η` (one of possibly many) when uninfluenceable.
    pub eta: Option<EnvConditional>,
    /// When influenceable: the constraints a Farkas certificate combines.
    pub infeasibility_note: Option<String>,
    /// Constraint names with their nonzero certificate multipliers.
    pub certificate: Vec<(String, Rational)>,
}

fn reward_name(r: &RewardFunction, i: usize) -> String {
    r.label().map(str::to_string).unwrap_or_else(|| format!("R#{i}"))
}

/// Exact feasibility of the inference equation over `η`.
pub fn check_uninfluenceable(rho: &LearningProcess, prior: &Prior) -> Result<InfluenceVerdict> {
    check_uninfluenceable_with_cap(rho, prior, DEFAULT_LP_VARIABLE_CAP)
}

pub fn check_uninfluenceable_with_cap(rho: &LearningProcess, prior: &Prior, cap: u128) -> Result<InfluenceVerdict> {
    if **rho.spec() != **prior.spec() {
        return Err(Error::Domain("process and prior use different horizon specs".into()));
    }
    let spec = rho.spec().clone();
    let envs: Vec<usize> = (0..prior.len()).filter(|&i| !prior.weights()[i].is_zero()).collect();
    let image = rho.image_indices(Some(prior));
    let nvars = envs.len() * image.len();
    if nvars as u128 > cap {
        return Err(Error::SizeCap {
            what: "uninfluenceability LP variable",
            count: nvars as u128,
            cap,
        });
    }
    let var = |e: usize, r: usize| e * image.len() + r;

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (e, &env) in envs.iter().enumerate() {
        let mut row = vec![Rational::zero(); nvars];
        for r in 0..image.len() {
            row[var(e, r)] = Rational::one();
        }
        rows.push(row);
        rhs.push(Rational::one());
        names.push(format!("Σ_R P(R | η, {}) = 1", prior.envs()[env].name()));
    }
    for h in spec.complete_histories() {
        let Ok(post) = prior.posterior(h) else { continue };
        for (r, &ri) in image.iter().enumerate() {
            let mut row = vec![Rational::zero(); nvars];
            for (e, &env) in envs.iter().enumerate() {
                row[var(e, r)] = post[env].clone();
            }
            rows.push(row);
            rhs.push(rho.prob(h, &rho.pool()[ri]));
            names.push(format!(
                "P({} | `{}`, ρ) = {}",
                reward_name(&rho.pool()[ri], ri),
                spec.format_history(h),
                rational::format(rhs.last().expect("just pushed"))
            ));
        }
    }

    match find_feasible(&rows, &rhs) {
        Feasibility::Feasible(q) => {
            let mut dists = Vec::with_capacity(prior.len());
            for env in 0..prior.len() {
                let d = match envs.iter().position(|&x| x == env) {
                    Some(e) => image
                        .iter()
                        .enumerate()
                        .map(|(r, &ri)| (rho.pool()[ri].clone(), q[var(e, r)].clone()))
                        .collect(),
                    None => vec![(rho.pool()[image[0]].clone(), Rational::one())],
                };
                dists.push(d);
            }
            let names = prior.envs().iter().map(|e| e.name().to_string()).collect();
            let eta = EnvConditional::new(names, dists)?;
            Ok(InfluenceVerdict {
                uninfluenceable: true,
                eta: Some(eta),
                infeasibility_note: None,
                certificate: Vec::new(),
            })
        }
        Feasibility::Infeasible(y) => {
            let certificate: Vec<(String, Rational)> = names.into_iter().zip(y).filter(|(_, m)| !m.is_zero()).collect();
            let listed: Vec<&str> = certificate.iter().map(|(n, _)| n.as_str()).collect();
            let note = format!(
                "no η reproduces ρ: these constraints are jointly inconsistent: {}",
                listed.join("; ")
            );
            Ok(InfluenceVerdict {
                uninfluenceable: false,
                eta: None,
                infeasibility_note: Some(note),
                certificate,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ParentalPrior};
    use crate::rational::{int, ratio};

    fn roundtrip_holds(rho: &LearningProcess, prior: &Prior, eta: &EnvConditional) -> bool {
        let inferred = infer_process(eta, prior).unwrap();
        rho.spec().complete_histories().iter().all(|h| {
            !prior.is_possible(h)
                || rho
                    .pool()
                    .iter()
                    .chain(inferred.pool())
                    .all(|r| rho.prob(h, r) == inferred.prob(h, r))
        })
    }

    #[test]
    fn parental_xi1_is_uninfluenceable() {
        let sc = fixtures::parental(ParentalPrior::Xi1);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        let v = check_uninfluenceable(&sc.process, &sc.prior).unwrap();
        assert!(v.uninfluenceable);
        let eta = v.eta.unwrap();
        assert_eq!(eta.prob(0, &rb), int(1));
        assert_eq!(eta.prob(3, &rd), int(1));
        assert!(roundtrip_holds(&sc.process, &sc.prior, &eta));
    }

    #[test]
    fn parental_xi2_is_influenceable() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let v = check_uninfluenceable(&sc.process, &sc.prior).unwrap();
        assert!(!v.uninfluenceable);
        let note = v.infeasibility_note.unwrap();
        assert!(note.contains("mu_BD"), "{note}");
        assert!(!v.certificate.is_empty());
    }

    #[test]
    fn constant_process_is_uninfluenceable() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let r = RewardFunction::from_fn(sc.spec().clone(), |h| int(h.actions()[0].0 as i64 + 2));
        let rho = LearningProcess::point_mass(r.clone());
        for p in [
            ParentalPrior::Xi1,
            ParentalPrior::Xi2,
            ParentalPrior::Xi3,
            ParentalPrior::Dd,
        ] {
            let prior = fixtures::parental(p).prior;
            let v = check_uninfluenceable(&rho, &prior).unwrap();
            let eta = v.eta.unwrap();
            for e in 0..eta.len() {
                assert_eq!(eta.expectation(e), r);
            }
        }
    }

    #[test]
    fn inference_at_impossible_histories_uses_the_prior_mixture() {
        let sc = fixtures::parental(ParentalPrior::Dd);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        let names = sc.prior.envs().iter().map(|e| e.name().to_string()).collect();
        let eta = EnvConditional::point_masses(names, vec![rb.clone(), rb.clone(), rd.clone(), rd.clone()]).unwrap();
        let rho = infer_process(&eta, &sc.prior).unwrap();
        let mb = sc.spec().parse_history("MB").unwrap();
        assert_eq!(rho.prob(&mb, &rd), int(1));
        let md = sc.spec().parse_history("MD").unwrap();
        assert_eq!(rho.prob(&md, &rd), int(1));

        let sc2 = fixtures::parental(ParentalPrior::Xi2);
        let rho2 = infer_process(&eta, &sc2.prior).unwrap();
        assert_eq!(rho2.prob(&mb, &rb), int(1));
        let fb = sc.spec().parse_history("FB").unwrap();
        assert_eq!(rho2.prob(&fb, &rb), ratio(1, 2));
    }

    #[test]
    fn env_conditional_validation() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        assert!(EnvConditional::new(vec!["a".into()], vec![vec![(rb.clone(), ratio(1, 2))]]).is_err());
        assert!(EnvConditional::new(
            vec!["a".into()],
            vec![vec![(rb.clone(), ratio(3, 2)), (rd.clone(), ratio(-1, 2))]]
        )
        .is_err());
        let ok = EnvConditional::new(
            vec!["a".into()],
            vec![vec![(rb.clone(), ratio(1, 2)), (rb, ratio(1, 4)), (rd, ratio(1, 4))]],
        )
        .unwrap();
        assert_eq!(ok.distribution(0).len(), 2);
    }
}
