//! Reward-function learning processes `ρ`: a finite-support distribution
//! over reward functions at every complete history.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::reward::{affine_combine, RewardFunction};
use crate::spec::{History, HorizonSpec};

#[derive(Clone, Debug)]
pub struct LearningProcess {
    spec: Arc<HorizonSpec>,
    pool: Vec<RewardFunction>,
    /// Per complete-history index: `(pool index, weight)` with positive weights.
    dist: Vec<Vec<(usize, Rational)>>,
}

/// Incremental construction with pool de-duplication by table content.
#[derive(Debug)]
pub struct ProcessBuilder {
    spec: Arc<HorizonSpec>,
    pool: Vec<RewardFunction>,
    lookup: HashMap<RewardFunction, usize>,
    dist: Vec<Option<Vec<(usize, Rational)>>>,
}

impl ProcessBuilder {
    pub fn new(spec: Arc<HorizonSpec>) -> Self {
        let n = spec.complete_count();
        ProcessBuilder {
            spec,
            pool: Vec::new(),
            lookup: HashMap::new(),
            dist: vec![None; n],
        }
    }

    /// Returns the pool index of `r`, adding it when its table is new.
    pub fn add_reward(&mut self, r: RewardFunction) -> Result<usize> {
        if **r.spec() != *self.spec {
            return Err(Error::Domain("reward function over a different horizon spec".into()));
        }
        if let Some(&i) = self.lookup.get(&r) {
            return Ok(i);
        }
        let i = self.pool.len();
        self.lookup.insert(r.clone(), i);
        self.pool.push(r);
        Ok(i)
    }

    pub fn set(&mut self, h: &History, weights: Vec<(usize, Rational)>) -> Result<()> {
        self.spec.check_complete(h)?;
        let idx = self.spec.complete_index(h);
        let mut merged: Vec<(usize, Rational)> = Vec::new();
        for (r, w) in weights {
            if r >= self.pool.len() {
                return Err(Error::invalid("learning process", "unknown reward index"));
            }
            if w.is_negative() {
                return Err(Error::invalid(
                    "learning process",
                    format!("negative weight at `{}`", self.spec.format_history(h)),
                ));
            }
            match merged.iter_mut().find(|(i, _)| *i == r) {
                Some((_, acc)) => *acc += w,
                None => merged.push((r, w)),
            }
        }
        self.dist[idx] = Some(merged);
        Ok(())
    }

    /// Sets the distribution at `h` from reward functions directly.
    pub fn set_rewards(&mut self, h: &History, weights: Vec<(RewardFunction, Rational)>) -> Result<()> {
        let mut indexed = Vec::with_capacity(weights.len());
        for (r, w) in weights {
            indexed.push((self.add_reward(r)?, w));
        }
        self.set(h, indexed)
    }

    pub fn build(self) -> Result<LearningProcess> {
        let spec = self.spec;
        let mut used = vec![false; self.pool.len()];
        let mut dist = Vec::with_capacity(self.dist.len());
        for (i, d) in self.dist.into_iter().enumerate() {
            let h = &spec.complete_histories()[i];
            let d = d.ok_or_else(|| {
                Error::invalid(
                    "learning process",
                    format!("no distribution at `{}`", spec.format_history(h)),
                )
            })?;
            let total = rational::sum(d.iter().map(|(_, w)| w));
            if total != rational::one() {
                return Err(Error::invalid(
                    "learning process",
                    format!(
                        "distribution at `{}` sums to {}",
                        spec.format_history(h),
                        rational::format(&total)
                    ),
                ));
            }
            let d: Vec<_> = d.into_iter().filter(|(_, w)| !w.is_zero()).collect();
            for (r, _) in &d {
                used[*r] = true;
            }
            dist.push(d);
        }
        // keep only referenced pool members, preserving order
        let mut remap = vec![usize::MAX; self.pool.len()];
        let mut pool = Vec::new();
        for (i, r) in self.pool.into_iter().enumerate() {
            if used[i] {
                remap[i] = pool.len();
                pool.push(r);
            }
        }
        for d in &mut dist {
            for (r, _) in d.iter_mut() {
                *r = remap[*r];
            }
            d.sort_by_key(|(r, _)| *r);
        }
        Ok(LearningProcess { spec, pool, dist })
    }
}

impl LearningProcess {
    pub fn builder(spec: Arc<HorizonSpec>) -> ProcessBuilder {
        ProcessBuilder::new(spec)
    }

    /// `P(R | h_n, ρ) = 1` for a single `R` everywhere.
    pub fn point_mass(r: RewardFunction) -> Self {
        let spec = r.spec().clone();
        let dist = vec![vec![(0, rational::one())]; spec.complete_count()];
        LearningProcess {
            spec,
            pool: vec![r],
            dist,
        }
    }

    pub fn from_fn(spec: Arc<HorizonSpec>, dist: impl Fn(&History) -> Vec<(RewardFunction, Rational)>) -> Result<Self> {
        let mut b = ProcessBuilder::new(spec.clone());
        for h in spec.complete_histories() {
            b.set_rewards(h, dist(h))?;
        }
        b.build()
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    /// The distinct reward functions the process puts positive weight on somewhere.
    pub fn pool(&self) -> &[RewardFunction] {
        &self.pool
    }

    /// `(pool index, P(R | h_n, ρ))` with positive weights.
    pub fn distribution(&self, h: &History) -> &[(usize, Rational)] {
        &self.dist[self.spec.complete_index(h)]
    }

    /// `P(R | h_n, ρ)`.
    pub fn prob(&self, h: &History, r: &RewardFunction) -> Rational {
        self.distribution(h)
            .iter()
            .find(|(i, _)| self.pool[*i] == *r)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Rational::zero)
    }

    fn expectation_unchecked(&self, h: &History) -> RewardFunction {
        let terms: Vec<(Rational, &RewardFunction)> = self
            .distribution(h)
            .iter()
            .map(|(i, w)| (w.clone(), &self.pool[*i]))
            .collect();
        affine_combine(&terms).expect("distributions are non-empty and share the spec")
    }

    /// `e_ρ(h_n) = Σ_R P(R | h_n, ρ) R`.
    pub fn expectation(&self, h: &History) -> Result<RewardFunction> {
        self.spec.check_complete(h)?;
        Ok(self.expectation_unchecked(h))
    }

    /// `e_ρ` at every complete history, by complete index.
    pub fn expectations(&self) -> Vec<RewardFunction> {
        self.spec
            .complete_histories()
            .iter()
            .map(|h| self.expectation_unchecked(h))
            .collect()
    }

    /// `R^ρ(h_n) = Σ_R P(R | h_n, ρ) R(h_n)`.
    pub fn effective_reward(&self) -> RewardFunction {
        RewardFunction::from_fn(self.spec.clone(), |h| {
            self.distribution(h)
                .iter()
                .fold(Rational::zero(), |acc, (i, w)| acc + w * self.pool[*i].value(h))
        })
    }

    /// Pool indices of `im(ρ)`, or of `im(ρ, ξ)` when a prior is given
    /// (only histories possible under `ξ` count).
    pub fn image_indices(&self, prior: Option<&Prior>) -> Vec<usize> {
        let possible = prior.map(|p| p.possible_histories());
        let mut seen = vec![false; self.pool.len()];
        for h in self.spec.complete_histories() {
            if let Some(flags) = &possible {
                if !flags[self.spec.index(h)] {
                    continue;
                }
            }
            for (i, _) in self.distribution(h) {
                seen[*i] = true;
            }
        }
        (0..self.pool.len()).filter(|&i| seen[i]).collect()
    }

    pub fn image(&self, prior: Option<&Prior>) -> Vec<RewardFunction> {
        self.image_indices(prior)
            .into_iter()
            .map(|i| self.pool[i].clone())
            .collect()
    }

    /// Pushforward of every distribution through `f`; weights of reward
    /// functions with equal images are summed.
    pub fn map_rewards(&self, mut f: impl FnMut(&RewardFunction) -> Result<RewardFunction>) -> Result<LearningProcess> {
        let images = self.pool.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        let mut b = ProcessBuilder::new(self.spec.clone());
        let indices = images
            .into_iter()
            .map(|r| b.add_reward(r))
            .collect::<Result<Vec<_>>>()?;
        for h in self.spec.complete_histories() {
            let d = self
                .distribution(h)
                .iter()
                .map(|(i, w)| (indices[*i], w.clone()))
                .collect();
            b.set(h, d)?;
        }
        b.build()
    }

    /// Translates the distribution at each `h_n` by `offset(h_n)`:
    /// `P(R + offset(h_n) | h_n, ρ') = P(R | h_n, ρ)`.
    pub fn translated(
        &self,
        offset: impl Fn(&History) -> RewardFunction,
        label: impl Fn(&RewardFunction) -> Option<String>,
    ) -> Result<LearningProcess> {
        let mut b = ProcessBuilder::new(self.spec.clone());
        for h in self.spec.complete_histories() {
            let shift = offset(h);
            let mut d = Vec::new();
            for (i, w) in self.distribution(h) {
                let mut r = self.pool[*i].plus(&shift)?;
                if shift.is_zero() {
                    r = self.pool[*i].clone();
                } else if let Some(l) = label(&r) {
                    r = r.with_label(l);
                }
                d.push((b.add_reward(r)?, w.clone()));
            }
            b.set(h, d)?;
        }
        b.build()
    }

    /// Pointwise mixture `(1 − q) ρ + q ρ'` of two processes on one spec.
    pub fn mix(&self, other: &LearningProcess, q: &Rational) -> Result<LearningProcess> {
        if *self.spec != *other.spec {
            return Err(Error::Domain("processes over different horizon specs".into()));
        }
        let p = rational::one() - q;
        LearningProcess::from_fn(self.spec.clone(), |h| {
            let mut d: Vec<(RewardFunction, Rational)> = self
                .distribution(h)
                .iter()
                .map(|(i, w)| (self.pool[*i].clone(), w * &p))
                .collect();
            d.extend(
                other
                    .distribution(h)
                    .iter()
                    .map(|(i, w)| (other.pool[*i].clone(), w * q)),
            );
            d
        })
    }
}
