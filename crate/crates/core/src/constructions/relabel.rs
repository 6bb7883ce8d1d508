use std::sync::Arc;

use num_traits::{One, Zero};

use super::{CheckResult, Construction, ConstructionReport, SacrificeDemo};
use crate::classify::{check_sacrifice, check_unriggable, ImageMode};
use crate::environment::Prior;
use crate::error::{Error, Result};
use crate::linalg::AffineBasis;
use crate::policy::Policy;
use crate::process::LearningProcess;
use crate::rational::Rational;
use crate::reward::RewardFunction;
use crate::scenario::Scenario;
use crate::spec::{Action, History, HorizonSpec};
use crate::value::optimal_policy;

/// An affine map defined on the affine hull of a reward-function pool:
/// `σ(origin + Σ β_i d_i) = origin_image + Σ β_i direction_images[i]`.
#[derive(Clone, Debug)]
pub struct AffineRelabeling {
    spec: Arc<HorizonSpec>,
    basis: AffineBasis,
    origin_image: RewardFunction,
    direction_images: Vec<RewardFunction>,
}

impl AffineRelabeling {
    pub fn new(
        spec: Arc<HorizonSpec>,
        basis: AffineBasis,
        origin_image: RewardFunction,
        direction_images: Vec<RewardFunction>,
    ) -> Result<Self> {
        if direction_images.len() != basis.dim() {
            return Err(Error::invalid("relabeling", "one image per basis direction required"));
        }
        if basis.origin().len() != spec.complete_count() {
            return Err(Error::Domain("relabeling basis does not fit the horizon spec".into()));
        }
        Ok(AffineRelabeling {
            spec,
            basis,
            origin_image,
            direction_images,
        })
    }

    /// The identity on the affine hull of `pool`.
    pub fn identity(pool: &[RewardFunction]) -> Result<Self> {
        Self::from_linear_part(pool, |r| Ok(r.clone()), |d| Ok(d.clone()))
    }

    /// `σ(R) = image_of_origin + L(R − pool[0])` for a linear part given on directions.
    pub fn from_linear_part(
        pool: &[RewardFunction],
        origin: impl Fn(&RewardFunction) -> Result<RewardFunction>,
        linear: impl Fn(&RewardFunction) -> Result<RewardFunction>,
    ) -> Result<Self> {
        let first = pool.first().ok_or_else(|| Error::invalid("relabeling", "empty pool"))?;
        let spec = first.spec().clone();
        let points: Vec<Vec<Rational>> = pool.iter().map(|r| r.values().to_vec()).collect();
        let basis = AffineBasis::from_points(&points).expect("non-empty");
        let dirs = basis
            .directions()
            .iter()
            .map(|d| linear(&RewardFunction::new(spec.clone(), d.clone())?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spec, basis, origin(first)?, dirs)
    }

    pub fn basis(&self) -> &AffineBasis {
        &self.basis
    }

    pub fn origin_image(&self) -> &RewardFunction {
        &self.origin_image
    }

    pub fn direction_images(&self) -> &[RewardFunction] {
        &self.direction_images
    }

    /// `σ(R)`; fails outside the affine hull the map is defined on.
    pub fn apply(&self, r: &RewardFunction) -> Result<RewardFunction> {
        if **r.spec() != *self.spec {
            return Err(Error::Domain("reward function over a different horizon spec".into()));
        }
        let beta = self.basis.coordinates(r.values()).ok_or(Error::OutsideDomain)?;
        let mut out = self.origin_image.clone();
        for (b, d) in beta.iter().zip(&self.direction_images) {
            if !b.is_zero() {
                out = out.plus(&d.scaled(b))?;
            }
        }
        Ok(out)
    }
}

/// `P(R | h_n, σ∘ρ) = Σ_{R′: σ(R′) = R} P(R′ | h_n, ρ)`.
pub fn apply_relabeling(sigma: &AffineRelabeling, rho: &LearningProcess) -> Result<LearningProcess> {
    rho.map_rewards(|r| sigma.apply(r))
}

/// A relabeling under which the optimal policy sacrifices reward with certainty.
#[derive(Clone, Debug)]
pub struct SacrificeRelabeling {
    pub sigma: AffineRelabeling,
    pub history: History,
    /// The action the relabelled optimum takes at `history`.
    pub action: Action,
    /// The action it sacrifices reward to.
    pub alternative: Action,
    pub relabeled: LearningProcess,
    pub optimal: Policy,
    pub better: Policy,
}

/// For riggable `ρ`: take the deepest witness `(h_m, a, a′, R_1, R_2)`, let
/// `f` be the minimum-norm affine functional on the pool's hull with
/// `f(R_1) = 1`, `f(R_2) = −1`, and map `R` to the reward worth `f(R)`
/// after `h_m a`, `f(R) + 1` after `h_m a′` and `0` elsewhere.
pub fn sacrifice_relabeling(rho: &LearningProcess, prior: &Prior) -> Result<SacrificeRelabeling> {
    let verdict = check_unriggable(rho, prior)?;
    let Some(w) = verdict.witness else {
        return Err(Error::Unriggable("a certain sacrifice needs a riggable process".into()));
    };
    let spec = rho.spec().clone();
    let points: Vec<Vec<Rational>> = rho.pool().iter().map(|r| r.values().to_vec()).collect();
    let basis = AffineBasis::from_points(&points).expect("pools are non-empty");
    let b1 = basis.coordinates(w.expectation.values()).ok_or(Error::OutsideDomain)?;
    let b2 = basis
        .coordinates(w.alternative_expectation.values())
        .ok_or(Error::OutsideDomain)?;
    let gamma: Vec<Rational> = b1.iter().zip(&b2).map(|(x, y)| x - y).collect();
    let norm = gamma.iter().fold(Rational::zero(), |acc, g| acc + g * g);
    let two = Rational::from_integer(2.into());
    let phi: Vec<Rational> = gamma.iter().map(|g| &two * g / &norm).collect();
    let f0 = Rational::one() - phi.iter().zip(&b1).fold(Rational::zero(), |acc, (p, b)| acc + p * b);

    let on_branch = |h: &History, a: Action| {
        h.len() > w.history.len() && w.history.is_prefix_of(h) && h.steps()[w.history.len()].0 == a
    };
    let u = RewardFunction::from_fn(spec.clone(), |h| {
        if on_branch(h, w.action) || on_branch(h, w.alternative) {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let w0 = RewardFunction::from_fn(spec.clone(), |h| {
        if on_branch(h, w.alternative) {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let origin_image = w0.plus(&u.scaled(&f0))?.with_label("sigma(origin)");
    let direction_images = phi.iter().map(|p| u.scaled(p)).collect();
    let sigma = AffineRelabeling::new(spec.clone(), basis, origin_image, direction_images)?;

    let relabeled = apply_relabeling(&sigma, rho)?;
    let optimal = optimal_policy(&relabeled, prior)?;
    let better = optimal.with_choice(&w.history, w.alternative);
    Ok(SacrificeRelabeling {
        sigma,
        history: w.history,
        action: w.action,
        alternative: w.alternative,
        relabeled,
        optimal,
        better,
    })
}

pub struct Sacrifice;

impl Construction for Sacrifice {
    fn name(&self) -> &'static str {
        "sacrifice"
    }

    fn summary(&self) -> &'static str {
        "relabel a riggable process so that its optimal policy sacrifices reward with certainty"
    }

    fn run(&self, scenario: &Scenario, _policy: Option<&Policy>) -> Result<ConstructionReport> {
        let (rho, prior) = (&scenario.process, &scenario.prior);
        let demo = sacrifice_relabeling(rho, prior)?;
        let mut checks = vec![CheckResult::flag(
            "relabelled optimum takes the witness action",
            demo.optimal.choice(&demo.history) == Some(demo.action),
        )];
        for (mode, label) in [
            (ImageMode::Full, "full image"),
            (ImageMode::PriorRestricted, "prior-restricted image"),
        ] {
            let v = check_sacrifice(&demo.optimal, &demo.better, &demo.history, &demo.relabeled, prior, mode)?;
            checks.push(CheckResult::flag(
                format!("optimum sacrifices reward with certainty ({label})"),
                v.sacrifices,
            ));
        }
        let mut worst = Rational::zero();
        for h in rho.spec().complete_histories() {
            let lhs = demo.relabeled.expectation(h)?;
            let rhs = demo.sigma.apply(&rho.expectation(h)?)?;
            worst = worst.max(lhs.max_abs_diff(&rhs)?);
        }
        checks.push(CheckResult::exact("relabeling commutes with expectations", worst));
        let spec = rho.spec();
        let at = match spec.format_history(&demo.history) {
            h if h.is_empty() => "the empty history".to_string(),
            h => format!("`{h}`"),
        };
        let notes = vec![format!(
            "at {at}: action `{}` is optimal after relabeling but `{}` is better for every image reward",
            spec.action_name(demo.action),
            spec.action_name(demo.alternative),
        )];
        Ok(ConstructionReport {
            kind: self.name().into(),
            process: Some(demo.relabeled),
            prior: Some(prior.clone()),
            relabeling: Some(demo.sigma),
            sacrifice: Some(SacrificeDemo {
                history: demo.history,
                optimal: demo.optimal,
                better: demo.better,
            }),
            checks,
            notes,
            ..Default::default()
        })
    }
}
