//! Reward (return) functions on complete histories, and their affine structure.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::spec::{History, HorizonSpec};

/// A dense table over the complete histories of a spec. Identity is by
/// table content; the label is descriptive only.
#[derive(Clone)]
pub struct RewardFunction {
    spec: Arc<HorizonSpec>,
    table: Vec<Rational>,
    label: Option<String>,
}

impl PartialEq for RewardFunction {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && *self.spec == *other.spec
    }
}

impl Eq for RewardFunction {}

impl Hash for RewardFunction {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.table.hash(state);
    }
}

impl fmt::Debug for RewardFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self
            .spec
            .complete_histories()
            .iter()
            .zip(&self.table)
            .map(|(h, v)| format!("{}={}", self.spec.format_history(h), rational::format(v)))
            .collect();
        write!(f, "{}[{}]", self.label.as_deref().unwrap_or("R"), cells.join(", "))
    }
}

impl RewardFunction {
    pub fn new(spec: Arc<HorizonSpec>, table: Vec<Rational>) -> Result<Self> {
        if table.len() != spec.complete_count() {
            return Err(Error::invalid(
                "reward function",
                format!("needs {} values, got {}", spec.complete_count(), table.len()),
            ));
        }
        Ok(RewardFunction {
            spec,
            table,
            label: None,
        })
    }

    pub fn from_fn(spec: Arc<HorizonSpec>, value: impl Fn(&History) -> Rational) -> Self {
        let table = spec.complete_histories().iter().map(value).collect();
        RewardFunction {
            spec,
            table,
            label: None,
        }
    }

    pub fn constant(spec: Arc<HorizonSpec>, value: Rational) -> Self {
        let table = vec![value; spec.complete_count()];
        RewardFunction {
            spec,
            table,
            label: None,
        }
    }

    pub fn zero(spec: Arc<HorizonSpec>) -> Self {
        Self::constant(spec, Rational::zero())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn spec(&self) -> &Arc<HorizonSpec> {
        &self.spec
    }

    pub fn values(&self) -> &[Rational] {
        &self.table
    }

    /// `R(h_n)`.
    pub fn value(&self, h: &History) -> &Rational {
        &self.table[self.spec.complete_index(h)]
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(Zero::is_zero)
    }

    fn same_spec(&self, other: &RewardFunction) -> Result<()> {
        if *self.spec != *other.spec {
            return Err(Error::Domain("reward functions over different horizon specs".into()));
        }
        Ok(())
    }

    pub fn plus(&self, other: &RewardFunction) -> Result<RewardFunction> {
        self.same_spec(other)?;
        Ok(RewardFunction {
            spec: self.spec.clone(),
            table: self.table.iter().zip(&other.table).map(|(a, b)| a + b).collect(),
            label: None,
        })
    }

    pub fn minus(&self, other: &RewardFunction) -> Result<RewardFunction> {
        self.same_spec(other)?;
        Ok(RewardFunction {
            spec: self.spec.clone(),
            table: self.table.iter().zip(&other.table).map(|(a, b)| a - b).collect(),
            label: None,
        })
    }

    pub fn scaled(&self, factor: &Rational) -> RewardFunction {
        RewardFunction {
            spec: self.spec.clone(),
            table: self.table.iter().map(|v| v * factor).collect(),
            label: None,
        }
    }

    /// `max_h |R(h) − R'(h)|`, the exact residual between two tables.
    pub fn max_abs_diff(&self, other: &RewardFunction) -> Result<Rational> {
        self.same_spec(other)?;
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(Rational::zero(), |m, d| if d > m { d } else { m }))
    }
}

/// Pointwise `Σ α_i R_i`. Coefficients summing to one give an affine
/// combination; other sums are allowed for internal linear algebra.
pub fn affine_combine(terms: &[(Rational, &RewardFunction)]) -> Result<RewardFunction> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::invalid("affine combination", "no terms"))?;
    let mut table = vec![Rational::zero(); first.table.len()];
    for (alpha, r) in terms {
        first.same_spec(r)?;
        if alpha.is_zero() {
            continue;
        }
        for (acc, v) in table.iter_mut().zip(&r.table) {
            *acc += alpha * v;
        }
    }
    Ok(RewardFunction {
        spec: first.spec.clone(),
        table,
        label: None,
    })
}
