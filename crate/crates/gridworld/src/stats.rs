//! Seeded parallel runs and their per-episode mean and standard deviation.

use rayon::prelude::*;

use crate::episode::GridModel;
use crate::error::{Error, Result};
use crate::qlearn::{q_learning_run, run_rng, QConfig, RunSeries};

/// Share of final episodes averaged into a converged value.
pub const CONVERGED_TAIL: f64 = 0.05;

const MAX_BATCHES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    /// Population standard deviation across runs.
    pub std: Vec<f64>,
}

impl SeriesStats {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Mean of the per-episode means over the last `tail` share of episodes.
    pub fn converged(&self, tail: f64) -> f64 {
        let n = self.mean.len();
        let k = ((n as f64 * tail).ceil() as usize).clamp(1, n);
        self.mean[n - k..].iter().sum::<f64>() / k as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub runs: usize,
    pub nominal: SeriesStats,
    pub truth: SeriesStats,
}

impl RunStats {
    pub fn episodes(&self) -> usize {
        self.nominal.len()
    }

    pub fn converged_nominal(&self) -> f64 {
        self.nominal.converged(CONVERGED_TAIL)
    }

    pub fn converged_truth(&self) -> f64 {
        self.truth.converged(CONVERGED_TAIL)
    }
}

/// Welford accumulators, one per episode.
#[derive(Clone, Debug)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1.0;
        for ((m, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(xs) {
            let delta = x - *m;
            *m += delta / self.count;
            *m2 += delta * (x - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
    }

    fn finish(self) -> SeriesStats {
        let count = self.count;
        let std = self.m2.iter().map(|m2| (m2 / count).max(0.0).sqrt()).collect();
        SeriesStats { mean: self.mean, std }
    }
}

/// Runs `runs` independent learners in the current rayon pool. Run `i`
/// draws from stream `i` of `seed`; batches are fixed by `runs` alone and
/// merged in order, so results do not depend on the thread count.
pub fn aggregate_runs(
    model: &GridModel,
    config: &QConfig,
    runs: usize,
    episodes: usize,
    seed: u64,
) -> Result<RunStats> {
    if runs == 0 {
        return Err(Error::Zero("runs"));
    }
    if episodes == 0 {
        return Err(Error::Zero("episodes"));
    }
    let batch = runs.div_ceil(MAX_BATCHES);
    let batches: Vec<(Moments, Moments)> = (0..runs.div_ceil(batch))
        .into_par_iter()
        .map(|b| -> Result<(Moments, Moments)> {
            let mut nominal = Moments::new(episodes);
            let mut truth = Moments::new(episodes);
            for run in b * batch..((b + 1) * batch).min(runs) {
                let RunSeries { nominal: n, truth: t } =
                    q_learning_run(model, config, episodes, &mut run_rng(seed, run as u64))?.series;
                nominal.push(&n);
                truth.push(&t);
            }
            Ok((nominal, truth))
        })
        .collect::<Result<_>>()?;
    let mut iter = batches.into_iter();
    let (mut nominal, mut truth) = iter.next().expect("at least one batch");
    for (n, t) in iter {
        nominal.merge(&n);
        truth.merge(&t);
    }
    Ok(RunStats {
        runs,
        nominal: nominal.finish(),
        truth: truth.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{lookup, PriorTag};

    fn model() -> GridModel {
        GridModel::new(lookup("standard").unwrap(), PriorTag::Half).unwrap()
    }

    #[test]
    fn welford_matches_two_pass() {
        let data = [
            vec![1.0, 2.0],
            vec![3.0, 2.0],
            vec![8.0, 2.0],
            vec![-4.0, 2.0],
            vec![0.5, 2.0],
        ];
        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        for (i, xs) in data.iter().enumerate() {
            if i < 2 {
                a.push(xs)
            } else {
                b.push(xs)
            }
        }
        a.merge(&b);
        let s = a.finish();
        let col: Vec<f64> = data.iter().map(|x| x[0]).collect();
        let mean = col.iter().sum::<f64>() / 5.0;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((s.mean[0] - mean).abs() < 1e-12);
        assert!((s.std[0] - var.sqrt()).abs() < 1e-12);
        assert_eq!(s.std[1], 0.0);
    }

    #[test]
    fn one_run_equals_the_single_series() {
        let m = model();
        let config = QConfig::default();
        let stats = aggregate_runs(&m, &config, 1, 200, 7).unwrap();
        let run = q_learning_run(&m, &config, 200, &mut run_rng(7, 0)).unwrap();
        assert_eq!(stats.nominal.mean, run.series.nominal);
        assert_eq!(stats.truth.mean, run.series.truth);
        assert!(stats.nominal.std.iter().all(|&s| s == 0.0));
        assert_eq!(stats.episodes(), 200);
    }

    #[test]
    fn aggregation_is_independent_of_thread_count() {
        let m = model();
        let config = QConfig::default();
        let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let a = pool(1).install(|| aggregate_runs(&m, &config, 70, 100, 3).unwrap());
        let b = pool(3).install(|| aggregate_runs(&m, &config, 70, 100, 3).unwrap());
        assert_eq!(a, b);
        assert!(a.nominal.std.iter().chain(&a.truth.std).all(|&s| s >= 0.0));
    }

    #[test]
    fn zero_counts_are_rejected() {
        let m = model();
        assert!(aggregate_runs(&m, &QConfig::default(), 0, 10, 0).is_err());
        assert!(aggregate_runs(&m, &QConfig::default(), 1, 0, 0).is_err());
    }

    #[test]
    fn converged_averages_the_tail() {
        let s = SeriesStats {
            mean: (0..100).map(f64::from).collect(),
            std: vec![0.0; 100],
        };
        assert_eq!(s.converged(0.05), 97.0);
        assert_eq!(s.converged(0.0), 99.0);
    }
}
