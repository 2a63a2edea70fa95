//! Monte Carlo engine and distances to the limiting law.
//!
//! Trial `t` of an experiment with master seed `s` draws everything from
//! `RngSeed { master: s, stream: t }` and its children, so results do not
//! depend on how trials are scheduled across threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mats::{Ensemble, RngSeed};
use crate::spectra::{restricted_spectrum, SpectralSample};
use crate::theory::{LawParams, Normalization, SpectralLaw};

pub const DEFAULT_ATOM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExperimentConfig {
    pub ensemble: Ensemble,
    pub params: LawParams,
    /// Expected side of the restricted matrix.
    pub target_dim: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub bins: usize,
    pub atom_tol: f64,
}

impl ExperimentConfig {
    pub fn new(ensemble: Ensemble, params: LawParams, target_dim: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            ensemble,
            params,
            target_dim,
            trials,
            master_seed,
            bins: 50,
            atom_tol: DEFAULT_ATOM_TOL,
        }
    }

    /// `round(target_dim / (1 - max(p, q)))`, so both kept dimensions are
    /// `target_dim` or more on average.
    pub fn ambient_dim(&self) -> usize {
        (self.target_dim as f64 / (1.0 - self.params.max())).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim() < 2 {
            return Err(Error::InvalidDimension(format!(
                "ambient dimension {} from target_dim {} is below 2",
                self.ambient_dim(),
                self.target_dim
            )));
        }
        if self.trials < 1 {
            return Err(Error::param("trials", self.trials as f64, "trials >= 1"));
        }
        if self.bins < 2 {
            return Err(Error::param("bins", self.bins as f64, "bins >= 2"));
        }
        if !(self.atom_tol >= 0.0 && self.atom_tol < 0.5) {
            return Err(Error::param("atom_tol", self.atom_tol, "0 <= atom_tol < 0.5"));
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> RngSeed {
        RngSeed::new(self.master_seed, trial as u64)
    }
}

/// Uniform histogram on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Self { edges, counts }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts divided by `total * bin width`.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (total * (w[1] - w[0])))
            .collect()
    }
}

/// Pooled spectra of an experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EmpiricalDistribution {
    /// Per-trial samples, in trial order.
    pub samples: Vec<SpectralSample>,
    /// All values, ascending.
    pub pooled: Vec<f64>,
    pub trials: usize,
    /// `min(|Ω|, |T|)` per trial.
    pub kept_counts: Vec<usize>,
    pub histogram: Histogram,
    pub atom0_freq: f64,
    pub atom1_freq: f64,
    pub atom_tol: f64,
}

impl EmpiricalDistribution {
    pub fn from_samples(samples: Vec<SpectralSample>, bins: usize, atom_tol: f64) -> Self {
        let mut pooled: Vec<f64> = samples.iter().flat_map(|s| s.values.iter().copied()).collect();
        pooled.sort_by(f64::total_cmp);
        let n = pooled.len().max(1) as f64;
        let atom0 = pooled.iter().filter(|&&v| v <= atom_tol).count() as f64 / n;
        let atom1 = pooled.iter().filter(|&&v| v >= 1.0 - atom_tol).count() as f64 / n;
        Self {
            trials: samples.len(),
            kept_counts: samples.iter().map(|s| s.values.len()).collect(),
            histogram: Histogram::new(&pooled, bins.max(1)),
            pooled,
            samples,
            atom0_freq: atom0,
            atom1_freq: atom1,
            atom_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.pooled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pooled.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.pooled.iter().sum::<f64>() / self.pooled.len().max(1) as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let n = self.pooled.len();
        if n < 2 {
            return 0.0;
        }
        (self.pooled.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    }

    /// Values with the ones within `atom_tol` of 0 or 1 moved onto the atom.
    pub fn snapped(&self) -> Vec<f64> {
        self.pooled
            .iter()
            .map(|&v| {
                if v >= 1.0 - self.atom_tol {
                    1.0
                } else if v <= self.atom_tol {
                    0.0
                } else {
                    v
                }
            })
            .collect()
    }
}

fn collect_trials(config: &ExperimentConfig) -> Result<Vec<SpectralSample>> {
    let n = config.ambient_dim();
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            restricted_spectrum(config.ensemble, n, config.params, config.trial_seed(t)).map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs `config.trials` independent draws on the global rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EmpiricalDistribution> {
    config.validate()?;
    let samples = collect_trials(config)?;
    Ok(EmpiricalDistribution::from_samples(samples, config.bins, config.atom_tol))
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: usize) -> Result<EmpiricalDistribution> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| run_experiment(config))
}

/// `sup |F_emp - F|` where `F_emp` is the step CDF of `sorted` (ascending)
/// and `cdf` is right-continuous with left limits `cdf_left`.
pub fn ks_distance<F, L>(sorted: &[f64], cdf: F, cdf_left: L) -> f64
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        worst = worst.max((below - cdf_left(x)).abs()).max((upto - cdf(x)).abs());
        i = j;
    }
    worst
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComparisonReport {
    pub ks_distance: f64,
    pub l1_hist_distance: f64,
    pub atom1_error: f64,
    pub mean_error: f64,
    pub p: f64,
    pub q: f64,
    pub normalization: Normalization,
    pub bins: usize,
    pub trials: usize,
    pub pooled_size: usize,
    pub atom_tol: f64,
    pub empirical_atom1: f64,
    pub theoretical_atom1: f64,
    pub empirical_mean: f64,
    pub theoretical_mean: f64,
}

/// Scores an empirical distribution against the theorem law.
pub fn compare(emp: &EmpiricalDistribution, law: &SpectralLaw) -> Result<ComparisonReport> {
    if law.normalization() != Normalization::Theorem {
        return Err(Error::WrongNormalization);
    }
    if emp.is_empty() {
        return Err(Error::EmptySample);
    }
    let atom1 = law.atom1();
    let cdf = |x: f64| law.cdf(x.clamp(0.0, 1.0)).unwrap_or(0.0);
    let cdf_left = |x: f64| {
        if x >= 1.0 {
            cdf(1.0) - atom1
        } else if x <= 0.0 {
            0.0
        } else {
            cdf(x)
        }
    };
    let snapped = emp.snapped();
    let mut ks = ks_distance(&snapped, cdf, cdf_left);
    // Between the largest sample and 1 the empirical CDF sits at 1 while the
    // law may still owe its atom.
    if let Some(&last) = snapped.last() {
        if last < 1.0 {
            ks = ks.max((1.0 - cdf_left(1.0)).abs());
        }
    }

    let hist = &emp.histogram;
    let total = hist.total() as f64;
    let mut l1 = 0.0;
    for (w, &count) in hist.edges.windows(2).zip(&hist.counts) {
        let (lo, hi) = (w[0], w[1]);
        if lo <= 0.0 || hi >= 1.0 {
            continue;
        }
        let theo = law.cdf(hi)? - law.cdf(lo)?;
        l1 += (count as f64 / total - theo).abs();
    }

    let empirical_mean = emp.mean();
    let theoretical_mean = law.mean();
    Ok(ComparisonReport {
        ks_distance: ks,
        l1_hist_distance: l1,
        atom1_error: (emp.atom1_freq - atom1).abs(),
        mean_error: (empirical_mean - theoretical_mean).abs(),
        p: law.params().p(),
        q: law.params().q(),
        normalization: law.normalization(),
        bins: hist.bins(),
        trials: emp.trials,
        pooled_size: emp.len(),
        atom_tol: emp.atom_tol,
        empirical_atom1: emp.atom1_freq,
        theoretical_atom1: atom1,
        empirical_mean,
        theoretical_mean,
    })
}

/// Largest eigenvalue of `U_ΩT U_ΩTᴴ` in each of `trials` draws at ambient
/// dimension `n`.
pub fn norm_boundary_probe(
    ensemble: Ensemble,
    n: usize,
    params: LawParams,
    trials: usize,
    seed: RngSeed,
) -> Result<Vec<f64>> {
    if n < 64 {
        return Err(Error::InvalidDimension(format!("boundary probe needs n >= 64, got {n}")));
    }
    if trials < 1 {
        return Err(Error::param("trials", trials as f64, "trials >= 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = RngSeed::new(seed.master, seed.stream.wrapping_add(t as u64));
            restricted_spectrum(ensemble, n, params, trial_seed)
                .map(|s| s.values.first().copied().unwrap_or(0.0))
                .map_err(|e| Error::Trial {
                    trial: t,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// [`norm_boundary_probe`] with `p = q = sum_target / 2`.
pub fn probe_at_sum(ensemble: Ensemble, n: usize, sum_target: f64, trials: usize, seed: RngSeed) -> Result<Vec<f64>> {
    if !(sum_target > 0.9 && sum_target < 1.1) {
        return Err(Error::param("sum_target", sum_target, "0.9 < p + q < 1.1"));
    }
    let half = 0.5 * sum_target;
    norm_boundary_probe(ensemble, n, LawParams::new(half, half)?, trials, seed)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
