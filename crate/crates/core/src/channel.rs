//! Rayleigh channel sampling and Monte Carlo outage / GPR estimation.
//!
//! Two estimators are provided. The direct one evaluates the mutual
//! information of every trial at a fixed allocation. The threshold one
//! solves, per trial, for the smallest total power at which a fixed
//! allocation *shape* reaches the target rate; the sorted thresholds are an
//! empirical outage CDF in the total power, so whole GPR curves come from a
//! single pass with common random numbers across the grid.

use std::f64::consts::LN_2;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    add_identity, cholesky_in_place, cholesky_logdet, hermitian_eigenvalues, signal_matrix,
};
use crate::rng::TrialRng;
use crate::system::{exp2_m1, ChannelSample, McEstimate, PowerAllocation, SystemParams};

/// Seed and trial count of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub trials: u64,
}

impl McConfig {
    pub fn new(seed: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::NonPositiveField("trials"));
        }
        Ok(Self { seed, trials })
    }
}

/// Draws an `n_r x n_t` channel for one trial.
pub fn sample_dims(n_r: usize, n_t: usize, seed: u64, trial_index: u64) -> ChannelSample {
    let mut rng = TrialRng::new(seed, trial_index);
    let entries = (0..n_r * n_t).map(|_| rng.complex_gaussian()).collect();
    ChannelSample::from_raw(n_r, n_t, entries)
}

/// Channel realization of trial `trial_index`; a pure function of its inputs.
pub fn sample_channel(params: &SystemParams, seed: u64, trial_index: u64) -> ChannelSample {
    sample_dims(params.n_r(), params.n_t(), seed, trial_index)
}

fn check_alloc(h: &ChannelSample, alloc: &PowerAllocation, params: &SystemParams) -> Result<()> {
    h.check_params(params)?;
    if alloc.len() != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} transmit powers", params.n_t()),
            actual: format!("{}", alloc.len()),
        });
    }
    Ok(())
}

fn log2_det_unchecked(h: &ChannelSample, powers: &[f64], rho: f64) -> f64 {
    if powers.iter().all(|&p| p == 0.0) {
        return 0.0;
    }
    let (mut m, n) = signal_matrix(h, powers, rho);
    add_identity(&mut m, n);
    if cholesky_in_place(&mut m, n) {
        (cholesky_logdet(&m, n) / LN_2).max(0.0)
    } else {
        // only reachable through roundoff on a numerically singular pencil
        let ev = hermitian_eigenvalues(&signal_matrix(h, powers, rho).0, n);
        ev.iter().map(|&l| l.max(0.0).ln_1p()).sum::<f64>() / LN_2
    }
}

/// `log2 det(I + rho H diag(p) H^H)` in bits per channel use.
pub fn mutual_information(
    h: &ChannelSample,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> Result<f64> {
    check_alloc(h, alloc, params)?;
    Ok(log2_det_unchecked(h, alloc.powers(), params.rho()))
}

/// Outage counter over a range of trials. Tallies over disjoint ranges merge
/// by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutageTally {
    pub outages: u64,
    pub trials: u64,
}

impl OutageTally {
    pub fn merge(self, other: Self) -> Self {
        Self {
            outages: self.outages + other.outages,
            trials: self.trials + other.trials,
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate::proportion(self.outages, self.trials)
    }
}

/// Counts outages of `alloc` over trials `range`.
pub fn outage_tally(
    alloc: &PowerAllocation,
    params: &SystemParams,
    seed: u64,
    range: Range<u64>,
) -> Result<OutageTally> {
    if alloc.len() != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} transmit powers", params.n_t()),
            actual: format!("{}", alloc.len()),
        });
    }
    let trials = range.end.saturating_sub(range.start);
    let (rate, rho) = (params.rate(), params.rho());
    let outages = range
        .into_par_iter()
        .filter(|&t| {
            let h = sample_channel(params, seed, t);
            log2_det_unchecked(&h, alloc.powers(), rho) < rate
        })
        .count() as u64;
    Ok(OutageTally { outages, trials })
}

/// Monte Carlo outage probability of a fixed allocation.
pub fn outage_probability_mc(
    alloc: &PowerAllocation,
    params: &SystemParams,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if alloc.total() <= 0.0 {
        if alloc.len() != params.n_t() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} transmit powers", params.n_t()),
                actual: format!("{}", alloc.len()),
            });
        }
        return Ok(McEstimate::exact(1.0));
    }
    Ok(outage_tally(alloc, params, cfg.seed, 0..cfg.trials)?.estimate())
}

/// Monte Carlo GPR `R (1 - P_out) / Tr(Q)`.
pub fn gpr_mc(
    alloc: &PowerAllocation,
    params: &SystemParams,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let total = alloc.total();
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let out = outage_probability_mc(alloc, params, cfg)?;
    Ok(out.complement().scaled(params.rate() / total))
}

/// Smallest `x >= 0` with `sum_i log2(1 + x lambda_i) >= rate`.
///
/// Returns `+inf` when every eigenvalue vanishes.
pub fn rate_threshold(eigenvalues: &[f64], rate: f64) -> f64 {
    let lam: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > 0.0).collect();
    let k = exp2_m1(rate);
    match lam.len() {
        0 => f64::INFINITY,
        1 => k / lam[0],
        2 => threshold_rank2(lam[0] + lam[1], lam[0] * lam[1], k),
        m => {
            let target = rate * LN_2;
            // Jensen: the equal-eigenvalue solution is a lower bound, and Newton
            // on a concave increasing function started left of the root climbs
            // monotonically to it.
            let mean = lam.iter().sum::<f64>() / m as f64;
            let mut x = exp2_m1(rate / m as f64) / mean;
            for _ in 0..100 {
                let f: f64 = lam.iter().map(|&l| (x * l).ln_1p()).sum::<f64>() - target;
                let df: f64 = lam.iter().map(|&l| l / (1.0 + x * l)).sum();
                let step = -f / df;
                if step.is_nan() || step <= 0.0 {
                    break;
                }
                x += step;
                if step <= 1e-15 * x {
                    break;
                }
            }
            x
        }
    }
}

/// Positive root of `prod x^2 + sum x - k = 0`, written without cancellation.
fn threshold_rank2(sum: f64, prod: f64, k: f64) -> f64 {
    2.0 * k / (sum + (sum * sum + 4.0 * prod * k).sqrt())
}

/// Threshold of one channel for a unit-total allocation shape.
pub fn channel_threshold(h: &ChannelSample, shape: &[f64], rho: f64, rate: f64) -> f64 {
    let (m, n) = signal_matrix(h, shape, rho);
    match n {
        1 => rate_threshold(&[m[0].re], rate),
        2 => {
            let tr = m[0].re + m[3].re;
            let det = (m[0].re * m[3].re - m[1].norm_sqr()).max(0.0);
            if det > 0.0 {
                threshold_rank2(tr, det, exp2_m1(rate))
            } else {
                rate_threshold(&[tr], rate)
            }
        }
        _ => {
            let ev = hermitian_eigenvalues(&m, n);
            let max = ev.last().copied().unwrap_or(0.0);
            let cleaned: Vec<f64> = ev.into_iter().filter(|&l| l > 1e-13 * max).collect();
            rate_threshold(&cleaned, rate)
        }
    }
}

/// Sorted per-trial power thresholds of an allocation shape; an empirical
/// outage CDF over the total power.
#[derive(Debug, Clone, PartialEq)]
pub struct RateThresholds {
    sorted: Vec<f64>,
}

impl RateThresholds {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn trials(&self) -> u64 {
        self.sorted.len() as u64
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    /// Trials that reach the rate with total power `total`.
    pub fn successes(&self, total: f64) -> u64 {
        self.sorted.partition_point(|&x| x <= total) as u64
    }

    pub fn success_probability(&self, total: f64) -> McEstimate {
        if total <= 0.0 {
            return McEstimate::exact(0.0);
        }
        McEstimate::proportion(self.successes(total), self.trials())
    }

    pub fn outage(&self, total: f64) -> McEstimate {
        self.success_probability(total).complement()
    }

    /// GPR at total power `total`; zero at the origin.
    pub fn gpr(&self, total: f64, rate: f64) -> McEstimate {
        if total <= 0.0 {
            return McEstimate::exact(0.0);
        }
        self.success_probability(total).scaled(rate / total)
    }
}

fn unit_shape(shape: &[f64], n_t: usize) -> Result<Vec<f64>> {
    if shape.len() != n_t {
        return Err(Error::DimensionMismatch {
            expected: format!("{n_t} transmit powers"),
            actual: format!("{}", shape.len()),
        });
    }
    let total: f64 = shape.iter().sum();
    if shape.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "shape entries must be finite and nonnegative".into(),
        ));
    }
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(shape.iter().map(|s| s / total).collect())
}

/// Per-trial thresholds of `shape` (rescaled to unit total) over `cfg.trials`.
pub fn rate_thresholds(
    shape: &[f64],
    params: &SystemParams,
    cfg: &McConfig,
) -> Result<RateThresholds> {
    let shape = unit_shape(shape, params.n_t())?;
    let (rho, rate) = (params.rho(), params.rate());
    let values = (0..cfg.trials)
        .into_par_iter()
        .map(|t| channel_threshold(&sample_channel(params, cfg.seed, t), &shape, rho, rate))
        .collect();
    Ok(RateThresholds::from_unsorted(values))
}

/// Channel draws kept in memory so many allocation shapes can be scored on
/// the same realizations.
#[derive(Debug, Clone)]
pub struct ChannelBank {
    params: SystemParams,
    channels: Vec<ChannelSample>,
}

impl ChannelBank {
    pub fn new(params: &SystemParams, cfg: &McConfig) -> Self {
        let channels = (0..cfg.trials)
            .into_par_iter()
            .map(|t| sample_channel(params, cfg.seed, t))
            .collect();
        Self {
            params: *params,
            channels,
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn thresholds(&self, shape: &[f64]) -> Result<RateThresholds> {
        let shape = unit_shape(shape, self.params.n_t())?;
        let (rho, rate) = (self.params.rho(), self.params.rate());
        let values = self
            .channels
            .par_iter()
            .map(|h| channel_threshold(h, &shape, rho, rate))
            .collect();
        Ok(RateThresholds::from_unsorted(values))
    }
}
