//! Closed-form outage and efficiency expressions.
//!
//! Every GPR function returns `0` at `p = 0`, the limit of the curve at the
//! origin, so sampled curves stay continuous there.

use std::f64::consts::LN_2;

use statrs::function::factorial::ln_factorial;

use crate::channel::mutual_information;
use crate::error::{Error, Result};
use crate::system::{ChannelSample, PowerAllocation, SystemParams};

/// Above this argument `e^{-x}` underflows too early and the Erlang tail is
/// evaluated in log space.
const LOG_SPACE_ABOVE: f64 = 700.0;

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        if s.abs() >= t.abs() {
            comp += (s - u) + t;
        } else {
            comp += (t - u) + s;
        }
        s = u;
    }
    s + comp
}

/// Erlang survival function `e^{-x} sum_{j<k} x^j / j!`.
pub fn erlang_sf(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "Erlang shape must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x > LOG_SPACE_ABOVE {
        let lx = x.ln();
        let logs: Vec<f64> = (0..k)
            .map(|j| j as f64 * lx - ln_factorial(j as u64) - x)
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return top.exp() * compensated_sum(logs.iter().map(|l| (l - top).exp()));
    }
    let mut term = 1.0;
    let series = compensated_sum((0..k).map(|j| {
        if j > 0 {
            term *= x / j as f64;
        }
        term
    }));
    ((-x).exp() * series).min(1.0)
}

/// Erlang CDF `1 - e^{-x} sum_{j<k} x^j / j!` with unit rate.
///
/// Small values come from the tail series `e^{-x} sum_{j>=k} x^j / j!` so
/// the CDF keeps full relative accuracy near the origin.
pub fn erlang_cdf(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "Erlang shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    let sf = erlang_sf(k, x);
    if sf < 0.5 {
        return 1.0 - sf;
    }
    let mut term = (k as f64 * x.ln() - ln_factorial(k as u64) - x).exp();
    let mut sum = 0.0;
    let mut j = k;
    while term > 1e-17 * sum || sum == 0.0 {
        sum += term;
        j += 1;
        term *= x / j as f64;
        if term == 0.0 {
            break;
        }
    }
    sum.min(1.0)
}

/// Erlang distribution with integer shape and unit rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErlangSpec {
    shape: usize,
}

impl ErlangSpec {
    pub fn new(shape: usize) -> Result<Self> {
        if shape == 0 {
            return Err(Error::NonPositiveField("shape"));
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> usize {
        self.shape
    }

    pub fn cdf(&self, x: f64) -> f64 {
        erlang_cdf(self.shape, x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        erlang_sf(self.shape, x)
    }
}

fn check_power(p: f64) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::NonFiniteField("p"));
    }
    if p < 0.0 {
        return Err(Error::InvalidArgument(format!("negative power {p}")));
    }
    Ok(())
}

/// `R * P[Erlang(k) >= threshold / p] / p`, zero at the origin.
fn erlang_gpr(k: usize, threshold: f64, p: f64, rate: f64) -> Result<f64> {
    check_power(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(rate * erlang_sf(k, threshold / p) / p)
}

fn require_miso(params: &SystemParams) -> Result<()> {
    if params.n_r() != 1 {
        return Err(Error::NotMiso { n_r: params.n_r() });
    }
    Ok(())
}

/// Single-antenna GPR `R e^{-c/p} / p`.
pub fn siso_gpr(p: f64, params: &SystemParams) -> Result<f64> {
    erlang_gpr(1, params.c(), p, params.rate())
}

/// MISO GPR under uniform allocation of total power `p`.
pub fn miso_upa_gpr(p: f64, params: &SystemParams) -> Result<f64> {
    require_miso(params)?;
    erlang_gpr(params.n_t(), params.d(), p, params.rate())
}

/// MISO outage probability under uniform allocation of total power `p`.
pub fn miso_upa_outage(p: f64, params: &SystemParams) -> Result<f64> {
    require_miso(params)?;
    check_power(p)?;
    if p == 0.0 {
        return Ok(1.0);
    }
    Ok(erlang_cdf(params.n_t(), params.d() / p))
}

/// SIMO GPR: maximum-ratio combining makes `|h|^2` Erlang(n_r).
pub fn simo_gpr(p: f64, params: &SystemParams) -> Result<f64> {
    if params.n_t() != 1 {
        return Err(Error::NotSimo { n_t: params.n_t() });
    }
    erlang_gpr(params.n_r(), params.c(), p, params.rate())
}

pub fn simo_outage(p: f64, params: &SystemParams) -> Result<f64> {
    if params.n_t() != 1 {
        return Err(Error::NotSimo { n_t: params.n_t() });
    }
    check_power(p)?;
    if p == 0.0 {
        return Ok(1.0);
    }
    Ok(erlang_cdf(params.n_r(), params.c() / p))
}

/// Low-power approximation of the MIMO UPA GPR. Only meaningful as `p -> 0`.
pub fn mimo_upa_gpr_smallp(p: f64, params: &SystemParams) -> Result<f64> {
    erlang_gpr(params.n_r() * params.n_t(), params.d(), p, params.rate())
}

/// MISO GPR of `l` active antennas, each at power `q`.
pub fn subset_upa_gpr(l: usize, q: f64, params: &SystemParams) -> Result<f64> {
    require_miso(params)?;
    if l == 0 || l > params.n_t() {
        return Err(Error::InvalidArgument(format!(
            "{l} active antennas out of {}",
            params.n_t()
        )));
    }
    check_power(q)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    Ok(params.rate() * erlang_sf(l, params.c() / q) / (l as f64 * q))
}

/// `P[sum_i w_i X_i >= c]` for i.i.d. unit exponentials `X_i`.
///
/// Handles equal weights (Erlang), any pair of weights, and fully distinct
/// weights (partial fractions, relative gaps of at least `1e-3`).
fn weighted_exponential_sf(weights: &[f64], c: f64) -> Result<f64> {
    let mut w: Vec<f64> = weights.iter().copied().filter(|&x| x > 0.0).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    let Some(&top) = w.first() else {
        return Ok(0.0);
    };
    let bottom = *w.last().unwrap_or(&top);
    if top - bottom <= 1e-12 * top {
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        return Ok(erlang_sf(w.len(), c / mean));
    }
    if w.len() == 2 {
        let (a, b) = (w[0], w[1]);
        let delta = a - b;
        let m = 0.5 * (a + b);
        if delta < 1e-6 * m {
            // Taylor expansion of the divided difference of t e^{-c/t} about m
            let u = c / m;
            let e = (-u).exp();
            let d1 = e * (1.0 + u);
            let d3 = c * c * e * (c - 3.0 * m) / m.powi(5);
            return Ok(d1 + d3 * delta * delta / 24.0);
        }
        let fa = a * (-c / a).exp();
        let fb = b * (-c / b).exp();
        return Ok(((fa - fb) / delta).clamp(0.0, 1.0));
    }
    for pair in w.windows(2) {
        if pair[0] - pair[1] < 1e-3 * pair[0] {
            return Err(Error::Unsupported(
                "closed-form success probability needs equal or well separated weights".into(),
            ));
        }
    }
    let total = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let coef: f64 = w
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &wj)| wi / (wi - wj))
                .product();
            coef * (-c / wi).exp()
        })
        .sum::<f64>();
    Ok(total.clamp(0.0, 1.0))
}

/// MISO success probability `1 - P_out` of an arbitrary diagonal allocation.
pub fn miso_success_probability(alloc: &PowerAllocation, params: &SystemParams) -> Result<f64> {
    require_miso(params)?;
    if alloc.len() != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} transmit powers", params.n_t()),
            actual: format!("{}", alloc.len()),
        });
    }
    weighted_exponential_sf(alloc.powers(), params.c())
}

/// MISO GPR of an arbitrary diagonal allocation, zero at the origin.
pub fn miso_gpr(alloc: &PowerAllocation, params: &SystemParams) -> Result<f64> {
    let success = miso_success_probability(alloc, params)?;
    let total = alloc.total();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(params.rate() * success / total)
}

/// Static-channel efficiency `log2|I + rho H Q H^H| / Tr(Q)`.
pub fn static_efficiency(
    h: &ChannelSample,
    alloc: &PowerAllocation,
    params: &SystemParams,
) -> Result<f64> {
    let total = alloc.total();
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(mutual_information(h, alloc, params)? / total)
}

/// Supremum of [`static_efficiency`], reached as the power goes to zero.
pub fn static_efficiency_sup(h: &ChannelSample, params: &SystemParams) -> f64 {
    h.frobenius_sq() / (params.n_t() as f64 * params.sigma2() * LN_2)
}

/// Supremum of the fast-fading efficiency, `n_r / (sigma2 ln 2)`.
pub fn fast_efficiency_sup(params: &SystemParams) -> f64 {
    params.n_r() as f64 / (params.sigma2() * LN_2)
}
