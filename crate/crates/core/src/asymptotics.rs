//! Large-system Gaussian approximations of the expected goodput `R (1 - P_out)`.
//!
//! Regime (a): fixed `n_t`, many receive antennas. Regime (b): many transmit
//! antennas, fixed `n_r`. Regime (c): both grow with `n_r / n_t -> beta`.

use std::f64::consts::{LN_2, LOG2_E, SQRT_2};

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::system::{exp2_m1, SystemParams};

/// Gaussian tail `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
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

/// Regime (a) goodput `R Q((R - n_t log2(1 + n_r/n_t rho p)) / sqrt(n_t/n_r log2 e))`.
pub fn goodput_regime_a(p: f64, params: &SystemParams) -> Result<f64> {
    check_power(p)?;
    let (n_t, n_r) = (params.n_t() as f64, params.n_r() as f64);
    let r = params.rate();
    let mean = n_t * (n_r / n_t * params.rho() * p).ln_1p() / LN_2;
    let sd = (n_t / n_r * LOG2_E).sqrt();
    Ok(r * q_function((r - mean) / sd))
}

/// Inflection point of the regime (a) goodput. Vanishes as `n_r` grows.
pub fn inflection_regime_a(params: &SystemParams) -> f64 {
    let (n_t, n_r) = (params.n_t() as f64, params.n_r() as f64);
    let exponent = (params.rate() - (n_t * LOG2_E / n_r).powf(1.5) / n_t) / n_t;
    n_t / (n_r * params.rho()) * exp2_m1(exponent)
}

/// `alpha_b(p)`; the Q-function argument of regime (b).
pub fn alpha_regime_b(p: f64, params: &SystemParams) -> f64 {
    let (n_t, n_r) = (params.n_t() as f64, params.n_r() as f64);
    let x = params.rho() * p;
    let gap = params.rate() - n_r * x.ln_1p() / LN_2;
    (n_t / n_r).sqrt() * LOG2_E * (1.0 + x) / x * gap
}

/// Regime (b) goodput `R Q(alpha_b(p))`, zero at the origin.
pub fn goodput_regime_b(p: f64, params: &SystemParams) -> Result<f64> {
    check_power(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(params.rate() * q_function(alpha_regime_b(p, params)))
}

/// Power at which regime (b)'s goodput crosses `R/2`: `sigma2 (2^{R/n_r} - 1)`.
pub fn midpoint_regime_b(params: &SystemParams) -> f64 {
    params.sigma2() * exp2_m1(params.rate() / params.n_r() as f64)
}

/// Limits of the optimal power and GPR as `n_t -> inf` in regime (b).
///
/// The goodput tends to a step of height `R` at [`midpoint_regime_b`]; the
/// returned GPR is the value `R/2` reached exactly at the step, divided by
/// the step position.
pub fn regime_b_limits(params: &SystemParams) -> (f64, f64) {
    let p = midpoint_regime_b(params);
    (p, params.rate() / (2.0 * p))
}

/// How the `gamma` term enters the regime (c) mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaTerm {
    /// `- gamma`, exactly as usually quoted.
    #[default]
    Verbatim,
    /// `- gamma log2(e)`, the unit-consistent reading in bits.
    Log2e,
}

/// Regime (c) per-antenna mean `mu_I` and variance `sigma_I^2` of the mutual
/// information, and the fixed point `gamma` they depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCMoments {
    pub gamma: f64,
    pub mu: f64,
    pub variance: f64,
}

pub fn regime_c_moments(p: f64, rho: f64, beta: f64, term: GammaTerm) -> RegimeCMoments {
    let x = rho * p;
    let a = 1.0 + beta + 1.0 / x;
    // smaller root of g^2 - a g + beta, written without cancellation
    let disc = (a * a - 4.0 * beta).max(0.0);
    let gamma = (2.0 * beta / (a + disc.sqrt())).clamp(0.0, beta.min(1.0));
    let scale = match term {
        GammaTerm::Verbatim => 1.0,
        GammaTerm::Log2e => LOG2_E,
    };
    let mu =
        (beta * (x * (1.0 - gamma)).ln_1p() + (x * (beta - gamma)).ln_1p()) / LN_2 - gamma * scale;
    let variance = -(-gamma * gamma / beta).ln_1p() / LN_2;
    RegimeCMoments {
        gamma,
        mu,
        variance,
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::NonFiniteField("beta"));
    }
    if beta <= 0.0 {
        return Err(Error::NonPositiveField("beta"));
    }
    Ok(())
}

/// Regime (c) goodput with the selected `gamma` convention; zero at the origin.
pub fn goodput_regime_c_with(
    p: f64,
    params: &SystemParams,
    beta: f64,
    term: GammaTerm,
) -> Result<f64> {
    check_power(p)?;
    check_beta(beta)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let m = regime_c_moments(p, params.rho(), beta, term);
    let r = params.rate();
    let arg = (r - params.n_t() as f64 * m.mu) / m.variance.sqrt();
    Ok(r * q_function(arg))
}

/// Regime (c) goodput `R Q((R - n_t mu_I) / sigma_I)`.
pub fn goodput_regime_c(p: f64, params: &SystemParams, beta: f64) -> Result<f64> {
    goodput_regime_c_with(p, params, beta, GammaTerm::Verbatim)
}

/// Inflection point of the regime (c) goodput in the large-`n_t` limit: zero.
pub fn inflection_regime_c(_params: &SystemParams, _beta: f64) -> f64 {
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n_t: usize, n_r: usize, rho_db: f64, rate: f64) -> SystemParams {
        SystemParams::from_rho_db(n_t, n_r, rho_db, rate, 1.0).unwrap()
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        for x in [0.5, 1.0, 2.0] {
            assert_relative_eq!(q_function(x) + q_function(-x), 1.0, epsilon = 1e-15);
        }
        assert!((q_function(1.6449) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn regime_a_midpoint_and_origin() {
        let p = params(2, 4, 10.0, 1.0);
        // n_t log2(1 + n_r/n_t rho p) = R
        let mid = exp2_m1(p.rate() / 2.0) * 2.0 / (4.0 * p.rho());
        assert_relative_eq!(goodput_regime_a(mid, &p).unwrap(), 0.5, epsilon = 1e-12);
        let at0 = goodput_regime_a(0.0, &p).unwrap();
        assert!(at0 < 0.5);
        assert_relative_eq!(
            at0,
            q_function(1.0 / (0.5 * LOG2_E).sqrt()),
            max_relative = 1e-15
        );
    }

    #[test]
    fn regime_a_inflection_vanishes_with_receive_antennas() {
        assert!(inflection_regime_a(&params(2, 1_000_000, 10.0, 1.0)) < 1e-6);
        assert!(inflection_regime_a(&params(2, 64, 10.0, 1.0)) > 0.0);
    }

    #[test]
    fn regime_b_limits_values() {
        let (p, g) = regime_b_limits(&params(1, 2, 10.0, 1.0));
        assert!((p - 0.0414).abs() < 1e-4);
        assert!((g - 12.07).abs() < 0.01);
        let unit = SystemParams::new(1, 1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(regime_b_limits(&unit), (1.0, 0.5));
    }

    #[test]
    fn regime_b_step() {
        let p = params(10_000, 2, 10.0, 1.0);
        let mid = midpoint_regime_b(&p);
        assert_relative_eq!(goodput_regime_b(mid, &p).unwrap(), 0.5, epsilon = 1e-9);
        assert!(goodput_regime_b(2.0 * mid, &p).unwrap() > 1.0 - 1e-12);
        assert!(goodput_regime_b(0.5 * mid, &p).unwrap() < 1e-12);
        assert_eq!(goodput_regime_b(0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn regime_c_gamma_limits() {
        for beta in [0.5, 1.0, 2.0] {
            let m = regime_c_moments(1e12, 1.0, beta, GammaTerm::Verbatim);
            assert!((m.gamma - beta.min(1.0)).abs() < 1e-5);
            assert!(m.variance > 0.0);
        }
        let tiny = regime_c_moments(1e-9, 10.0, 1.0, GammaTerm::Verbatim);
        assert!(tiny.mu.abs() < 1e-6);
        assert_eq!(inflection_regime_c(&params(8, 8, 10.0, 1.0), 1.0), 0.0);
    }

    #[test]
    fn regime_c_mean_increases() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..400 {
            let p = 1e-6 * 10f64.powf(i as f64 * 0.02);
            let mu = regime_c_moments(p, 10.0, 1.0, GammaTerm::Verbatim).mu;
            assert!(mu > prev, "p={p}");
            prev = mu;
        }
    }

    #[test]
    fn invalid_inputs() {
        let p = params(2, 2, 10.0, 1.0);
        assert!(goodput_regime_c(0.1, &p, 0.0).is_err());
        assert!(goodput_regime_a(-1.0, &p).is_err());
    }
}
