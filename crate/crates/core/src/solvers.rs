//! Characteristic-equation roots and the optimal MISO / SISO / SIMO powers.

use std::sync::{Mutex, OnceLock};

use crate::closed_form::{erlang_cdf, erlang_sf, subset_upa_gpr};
use crate::error::{Error, Result};
use crate::system::{PowerAllocation, SystemParams};

/// `phi_n(y) = y^n / (n-1)! - sum_{i<n} y^i / i!`.
pub fn phi(n: usize, y: f64) -> f64 {
    assert!(n >= 1, "phi is defined for n >= 1");
    let mut term = 1.0;
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for i in 0..n {
        if i > 0 {
            term *= y / i as f64;
        }
        let t = -term;
        let u = s + t;
        comp += if s.abs() >= t.abs() {
            (s - u) + t
        } else {
            (t - u) + s
        };
        s = u;
    }
    // term is now y^{n-1} / (n-1)!
    let lead = term * y;
    let u = s + lead;
    comp += if s.abs() >= lead.abs() {
        (s - u) + lead
    } else {
        (lead - u) + s
    };
    u + comp
}

/// Bisects `f` on `[lo, hi]` with `f(lo) < 0 < f(hi)` down to adjacent
/// doubles and returns the endpoint with the smaller residual.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    if f_lo == 0.0 {
        return lo;
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Unique positive root `nu_n` of [`phi`], bracketed by `[0, n]`.
pub fn solve_nu(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NonPositiveField("n"));
    }
    Ok(bisect(|y| phi(n, y), 0.0, n as f64))
}

/// `P[Erlang(l+1) <= (l+1) x] - P[Erlang(l) <= l x]`, whose positive root is `c_l`.
pub fn threshold_equation(l: usize, x: f64) -> f64 {
    let (a, b) = (l as f64 * x, (l + 1) as f64 * x);
    if erlang_sf(l, a) < 0.5 {
        erlang_sf(l, a) - erlang_sf(l + 1, b)
    } else {
        erlang_cdf(l + 1, b) - erlang_cdf(l, a)
    }
}

const BRACKET_LO: f64 = 1e-9;
const BRACKET_HI: f64 = 1e3;

fn solve_c(l: usize) -> Result<f64> {
    let g = |x| threshold_equation(l, x);
    let fail = || Error::BracketFailure {
        what: format!("c_{l}"),
    };
    let mut lo = 1.0;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        if lo < BRACKET_LO {
            return Err(fail());
        }
    }
    let mut hi = 2.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > BRACKET_HI {
            return Err(fail());
        }
    }
    Ok(bisect(g, lo, hi))
}

fn c_cache() -> &'static Mutex<Vec<f64>> {
    static CACHE: OnceLock<Mutex<Vec<f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// `c_1 .. c_count`, computed once and memoized.
fn c_values(count: usize) -> Result<Vec<f64>> {
    let mut cache = c_cache().lock().unwrap_or_else(|e| e.into_inner());
    while cache.len() < count {
        let l = cache.len() + 1;
        cache.push(solve_c(l)?);
    }
    Ok(cache[..count].to_vec())
}

/// Antenna-count switching thresholds `c_1 > c_2 > ... > c_{n_t-1}`, with
/// the conventions `c_0 = +inf` and `c_{n_t} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    c_values: Vec<f64>,
}

impl ThresholdTable {
    fn for_antennas(n_t: usize) -> Result<Self> {
        Ok(Self {
            c_values: c_values(n_t.saturating_sub(1))?,
        })
    }

    pub fn n_t(&self) -> usize {
        self.c_values.len() + 1
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    /// `c_l` for `0 <= l <= n_t`.
    pub fn c(&self, l: usize) -> f64 {
        match l {
            0 => f64::INFINITY,
            l if l >= self.n_t() => 0.0,
            l => self.c_values[l - 1],
        }
    }

    /// Number of active antennas for budget `p_max`: the `l` with
    /// `p_max` in `[c / c_{l-1}, c / c_l)`.
    pub fn active_antennas(&self, p_max: f64, c: f64) -> usize {
        1 + self.c_values.iter().filter(|&&cl| p_max >= c / cl).count()
    }

    /// Budget interval `[c / c_{l-1}, c / c_l)` of each `l = 1..=n_t`.
    pub fn power_intervals(&self, c: f64) -> Vec<(usize, f64, f64)> {
        (1..=self.n_t())
            .map(|l| (l, c / self.c(l - 1), c / self.c(l)))
            .collect()
    }
}

/// Thresholds `c_1 .. c_{n_t-1}`.
pub fn solve_c_thresholds(n_t: usize) -> Result<ThresholdTable> {
    if n_t < 2 {
        return Err(Error::InvalidArgument(format!(
            "thresholds need n_t >= 2, got {n_t}"
        )));
    }
    ThresholdTable::for_antennas(n_t)
}

/// Optimal diagonal MISO precoder: `per_antenna_power` on each of the first
/// `active_antennas` antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisoPrecoderSolution {
    pub active_antennas: usize,
    pub per_antenna_power: f64,
    /// Whether the power budget is the binding constraint.
    pub saturated: bool,
}

impl MisoPrecoderSolution {
    pub fn total_power(&self) -> f64 {
        self.active_antennas as f64 * self.per_antenna_power
    }

    pub fn allocation(&self, n_t: usize) -> Result<PowerAllocation> {
        let mut powers = vec![0.0; n_t];
        for p in powers.iter_mut().take(self.active_antennas) {
            *p = self.per_antenna_power;
        }
        PowerAllocation::new(powers)
    }

    pub fn gpr(&self, params: &SystemParams) -> Result<f64> {
        subset_upa_gpr(self.active_antennas, self.per_antenna_power, params)
    }
}

fn require_miso(params: &SystemParams) -> Result<()> {
    if params.n_r() != 1 {
        return Err(Error::NotMiso { n_r: params.n_r() });
    }
    Ok(())
}

/// GPR-optimal MISO precoder under the budget `p_max`.
pub fn miso_optimal_precoder(params: &SystemParams) -> Result<MisoPrecoderSolution> {
    require_miso(params)?;
    let n_t = params.n_t();
    let (c, p_max) = (params.c(), params.p_max());
    let l = ThresholdTable::for_antennas(n_t)?.active_antennas(p_max, c);
    if l < n_t {
        return Ok(MisoPrecoderSolution {
            active_antennas: l,
            per_antenna_power: p_max / l as f64,
            saturated: true,
        });
    }
    let interior = c / solve_nu(n_t)?;
    let budget = p_max / n_t as f64;
    Ok(MisoPrecoderSolution {
        active_antennas: n_t,
        per_antenna_power: interior.min(budget),
        saturated: budget <= interior,
    })
}

/// Optimal SISO power `min{c, p_max}`.
pub fn siso_optimal_power(params: &SystemParams) -> f64 {
    params.c().min(params.p_max())
}

/// Optimal MISO total power under uniform allocation, `min{d / nu_{n_t}, p_max}`.
pub fn miso_upa_optimal_power(params: &SystemParams) -> Result<f64> {
    require_miso(params)?;
    Ok((params.d() / solve_nu(params.n_t())?).min(params.p_max()))
}

/// Optimal SIMO power `min{c / nu_{n_r}, p_max}`.
pub fn simo_optimal_power(params: &SystemParams) -> Result<f64> {
    if params.n_t() != 1 {
        return Err(Error::NotSimo { n_t: params.n_t() });
    }
    Ok((params.c() / solve_nu(params.n_r())?).min(params.p_max()))
}
