//! Single-record lookups printed as `key=value` lines.

use clap::ValueEnum;
use gprlab_core::asymptotics::{
    goodput_regime_a, goodput_regime_b, goodput_regime_c_with, inflection_regime_a,
    inflection_regime_c, midpoint_regime_b, regime_b_limits, GammaTerm,
};
use gprlab_core::closed_form::{miso_upa_gpr, miso_upa_outage, simo_gpr, simo_outage};
use gprlab_core::solvers::{miso_optimal_precoder, solve_c_thresholds, solve_nu};
use gprlab_core::{rate_thresholds, McEstimate};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QueryKind {
    Gpr,
    Outage,
    MisoOpt,
    Nu,
    Thresholds,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AsymptoticRegime {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum GammaTermArg {
    #[default]
    Verbatim,
    Log2e,
}

impl From<GammaTermArg> for GammaTerm {
    fn from(g: GammaTermArg) -> Self {
        match g {
            GammaTermArg::Verbatim => GammaTerm::Verbatim,
            GammaTermArg::Log2e => GammaTerm::Log2e,
        }
    }
}

/// Arguments specific to queries.
#[derive(Debug, Clone, Default)]
pub struct QueryArgs {
    pub power: Option<f64>,
    pub n: Option<usize>,
    pub regime: Option<AsymptoticRegime>,
    pub beta: Option<f64>,
    pub gamma_term: GammaTermArg,
}

pub type Record = Vec<(String, String)>;

fn put(r: &mut Record, key: &str, value: impl ToString) {
    r.push((key.to_owned(), value.to_string()));
}

fn put_estimate(r: &mut Record, key: &str, e: McEstimate, method: &str) {
    put(r, key, e.mean);
    put(r, "std_error", e.std_error);
    put(r, "trials", e.trials);
    put(r, "method", method);
}

pub fn run(kind: QueryKind, args: &QueryArgs, cfg: &ExperimentConfig) -> CliResult<Record> {
    let params = cfg.params()?;
    let mut r = Record::new();
    let power = args.power.unwrap_or(cfg.p_max);
    match kind {
        QueryKind::Gpr | QueryKind::Outage => {
            if !(power > 0.0 && power.is_finite()) {
                return Err(CliError::config("--p must be positive"));
            }
            put(&mut r, "p", power);
            let gpr = kind == QueryKind::Gpr;
            let key = if gpr { "gpr" } else { "outage" };
            if params.n_r() == 1 {
                let v = if gpr {
                    miso_upa_gpr(power, &params)?
                } else {
                    miso_upa_outage(power, &params)?
                };
                put_estimate(&mut r, key, McEstimate::exact(v), "closed_form");
            } else if params.n_t() == 1 {
                let v = if gpr {
                    simo_gpr(power, &params)?
                } else {
                    simo_outage(power, &params)?
                };
                put_estimate(&mut r, key, McEstimate::exact(v), "closed_form");
            } else {
                let th = rate_thresholds(&vec![1.0; params.n_t()], &params, &cfg.mc()?)?;
                let e = if gpr {
                    th.gpr(power, params.rate())
                } else {
                    th.outage(power)
                };
                put_estimate(&mut r, key, e, "monte_carlo");
            }
        }
        QueryKind::MisoOpt => {
            let s = miso_optimal_precoder(&params)?;
            put(&mut r, "active_antennas", s.active_antennas);
            put(&mut r, "per_antenna_power", s.per_antenna_power);
            put(&mut r, "total_power", s.total_power());
            put(&mut r, "saturated", s.saturated);
            put(&mut r, "gpr", s.gpr(&params)?);
        }
        QueryKind::Nu => {
            let n = args.n.unwrap_or(params.n_t());
            put(&mut r, "n", n);
            put(&mut r, "nu", solve_nu(n)?);
        }
        QueryKind::Thresholds => {
            let n = args.n.unwrap_or(params.n_t());
            let t = solve_c_thresholds(n)?;
            put(&mut r, "n_t", n);
            for (l, c) in t.c_values().iter().enumerate() {
                put(&mut r, &format!("c_{}", l + 1), c);
            }
            // budgets at which the optimal precoder adds an antenna
            for (l, c) in t.c_values().iter().enumerate() {
                put(&mut r, &format!("switch_power_{}", l + 1), params.c() / c);
            }
        }
        QueryKind::Asymptotic => {
            let regime = args
                .regime
                .ok_or_else(|| CliError::config("asymptotic query needs --regime a|b|c"))?;
            put(&mut r, "regime", format!("{regime:?}").to_lowercase());
            match regime {
                AsymptoticRegime::A => {
                    put(&mut r, "inflection", inflection_regime_a(&params));
                    if let Some(p) = args.power {
                        put(&mut r, "goodput", goodput_regime_a(p, &params)?);
                    }
                }
                AsymptoticRegime::B => {
                    let (p_star, gamma_star) = regime_b_limits(&params);
                    put(&mut r, "p_star", p_star);
                    put(&mut r, "gamma_star", gamma_star);
                    put(&mut r, "midpoint", midpoint_regime_b(&params));
                    if let Some(p) = args.power {
                        put(&mut r, "goodput", goodput_regime_b(p, &params)?);
                    }
                }
                AsymptoticRegime::C => {
                    let beta = args
                        .beta
                        .unwrap_or(params.n_t() as f64 / params.n_r() as f64);
                    put(&mut r, "beta", beta);
                    put(&mut r, "inflection", inflection_regime_c(&params, beta));
                    if let Some(p) = args.power {
                        put(
                            &mut r,
                            "goodput",
                            goodput_regime_c_with(p, &params, beta, args.gamma_term.into())?,
                        );
                    }
                }
            }
        }
    }
    Ok(r)
}

pub fn format_record(r: &Record) -> Vec<String> {
    r.iter().map(|(k, v)| format!("{k}={v}")).collect()
}
