//! Structural checks with a pass/fail verdict, a human-readable report and
//! a JSON record.

use std::fmt::Write as _;

use clap::ValueEnum;
use gprlab_core::search::{
    appendix_a_inequality_check, mc_upa_curve, schur_extreme_snr_check, tiso_counterexample,
    unimodality_check, SchurVerdict, SnrRegime,
};
use gprlab_core::{Error, GridMode, SimplexGrid, Structure};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::figures::{conjecture_scan, scan_budgets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Conjecture1,
    Conjecture2,
    Schur,
    #[value(name = "appendixA", alias = "appendix-a")]
    AppendixA,
    Tiso,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Conjecture1 => "conjecture1",
            Suite::Conjecture2 => "conjecture2",
            Suite::Schur => "schur",
            Suite::AppendixA => "appendixA",
            Suite::Tiso => "tiso",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchurRegimeArg {
    Low,
    High,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyArgs {
    pub samples: Option<u64>,
    pub regime: Option<SchurRegimeArg>,
}

/// Built-in settings of each suite.
pub fn defaults(suite: Suite, args: &VerifyArgs) -> ExperimentConfig {
    let mut c = ExperimentConfig::base(format!("verify {}", suite.name()));
    match suite {
        Suite::Conjecture1 => {
            c.n_t = 2;
            c.n_r = 2;
            c.rho_db = 3.0;
            c.p_max = 0.5;
            c.grid_points = 25;
        }
        Suite::Conjecture2 | Suite::AppendixA => {
            c.n_t = 2;
            c.n_r = 2;
        }
        Suite::Schur => {
            c.n_t = 2;
            c.trials = 20_000;
            c.rho_db = match args.regime {
                Some(SchurRegimeArg::High) => 40.0,
                _ => -10.0,
            };
        }
        Suite::Tiso => {
            c.n_t = 2;
            c.rate = 3.0;
        }
    }
    c
}

#[derive(Debug, Clone)]
pub struct VerifyOutput {
    pub passed: bool,
    pub report: String,
    pub record: Value,
}

pub fn run(suite: Suite, args: &VerifyArgs, cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    match suite {
        Suite::Conjecture1 => conjecture1(cfg),
        Suite::Conjecture2 => conjecture2(cfg),
        Suite::Schur => schur(args, cfg),
        Suite::AppendixA => appendix_a(args, cfg),
        Suite::Tiso => tiso(cfg),
    }
}

fn header(cfg: &ExperimentConfig) -> String {
    format!(
        "{}: n_t={} n_r={} rho_db={} rate={} p_max={} seed={} trials={}\n",
        cfg.command, cfg.n_t, cfg.n_r, cfg.rho_db, cfg.rate, cfg.p_max, cfg.seed, cfg.trials
    )
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn conjecture1(cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    let r = conjecture_scan(cfg)?;
    let passed = r.violations.is_empty();
    let mut s = header(cfg);
    writeln!(s, "budgets scanned: {}", scan_budgets(cfg).len()).unwrap();
    match r.threshold_estimate {
        Some(t) => writeln!(
            s,
            "outage structure switches beamforming -> upa at {t:.5} W"
        )
        .unwrap(),
        None => writeln!(s, "no beamforming -> upa switch inside the scanned budgets").unwrap(),
    }
    for g in &r.regimes {
        writeln!(
            s,
            "gpr optimum {:<12} on [{}, {}]",
            g.structure.name(),
            g.lo,
            g.hi
        )
        .unwrap();
    }
    for v in &r.violations {
        writeln!(
            s,
            "neither beamforming nor upa within the noise band at {v}"
        )
        .unwrap();
    }
    writeln!(s, "{}", verdict(passed)).unwrap();
    let regimes = |rs: &[gprlab_core::search::Regime]| -> Vec<Value> {
        rs.iter()
            .map(|g| json!({"lo": g.lo, "hi": g.hi, "structure": g.structure.name()}))
            .collect()
    };
    let points: Vec<Value> = r
        .points
        .iter()
        .map(|p| {
            json!({
                "p_max": p.p_max,
                "outage_structure": p.outage_structure.name(),
                "gpr_structure": p.gpr_structure.name(),
                "success_beamforming": p.success_beamforming.mean,
                "success_upa": p.success_upa.mean,
                "success_best": p.success_best.value.mean,
                "success_best_allocation": p.success_best.allocation.powers(),
                "gpr_beamforming": p.gpr_beamforming.mean,
                "gpr_upa": p.gpr_upa.mean,
                "gpr_best": p.gpr_best.value.mean,
                "gpr_best_allocation": p.gpr_best.allocation.powers(),
            })
        })
        .collect();
    let record = json!({
        "passed": passed,
        "threshold_estimate": r.threshold_estimate,
        "regimes": regimes(&r.regimes),
        "outage_regimes": regimes(&r.outage_regimes),
        "violations": r.violations,
        "points": points,
    });
    Ok(VerifyOutput {
        passed,
        report: s,
        record,
    })
}

fn conjecture2(cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    let params = cfg.params()?;
    let m = mc_upa_curve(&params, &cfg.mc()?, cfg.grid_points)?;
    let band = 4.0 * m.max_std_error();
    let u = unimodality_check(&m.curve, band)?;
    let mut s = header(cfg);
    writeln!(s, "noise band {band:.6e} (4 x largest standard error)").unwrap();
    writeln!(
        s,
        "maximizer p* = {} W, peak {} bits/J",
        m.curve.p_star, m.curve.gamma_star
    )
    .unwrap();
    for (p, g) in &u.violations {
        writeln!(s, "dip below both sides at p = {p}: {g}").unwrap();
    }
    writeln!(s, "{}", verdict(u.unimodal)).unwrap();
    let record = json!({
        "passed": u.unimodal,
        "noise_band": band,
        "p_star": m.curve.p_star,
        "gamma_star": m.curve.gamma_star,
        "violations": u.violations,
        "peaks": u.peaks,
        "grid": m.curve.grid,
        "std_errors": m.std_errors,
    });
    Ok(VerifyOutput {
        passed: u.unimodal,
        report: s,
        record,
    })
}

fn schur_one(cfg: &ExperimentConfig, regime: SnrRegime) -> CliResult<(SchurVerdict, bool)> {
    let params = cfg.params()?;
    let grid = SimplexGrid::new(params.n_t(), cfg.resolution, cfg.p_max, GridMode::Full)?;
    let v = schur_extreme_snr_check(&params, regime, &grid, &cfg.mc()?)?;
    let expected = match regime {
        SnrRegime::Low => Structure::Beamforming,
        SnrRegime::High => Structure::Upa,
    };
    let passed = v.holds && v.argmax_structure == expected;
    Ok((v, passed))
}

fn schur(args: &VerifyArgs, cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    // without --regime both extremes run at -10 dB and 40 dB
    let runs: Vec<(ExperimentConfig, SnrRegime)> = match args.regime {
        Some(SchurRegimeArg::Low) => vec![(cfg.clone(), SnrRegime::Low)],
        Some(SchurRegimeArg::High) => vec![(cfg.clone(), SnrRegime::High)],
        None => {
            let mut high = cfg.clone();
            high.rho_db = 40.0;
            let mut low = cfg.clone();
            low.rho_db = -10.0;
            vec![(low, SnrRegime::Low), (high, SnrRegime::High)]
        }
    };
    let mut s = header(cfg);
    let mut records = Vec::new();
    let mut passed = true;
    for (c, regime) in &runs {
        let (v, ok) = schur_one(c, *regime)?;
        passed &= ok;
        writeln!(
            s,
            "{:?} snr ({} dB): {} majorization pairs, {} violations, argmax {:?} ({}) = {}, {}",
            regime,
            c.rho_db,
            v.pairs_checked,
            v.violations.len(),
            v.argmax.powers(),
            v.argmax_structure.name(),
            v.argmax_value.mean,
            if v.closed_form {
                "closed form"
            } else {
                "sampled"
            }
        )
        .unwrap();
        records.push(json!({
            "regime": format!("{regime:?}").to_lowercase(),
            "rho_db": c.rho_db,
            "passed": ok,
            "holds": v.holds,
            "pairs_checked": v.pairs_checked,
            "violations": v.violations.iter().map(|(p, q)| json!([p.powers(), q.powers()])).collect::<Vec<_>>(),
            "argmax": v.argmax.powers(),
            "argmax_structure": v.argmax_structure.name(),
            "argmax_value": v.argmax_value.mean,
            "closed_form": v.closed_form,
        }));
    }
    writeln!(s, "{}", verdict(passed)).unwrap();
    Ok(VerifyOutput {
        passed,
        report: s,
        record: json!({ "passed": passed, "runs": records }),
    })
}

fn appendix_a(args: &VerifyArgs, cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    let samples = args.samples.unwrap_or(1000);
    let v = appendix_a_inequality_check(samples, &cfg.params()?, &cfg.mc()?)?;
    let mut s = header(cfg);
    writeln!(
        s,
        "{} samples, max E = {:.3e}, {} above 1e-9",
        v.samples, v.max_e, v.violations
    )
    .unwrap();
    writeln!(s, "{}", verdict(v.holds)).unwrap();
    let record = json!({
        "passed": v.holds,
        "samples": v.samples,
        "max_e": v.max_e,
        "violations": v.violations,
    });
    Ok(VerifyOutput {
        passed: v.holds,
        report: s,
        record,
    })
}

fn tiso(cfg: &ExperimentConfig) -> CliResult<VerifyOutput> {
    let mut s = header(cfg);
    match tiso_counterexample(&cfg.params()?) {
        Ok(w) => {
            writeln!(s, "level gamma_q = {} at q = {}", w.level, w.q).unwrap();
            writeln!(s, "Gamma(q, 0) = {}", w.gamma_q0).unwrap();
            writeln!(s, "Gamma(0, q) = {}", w.gamma_0q).unwrap();
            writeln!(
                s,
                "Gamma(q/2, q/2) = {} < level: upper level set is not convex",
                w.gamma_mid
            )
            .unwrap();
            writeln!(s, "{}", verdict(true)).unwrap();
            let record = json!({
                "passed": true,
                "q": w.q,
                "level": w.level,
                "gamma_q0": w.gamma_q0,
                "gamma_0q": w.gamma_0q,
                "gamma_mid": w.gamma_mid,
                "points": w.points,
                "midpoint_in_level_set": w.midpoint_in_level_set,
            });
            Ok(VerifyOutput {
                passed: true,
                report: s,
                record,
            })
        }
        Err(Error::NoWitness { q }) => {
            writeln!(s, "midpoint stays in the level set at q = {q}").unwrap();
            writeln!(s, "{}", verdict(false)).unwrap();
            Ok(VerifyOutput {
                passed: false,
                report: s,
                record: json!({ "passed": false, "q": q }),
            })
        }
        Err(e) => Err(CliError::from(e)),
    }
}
