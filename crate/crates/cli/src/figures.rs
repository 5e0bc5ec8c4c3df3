//! Data behind the six reference figures.
//!
//! | id | content | columns |
//! |----|---------|---------|
//! | 1 | sampled UPA GPR vs total power, `n_t = n_r = n` | `p, gamma_n1, gamma_n2, gamma_n4, gamma_n8` |
//! | 2 | peak of each figure-1 curve vs `n` | `n, p_star, gamma_star, gamma_star_se` |
//! | 3 | sampled UPA GPR vs total power, fixed `n_r`, varying `n_t` | `p, gamma_nt1, gamma_nt2, gamma_nt4, gamma_nt8` |
//! | 4 | closed-form MISO GPR vs budget, UPA on `l` antennas and the optimum | `p_max, gamma_l1.., gamma_opt, active_antennas` |
//! | 5 | success probability vs budget: beamforming, UPA, exhaustive | see [`conjecture_tables`] |
//! | 6 | GPR vs budget: beamforming, UPA, exhaustive | see [`conjecture_tables`] |

use gprlab_core::closed_form::subset_upa_gpr;
use gprlab_core::search::{conjecture1_scan, mc_upa_curve, ConjectureReport, McCurve};
use gprlab_core::solvers::{miso_optimal_precoder, solve_nu};
use gprlab_core::{GridMode, SimplexGrid, SystemParams};
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, Cell, Table};

pub const FAMILY: [usize; 4] = [1, 2, 4, 8];

/// Built-in settings of each figure.
pub fn defaults(id: u8) -> CliResult<ExperimentConfig> {
    let mut c = ExperimentConfig::base(format!("figure {id}"));
    match id {
        1 | 2 => {}
        3 => c.n_r = 2,
        4 => {
            c.n_t = 4;
            c.rate = 3.0;
            c.p_max = 2.0;
            c.grid_points = 200;
        }
        5 | 6 => {
            c.n_t = 2;
            c.n_r = 2;
            c.rho_db = 3.0;
            c.p_max = 0.5;
            c.grid_points = 25;
        }
        _ => {
            return Err(CliError::config(format!(
                "unknown figure {id}; expected 1-6"
            )))
        }
    }
    Ok(c)
}

/// Computed figure: files to persist, key=value lines to print, and the
/// same values for the manifest.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: Map<String, Value>,
}

impl FigureOutput {
    pub fn lines(&self) -> Vec<String> {
        self.summary
            .iter()
            .map(|(k, v)| format!("{k}={}", plain(v)))
            .collect()
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn run(id: u8, cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    match id {
        1 => fig1(cfg),
        2 => fig2(cfg),
        3 => fig3(cfg),
        4 => fig4(cfg),
        5 | 6 => fig5_6(id, cfg),
        _ => Err(CliError::config(format!(
            "unknown figure {id}; expected 1-6"
        ))),
    }
}

/// Sampled UPA curves of a family of antenna configurations.
pub fn upa_family(cfg: &ExperimentConfig, dims: &[(usize, usize)]) -> CliResult<Vec<McCurve>> {
    let base = cfg.params()?;
    let mc = cfg.mc()?;
    dims.iter()
        .map(|&(n_t, n_r)| {
            Ok(mc_upa_curve(
                &base.with_antennas(n_t, n_r)?,
                &mc,
                cfg.grid_points,
            )?)
        })
        .collect()
}

fn curve_table(curves: &[McCurve], names: &[String]) -> Table {
    let mut t = Table::new(std::iter::once("p".to_string()).chain(names.iter().cloned()));
    for (i, &(p, _)) in curves[0].curve.grid.iter().enumerate() {
        let mut row = vec![Cell::from(p)];
        row.extend(curves.iter().map(|c| Cell::from(c.curve.grid[i].1)));
        t.push(row);
    }
    t
}

fn peaks_summary(curves: &[McCurve], names: &[String]) -> Map<String, Value> {
    let mut m = Map::new();
    for (c, name) in curves.iter().zip(names) {
        let tag = name.trim_start_matches("gamma_");
        m.insert(format!("p_star_{tag}"), json!(c.curve.p_star));
        m.insert(format!("gamma_star_{tag}"), json!(c.curve.gamma_star));
    }
    m
}

fn fig1(cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    let curves = upa_family(cfg, &FAMILY.map(|n| (n, n)))?;
    let names: Vec<String> = FAMILY.iter().map(|n| format!("gamma_n{n}")).collect();
    Ok(FigureOutput {
        artifacts: vec![Artifact::csv("fig1.csv", &curve_table(&curves, &names))],
        summary: peaks_summary(&curves, &names),
    })
}

fn fig2(cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    let curves = upa_family(cfg, &FAMILY.map(|n| (n, n)))?;
    let mut t = Table::new(["n", "p_star", "gamma_star", "gamma_star_se"]);
    let mut increasing = true;
    for (i, (c, n)) in curves.iter().zip(FAMILY).enumerate() {
        // standard error at the grid point nearest the peak
        let j = (0..c.curve.grid.len())
            .min_by(|&a, &b| {
                let d = |k: usize| (c.curve.grid[k].0.ln() - c.curve.p_star.ln()).abs();
                d(a).total_cmp(&d(b))
            })
            .unwrap_or(0);
        t.push(vec![
            n.into(),
            c.curve.p_star.into(),
            c.curve.gamma_star.into(),
            c.std_errors[j].into(),
        ]);
        if i > 0 && c.curve.gamma_star <= curves[i - 1].curve.gamma_star {
            increasing = false;
        }
    }
    let names: Vec<String> = FAMILY.iter().map(|n| format!("gamma_n{n}")).collect();
    let mut summary = peaks_summary(&curves, &names);
    summary.insert("gamma_star_increasing".into(), json!(increasing));
    Ok(FigureOutput {
        artifacts: vec![Artifact::csv("fig2.csv", &t)],
        summary,
    })
}

fn fig3(cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    let curves = upa_family(cfg, &FAMILY.map(|n| (n, cfg.n_r)))?;
    let names: Vec<String> = FAMILY.iter().map(|n| format!("gamma_nt{n}")).collect();
    Ok(FigureOutput {
        artifacts: vec![Artifact::csv("fig3.csv", &curve_table(&curves, &names))],
        summary: peaks_summary(&curves, &names),
    })
}

/// GPR of UPA restricted to `l` antennas when the budget is `p_max`, with the
/// per-antenna power at its unconstrained optimum when affordable.
pub fn subset_gpr_at_budget(l: usize, p_max: f64, params: &SystemParams) -> CliResult<f64> {
    let q = (params.c() / solve_nu(l)?).min(p_max / l as f64);
    Ok(subset_upa_gpr(l, q, params)?)
}

fn fig4(cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    let params = cfg.params()?.with_antennas(cfg.n_t, 1)?;
    let n = params.n_t();
    let mut header: Vec<String> = vec!["p_max".into()];
    header.extend((1..=n).map(|l| format!("gamma_l{l}")));
    header.extend(["gamma_opt".into(), "active_antennas".into()]);
    let mut t = Table::new(header);
    for b in scan_budgets(cfg) {
        let at = params.with_p_max(b)?;
        let mut row = vec![Cell::from(b)];
        for l in 1..=n {
            row.push(subset_gpr_at_budget(l, b, &at)?.into());
        }
        let opt = miso_optimal_precoder(&at)?;
        row.push(opt.gpr(&at)?.into());
        row.push(opt.active_antennas.into());
        t.push(row);
    }
    let top = miso_optimal_precoder(&params)?;
    let mut summary = Map::new();
    summary.insert("active_antennas_at_pmax".into(), json!(top.active_antennas));
    summary.insert("gamma_opt_at_pmax".into(), json!(top.gpr(&params)?));
    Ok(FigureOutput {
        artifacts: vec![Artifact::csv("fig4.csv", &t)],
        summary,
    })
}

/// Budgets visited by figures 4 to 6: `k p_max / grid_points`.
pub fn scan_budgets(cfg: &ExperimentConfig) -> Vec<f64> {
    (1..=cfg.grid_points)
        .map(|k| cfg.p_max * k as f64 / cfg.grid_points as f64)
        .collect()
}

pub fn conjecture_scan(cfg: &ExperimentConfig) -> CliResult<ConjectureReport> {
    let params = cfg.params()?;
    let grid = SimplexGrid::new(params.n_t(), cfg.resolution, cfg.p_max, GridMode::Interior)?;
    Ok(conjecture1_scan(
        &params,
        &scan_budgets(cfg),
        &grid,
        &cfg.mc()?,
    )?)
}

/// Success-probability (figure 5) and GPR (figure 6) tables of a scan.
pub fn conjecture_tables(r: &ConjectureReport) -> (Table, Table) {
    let mut sp = Table::new([
        "p_max",
        "success_beamforming",
        "success_upa",
        "success_exhaustive",
        "success_se",
        "outage_structure",
    ]);
    let mut gp = Table::new([
        "p_max",
        "gpr_beamforming",
        "gpr_upa",
        "gpr_exhaustive",
        "gpr_se",
        "exhaustive_total",
        "gpr_structure",
    ]);
    for p in &r.points {
        sp.push(vec![
            p.p_max.into(),
            p.success_beamforming.mean.into(),
            p.success_upa.mean.into(),
            p.success_best.value.mean.into(),
            p.success_best.value.std_error.into(),
            p.outage_structure.name().into(),
        ]);
        gp.push(vec![
            p.p_max.into(),
            p.gpr_beamforming.mean.into(),
            p.gpr_upa.mean.into(),
            p.gpr_best.value.mean.into(),
            p.gpr_best.value.std_error.into(),
            p.gpr_best.allocation.total().into(),
            p.gpr_structure.name().into(),
        ]);
    }
    (sp, gp)
}

fn regimes_text(r: &[gprlab_core::search::Regime]) -> String {
    r.iter()
        .map(|g| format!("{}[{},{}]", g.structure.name(), g.lo, g.hi))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fig5_6(id: u8, cfg: &ExperimentConfig) -> CliResult<FigureOutput> {
    let r = conjecture_scan(cfg)?;
    let (sp, gp) = conjecture_tables(&r);
    let mut summary = Map::new();
    summary.insert(
        "threshold".into(),
        r.threshold_estimate
            .map_or(Value::String("none".into()), |t| json!(t)),
    );
    summary.insert(
        "outage_regimes".into(),
        json!(regimes_text(&r.outage_regimes)),
    );
    summary.insert("gpr_regimes".into(), json!(regimes_text(&r.regimes)));
    summary.insert("violations".into(), json!(r.violations.len()));
    let artifact = if id == 5 {
        Artifact::csv("fig5.csv", &sp)
    } else {
        Artifact::csv("fig6.csv", &gp)
    };
    Ok(FigureOutput {
        artifacts: vec![artifact],
        summary,
    })
}
