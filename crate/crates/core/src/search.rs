//! Power-allocation search and structural checks.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::channel::{rate_thresholds, sample_channel, ChannelBank, McConfig, RateThresholds};
use crate::closed_form::miso_gpr;
use crate::error::{Error, Result};
use crate::linalg::{add_identity, cholesky_in_place, cholesky_logdet, cholesky_quad_form};
use crate::rng::TrialRng;
use crate::solvers::solve_c_thresholds;
use crate::system::{
    majorizes, ChannelSample, GprCurve, Majorization, McEstimate, PowerAllocation, SystemParams,
};

/// Lower end of the coarse grid relative to the upper one.
const GRID_SPAN: f64 = 1e-4;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn evaluate(f: &mut impl FnMut(f64) -> Result<f64>, p: f64) -> Result<f64> {
    let v = f(p).map_err(|e| match e {
        Error::EvaluationFailure(m) => Error::EvaluationFailure(m),
        other => Error::EvaluationFailure(format!("at p = {p}: {other}")),
    })?;
    if !v.is_finite() {
        return Err(Error::EvaluationFailure(format!(
            "non-finite value {v} at p = {p}"
        )));
    }
    Ok(v)
}

/// Number of strict local maxima, counting runs of equal values once.
fn count_local_maxima(values: &[f64]) -> usize {
    let mut runs: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    (0..runs.len())
        .filter(|&i| {
            let left = i == 0 || runs[i - 1] < runs[i];
            let right = i + 1 == runs.len() || runs[i + 1] < runs[i];
            left && right
        })
        .count()
}

/// Log-spaced points `p_min .. p_max` inclusive.
pub fn log_grid(p_min: f64, p_max: f64, points: usize) -> Vec<f64> {
    let (a, b) = (p_min.ln(), p_max.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                p_max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// [`maximize_upa_gpr`] over an explicit lower grid end.
pub fn maximize_on(
    mut gpr: impl FnMut(f64) -> Result<f64>,
    p_min: f64,
    p_max: f64,
    grid_points: usize,
) -> Result<GprCurve> {
    if grid_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 grid points, got {grid_points}"
        )));
    }
    if !(p_min > 0.0 && p_max > p_min && p_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bad search interval [{p_min}, {p_max}]"
        )));
    }
    let powers = log_grid(p_min, p_max, grid_points);
    let mut grid = Vec::with_capacity(grid_points);
    for &p in &powers {
        grid.push((p, evaluate(&mut gpr, p)?));
    }
    let values: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let best = (0..grid_points).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let (lo, hi) = (
        powers[best.saturating_sub(1)],
        powers[(best + 1).min(grid_points - 1)],
    );

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = evaluate(&mut gpr, x1)?;
    let mut f2 = evaluate(&mut gpr, x2)?;
    let (mut p_star, mut gamma_star) = grid[best];
    for _ in 0..200 {
        if b - a <= 1e-13 * (a + b) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = evaluate(&mut gpr, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = evaluate(&mut gpr, x2)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > gamma_star {
            p_star = x;
            gamma_star = f;
        }
    }
    Ok(GprCurve {
        multimodal: count_local_maxima(&values) > 1,
        grid,
        p_star,
        gamma_star,
    })
}

/// Maximizes a GPR curve on `(0, p_max]`: a log-spaced scan over
/// `[1e-4 p_max, p_max]` followed by golden-section refinement inside the
/// bracket of the best grid point.
pub fn maximize_upa_gpr(
    gpr: impl FnMut(f64) -> Result<f64>,
    p_max: f64,
    grid_points: usize,
) -> Result<GprCurve> {
    maximize_on(gpr, GRID_SPAN * p_max, p_max, grid_points)
}

/// Result of [`unimodality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalityReport {
    pub unimodal: bool,
    /// Points dipping below both sides by more than the noise band.
    pub violations: Vec<(f64, f64)>,
    /// Maxima separated by the violations (the global maximum when unimodal).
    pub peaks: Vec<(f64, f64)>,
}

/// Rise-then-fall test: point `j` violates when it lies more than
/// `noise_band` below the best point on *both* sides.
pub fn unimodality_check(curve: &GprCurve, noise_band: f64) -> Result<UnimodalityReport> {
    let g = &curve.grid;
    let n = g.len();
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 curve points, got {n}"
        )));
    }
    if noise_band < 0.0 {
        return Err(Error::InvalidArgument("negative noise band".into()));
    }
    let mut prefix = vec![0usize; n];
    for j in 1..n {
        prefix[j] = if g[j].1 > g[prefix[j - 1]].1 {
            j
        } else {
            prefix[j - 1]
        };
    }
    let mut suffix = vec![n - 1; n];
    for j in (0..n - 1).rev() {
        suffix[j] = if g[j].1 >= g[suffix[j + 1]].1 {
            j
        } else {
            suffix[j + 1]
        };
    }
    let mut violations = Vec::new();
    let mut peaks: Vec<usize> = Vec::new();
    for j in 1..n - 1 {
        let (l, r) = (prefix[j - 1], suffix[j + 1]);
        if g[l].1.min(g[r].1) - g[j].1 > noise_band {
            violations.push(g[j]);
            for k in [l, r] {
                if !peaks.contains(&k) {
                    peaks.push(k);
                }
            }
        }
    }
    if peaks.is_empty() {
        peaks.push(prefix[n - 1]);
    }
    peaks.sort_unstable();
    Ok(UnimodalityReport {
        unimodal: violations.is_empty(),
        violations,
        peaks: peaks.into_iter().map(|k| g[k]).collect(),
    })
}

/// A Monte Carlo UPA curve with the pointwise standard errors of its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct McCurve {
    pub curve: GprCurve,
    pub std_errors: Vec<f64>,
}

impl McCurve {
    pub fn max_std_error(&self) -> f64 {
        self.std_errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Monte Carlo GPR curve of an allocation shape from per-trial thresholds.
pub fn mc_curve(
    thresholds: &RateThresholds,
    rate: f64,
    p_max: f64,
    grid_points: usize,
) -> Result<McCurve> {
    let curve = maximize_upa_gpr(|p| Ok(thresholds.gpr(p, rate).mean), p_max, grid_points)?;
    let std_errors = curve
        .powers()
        .map(|p| thresholds.gpr(p, rate).std_error)
        .collect();
    Ok(McCurve { curve, std_errors })
}

/// Monte Carlo UPA GPR curve of `params` on `(0, p_max]`.
pub fn mc_upa_curve(params: &SystemParams, cfg: &McConfig, grid_points: usize) -> Result<McCurve> {
    let th = rate_thresholds(&vec![1.0; params.n_t()], params, cfg)?;
    mc_curve(&th, params.rate(), params.p_max(), grid_points)
}

/// Which power totals a [`SimplexGrid`] enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// Compositions summing to the full power.
    Full,
    /// Every composition shape at each total `k / resolution * total_power`.
    Interior,
}

/// Integer compositions of `resolution` into `n` parts, scaled to power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexGrid {
    pub n: usize,
    pub resolution: u32,
    pub total_power: f64,
    pub mode: GridMode,
}

fn push_compositions(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 1 {
        prefix.push(rest);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=rest).rev() {
        prefix.push(k);
        push_compositions(rest - k, slots - 1, prefix, out);
        prefix.pop();
    }
}

fn push_partitions(
    rest: u32,
    slots: usize,
    cap: u32,
    prefix: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if slots == 0 {
        if rest == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for k in (0..=rest.min(cap)).rev() {
        // the remaining slots cannot absorb more than k each
        if (k as u64) * (slots as u64) < rest as u64 {
            break;
        }
        prefix.push(k);
        push_partitions(rest - k, slots - 1, k, prefix, out);
        prefix.pop();
    }
}

impl SimplexGrid {
    pub fn new(n: usize, resolution: u32, total_power: f64, mode: GridMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonPositiveField("n"));
        }
        if resolution == 0 {
            return Err(Error::NonPositiveField("resolution"));
        }
        if !total_power.is_finite() {
            return Err(Error::NonFiniteField("total_power"));
        }
        if total_power <= 0.0 {
            return Err(Error::NonPositiveField("total_power"));
        }
        Ok(Self {
            n,
            resolution,
            total_power,
            mode,
        })
    }

    /// Every composition of `resolution` into `n` nonnegative parts.
    pub fn compositions(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        push_compositions(
            self.resolution,
            self.n,
            &mut Vec::with_capacity(self.n),
            &mut out,
        );
        out
    }

    /// Compositions with parts in decreasing order: one per permutation class.
    pub fn canonical_compositions(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        push_partitions(
            self.resolution,
            self.n,
            self.resolution,
            &mut Vec::with_capacity(self.n),
            &mut out,
        );
        out
    }

    /// Total powers the grid visits.
    pub fn totals(&self) -> Vec<f64> {
        match self.mode {
            GridMode::Full => vec![self.total_power],
            GridMode::Interior => (1..=self.resolution)
                .map(|k| self.total_power * k as f64 / self.resolution as f64)
                .collect(),
        }
    }

    pub fn scale(&self, parts: &[u32], total: f64) -> Result<PowerAllocation> {
        let r = self.resolution as f64;
        PowerAllocation::new(parts.iter().map(|&k| total * k as f64 / r).collect())
    }

    /// Every grid allocation at every total.
    pub fn points(&self) -> Result<Vec<PowerAllocation>> {
        let shapes = self.compositions();
        let mut out = Vec::new();
        for t in self.totals() {
            for s in &shapes {
                out.push(self.scale(s, t)?);
            }
        }
        Ok(out)
    }
}

/// Optimization target of the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Gpr,
    SuccessProbability,
}

/// Allocation structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Beamforming,
    Upa,
    Other,
}

impl Structure {
    /// Uniform takes precedence for a single antenna.
    pub fn classify(alloc: &PowerAllocation) -> Self {
        if alloc.is_upa() && alloc.total() > 0.0 {
            Structure::Upa
        } else if alloc.is_beamforming() {
            Structure::Beamforming
        } else {
            Structure::Other
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Structure::Beamforming => "beamforming",
            Structure::Upa => "upa",
            Structure::Other => "other",
        }
    }
}

/// A scored allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub allocation: PowerAllocation,
    pub value: McEstimate,
}

struct ScoredShape {
    parts: Vec<u32>,
    thresholds: RateThresholds,
}

pub const MAX_EXHAUSTIVE_ANTENNAS: usize = 4;
pub const MAX_EXHAUSTIVE_RESOLUTION: u32 = 64;

/// Exhaustive search over canonical simplex shapes on a shared set of channel
/// draws. Thresholds are unit-total, so one searcher serves every budget.
pub struct ExhaustiveSearcher {
    params: SystemParams,
    resolution: u32,
    shapes: Vec<ScoredShape>,
    beamforming: RateThresholds,
    upa: RateThresholds,
}

impl ExhaustiveSearcher {
    pub fn new(params: &SystemParams, resolution: u32, cfg: &McConfig) -> Result<Self> {
        let n = params.n_t();
        if n > MAX_EXHAUSTIVE_ANTENNAS || resolution > MAX_EXHAUSTIVE_RESOLUTION || resolution == 0
        {
            return Err(Error::GridTooLarge { n, resolution });
        }
        let grid = SimplexGrid::new(n, resolution, 1.0, GridMode::Full)?;
        let bank = ChannelBank::new(params, cfg);
        let shapes = grid
            .canonical_compositions()
            .into_iter()
            .map(|parts| {
                let unit: Vec<f64> = parts.iter().map(|&k| k as f64).collect();
                Ok(ScoredShape {
                    thresholds: bank.thresholds(&unit)?,
                    parts,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut bf = vec![0.0; n];
        bf[0] = 1.0;
        Ok(Self {
            params: *params,
            resolution,
            beamforming: bank.thresholds(&bf)?,
            upa: bank.thresholds(&vec![1.0; n])?,
            shapes,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    fn allocation(&self, parts: &[u32], total: f64) -> Result<PowerAllocation> {
        let r = self.resolution as f64;
        PowerAllocation::new(parts.iter().map(|&k| total * k as f64 / r).collect())
    }

    fn best_over_totals(&self, th: &RateThresholds, totals: &[f64]) -> (f64, McEstimate) {
        let rate = self.params.rate();
        totals.iter().map(|&t| (t, th.gpr(t, rate))).fold(
            (totals[0], th.gpr(totals[0], rate)),
            |b, c| if c.1.mean > b.1.mean { c } else { b },
        )
    }

    fn score(
        &self,
        th: &RateThresholds,
        objective: Objective,
        budget: f64,
        totals: &[f64],
    ) -> (f64, McEstimate) {
        match objective {
            Objective::SuccessProbability => (budget, th.success_probability(budget)),
            Objective::Gpr => self.best_over_totals(th, totals),
        }
    }

    fn totals(&self, budget: f64, mode: GridMode) -> Vec<f64> {
        SimplexGrid {
            n: self.params.n_t(),
            resolution: self.resolution,
            total_power: budget,
            mode,
        }
        .totals()
    }

    /// Best grid allocation under `budget`. Success probability always uses
    /// the whole budget; GPR visits the totals of `mode`.
    pub fn best(&self, objective: Objective, budget: f64, mode: GridMode) -> Result<Candidate> {
        let totals = self.totals(budget, mode);
        let mut best: Option<(usize, f64, McEstimate)> = None;
        for (i, s) in self.shapes.iter().enumerate() {
            let (t, v) = self.score(&s.thresholds, objective, budget, &totals);
            if best.as_ref().is_none_or(|b| v.mean > b.2.mean) {
                best = Some((i, t, v));
            }
        }
        let (i, t, value) = best.ok_or_else(|| Error::EvaluationFailure("empty grid".into()))?;
        Ok(Candidate {
            allocation: self.allocation(&self.shapes[i].parts, t)?,
            value,
        })
    }

    /// Beamforming under `budget`, scored like [`ExhaustiveSearcher::best`].
    pub fn beamforming(
        &self,
        objective: Objective,
        budget: f64,
        mode: GridMode,
    ) -> Result<Candidate> {
        let (t, value) = self.score(
            &self.beamforming,
            objective,
            budget,
            &self.totals(budget, mode),
        );
        Ok(Candidate {
            allocation: PowerAllocation::beamforming(self.params.n_t(), t, 0)?,
            value,
        })
    }

    /// Uniform allocation under `budget`, scored like [`ExhaustiveSearcher::best`].
    pub fn upa(&self, objective: Objective, budget: f64, mode: GridMode) -> Result<Candidate> {
        let (t, value) = self.score(&self.upa, objective, budget, &self.totals(budget, mode));
        Ok(Candidate {
            allocation: PowerAllocation::uniform(self.params.n_t(), t)?,
            value,
        })
    }

    pub fn upa_thresholds(&self) -> &RateThresholds {
        &self.upa
    }

    pub fn beamforming_thresholds(&self) -> &RateThresholds {
        &self.beamforming
    }

    /// Structure of the optimum, treating beamforming or UPA as optimal when
    /// within `k` joint standard errors of the best grid value.
    pub fn classify(
        &self,
        objective: Objective,
        budget: f64,
        mode: GridMode,
        k: f64,
    ) -> Result<Structure> {
        let best = self.best(objective, budget, mode)?;
        let bf = self.beamforming(objective, budget, mode)?;
        let upa = self.upa(objective, budget, mode)?;
        let (lead, kind) = if bf.value.mean >= upa.value.mean {
            (bf, Structure::Beamforming)
        } else {
            (upa, Structure::Upa)
        };
        let joint = best.value.std_error.hypot(lead.value.std_error);
        if lead.value.mean >= best.value.mean - k * joint {
            Ok(kind)
        } else {
            Ok(Structure::classify(&best.allocation))
        }
    }
}

/// Best allocation of a simplex grid for `objective`.
///
/// The budget is `grid.total_power`. Only sorted-descending compositions
/// are scored, as the i.i.d. channel makes every permutation equivalent.
pub fn exhaustive_best_allocation(
    params: &SystemParams,
    objective: Objective,
    grid: &SimplexGrid,
    cfg: &McConfig,
) -> Result<Candidate> {
    if grid.n != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("grid over {} antennas", params.n_t()),
            actual: format!("{}", grid.n),
        });
    }
    ExhaustiveSearcher::new(params, grid.resolution, cfg)?.best(
        objective,
        grid.total_power,
        grid.mode,
    )
}

/// A run of consecutive scanned budgets sharing one optimal structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub lo: f64,
    pub hi: f64,
    pub structure: Structure,
}

/// Structures and scores at one scanned budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub p_max: f64,
    pub outage_structure: Structure,
    pub gpr_structure: Structure,
    pub success_beamforming: McEstimate,
    pub success_upa: McEstimate,
    pub success_best: Candidate,
    pub gpr_beamforming: McEstimate,
    pub gpr_upa: McEstimate,
    pub gpr_best: Candidate,
}

/// Outcome of [`conjecture1_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    /// Budget at which the outage-optimal structure switches from
    /// beamforming to UPA, if the scan brackets such a switch.
    pub threshold_estimate: Option<f64>,
    /// Runs of the GPR-optimal structure over the scanned budgets.
    pub regimes: Vec<Regime>,
    /// Runs of the outage-optimal structure.
    pub outage_regimes: Vec<Regime>,
    /// Budgets where the GPR optimum is neither beamforming nor UPA.
    pub violations: Vec<f64>,
    pub points: Vec<ScanPoint>,
}

/// Knobs of [`conjecture1_scan_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Noise band, in joint standard errors, for structure classification.
    pub noise_k: f64,
    /// Width at which the threshold bisection stops, in Watts.
    pub threshold_tol: f64,
    /// Totals visited by the GPR search.
    pub mode: GridMode,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            noise_k: 4.0,
            threshold_tol: 0.005,
            mode: GridMode::Interior,
        }
    }
}

fn merge_regimes(points: &[(f64, Structure)]) -> Vec<Regime> {
    let mut out: Vec<Regime> = Vec::new();
    for &(p, s) in points {
        match out.last_mut() {
            Some(r) if r.structure == s => r.hi = p,
            _ => out.push(Regime {
                lo: p,
                hi: p,
                structure: s,
            }),
        }
    }
    out
}

fn success_gap(s: &ExhaustiveSearcher, budget: f64) -> i64 {
    s.beamforming_thresholds().successes(budget) as i64
        - s.upa_thresholds().successes(budget) as i64
}

/// Scans budgets for the structure of the outage- and GPR-optimal precoders.
pub fn conjecture1_scan_with(
    searcher: &ExhaustiveSearcher,
    p_bars: &[f64],
    opts: &ScanOptions,
) -> Result<ConjectureReport> {
    let mut budgets = p_bars.to_vec();
    if budgets.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidArgument(
            "scanned budgets must be positive and finite".into(),
        ));
    }
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    if budgets.is_empty() {
        return Err(Error::InvalidArgument("empty budget list".into()));
    }

    let mut points = Vec::with_capacity(budgets.len());
    for &b in &budgets {
        let sp = Objective::SuccessProbability;
        let success_beamforming = searcher.beamforming(sp, b, GridMode::Full)?.value;
        let success_upa = searcher.upa(sp, b, GridMode::Full)?.value;
        let outage_structure = if success_beamforming.mean >= success_upa.mean {
            Structure::Beamforming
        } else {
            Structure::Upa
        };
        points.push(ScanPoint {
            p_max: b,
            outage_structure,
            gpr_structure: searcher.classify(Objective::Gpr, b, opts.mode, opts.noise_k)?,
            success_beamforming,
            success_upa,
            success_best: searcher.best(sp, b, GridMode::Full)?,
            gpr_beamforming: searcher.beamforming(Objective::Gpr, b, opts.mode)?.value,
            gpr_upa: searcher.upa(Objective::Gpr, b, opts.mode)?.value,
            gpr_best: searcher.best(Objective::Gpr, b, opts.mode)?,
        });
    }

    // last switch from beamforming-ahead to UPA-ahead, refined by bisection
    let threshold_estimate = (0..points.len().saturating_sub(1))
        .rev()
        .find(|&i| {
            points[i].outage_structure == Structure::Beamforming
                && points[i + 1].outage_structure == Structure::Upa
        })
        .map(|i| {
            let (mut lo, mut hi) = (points[i].p_max, points[i + 1].p_max);
            while hi - lo > opts.threshold_tol {
                let mid = 0.5 * (lo + hi);
                if success_gap(searcher, mid) >= 0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        });

    let gpr_runs: Vec<(f64, Structure)> =
        points.iter().map(|p| (p.p_max, p.gpr_structure)).collect();
    let outage_runs: Vec<(f64, Structure)> = points
        .iter()
        .map(|p| (p.p_max, p.outage_structure))
        .collect();
    Ok(ConjectureReport {
        threshold_estimate,
        regimes: merge_regimes(&gpr_runs),
        outage_regimes: merge_regimes(&outage_runs),
        violations: points
            .iter()
            .filter(|p| p.gpr_structure == Structure::Other)
            .map(|p| p.p_max)
            .collect(),
        points,
    })
}

/// [`conjecture1_scan_with`] on fresh channel draws with default options.
/// The grid supplies the antenna count, resolution and GPR total mode; its
/// `total_power` is unused since every budget in `p_bars` is scanned.
pub fn conjecture1_scan(
    params: &SystemParams,
    p_bars: &[f64],
    grid: &SimplexGrid,
    cfg: &McConfig,
) -> Result<ConjectureReport> {
    if grid.n != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("grid over {} antennas", params.n_t()),
            actual: format!("{}", grid.n),
        });
    }
    let searcher = ExhaustiveSearcher::new(params, grid.resolution, cfg)?;
    let opts = ScanOptions {
        mode: grid.mode,
        ..ScanOptions::default()
    };
    conjecture1_scan_with(&searcher, p_bars, &opts)
}

/// Upper-level-set non-convexity witness of the two-antenna MISO GPR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TisoWitness {
    pub q: f64,
    /// `gamma_q = Gamma(q, 0)`.
    pub level: f64,
    pub gamma_q0: f64,
    pub gamma_0q: f64,
    pub gamma_mid: f64,
    /// `(q, 0)`, `(0, q)` and their midpoint `(q/2, q/2)`.
    pub points: [(f64, f64); 3],
    pub midpoint_in_level_set: bool,
}

/// Shows the two-antenna MISO GPR is not quasi-concave: both beamforming
/// points lie in the upper level set at `gamma_q` but their midpoint does not.
pub fn tiso_counterexample(params: &SystemParams) -> Result<TisoWitness> {
    if params.n_r() != 1 {
        return Err(Error::NotMiso { n_r: params.n_r() });
    }
    if params.n_t() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 transmit antennas".into(),
            actual: format!("{}", params.n_t()),
        });
    }
    let c1 = solve_c_thresholds(2)?.c(1);
    let q = 0.5 * params.p_max().min(params.c() / c1);
    let gpr = |a: f64, b: f64| miso_gpr(&PowerAllocation::new(vec![a, b])?, params);
    let gamma_q0 = gpr(q, 0.0)?;
    let gamma_0q = gpr(0.0, q)?;
    let gamma_mid = gpr(0.5 * q, 0.5 * q)?;
    let level = gamma_q0;
    let midpoint_in_level_set = gamma_mid >= level;
    if midpoint_in_level_set {
        return Err(Error::NoWitness { q });
    }
    Ok(TisoWitness {
        q,
        level,
        gamma_q0,
        gamma_0q,
        gamma_mid,
        points: [(q, 0.0), (0.0, q), (0.5 * q, 0.5 * q)],
        midpoint_in_level_set,
    })
}

/// SNR regime of [`schur_extreme_snr_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrRegime {
    /// `rho <= -10 dB`: GPR should decrease along majorization toward UPA.
    Low,
    /// `rho >= 30 dB`: GPR should increase toward UPA.
    High,
}

/// Outcome of [`schur_extreme_snr_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchurVerdict {
    pub regime: SnrRegime,
    pub holds: bool,
    pub argmax: PowerAllocation,
    pub argmax_structure: Structure,
    pub argmax_value: McEstimate,
    pub pairs_checked: usize,
    /// Pairs `(p, q)` with `p` majorizing `q` that break the expected order.
    pub violations: Vec<(PowerAllocation, PowerAllocation)>,
    pub closed_form: bool,
}

/// Checks the Schur monotonicity of the GPR over equal-total grid
/// allocations at an extreme SNR, and reports the maximizing structure.
///
/// Closed forms are used when `n_r = 1` and `n_t <= 2`; otherwise the GPR is
/// sampled and comparisons allow four joint standard errors.
pub fn schur_extreme_snr_check(
    params: &SystemParams,
    regime: SnrRegime,
    grid: &SimplexGrid,
    cfg: &McConfig,
) -> Result<SchurVerdict> {
    let rho_db = params.rho_db();
    match regime {
        SnrRegime::Low if rho_db > -10.0 + 1e-9 => {
            return Err(Error::InvalidArgument(format!(
                "low-SNR check needs rho <= -10 dB, got {rho_db}"
            )))
        }
        SnrRegime::High if rho_db < 30.0 - 1e-9 => {
            return Err(Error::InvalidArgument(format!(
                "high-SNR check needs rho >= 30 dB, got {rho_db}"
            )))
        }
        _ => {}
    }
    if grid.n != params.n_t() {
        return Err(Error::DimensionMismatch {
            expected: format!("grid over {} antennas", params.n_t()),
            actual: format!("{}", grid.n),
        });
    }
    let total = grid.total_power;
    let closed_form = params.n_r() == 1 && params.n_t() <= 2;
    let shapes = grid.canonical_compositions();
    let allocs = shapes
        .iter()
        .map(|s| grid.scale(s, total))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<McEstimate> = if closed_form {
        allocs
            .iter()
            .map(|a| miso_gpr(a, params).map(McEstimate::exact))
            .collect::<Result<_>>()?
    } else {
        if params.n_t() > MAX_EXHAUSTIVE_ANTENNAS || grid.resolution > MAX_EXHAUSTIVE_RESOLUTION {
            return Err(Error::GridTooLarge {
                n: params.n_t(),
                resolution: grid.resolution,
            });
        }
        let bank = ChannelBank::new(params, cfg);
        allocs
            .iter()
            .map(|a| Ok(bank.thresholds(a.powers())?.gpr(total, params.rate())))
            .collect::<Result<_>>()?
    };

    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    for i in 0..allocs.len() {
        for j in 0..allocs.len() {
            if majorizes(&allocs[i], &allocs[j])? != Majorization::Yes {
                continue;
            }
            pairs_checked += 1;
            let (vp, vq) = (values[i], values[j]);
            let slack = if closed_form {
                1e-12 * vp.mean.abs().max(vq.mean.abs())
            } else {
                4.0 * vp.std_error.hypot(vq.std_error)
            };
            let ok = match regime {
                SnrRegime::Low => vp.mean >= vq.mean - slack,
                SnrRegime::High => vp.mean <= vq.mean + slack,
            };
            if !ok {
                violations.push((allocs[i].clone(), allocs[j].clone()));
            }
        }
    }
    let best = (0..allocs.len()).fold(0, |b, i| {
        if values[i].mean > values[b].mean {
            i
        } else {
            b
        }
    });
    Ok(SchurVerdict {
        regime,
        holds: violations.is_empty(),
        argmax: allocs[best].clone(),
        argmax_structure: Structure::classify(&allocs[best]),
        argmax_value: values[best],
        pairs_checked,
        violations,
        closed_form,
    })
}

/// `Tr[(I + S)^{-1} S] - log2 det(I + S)` with `S = rho sum_i p_i h_i h_i^H`.
pub fn appendix_a_quantity(h: &ChannelSample, powers: &[f64], rho: f64) -> f64 {
    let (n_r, n_t) = (h.n_r(), h.n_t());
    if powers.iter().all(|&p| p == 0.0) {
        return 0.0;
    }
    let mut l = vec![Complex64::new(0.0, 0.0); n_r * n_r];
    for i in 0..n_r {
        for j in 0..=i {
            l[i * n_r + j] = (0..n_t)
                .map(|k| h.get(i, k) * h.get(j, k).conj() * (powers[k] * rho))
                .sum();
        }
    }
    add_identity(&mut l, n_r);
    if !cholesky_in_place(&mut l, n_r) {
        return f64::NAN;
    }
    // Tr[(I+S)^{-1} S] = sum_i rho p_i h_i^H (I+S)^{-1} h_i
    let trace: f64 = (0..n_t)
        .filter(|&k| powers[k] > 0.0)
        .map(|k| {
            let g: Vec<Complex64> = (0..n_r).map(|i| h.get(i, k)).collect();
            powers[k] * rho * cholesky_quad_form(&l, n_r, &g)
        })
        .sum();
    trace - cholesky_logdet(&l, n_r) / LN_2
}

/// Outcome of [`appendix_a_inequality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixAVerdict {
    pub samples: u64,
    pub max_e: f64,
    pub violations: u64,
    pub holds: bool,
}

/// Slack allowed above zero.
pub const APPENDIX_A_SLACK: f64 = 1e-9;

/// Evaluates the inequality on `samples` random channels and random
/// nonnegative powers in `[0, p_max]` (each entry zero with probability 1/4).
pub fn appendix_a_inequality_check(
    samples: u64,
    params: &SystemParams,
    cfg: &McConfig,
) -> Result<AppendixAVerdict> {
    if samples == 0 {
        return Err(Error::NonPositiveField("samples"));
    }
    let mut max_e = f64::NEG_INFINITY;
    let mut violations = 0;
    for t in 0..samples {
        let h = sample_channel(params, cfg.seed, t);
        let mut aux = TrialRng::auxiliary(cfg.seed, t);
        let powers: Vec<f64> = (0..params.n_t())
            .map(|_| {
                let keep = aux.uniform() > 0.25;
                let u = aux.uniform();
                if keep {
                    u * params.p_max()
                } else {
                    0.0
                }
            })
            .collect();
        let e = appendix_a_quantity(&h, &powers, params.rho());
        if e.is_nan() || e > APPENDIX_A_SLACK {
            violations += 1;
        }
        if e > max_e || e.is_nan() {
            max_e = e;
        }
    }
    Ok(AppendixAVerdict {
        samples,
        max_e,
        violations,
        holds: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::siso_gpr;

    fn curve(values: &[f64]) -> GprCurve {
        GprCurve {
            grid: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as f64 + 1.0, v))
                .collect(),
            p_star: 0.0,
            gamma_star: 0.0,
            multimodal: false,
        }
    }

    #[test]
    fn two_bump_sequence_is_flagged() {
        let v: Vec<f64> = (0..20)
            .map(|i| {
                let x = i as f64;
                (-(x - 4.0).powi(2) / 4.0).exp() + 0.8 * (-(x - 14.0).powi(2) / 4.0).exp()
            })
            .collect();
        let r = unimodality_check(&curve(&v), 0.0).unwrap();
        assert!(!r.unimodal);
        let peaks: Vec<f64> = r.peaks.iter().map(|p| p.0).collect();
        assert_eq!(peaks, vec![5.0, 15.0]);
        // a wide enough band absorbs the dip
        assert!(unimodality_check(&curve(&v), 1.0).unwrap().unimodal);
    }

    #[test]
    fn single_bump_with_plateaus_is_unimodal() {
        let v = [
            0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 3.0, 3.0, 2.0, 1.0, 1.0, 0.5, 0.5, 0.2, 0.1, 0.0,
        ];
        let r = unimodality_check(&curve(&v), 0.0).unwrap();
        assert!(r.unimodal);
        assert_eq!(r.peaks.len(), 1);
        assert!(unimodality_check(&curve(&v[..10]), 0.0).is_err());
    }

    #[test]
    fn siso_maximum() {
        let p = SystemParams::new(1, 1, 0.1, 1.0, 1.0).unwrap();
        let c = maximize_upa_gpr(|x| siso_gpr(x, &p), 1.0, 64).unwrap();
        assert!((c.p_star - 0.1).abs() < 1e-6);
        assert!(!c.multimodal);
        let best_grid = c.values().fold(f64::NEG_INFINITY, f64::max);
        assert!(c.gamma_star >= best_grid);
        assert!(maximize_upa_gpr(|x| siso_gpr(x, &p), 1.0, 8).is_err());
        assert!(matches!(
            maximize_upa_gpr(|_| Err(Error::ZeroPower), 1.0, 16),
            Err(Error::EvaluationFailure(_))
        ));
    }

    #[test]
    fn grid_counts() {
        let g = SimplexGrid::new(3, 4, 1.0, GridMode::Full).unwrap();
        // C(4 + 2, 2) compositions, p(4) restricted to 3 parts = 4 partitions
        assert_eq!(g.compositions().len(), 15);
        assert_eq!(
            g.canonical_compositions(),
            vec![vec![4, 0, 0], vec![3, 1, 0], vec![2, 2, 0], vec![2, 1, 1]]
        );
        let g = SimplexGrid::new(2, 4, 2.0, GridMode::Interior).unwrap();
        assert_eq!(g.totals(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.points().unwrap().len(), 20);
        assert!(g.points().unwrap().iter().all(|a| a.total() <= 2.0));
    }

    #[test]
    fn exhaustive_guard() {
        let p = SystemParams::new(5, 1, 1.0, 1.0, 1.0).unwrap();
        let cfg = McConfig::new(1, 10).unwrap();
        let g = SimplexGrid::new(5, 8, 1.0, GridMode::Full).unwrap();
        assert!(matches!(
            exhaustive_best_allocation(&p, Objective::Gpr, &g, &cfg),
            Err(Error::GridTooLarge { n: 5, .. })
        ));
        let p = SystemParams::new(2, 1, 1.0, 1.0, 1.0).unwrap();
        let g = SimplexGrid::new(2, 65, 1.0, GridMode::Full).unwrap();
        assert!(matches!(
            exhaustive_best_allocation(&p, Objective::Gpr, &g, &cfg),
            Err(Error::GridTooLarge { resolution: 65, .. })
        ));
    }

    #[test]
    fn appendix_a_scalar_and_zero() {
        let h = ChannelSample::from_real_rows(&[&[1.0]]).unwrap();
        assert!((appendix_a_quantity(&h, &[1.0], 1.0) + 0.5).abs() < 1e-15);
        let h = ChannelSample::identity(2);
        assert_eq!(appendix_a_quantity(&h, &[0.0, 0.0], 3.0), 0.0);
    }

    #[test]
    fn regimes_merge() {
        use Structure::*;
        let r = merge_regimes(&[
            (0.1, Beamforming),
            (0.2, Beamforming),
            (0.3, Upa),
            (0.4, Upa),
        ]);
        assert_eq!(
            r,
            vec![
                Regime {
                    lo: 0.1,
                    hi: 0.2,
                    structure: Beamforming
                },
                Regime {
                    lo: 0.3,
                    hi: 0.4,
                    structure: Upa
                }
            ]
        );
    }
}
