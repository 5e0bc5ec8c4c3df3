//! Link parameters and the value types shared by every other module.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for structural predicates (UPA / beamforming).
pub const STRUCTURE_RTOL: f64 = 1e-12;

/// Relative tolerance for comparing user supplied power totals.
pub const TOTAL_RTOL: f64 = 1e-9;

/// Unvalidated parameter record, e.g. as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub n_t: usize,
    pub n_r: usize,
    pub sigma2: f64,
    pub rate: f64,
    pub p_max: f64,
}

/// Validated link constants.
///
/// Derived quantities (`rho`, `c`, `d`) are computed on demand so they can
/// never drift from the stored fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    n_t: usize,
    n_r: usize,
    sigma2: f64,
    rate: f64,
    p_max: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value.is_infinite() {
        return Err(Error::NonFiniteField(name));
    }
    if value <= 0.0 {
        return Err(Error::NonPositiveField(name));
    }
    Ok(value)
}

/// Validates a raw record.
pub fn validate_params(raw: RawParams) -> Result<SystemParams> {
    if raw.n_t == 0 {
        return Err(Error::NonPositiveField("n_t"));
    }
    if raw.n_r == 0 {
        return Err(Error::NonPositiveField("n_r"));
    }
    Ok(SystemParams {
        n_t: raw.n_t,
        n_r: raw.n_r,
        sigma2: check_positive("sigma2", raw.sigma2)?,
        rate: check_positive("rate", raw.rate)?,
        p_max: check_positive("p_max", raw.p_max)?,
    })
}

/// Converts an SNR scale in dB into the noise power `sigma2 = 10^(-rho_db/10)`.
pub fn sigma2_from_rho_db(rho_db: f64) -> f64 {
    10f64.powf(-rho_db / 10.0)
}

impl SystemParams {
    pub fn new(n_t: usize, n_r: usize, sigma2: f64, rate: f64, p_max: f64) -> Result<Self> {
        validate_params(RawParams {
            n_t,
            n_r,
            sigma2,
            rate,
            p_max,
        })
    }

    /// Same as [`SystemParams::new`] with the SNR scale given in dB.
    pub fn from_rho_db(n_t: usize, n_r: usize, rho_db: f64, rate: f64, p_max: f64) -> Result<Self> {
        Self::new(n_t, n_r, sigma2_from_rho_db(rho_db), rate, p_max)
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            n_t: self.n_t,
            n_r: self.n_r,
            sigma2: self.sigma2,
            rate: self.rate,
            p_max: self.p_max,
        }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Target rate in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Inverse noise power.
    pub fn rho(&self) -> f64 {
        1.0 / self.sigma2
    }

    pub fn rho_db(&self) -> f64 {
        -10.0 * self.sigma2.log10()
    }

    /// `sigma2 * (2^R - 1)`: the single-antenna outage threshold in Watts.
    pub fn c(&self) -> f64 {
        self.sigma2 * exp2_m1(self.rate)
    }

    /// `n_t * c`.
    pub fn d(&self) -> f64 {
        self.n_t as f64 * self.c()
    }

    pub fn with_antennas(&self, n_t: usize, n_r: usize) -> Result<Self> {
        Self::new(n_t, n_r, self.sigma2, self.rate, self.p_max)
    }

    pub fn with_p_max(&self, p_max: f64) -> Result<Self> {
        Self::new(self.n_t, self.n_r, self.sigma2, self.rate, p_max)
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.n_t, self.n_r, sigma2, self.rate, self.p_max)
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.n_t, self.n_r, self.sigma2, rate, self.p_max)
    }
}

/// `2^x - 1`, accurate for small `x`.
pub fn exp2_m1(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (x * std::f64::consts::LN_2).exp_m1()
    } else {
        x.exp2() - 1.0
    }
}

/// Per-antenna transmit powers: the diagonal of the precoding matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::InvalidArgument("empty power vector".into()));
        }
        for &p in &powers {
            if !p.is_finite() {
                return Err(Error::NonFiniteField("powers"));
            }
            if p < 0.0 {
                return Err(Error::InvalidArgument(format!("negative power {p}")));
            }
        }
        Ok(Self { powers })
    }

    /// Builds an allocation and checks it against the antenna count and budget.
    pub fn for_params(powers: Vec<f64>, params: &SystemParams) -> Result<Self> {
        let alloc = Self::new(powers)?;
        if alloc.len() != params.n_t() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} transmit powers", params.n_t()),
                actual: format!("{}", alloc.len()),
            });
        }
        if alloc.total() > params.p_max() * (1.0 + STRUCTURE_RTOL) {
            return Err(Error::InvalidArgument(format!(
                "total power {} exceeds budget {}",
                alloc.total(),
                params.p_max()
            )));
        }
        Ok(alloc)
    }

    /// Uniform allocation of `total` over `n` antennas.
    pub fn uniform(n: usize, total: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonPositiveField("n_t"));
        }
        Self::new(vec![total / n as f64; n])
    }

    /// All of `total` on antenna `index`.
    pub fn beamforming(n: usize, total: f64, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "antenna {index} out of {n}"
            )));
        }
        let mut powers = vec![0.0; n];
        powers[index] = total;
        Self::new(powers)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn is_upa(&self) -> bool {
        let max = self.powers.iter().cloned().fold(0.0, f64::max);
        let min = self.powers.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min <= STRUCTURE_RTOL * max
    }

    pub fn is_beamforming(&self) -> bool {
        self.active_antennas() == 1
    }

    pub fn active_antennas(&self) -> usize {
        self.powers.iter().filter(|&&p| p > 0.0).count()
    }

    /// Same allocation rescaled to the given total.
    pub fn scaled_to(&self, total: f64) -> Result<Self> {
        let current = self.total();
        if current <= 0.0 {
            return Err(Error::ZeroPower);
        }
        Self::new(self.powers.iter().map(|p| p * total / current).collect())
    }

    /// Entries sorted in decreasing order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.powers.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Outcome of a majorization comparison `p ≻ q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Majorization {
    /// `p` majorizes `q`.
    Yes,
    /// `q` strictly majorizes `p`.
    No,
    /// Different totals, or neither vector majorizes the other.
    Incomparable,
}

fn prefix_dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut sa = 0.0;
    let mut sb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sa += x;
        sb += y;
        if sa < sb - tol {
            return false;
        }
    }
    true
}

/// Majorization order on power vectors of equal total.
pub fn majorizes(p: &PowerAllocation, q: &PowerAllocation) -> Result<Majorization> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let (tp, tq) = (p.total(), q.total());
    let scale = tp.abs().max(tq.abs());
    if (tp - tq).abs() > TOTAL_RTOL * scale {
        return Ok(Majorization::Incomparable);
    }
    let tol = STRUCTURE_RTOL * scale.max(f64::MIN_POSITIVE);
    let (ps, qs) = (p.sorted_desc(), q.sorted_desc());
    if prefix_dominates(&ps, &qs, tol) {
        Ok(Majorization::Yes)
    } else if prefix_dominates(&qs, &ps, tol) {
        Ok(Majorization::No)
    } else {
        Ok(Majorization::Incomparable)
    }
}

/// One realization of the `n_r x n_t` channel matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    n_r: usize,
    n_t: usize,
    entries: Vec<Complex64>,
}

impl ChannelSample {
    pub fn new(n_r: usize, n_t: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n_r == 0 || n_t == 0 {
            return Err(Error::InvalidArgument("empty channel matrix".into()));
        }
        if entries.len() != n_r * n_t {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", n_r * n_t),
                actual: format!("{}", entries.len()),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFiniteField("channel"));
        }
        Ok(Self { n_r, n_t, entries })
    }

    /// Real-valued matrix given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_t) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::new(n_r, n_t, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self {
            n_r: n,
            n_t: n,
            entries,
        }
    }

    pub(crate) fn from_raw(n_r: usize, n_t: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), n_r * n_t);
        Self { n_r, n_t, entries }
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n_t + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `Tr(H H^H)`, the total channel energy.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn check_params(&self, params: &SystemParams) -> Result<()> {
        if self.n_r != params.n_r() || self.n_t != params.n_t() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", params.n_r(), params.n_t()),
                actual: format!("{}x{}", self.n_r, self.n_t),
            });
        }
        Ok(())
    }
}

/// A Monte Carlo estimate.
///
/// `trials == 0` marks a value obtained analytically rather than by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            trials: 0,
        }
    }

    /// Binomial proportion `hits / trials`.
    pub fn proportion(hits: u64, trials: u64) -> Self {
        assert!(trials > 0, "proportion of zero trials");
        let mean = hits as f64 / trials as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            std_error: self.std_error * factor.abs(),
            trials: self.trials,
        }
    }

    /// `1 - mean` with the same error.
    pub fn complement(&self) -> Self {
        Self {
            mean: 1.0 - self.mean,
            ..*self
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// A sampled GPR-versus-power curve and its located maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GprCurve {
    /// `(p, gamma)` pairs, strictly increasing in `p`.
    pub grid: Vec<(f64, f64)>,
    pub p_star: f64,
    pub gamma_star: f64,
    /// Set when the grid scan found more than one strict local maximum.
    pub multimodal: bool,
}

impl GprCurve {
    pub fn powers(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().map(|&(p, _)| p)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().map(|&(_, g)| g)
    }
}
