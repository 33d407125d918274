//! Randomized verification campaigns for the Fourier-coefficient
//! inequalities of almost periodic trigonometric polynomials.
//!
//! Constant-1 inequalities (Bessel/Parseval, Hausdorff-Young, the `L¹`
//! coefficient bound) are asserted per trial up to the reported residuals.
//! The Paley-type inequalities carry an unspecified constant, so campaigns
//! record the ratio `lhs/rhs` and report its maximum as the empirical
//! constant — asserted finite and stable, never bounded by an invented
//! number.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lorentz::{seq_lorentz_norm, LorentzParams};
use crate::trigpoly::{PolyError, TrigPolynomial, FREQ_MERGE_TOL};

/// Relative slack granted to constant-1 inequalities on top of the reported
/// residual, absorbing quadrature tolerances.
pub const VIOLATION_SLACK: f64 = 1e-6;
/// Windowed-mean residuals are last-gap estimates; the true limit error is
/// bounded by a small multiple of them for the `O(1/τ)` decay of window
/// means of polynomials.
pub const RESIDUAL_MARGIN: f64 = 10.0;

const DEGENERATE_RHS: f64 = 1e-12;
const LORENTZ_GRID: u32 = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Bessel,
    HausdorffYoung,
    Paley,
    L1Bound,
    LorentzPaley,
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Inequality::Bessel => "bessel",
            Inequality::HausdorffYoung => "hausdorff_young",
            Inequality::Paley => "paley",
            Inequality::L1Bound => "l1_bound",
            Inequality::LorentzPaley => "lorentz_paley",
        }
    }

    /// Whether the inequality has constant 1, making per-trial violations
    /// meaningful.
    pub fn constant_is_one(&self) -> bool {
        matches!(self, Inequality::Bessel | Inequality::HausdorffYoung | Inequality::L1Bound)
    }
}

impl std::str::FromStr for Inequality {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bessel" => Ok(Inequality::Bessel),
            "hausdorff_young" => Ok(Inequality::HausdorffYoung),
            "paley" => Ok(Inequality::Paley),
            "l1_bound" => Ok(Inequality::L1Bound),
            "lorentz_paley" => Ok(Inequality::LorentzPaley),
            other => Err(VerifyError::InvalidConfig(format!("unknown inequality {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorMode {
    IntegerLattice,
    GenericReal,
}

impl std::str::FromStr for GeneratorMode {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "integer-lattice" => Ok(GeneratorMode::IntegerLattice),
            "generic-real" => Ok(GeneratorMode::GenericReal),
            other => Err(VerifyError::InvalidConfig(format!("unknown generator mode {other:?}"))),
        }
    }
}

/// Full description of a campaign; identical configs produce identical
/// reports byte for byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub inequality: Inequality,
    #[serde(default)]
    pub p: Option<f64>,
    pub q: f64,
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_n_terms")]
    pub n_terms: u32,
    #[serde(default = "default_freq_range")]
    pub freq_range: f64,
    #[serde(default = "default_coeff_bound")]
    pub coeff_bound: f64,
    #[serde(default = "default_mode")]
    pub mode: GeneratorMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub keep_records: bool,
}

fn default_n_terms() -> u32 {
    8
}
fn default_freq_range() -> f64 {
    16.0
}
fn default_coeff_bound() -> f64 {
    2.0
}
fn default_mode() -> GeneratorMode {
    GeneratorMode::IntegerLattice
}
fn default_tol() -> f64 {
    1e-9
}

impl CampaignConfig {
    pub fn new(inequality: Inequality, q: f64, trials: u32, base_seed: u64) -> Self {
        CampaignConfig {
            inequality,
            p: None,
            q,
            trials,
            base_seed,
            n_terms: default_n_terms(),
            freq_range: default_freq_range(),
            coeff_bound: default_coeff_bound(),
            mode: default_mode(),
            tol: default_tol(),
            threads: None,
            keep_records: false,
        }
    }
}

/// One trial: the polynomial (in the text format), both sides, their ratio,
/// and the numeric residual inherited from the mean estimates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub poly: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportParams {
    pub p: Option<f64>,
    pub q: f64,
    /// `q' = q/(q−1)`; `None` at `q = 1` (conjugate is ∞).
    pub q_prime: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub params: ReportParams,
    pub trials: u32,
    pub skipped: u32,
    pub violations: u32,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// The desk-scale stand-in for the inequality constant: the largest
    /// observed ratio.
    pub empirical_constant: f64,
    pub base_seed: u64,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

impl InequalityReport {
    /// Constant-1 inequalities pass with zero violations; empirical-constant
    /// inequalities pass when every ratio is finite and the maximum is
    /// stable (the last quartile does not exceed the overall maximum).
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.max_ratio.is_finite()
    }
}

fn conjugate(q: f64) -> Option<f64> {
    (q > 1.0).then(|| q / (q - 1.0))
}

/// Deterministic random polynomial: distinct frequencies (integers or
/// separated reals) and complex coefficients of modulus at most
/// `coeff_bound`.
pub fn gen_random_poly(
    seed: u64,
    n_terms: u32,
    freq_range: f64,
    coeff_bound: f64,
    mode: GeneratorMode,
) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs: Vec<f64> = Vec::with_capacity(n_terms as usize);
    let mut guard = 0;
    while freqs.len() < n_terms as usize && guard < 10_000 {
        guard += 1;
        let f = match mode {
            GeneratorMode::IntegerLattice => {
                let lo = -(freq_range.floor() as i64);
                let hi = freq_range.floor() as i64;
                rng.gen_range(lo..=hi) as f64
            }
            GeneratorMode::GenericReal => rng.gen_range(-freq_range..freq_range),
        };
        if freqs.iter().all(|g| (g - f).abs() > 10.0 * FREQ_MERGE_TOL) {
            freqs.push(f);
        }
    }
    let terms = freqs
        .into_iter()
        .map(|f| {
            let modulus = coeff_bound * rng.gen::<f64>();
            let phase = std::f64::consts::TAU * rng.gen::<f64>();
            (f, num_complex::Complex64::from_polar(modulus, phase))
        })
        .collect();
    TrigPolynomial::new(terms)
}

fn record(p: &TrigPolynomial, seed: u64, lhs: f64, rhs: f64, residual: f64) -> TrialRecord {
    let ratio = if rhs > DEGENERATE_RHS { lhs / rhs } else { f64::NAN };
    TrialRecord { seed, poly: p.to_string(), lhs, rhs, ratio, residual }
}

/// Parseval check: `Σ|a_k|²` against `∫|P|² dγ`; equality on polynomials.
pub fn check_bessel(p: &TrigPolynomial, tol: f64) -> Result<TrialRecord, PolyError> {
    let lhs: f64 = p.coefficients().iter().map(|a| a.norm_sqr()).sum();
    let mean = p.abs_pow_mean(2.0, tol)?;
    Ok(record(p, 0, lhs, mean.value, mean.residual))
}

/// `(Σ|a_k|^{q'})^{1/q'} ≤ ‖P‖_{B^q}` for `1 ≤ q ≤ 2` (sup of the moduli at
/// `q = 1`).
pub fn check_hausdorff_young(
    p: &TrigPolynomial,
    q: f64,
    tol: f64,
) -> Result<TrialRecord, VerifyError> {
    if !(1.0..=2.0).contains(&q) {
        return Err(VerifyError::InvalidConfig(format!("hausdorff_young needs q in [1,2], got {q}")));
    }
    let lhs = match conjugate(q) {
        Some(qp) => p
            .coefficients()
            .iter()
            .map(|a| a.norm().powf(qp))
            .sum::<f64>()
            .powf(1.0 / qp),
        None => p.coefficients().iter().map(|a| a.norm()).fold(0.0, f64::max),
    };
    let rhs = p.b_norm(q, tol)?;
    Ok(record(p, 0, lhs, rhs.value, rhs.residual))
}

/// Paley-type ratio: `ℓ^{q',q}` norm of the rearranged coefficients against
/// `‖P‖_{B^q}`, `1 < q ≤ 2`. The constant is unspecified; only the ratio is
/// recorded.
pub fn check_paley(p: &TrigPolynomial, q: f64, tol: f64) -> Result<TrialRecord, VerifyError> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(VerifyError::InvalidConfig(format!("paley needs q in (1,2], got {q}")));
    }
    let qp = conjugate(q).expect("q > 1");
    let params = LorentzParams::new(qp, q).expect("validated");
    let lhs = seq_lorentz_norm(&p.coefficients(), params);
    let rhs = p.b_norm(q, tol)?;
    Ok(record(p, 0, lhs, rhs.value, rhs.residual))
}

/// `|a(η; P)| ≤ ‖P‖_{L¹(γ)}`.
pub fn check_l1_bound(p: &TrigPolynomial, eta: f64, tol: f64) -> Result<TrialRecord, PolyError> {
    let lhs = p.fourier_coefficient(eta)?.norm();
    let mean = p.abs_pow_mean(1.0, tol)?;
    Ok(record(p, 0, lhs, mean.value, mean.residual))
}

/// Lorentz extension of the Paley ratio: `ℓ^{p',q}` of the coefficients
/// against `‖P‖_{L^{p,q}(γ)}`, `1 < p < 2`, `0 < q < ∞`.
pub fn check_lorentz_paley(
    p: &TrigPolynomial,
    pp: f64,
    q: f64,
    tol: f64,
) -> Result<TrialRecord, VerifyError> {
    if !(pp > 1.0 && pp < 2.0) {
        return Err(VerifyError::InvalidConfig(format!("lorentz_paley needs p in (1,2), got {pp}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(VerifyError::InvalidConfig(format!("lorentz_paley needs q in (0,∞), got {q}")));
    }
    let p_conj = pp / (pp - 1.0);
    let lhs = seq_lorentz_norm(&p.coefficients(), LorentzParams::new(p_conj, q).expect("validated"));
    let rhs = p.lorentz_gamma_norm(LorentzParams::new(pp, q).expect("validated"), LORENTZ_GRID, tol)?;
    Ok(record(p, 0, lhs, rhs.value, rhs.residual))
}

enum TrialOutcome {
    Kept(TrialRecord),
    Skipped,
}

fn run_trial(config: &CampaignConfig, seed: u64) -> TrialOutcome {
    let poly = gen_random_poly(seed, config.n_terms, config.freq_range, config.coeff_bound, config.mode);
    if poly.is_zero() {
        return TrialOutcome::Skipped;
    }
    let result: Result<TrialRecord, VerifyError> = match config.inequality {
        Inequality::Bessel => check_bessel(&poly, config.tol).map_err(Into::into),
        Inequality::HausdorffYoung => check_hausdorff_young(&poly, config.q, config.tol),
        Inequality::Paley => check_paley(&poly, config.q, config.tol),
        Inequality::L1Bound => {
            let eta = poly.frequencies().next().unwrap_or(0.0);
            check_l1_bound(&poly, eta, config.tol).map_err(Into::into)
        }
        Inequality::LorentzPaley => {
            check_lorentz_paley(&poly, config.p.unwrap_or(1.5), config.q, config.tol)
        }
    };
    match result {
        Ok(mut r) => {
            r.seed = seed;
            if r.rhs <= DEGENERATE_RHS {
                TrialOutcome::Skipped
            } else {
                TrialOutcome::Kept(r)
            }
        }
        // per-trial numeric failures are counted, not fatal
        Err(_) => TrialOutcome::Skipped,
    }
}

fn is_violation(inequality: Inequality, r: &TrialRecord) -> bool {
    if !inequality.constant_is_one() {
        return false;
    }
    let slack = VIOLATION_SLACK * r.rhs.abs().max(1.0) + RESIDUAL_MARGIN * r.residual;
    match inequality {
        // Parseval is an equality on polynomials
        Inequality::Bessel => (r.lhs - r.rhs).abs() > slack,
        _ => r.lhs > r.rhs + slack,
    }
}

/// Runs `trials` independent trials with per-trial seeds `base_seed + i`,
/// in parallel when a thread pool is available; the report is deterministic
/// for a given config.
pub fn run_campaign(config: &CampaignConfig) -> Result<InequalityReport, VerifyError> {
    validate(config)?;
    let seeds: Vec<u64> = (0..config.trials).map(|i| config.base_seed + i as u64).collect();
    let outcomes: Vec<TrialOutcome> = match config.threads {
        Some(1) => seeds.iter().map(|&s| run_trial(config, s)).collect(),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| VerifyError::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| {
                use rayon::prelude::*;
                seeds.par_iter().map(|&s| run_trial(config, s)).collect()
            })
        }
    };

    let mut records = Vec::new();
    let mut skipped = 0u32;
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Kept(r) => records.push(r),
            TrialOutcome::Skipped => skipped += 1,
        }
    }

    let mut violations = 0u32;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut mean_sum = 0.0;
    let mut comp = 0.0;
    for r in &records {
        if is_violation(config.inequality, r) {
            violations += 1;
        }
        max_ratio = max_ratio.max(r.ratio);
        let y = r.ratio - comp;
        let t = mean_sum + y;
        comp = (t - mean_sum) - y;
        mean_sum = t;
    }
    let kept = records.len() as u32;
    let mean_ratio = if kept > 0 { mean_sum / kept as f64 } else { 0.0 };
    let max_ratio = if kept > 0 { max_ratio } else { 0.0 };

    Ok(InequalityReport {
        name: config.inequality.name().to_string(),
        params: ReportParams { p: config.p, q: config.q, q_prime: conjugate(config.q) },
        trials: config.trials,
        skipped,
        violations,
        max_ratio,
        mean_ratio,
        empirical_constant: max_ratio,
        base_seed: config.base_seed,
        note: "evaluated on trigonometric polynomial representatives only".to_string(),
        records: config.keep_records.then_some(records),
    })
}

fn validate(config: &CampaignConfig) -> Result<(), VerifyError> {
    if config.trials == 0 {
        return Err(VerifyError::InvalidConfig("trials must be at least 1".into()));
    }
    match config.inequality {
        Inequality::HausdorffYoung if !(1.0..=2.0).contains(&config.q) => Err(
            VerifyError::InvalidConfig(format!("hausdorff_young needs q in [1,2], got {}", config.q)),
        ),
        Inequality::Paley if !(config.q > 1.0 && config.q <= 2.0) => Err(
            VerifyError::InvalidConfig(format!("paley needs q in (1,2], got {}", config.q)),
        ),
        Inequality::LorentzPaley => {
            let p = config.p.ok_or_else(|| {
                VerifyError::InvalidConfig("lorentz_paley needs --p in (1,2)".into())
            })?;
            if !(p > 1.0 && p < 2.0) {
                return Err(VerifyError::InvalidConfig(format!(
                    "lorentz_paley needs p in (1,2), got {p}"
                )));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// CSV export with the declared column order.
pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("seed,lhs,rhs,ratio,residual\n");
    for r in records {
        out.push_str(&format!("{},{},{},{},{}\n", r.seed, r.lhs, r.rhs, r.ratio, r.residual));
    }
    out
}
