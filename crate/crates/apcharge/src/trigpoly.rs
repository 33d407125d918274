//! Almost periodic trigonometric polynomials `P(x) = Σ a_k e^{iη_k x}` with
//! real frequencies: exact term arithmetic and coefficient extraction,
//! Besicovitch means over the density charge, and Lorentz norms of `|P|`
//! against γ.
//!
//! Means take one of two routes: polynomials whose frequencies share a
//! rational lattice are averaged exactly over a single common period, and
//! everything else goes through windowed means on a doubling ladder whose
//! last gap is reported as the residual.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{distribution_levels, measure_above, DensityError};
use crate::lorentz::LorentzParams;
use crate::quad::adaptive_simpson;
use crate::rational::{detect_rational, gcd, lcm};

/// Frequencies closer than this merge into one term; coefficient queries
/// inside this window of two stored frequencies are ambiguous.
pub const FREQ_MERGE_TOL: f64 = 1e-12;

const WINDOW_TAU0: f64 = 64.0;
const WINDOW_DOUBLINGS: u32 = 8;
const SCAN_GRID: u32 = 4096;
const WINDOW_SCAN_GRID: u32 = 32768;
const CROSSING_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("frequency {eta} lies within the merge tolerance of two stored frequencies")]
    AmbiguousFrequency { eta: f64 },
    #[error("quadrature failed to converge (best estimate {best:.6e})")]
    QuadratureFailure { best: f64 },
    #[error("windowed mean residuals are growing (last {last:.3e})")]
    NotConverging { last: f64 },
    #[error("no common period and the windowed distribution did not converge (residual {residual:.3e})")]
    IncommensurableUnsupported { residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    re: f64,
    im: f64,
    freq: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<TermRepr>,
}

/// A finite list of `(frequency, coefficient)` pairs, frequencies strictly
/// increasing after canonical merge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", from = "PolyRepr")]
pub struct TrigPolynomial {
    terms: Vec<(f64, Complex64)>,
}

impl From<TrigPolynomial> for PolyRepr {
    fn from(p: TrigPolynomial) -> Self {
        PolyRepr {
            terms: p
                .terms
                .iter()
                .map(|(freq, a)| TermRepr { re: a.re, im: a.im, freq: *freq })
                .collect(),
        }
    }
}

impl From<PolyRepr> for TrigPolynomial {
    fn from(r: PolyRepr) -> Self {
        TrigPolynomial::new(
            r.terms.into_iter().map(|t| (t.freq, Complex64::new(t.re, t.im))).collect(),
        )
    }
}

impl TrigPolynomial {
    /// Sorts by frequency, merges terms closer than [`FREQ_MERGE_TOL`], and
    /// drops exactly-zero coefficients.
    pub fn new(mut terms: Vec<(f64, Complex64)>) -> Self {
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(terms.len());
        for (freq, a) in terms {
            match merged.last_mut() {
                Some((f0, a0)) if (freq - *f0).abs() <= FREQ_MERGE_TOL => *a0 += a,
                _ => merged.push((freq, a)),
            }
        }
        merged.retain(|(_, a)| a.norm_sqr() != 0.0);
        TrigPolynomial { terms: merged }
    }

    pub fn zero() -> Self {
        TrigPolynomial { terms: Vec::new() }
    }

    /// `c · e^{iηx}`.
    pub fn exponential(c: Complex64, eta: f64) -> Self {
        TrigPolynomial::new(vec![(eta, c)])
    }

    /// `2 a cos(ηx)` as `a e^{iηx} + a e^{-iηx}`.
    pub fn cosine(a: f64, eta: f64) -> Self {
        TrigPolynomial::new(vec![
            (eta, Complex64::new(a, 0.0)),
            (-eta, Complex64::new(a, 0.0)),
        ])
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|(f, _)| *f)
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.terms.iter().map(|(_, a)| *a).collect()
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (freq, a) in &self.terms {
            let phase = freq * x;
            sum += a * Complex64::new(phase.cos(), phase.sin());
        }
        sum
    }

    pub fn abs_at(&self, x: f64) -> f64 {
        self.evaluate(x).norm()
    }

    /// `Σ|a_k|`, an upper bound for `sup |P|`.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm()).sum()
    }

    pub fn add(&self, other: &TrigPolynomial) -> TrigPolynomial {
        TrigPolynomial::new(self.terms.iter().chain(other.terms.iter()).copied().collect())
    }

    pub fn scale(&self, c: Complex64) -> TrigPolynomial {
        TrigPolynomial::new(self.terms.iter().map(|(f, a)| (*f, c * a)).collect())
    }

    /// Product: convolves the frequency lists.
    pub fn mul(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (f1, a1) in &self.terms {
            for (f2, a2) in &other.terms {
                terms.push((f1 + f2, a1 * a2));
            }
        }
        TrigPolynomial::new(terms)
    }

    pub fn conj(&self) -> TrigPolynomial {
        TrigPolynomial::new(self.terms.iter().map(|(f, a)| (-f, a.conj())).collect())
    }

    /// The exact Besicovitch mean `lim (1/2τ)∫_{-τ}^{τ} P`: the coefficient
    /// at frequency zero.
    pub fn mean_value(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(f, _)| f.abs() <= FREQ_MERGE_TOL)
            .map_or(Complex64::new(0.0, 0.0), |(_, a)| *a)
    }

    /// `a(η; P)`: the stored coefficient at `η`, zero when absent.
    pub fn fourier_coefficient(&self, eta: f64) -> Result<Complex64, PolyError> {
        let matches: Vec<&(f64, Complex64)> = self
            .terms
            .iter()
            .filter(|(f, _)| (f - eta).abs() <= FREQ_MERGE_TOL)
            .collect();
        match matches.len() {
            0 => Ok(Complex64::new(0.0, 0.0)),
            1 => Ok(matches[0].1),
            _ => Err(PolyError::AmbiguousFrequency { eta }),
        }
    }

    /// `2π/ω` when every nonzero frequency is an integer multiple of a base
    /// `ω`; `None` when the frequencies are incommensurable. A constant
    /// polynomial gets the unit period `2π`.
    pub fn common_period(&self) -> Option<f64> {
        let freqs: Vec<f64> =
            self.frequencies().filter(|f| f.abs() > FREQ_MERGE_TOL).collect();
        let Some(&reference) = freqs.first() else {
            return Some(2.0 * std::f64::consts::PI);
        };
        let mut denominators: Vec<u64> = Vec::with_capacity(freqs.len());
        let mut ratios: Vec<i64> = Vec::with_capacity(freqs.len());
        for f in &freqs {
            let (num, den) = detect_rational(f / reference, 1_000_000, 1e-9)?;
            denominators.push(den);
            ratios.push(num);
        }
        let mut common_den: u64 = 1;
        for &d in &denominators {
            common_den = lcm(common_den, d)?;
            if common_den > 1_000_000_000 {
                return None;
            }
        }
        let multiples: Vec<i64> = ratios
            .iter()
            .zip(&denominators)
            .map(|(num, den)| num * (common_den / den) as i64)
            .collect();
        let g = multiples.iter().fold(0u64, |acc, m| gcd(acc, m.unsigned_abs()));
        let omega = reference / common_den as f64 * g.max(1) as f64;
        // verify the lattice actually reproduces the frequencies
        for f in &freqs {
            let n = (f / omega).round();
            if (f - n * omega).abs() > 1e-9 * f.abs().max(1.0) {
                return None;
            }
        }
        Some(2.0 * std::f64::consts::PI / omega.abs())
    }
}

impl fmt::Display for TrigPolynomial {
    /// The text format `re,im@freq;re,im@freq;…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (freq, a) in &self.terms {
            if !first {
                write!(f, ";")?;
            }
            write!(f, "{},{}@{}", a.re, a.im, freq)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for TrigPolynomial {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(TrigPolynomial::zero());
        }
        let mut terms = Vec::new();
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (coeff, freq) = part
                .split_once('@')
                .ok_or_else(|| PolyError::Parse(format!("expected re,im@freq, got {part:?}")))?;
            let (re, im) = coeff
                .split_once(',')
                .ok_or_else(|| PolyError::Parse(format!("expected re,im in {coeff:?}")))?;
            let re: f64 =
                re.trim().parse().map_err(|_| PolyError::Parse(format!("bad number {re:?}")))?;
            let im: f64 =
                im.trim().parse().map_err(|_| PolyError::Parse(format!("bad number {im:?}")))?;
            let freq: f64 = freq
                .trim()
                .parse()
                .map_err(|_| PolyError::Parse(format!("bad frequency {freq:?}")))?;
            terms.push((freq, Complex64::new(re, im)));
        }
        Ok(TrigPolynomial::new(terms))
    }
}

/// A window-mean or single-period estimate. `exact` marks the closed-form
/// routes (a single period, or a structurally constant modulus), where no
/// limit residual remains; numerical tolerances are the caller's.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    pub exact: bool,
    pub residual: f64,
}

/// Mean over one period by the endpoint-identified trapezoid rule with
/// doubling: spectrally accurate for smooth periodic integrands and exact
/// for trigonometric polynomials once the sample count clears the bandwidth
/// `min_harmonics`.
fn periodic_mean<F: Fn(f64) -> f64>(
    g: &F,
    period: f64,
    min_harmonics: usize,
    tol: f64,
) -> Result<f64, PolyError> {
    let mut n = (2 * min_harmonics + 2).next_power_of_two().max(64);
    if n > (1 << 22) {
        return Err(PolyError::InvalidParams(
            "period too long for its bandwidth; use the windowed route".into(),
        ));
    }
    let kahan_sum = |count: usize, offset: f64, step: f64| {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for i in 0..count {
            let y = g(offset + i as f64 * step) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    };
    let mut sum = kahan_sum(n, 0.0, period / n as f64);
    let mut mean = sum / n as f64;
    loop {
        let step = period / (2 * n) as f64;
        sum += kahan_sum(n, step, 2.0 * step);
        n *= 2;
        let refined = sum / n as f64;
        let gap = (refined - mean).abs();
        mean = refined;
        if gap <= tol {
            return Ok(mean);
        }
        if n > (1 << 22) {
            return Err(PolyError::QuadratureFailure { best: mean });
        }
    }
}

/// `(1/2τ)∫_{-τ}^{τ} g` along the doubling ladder `τ_j = tau0 · 2^j`,
/// reporting the last gap as the residual.
pub fn windowed_mean<F: Fn(f64) -> f64>(
    g: F,
    tau0: f64,
    doublings: u32,
    tol: f64,
) -> Result<MeanEstimate, PolyError> {
    if !(tau0 > 0.0) {
        return Err(PolyError::InvalidParams(format!("tau0 must be positive, got {tau0}")));
    }
    let mut means = Vec::with_capacity(doublings as usize + 1);
    for j in 0..=doublings {
        let tau = tau0 * 2f64.powi(j as i32);
        let integral = adaptive_simpson(&g, -tau, tau, (tol / 4.0) * 2.0 * tau, 48)
            .map_err(|e| PolyError::QuadratureFailure { best: e.best / (2.0 * tau) })?;
        means.push(integral / (2.0 * tau));
    }
    let residuals: Vec<f64> =
        means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if residuals.len() >= 3 {
        let n = residuals.len();
        // window means of almost periodic functions converge with an
        // oscillating residual, so growth alone is not divergence; flag only
        // when the growing residuals end at an all-time high
        let earlier_max = residuals[..n - 2].iter().fold(0.0f64, |a, &b| a.max(b));
        if residuals[n - 1] > residuals[n - 2]
            && residuals[n - 2] > residuals[n - 3]
            && residuals[n - 1] > earlier_max
        {
            return Err(PolyError::NotConverging { last: residuals[n - 1] });
        }
    }
    Ok(MeanEstimate {
        value: *means.last().unwrap(),
        exact: false,
        residual: residuals.last().copied().unwrap_or(0.0),
    })
}

impl TrigPolynomial {
    /// The Besicovitch mean `∫_ℝ |P|^q dγ`: a single-period average when a
    /// common period exists, a windowed mean otherwise.
    pub fn abs_pow_mean(&self, q: f64, tol: f64) -> Result<MeanEstimate, PolyError> {
        if !(q > 0.0) {
            return Err(PolyError::InvalidParams(format!("q must be positive, got {q}")));
        }
        if self.terms.is_empty() {
            return Ok(MeanEstimate { value: 0.0, exact: true, residual: 0.0 });
        }
        if self.terms.len() == 1 {
            // |P| is constant
            return Ok(MeanEstimate {
                value: self.terms[0].1.norm().powf(q),
                exact: true,
                residual: 0.0,
            });
        }
        let g = |x: f64| self.abs_at(x).powf(q);
        match self.common_period() {
            Some(period) => {
                let integral = adaptive_simpson(&g, 0.0, period, tol * period, 48)
                    .map_err(|e| PolyError::QuadratureFailure { best: e.best / period })?;
                Ok(MeanEstimate { value: integral / period, exact: true, residual: 0.0 })
            }
            None => windowed_mean(g, WINDOW_TAU0, WINDOW_DOUBLINGS, tol),
        }
    }

    /// `‖P‖_{B^q} = (∫|P|^q dγ)^{1/q}`.
    pub fn b_norm(&self, q: f64, tol: f64) -> Result<MeanEstimate, PolyError> {
        let mean = self.abs_pow_mean(q, tol)?;
        let value = mean.value.max(0.0).powf(1.0 / q);
        let residual = if mean.value > 0.0 {
            mean.residual * value / (q * mean.value)
        } else {
            mean.residual.powf(1.0 / q)
        };
        Ok(MeanEstimate { value, exact: mean.exact, residual })
    }

    /// Tabulates `γ_{|P|}(s)` and returns it with the level grid; the grid
    /// clusters near `0` and near `Σ|a_k|`.
    fn gamma_distribution(
        &self,
        levels: &[f64],
        tol: f64,
    ) -> Result<(Vec<f64>, f64), PolyError> {
        match self.common_period() {
            Some(period) => {
                let g =
                    distribution_levels(|x| self.abs_at(x), period, levels, SCAN_GRID, CROSSING_TOL)?;
                Ok((g, CROSSING_TOL * SCAN_GRID as f64 / period))
            }
            None => {
                let mut prev: Option<Vec<f64>> = None;
                let mut residual = f64::INFINITY;
                let mut current = Vec::new();
                for j in 0..=4u32 {
                    let tau = WINDOW_TAU0 * 2f64.powi(j as i32);
                    let m = measure_above(
                        &|x| self.abs_at(x),
                        -tau,
                        tau,
                        levels,
                        WINDOW_SCAN_GRID,
                        CROSSING_TOL,
                    )?;
                    current = m.into_iter().map(|v| v / (2.0 * tau)).collect();
                    if let Some(p) = &prev {
                        residual = current
                            .iter()
                            .zip(p.iter())
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                    }
                    prev = Some(current.clone());
                }
                if residual > tol.max(0.05) {
                    return Err(PolyError::IncommensurableUnsupported { residual });
                }
                Ok((current, residual))
            }
        }
    }

    /// `‖P‖_{L^{p,q}(γ)}` from the tabulated distribution of `|P|`: the
    /// trapezoid rule on `p γ(s)^{q/p} s^{q-1}` over `[0, Σ|a_k|]`, with the
    /// head segment handled in closed form so small `q` stays integrable.
    pub fn lorentz_gamma_norm(
        &self,
        params: LorentzParams,
        grid: u32,
        tol: f64,
    ) -> Result<MeanEstimate, PolyError> {
        let sup = self.coeff_abs_sum();
        if sup == 0.0 {
            return Ok(MeanEstimate { value: 0.0, exact: true, residual: 0.0 });
        }
        let n = grid.max(16) as usize;
        // smoothstep spacing clusters levels at both ends, where the
        // distribution of a trigonometric polynomial has square-root edges
        let levels: Vec<f64> = (1..n)
            .map(|i| {
                let u = i as f64 / n as f64;
                sup * u * u * (3.0 - 2.0 * u)
            })
            .collect();
        let (gammas, dist_residual) = self.gamma_distribution(&levels, tol)?;

        let value_from = |stride: usize| -> f64 {
            let (p, q) = (params.p(), params.q());
            let nodes: Vec<(f64, f64)> = levels
                .iter()
                .zip(gammas.iter())
                .enumerate()
                .filter(|(i, _)| i % stride == 0)
                .map(|(_, (s, g))| (*s, *g))
                .collect();
            if params.q_is_infinite() {
                return nodes.iter().map(|(s, g)| s * g.powf(1.0 / p)).fold(0.0, f64::max);
            }
            let mut integral = 0.0;
            // [0, s_1] with γ frozen at its first tabulated value
            if let Some(&(s1, g1)) = nodes.first() {
                integral += g1.powf(q / p) * s1.powf(q) / q;
            }
            let weight = |s: f64, g: f64| g.powf(q / p) * s.powf(q - 1.0);
            for w in nodes.windows(2) {
                let (s0, g0) = w[0];
                let (s1, g1) = w[1];
                integral += 0.5 * (weight(s0, g0) + weight(s1, g1)) * (s1 - s0);
            }
            // [s_n, sup] down to γ = 0
            if let Some(&(sn, gn)) = nodes.last() {
                integral += 0.5 * weight(sn, gn) * (sup - sn);
            }
            (p * integral).powf(1.0 / q)
        };

        let value = value_from(1);
        let residual = (value - value_from(2)).abs() + dist_residual;
        Ok(MeanEstimate { value, exact: false, residual })
    }
}
