//! The shift-invariant density charge γ on the line, restricted to the
//! carrier where its defining limit exists in the ordinary sense: q-periodic
//! interval sets modulo bounded perturbations. On this carrier γ evaluates
//! exactly as trace measure over period; combinations across incommensurable
//! periods are refused rather than approximated, because their density is
//! defined only through a non-constructive limit functional.
//!
//! Also provides the single-period machinery for periodic functions: the
//! distribution `γ_f(s) = λ({|f| > s} ∩ [0, q))/q` by scan-and-bisection, and
//! the mean `(1/2q)∫_{a-q}^{a+q} f` by adaptive quadrature.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::quad::adaptive_simpson;
use crate::rational::detect_rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("periods {a} and {b} are not commensurable: the density of the combination is outside the computable carrier")]
    IncommensurablePeriods { a: f64, b: f64 },
    #[error("scan grid too coarse: a cell of width {cell:.3e} hides a crossing")]
    GridTooCoarse { cell: f64 },
    #[error("quadrature failed to converge (best estimate {best:.6e})")]
    QuadratureFailure { best: f64 },
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("cannot parse set description: {0}")]
    Parse(String),
}

/// Half-open interval `[a, b)`.
pub type Interval = (f64, f64);

fn normalize(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.retain(|(a, b)| b > a);
    ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for (a, b) in ivs {
        match out.last_mut() {
            Some((_, prev_hi)) if a <= *prev_hi => {
                if b > *prev_hi {
                    *prev_hi = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

fn iv_union(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    normalize(a.iter().chain(b.iter()).copied().collect())
}

fn iv_intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 <= b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn iv_subtract(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        let mut lo = alo;
        for &(blo, bhi) in b {
            if bhi <= lo {
                continue;
            }
            if blo >= ahi {
                break;
            }
            if blo > lo {
                out.push((lo, blo));
            }
            lo = lo.max(bhi);
            if lo >= ahi {
                break;
            }
        }
        if ahi > lo {
            out.push((lo, ahi));
        }
    }
    normalize(out)
}

fn iv_measure(a: &[Interval]) -> f64 {
    a.iter().map(|(lo, hi)| hi - lo).sum()
}

fn iv_contains(a: &[Interval], x: f64) -> bool {
    a.iter().any(|&(lo, hi)| lo <= x && x < hi)
}

fn iv_span(a: &[Interval]) -> Option<(f64, f64)> {
    Some((a.first()?.0, a.last()?.1))
}

/// A q-periodic set, described by its trace on one period `[0, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSet {
    period: f64,
    trace: Vec<Interval>,
}

impl PeriodicSet {
    pub fn new(period: f64, trace: Vec<Interval>) -> Result<Self, DensityError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(DensityError::InvalidSet(format!("period must be positive, got {period}")));
        }
        let trace = normalize(trace);
        if trace.iter().any(|&(a, b)| a < 0.0 || b > period || !a.is_finite() || !b.is_finite()) {
            return Err(DensityError::InvalidSet(
                "trace intervals must lie within [0, period)".into(),
            ));
        }
        Ok(PeriodicSet { period, trace })
    }

    pub fn empty(period: f64) -> Result<Self, DensityError> {
        Self::new(period, Vec::new())
    }

    pub fn full(period: f64) -> Result<Self, DensityError> {
        Self::new(period, vec![(0.0, period)])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn trace(&self) -> &[Interval] {
        &self.trace
    }

    pub fn trace_measure(&self) -> f64 {
        iv_measure(&self.trace)
    }

    pub fn contains(&self, x: f64) -> bool {
        iv_contains(&self.trace, x.rem_euclid(self.period))
    }

    /// The set shifted by `h`: the trace rotates within the period.
    pub fn shift(&self, h: f64) -> Self {
        let q = self.period;
        let mut trace = Vec::with_capacity(self.trace.len() + 1);
        for &(a, b) in &self.trace {
            let start = (a + h).rem_euclid(q);
            let width = b - a;
            if start + width <= q {
                trace.push((start, start + width));
            } else {
                trace.push((start, q));
                trace.push((0.0, start + width - q));
            }
        }
        PeriodicSet { period: q, trace: normalize(trace) }
    }

    fn complement(&self) -> Self {
        PeriodicSet {
            period: self.period,
            trace: iv_subtract(&[(0.0, self.period)], &self.trace),
        }
    }

    /// Copies of the trace covering the window, clipped to it.
    fn tile_into(&self, lo: f64, hi: f64) -> Vec<Interval> {
        let q = self.period;
        let mut out = Vec::new();
        let mut k = (lo / q).floor();
        while k * q < hi {
            for &(a, b) in &self.trace {
                let (s, e) = (a + k * q, b + k * q);
                if e > lo && s < hi {
                    out.push((s.max(lo), e.min(hi)));
                }
            }
            k += 1.0;
        }
        normalize(out)
    }

    /// `λ(E ∩ [lo, hi))` in closed form: whole periods contribute the trace
    /// measure, edges are clipped exactly.
    fn measure_in(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let cumulative = |t: f64| {
            let k = (t / self.period).floor();
            let rem = t - k * self.period;
            k * self.trace_measure() + iv_measure(&iv_intersect(&self.trace, &[(0.0, rem)]))
        };
        cumulative(hi) - cumulative(lo)
    }

    /// Re-expresses the set over an integer multiple of its period.
    fn with_period_multiple(&self, copies: u64) -> Self {
        let mut trace = Vec::with_capacity(self.trace.len() * copies as usize);
        for k in 0..copies {
            let off = k as f64 * self.period;
            trace.extend(self.trace.iter().map(|&(a, b)| (a + off, b + off)));
        }
        PeriodicSet { period: self.period * copies as f64, trace: normalize(trace) }
    }
}

/// A member of the computable carrier of γ: a periodic set with intervals
/// adjoined (`plus`) and removed (`minus`). The perturbations are bounded,
/// hence density-null, so `γ` depends on the periodic part alone.
#[derive(Clone, Debug, PartialEq)]
pub struct DensitySet {
    periodic: PeriodicSet,
    plus: Vec<Interval>,
    minus: Vec<Interval>,
}

/// Numeric window profile of `λ(E ∩ [−τ, τ])/2τ` along a doubling ladder.
#[derive(Clone, Debug)]
pub struct DensityProfile {
    pub samples: Vec<(f64, f64)>,
    pub estimate: f64,
    pub residual: f64,
}

impl DensitySet {
    pub fn new(
        periodic: PeriodicSet,
        plus: Vec<Interval>,
        minus: Vec<Interval>,
    ) -> Result<Self, DensityError> {
        let check = |ivs: &[Interval]| {
            ivs.iter().all(|&(a, b)| a.is_finite() && b.is_finite())
        };
        let plus = normalize(plus);
        let minus = normalize(minus);
        if !check(&plus) || !check(&minus) {
            return Err(DensityError::InvalidSet("perturbations must be bounded intervals".into()));
        }
        // keep the perturbation lists disjoint: removal wins on overlaps
        let plus = iv_subtract(&plus, &minus);
        Ok(DensitySet { periodic, plus, minus })
    }

    pub fn from_periodic(periodic: PeriodicSet) -> Self {
        DensitySet { periodic, plus: Vec::new(), minus: Vec::new() }
    }

    /// The whole line.
    pub fn line() -> Self {
        Self::from_periodic(PeriodicSet::full(1.0).expect("unit period"))
    }

    /// A bounded set: empty periodic part plus the given intervals.
    pub fn bounded(intervals: Vec<Interval>) -> Result<Self, DensityError> {
        Self::new(PeriodicSet::empty(1.0)?, intervals, Vec::new())
    }

    pub fn periodic(&self) -> &PeriodicSet {
        &self.periodic
    }

    pub fn plus(&self) -> &[Interval] {
        &self.plus
    }

    pub fn minus(&self) -> &[Interval] {
        &self.minus
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.periodic.contains(x) || iv_contains(&self.plus, x)) && !iv_contains(&self.minus, x)
    }

    /// `γ(E)`: exact, perturbations ignored.
    pub fn gamma(&self) -> f64 {
        self.periodic.trace_measure() / self.periodic.period()
    }

    pub fn shift(&self, h: f64) -> Self {
        let translate =
            |ivs: &[Interval]| ivs.iter().map(|&(a, b)| (a + h, b + h)).collect::<Vec<_>>();
        DensitySet {
            periodic: self.periodic.shift(h),
            plus: translate(&self.plus),
            minus: translate(&self.minus),
        }
    }

    pub fn complement(&self) -> Self {
        DensitySet {
            periodic: self.periodic.complement(),
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
    }

    /// `λ(E ∩ [lo, hi))`, exact: closed form for the periodic bulk plus
    /// interval arithmetic on the bounded corrections.
    pub fn measure_in(&self, lo: f64, hi: f64) -> f64 {
        let mut measure = self.periodic.measure_in(lo, hi);
        if let Some((slo, shi)) = iv_span(&self.plus) {
            let tiles = self.periodic.tile_into(slo, shi);
            let extra = iv_subtract(&self.plus, &tiles);
            measure += iv_measure(&iv_intersect(&extra, &[(lo, hi)]));
        }
        if let Some((slo, shi)) = iv_span(&self.minus) {
            let tiles = self.periodic.tile_into(slo, shi);
            let removed = iv_intersect(&self.minus, &tiles);
            measure -= iv_measure(&iv_intersect(&removed, &[(lo, hi)]));
        }
        measure
    }

    pub fn union(&self, other: &DensitySet) -> Result<Self, DensityError> {
        self.binary_op(other, true)
    }

    pub fn intersect(&self, other: &DensitySet) -> Result<Self, DensityError> {
        self.binary_op(other, false)
    }

    fn binary_op(&self, other: &DensitySet, is_union: bool) -> Result<Self, DensityError> {
        let (q1, q2) = (self.periodic.period(), other.periodic.period());
        let (copies1, copies2) = common_period_copies(q1, q2)?;
        let p1 = self.periodic.with_period_multiple(copies1);
        let p2 = other.periodic.with_period_multiple(copies2);
        // the two expanded periods agree up to float noise; use the first
        let combined_trace = if is_union {
            iv_union(p1.trace(), p2.trace())
        } else {
            iv_intersect(p1.trace(), p2.trace())
        };
        let periodic = PeriodicSet::new(p1.period(), clamp_into(combined_trace, p1.period()))?;

        // bounded corrections: wherever either operand deviates from its
        // periodic part, resolve the true value of the combination pointwise
        let deviation_zone = iv_union(
            &iv_union(&self.plus, &self.minus),
            &iv_union(&other.plus, &other.minus),
        );
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for &(zlo, zhi) in &deviation_zone {
            let mut cuts: Vec<f64> = vec![zlo, zhi];
            for lists in [&self.plus, &self.minus, &other.plus, &other.minus] {
                for &(a, b) in lists.iter() {
                    if a > zlo && a < zhi {
                        cuts.push(a);
                    }
                    if b > zlo && b < zhi {
                        cuts.push(b);
                    }
                }
            }
            for set in [&self.periodic, &other.periodic] {
                for (a, b) in set.tile_into(zlo, zhi) {
                    if a > zlo && a < zhi {
                        cuts.push(a);
                    }
                    if b > zlo && b < zhi {
                        cuts.push(b);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let desired = if is_union {
                    self.contains(mid) || other.contains(mid)
                } else {
                    self.contains(mid) && other.contains(mid)
                };
                let base = periodic.contains(mid);
                if desired && !base {
                    plus.push((w[0], w[1]));
                } else if !desired && base {
                    minus.push((w[0], w[1]));
                }
            }
        }
        DensitySet::new(periodic, plus, minus)
    }

    /// Window-density ladder `τ_j = tau0 · 2^j`, `j = 0..=doublings`, with
    /// exact window measures.
    pub fn density_profile(&self, tau0: f64, doublings: u32) -> DensityProfile {
        let mut samples = Vec::with_capacity(doublings as usize + 1);
        for j in 0..=doublings {
            let tau = tau0 * 2f64.powi(j as i32);
            samples.push((tau, self.measure_in(-tau, tau) / (2.0 * tau)));
        }
        let estimate = samples.last().map_or(0.0, |s| s.1);
        let residual = if samples.len() >= 2 {
            (samples[samples.len() - 1].1 - samples[samples.len() - 2].1).abs()
        } else {
            0.0
        };
        DensityProfile { samples, estimate, residual }
    }
}

fn clamp_into(trace: Vec<Interval>, period: f64) -> Vec<Interval> {
    trace.into_iter().map(|(a, b)| (a.max(0.0), b.min(period))).collect()
}

/// How many copies of each period make a common one: `q1/q2 = num/den` gives
/// `den · q1 = num · q2`.
fn common_period_copies(q1: f64, q2: f64) -> Result<(u64, u64), DensityError> {
    if q1 == q2 {
        return Ok((1, 1));
    }
    let (num, den) = detect_rational(q1 / q2, 1_000_000, 1e-9)
        .filter(|(num, _)| *num > 0)
        .ok_or(DensityError::IncommensurablePeriods { a: q1, b: q2 })?;
    let num = num as u64;
    let common = den as f64 * q1;
    if (common - num as f64 * q2).abs() > 1e-9 * common.abs().max(1.0) {
        return Err(DensityError::IncommensurablePeriods { a: q1, b: q2 });
    }
    Ok((den, num))
}

impl fmt::Display for DensitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ivs = |list: &[Interval]| {
            list.iter().map(|(a, b)| format!("[{a},{b})")).collect::<String>()
        };
        write!(f, "period={};trace={}", self.periodic.period(), ivs(self.periodic.trace()))?;
        if !self.plus.is_empty() {
            write!(f, ";plus={}", ivs(&self.plus))?;
        }
        if !self.minus.is_empty() {
            write!(f, ";minus={}", ivs(&self.minus))?;
        }
        Ok(())
    }
}

fn parse_interval_list(s: &str) -> Result<Vec<Interval>, DensityError> {
    let s = s.trim();
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('[')
            .ok_or_else(|| DensityError::Parse(format!("expected '[' in interval list at {rest:?}")))?;
        let comma = open
            .find(',')
            .ok_or_else(|| DensityError::Parse("expected ',' in interval".into()))?;
        let close = open
            .find(')')
            .ok_or_else(|| DensityError::Parse("expected ')' in interval".into()))?;
        if close < comma {
            return Err(DensityError::Parse("malformed interval".into()));
        }
        let a: f64 = open[..comma]
            .trim()
            .parse()
            .map_err(|_| DensityError::Parse(format!("bad number {:?}", &open[..comma])))?;
        let b: f64 = open[comma + 1..close]
            .trim()
            .parse()
            .map_err(|_| DensityError::Parse(format!("bad number {:?}", &open[comma + 1..close])))?;
        out.push((a, b));
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}

impl FromStr for DensitySet {
    type Err = DensityError;

    /// Parses `period=<q>;trace=[a,b)[c,d);plus=[..];minus=[..]`. The `plus`
    /// and `minus` parts are optional; `trace=` may be empty.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut period: Option<f64> = None;
        let mut trace: Option<Vec<Interval>> = None;
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| DensityError::Parse(format!("expected key=value, got {part:?}")))?;
            match key.trim() {
                "period" => {
                    period = Some(value.trim().parse().map_err(|_| {
                        DensityError::Parse(format!("bad period {:?}", value.trim()))
                    })?)
                }
                "trace" => trace = Some(parse_interval_list(value)?),
                "plus" => plus = parse_interval_list(value)?,
                "minus" => minus = parse_interval_list(value)?,
                other => return Err(DensityError::Parse(format!("unknown key {other:?}"))),
            }
        }
        let period = period.ok_or_else(|| DensityError::Parse("missing period=".into()))?;
        let periodic = PeriodicSet::new(period, trace.unwrap_or_default())?;
        DensitySet::new(periodic, plus, minus)
    }
}

/// Measure of `{|f| > s} ∩ [lo, hi)` for each level, by uniform scan plus
/// bisection of each crossing to width `tol`. Midpoint samples guard against
/// crossings the grid cannot see.
pub(crate) fn measure_above<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    levels: &[f64],
    cells: u32,
    tol: f64,
) -> Result<Vec<f64>, DensityError> {
    let n = cells.max(2) as usize;
    let h = (hi - lo) / n as f64;
    let g = |x: f64| f(x).abs();
    let ends: Vec<f64> = (0..=n).map(|i| g(lo + i as f64 * h)).collect();
    let mids: Vec<f64> = (0..n).map(|i| g(lo + (i as f64 + 0.5) * h)).collect();

    let mut out = Vec::with_capacity(levels.len());
    for &s in levels {
        let mut above = 0.0;
        for i in 0..n {
            let x0 = lo + i as f64 * h;
            let xm = x0 + 0.5 * h;
            let x1 = x0 + h;
            let (a0, am, a1) = (ends[i] > s, mids[i] > s, ends[i + 1] > s);
            if a0 == a1 && am != a0 {
                // the midpoint proves at least two crossings inside one cell
                return Err(DensityError::GridTooCoarse { cell: h });
            }
            for (u, v, su, sv) in [(x0, xm, a0, am), (xm, x1, am, a1)] {
                if su == sv {
                    if su {
                        above += v - u;
                    }
                } else {
                    let c = bisect_crossing(&g, u, v, s, su, tol);
                    above += if su { c - u } else { v - c };
                }
            }
        }
        out.push(above);
    }
    Ok(out)
}

fn bisect_crossing<G: Fn(f64) -> f64>(
    g: &G,
    mut lo: f64,
    mut hi: f64,
    s: f64,
    lo_above: bool,
    tol: f64,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > s) == lo_above {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `γ_f(s) = λ({|f| > s} ∩ [0, q))/q` for a q-periodic `f`, accurate to
/// (number of crossings)·tol/q.
pub fn periodic_distribution<F: Fn(f64) -> f64>(
    f: F,
    period: f64,
    s: f64,
    grid: u32,
    tol: f64,
) -> Result<f64, DensityError> {
    Ok(measure_above(&f, 0.0, period, &[s], grid, tol)?[0] / period)
}

/// [`periodic_distribution`] evaluated at many levels from one scan.
pub fn distribution_levels<F: Fn(f64) -> f64>(
    f: F,
    period: f64,
    levels: &[f64],
    grid: u32,
    tol: f64,
) -> Result<Vec<f64>, DensityError> {
    Ok(measure_above(&f, 0.0, period, levels, grid, tol)?
        .into_iter()
        .map(|m| m / period)
        .collect())
}

/// `∫_ℝ f dγ = (1/2q) ∫_{a-q}^{a+q} f(x) dx` for an integrable q-periodic
/// `f`; the anchor `a` must not matter, which is a tested property.
pub fn periodic_integral<F: Fn(f64) -> f64>(
    f: F,
    period: f64,
    anchor: f64,
    tol: f64,
) -> Result<f64, DensityError> {
    let width = 2.0 * period;
    match adaptive_simpson(&f, anchor - period, anchor + period, tol * width, 48) {
        Ok(integral) => Ok(integral / width),
        Err(e) => Err(DensityError::QuadratureFailure { best: e.best / width }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn periodic(q: f64, trace: &[Interval]) -> DensitySet {
        DensitySet::from_periodic(PeriodicSet::new(q, trace.to_vec()).unwrap())
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(DensitySet::line().gamma(), 1.0);
        assert_eq!(DensitySet::bounded(vec![(5.0, 7.0)]).unwrap().gamma(), 0.0);
        assert_eq!(periodic(2.0, &[(0.0, 1.0)]).gamma(), 0.5);
    }

    #[test]
    fn complement_and_additivity() {
        let e = periodic(2.0, &[(0.0, 1.0)]);
        let c = e.complement();
        assert_eq!(c.periodic().trace(), &[(1.0, 2.0)]);
        assert_eq!(e.gamma() + c.gamma(), 1.0);
        let union = e.union(&c).unwrap();
        assert_eq!(union.gamma(), 1.0);
        assert!(e.intersect(&c).unwrap().gamma() == 0.0);
    }

    #[test]
    fn commensurable_intersection() {
        let e = periodic(2.0, &[(0.0, 1.0)]);
        let f = periodic(3.0, &[(0.0, 1.0)]);
        let both = e.intersect(&f).unwrap();
        assert_eq!(both.periodic().period(), 6.0);
        // traces tile to [0,1)∪[2,3)∪[4,5) and [0,1)∪[3,4): intersection [0,1)
        assert!((both.gamma() - 1.0 / 6.0).abs() < 1e-15);
        let profile = both.density_profile(3.0, 10);
        assert!((profile.estimate - both.gamma()).abs() <= profile.residual + 1e-3);
    }

    #[test]
    fn incommensurable_periods_are_refused() {
        let e = periodic(1.0, &[(0.0, 0.5)]);
        let f = periodic(2f64.sqrt(), &[(0.0, 0.5)]);
        assert!(matches!(
            e.union(&f),
            Err(DensityError::IncommensurablePeriods { .. })
        ));
    }

    #[test]
    fn union_with_bounded_corrections() {
        let e = DensitySet::new(
            PeriodicSet::new(2.0, vec![(0.0, 1.0)]).unwrap(),
            vec![(5.5, 6.5)],
            vec![(0.25, 0.5)],
        )
        .unwrap();
        let f = DensitySet::bounded(vec![(0.3, 0.4), (100.0, 101.0)]).unwrap();
        let u = e.union(&f).unwrap();
        for x in [0.1, 0.26, 0.31, 0.45, 0.6, 1.5, 5.7, 6.4, 100.5, 101.5, 102.3] {
            assert_eq!(u.contains(x), e.contains(x) || f.contains(x), "x = {x}");
        }
        assert_eq!(u.gamma(), e.gamma());

        let i = e.intersect(&f).unwrap();
        for x in [0.1, 0.26, 0.31, 0.35, 0.45, 5.7, 100.5, 102.3] {
            assert_eq!(i.contains(x), e.contains(x) && f.contains(x), "x = {x}");
        }
        assert_eq!(i.gamma(), 0.0);
    }

    #[test]
    fn shift_invariance_is_exact() {
        let e = DensitySet::new(
            PeriodicSet::new(2.0, vec![(0.25, 0.75), (1.5, 2.0)]).unwrap(),
            vec![(3.0, 4.0)],
            vec![(0.3, 0.4)],
        )
        .unwrap();
        for h in [0.5, -1.25, 7.75, 0.1] {
            assert_eq!(e.shift(h).gamma(), e.gamma());
        }
        // shifting moves membership accordingly
        let s = e.shift(0.5);
        for x in [0.0, 0.3, 0.7, 1.0, 1.6, 3.2, 4.4] {
            assert_eq!(s.contains(x + 0.5), e.contains(x), "x = {x}");
        }
    }

    #[test]
    fn density_profile_examples() {
        let evens = periodic(2.0, &[(0.0, 1.0)]);
        let p = evens.density_profile(1.0, 0);
        assert_eq!(p.samples, vec![(1.0, 0.5)]);

        let bounded = DensitySet::bounded(vec![(5.0, 7.0)]).unwrap();
        let p = bounded.density_profile(1.0, 12);
        assert_eq!(p.estimate, 2.0 / (2.0 * 4096.0));
        assert!(p.estimate < 1e-3);

        let line = DensitySet::line();
        for (_, v) in line.density_profile(1.0, 8).samples {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn profile_residual_bound() {
        // |λ(E∩[−τ,τ])/2τ − γ(E)| ≤ C/τ with C from the trace endpoints and
        // bounded perturbation lengths
        let e = DensitySet::new(
            PeriodicSet::new(3.0, vec![(0.5, 1.25), (2.0, 2.75)]).unwrap(),
            vec![(10.0, 12.5)],
            vec![(0.75, 1.0)],
        )
        .unwrap();
        let c = 4.0 * 3.0 + 2.5 + 0.25; // endpoints·period + perturbation mass
        let profile = e.density_profile(2.0, 12);
        for &(tau, v) in &profile.samples {
            assert!((v - e.gamma()).abs() <= c / tau, "tau = {tau}");
        }
        assert!((profile.estimate - e.gamma()).abs() <= c / 8192.0);
    }

    #[test]
    fn non_sigma_additivity_witness() {
        // each unit interval has density zero, their periodic union density one
        let mut partial = 0.0;
        for n in -50i32..50 {
            let cell = DensitySet::bounded(vec![(n as f64, n as f64 + 1.0)]).unwrap();
            partial += cell.gamma();
        }
        assert_eq!(partial, 0.0);
        let union = periodic(1.0, &[(0.0, 1.0)]);
        assert_eq!(union.gamma(), 1.0);
    }

    #[test]
    fn periodic_distribution_cosine() {
        let d = periodic_distribution(f64::cos, 2.0 * PI, 0.5, 4096, 1e-9).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-6, "{d}");
        assert_eq!(periodic_distribution(f64::cos, 2.0 * PI, 1.0, 4096, 1e-9).unwrap(), 0.0);
        let full = periodic_distribution(f64::cos, 2.0 * PI, 0.0, 4096, 1e-9).unwrap();
        assert!((full - 1.0).abs() < 1e-6);
    }

    #[test]
    fn periodic_integral_examples() {
        let m = periodic_integral(|x: f64| x.cos().abs(), 2.0 * PI, 0.0, 1e-10).unwrap();
        assert!((m - 2.0 / PI).abs() < 1e-9, "{m}");
        let one = periodic_integral(|_| 1.0, 2.0 * PI, 0.0, 1e-12).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let cancel = periodic_integral(f64::cos, 2.0 * PI, 0.0, 1e-12).unwrap();
        assert!(cancel.abs() < 1e-12);
    }

    #[test]
    fn periodic_integral_anchor_independence() {
        let reference = periodic_integral(|x: f64| x.cos().abs(), 2.0 * PI, 0.0, 1e-10).unwrap();
        for a in [0.3, -5.0, 17.0] {
            let m = periodic_integral(|x: f64| x.cos().abs(), 2.0 * PI, a, 1e-10).unwrap();
            assert!((m - reference).abs() < 1e-9, "anchor {a}");
        }
    }

    #[test]
    fn layer_cake_over_gamma() {
        // ∫|f| dγ = ∫_0^{sup|f|} γ_f(s) ds for periodic f
        let fs: [fn(f64) -> f64; 2] = [|x| x.cos(), |x| x.cos() + 0.5];
        for f in fs {
            let q = 2.0 * PI;
            let lhs = periodic_integral(move |x| f(x).abs(), q, 0.0, 1e-10).unwrap();
            let sup = 1.6;
            let n = 3000usize;
            let levels: Vec<f64> = (0..=n).map(|i| sup * i as f64 / n as f64).collect();
            let gammas = distribution_levels(f, q, &levels, 4096, 1e-9).unwrap();
            let mut rhs = 0.0;
            for i in 0..n {
                rhs += (gammas[i] + gammas[i + 1]) * 0.5 * (sup / n as f64);
            }
            assert!((lhs - rhs).abs() <= 1e-4, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn grid_too_coarse_detected() {
        // a narrow spike straddling a midpoint sample at coarse resolution
        let spike = |x: f64| if (x - 0.5625).abs() < 0.01 { 2.0 } else { 0.0 };
        let r = periodic_distribution(spike, 1.0, 1.0, 8, 1e-9);
        assert!(matches!(r, Err(DensityError::GridTooCoarse { .. })));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let e: DensitySet = "period=2;trace=[0,1)[1.5,1.75);plus=[8,9);minus=[0.25,0.5)"
            .parse()
            .unwrap();
        assert_eq!(e.periodic().period(), 2.0);
        assert_eq!(e.periodic().trace(), &[(0.0, 1.0), (1.5, 1.75)]);
        assert_eq!(e.plus(), &[(8.0, 9.0)]);
        assert_eq!(e.minus(), &[(0.25, 0.5)]);
        let text = e.to_string();
        let back: DensitySet = text.parse().unwrap();
        assert_eq!(back, e);

        let bare: DensitySet = "period=1;trace=".parse().unwrap();
        assert_eq!(bare.gamma(), 0.0);
        assert!("trace=[0,1)".parse::<DensitySet>().is_err());
        assert!("period=1;trace=[0,1".parse::<DensitySet>().is_err());
    }
}
