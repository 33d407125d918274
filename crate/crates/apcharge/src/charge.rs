//! Fields of sets, finitely additive charges, simple functions, and the
//! closed-form machinery attached to them: integration, distribution
//! functions, the `F(Ω)` semi-metric, and layer-cake identities.
//!
//! Two carriers are supported: the power set of a finite atom list, and the
//! field of finite and co-finite subsets of the positive integers. On both,
//! every representable set lies in the field, so the outer charge coincides
//! with the charge itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChargeError {
    #[error("set expressions belong to different field variants")]
    FieldMismatch,
    #[error("simple function terms are not pairwise disjoint")]
    NotDisjoint,
    #[error("invalid charge: {0}")]
    InvalidCharge(String),
    #[error("invalid step distribution: {0}")]
    InvalidDistribution(String),
}

/// The two fields of sets the crate computes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOfSets {
    /// Power set of atoms `0..atom_count`.
    FinitePowerSet { atom_count: u64 },
    /// Finite and co-finite subsets of ℕ = {1, 2, ...}.
    FiniteCofinite,
}

/// A member of one of the two supported fields, in canonical form: the
/// explicit point list is sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetExpr {
    /// Subset of the atoms of a finite power set.
    Atoms(Vec<u64>),
    /// Finite subset of ℕ.
    Finite(Vec<u64>),
    /// Complement in ℕ of the listed finite set.
    Cofinite(Vec<u64>),
}

fn canonical(mut pts: Vec<u64>) -> Vec<u64> {
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn merge_union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    canonical(out)
}

fn merge_intersection(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().filter(|x| b.binary_search(x).is_ok()).copied().collect()
}

fn merge_difference(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().filter(|x| b.binary_search(x).is_err()).copied().collect()
}

impl SetExpr {
    pub fn atoms<I: IntoIterator<Item = u64>>(pts: I) -> Self {
        SetExpr::Atoms(canonical(pts.into_iter().collect()))
    }

    pub fn finite<I: IntoIterator<Item = u64>>(pts: I) -> Self {
        SetExpr::Finite(canonical(pts.into_iter().collect()))
    }

    pub fn cofinite<I: IntoIterator<Item = u64>>(excluded: I) -> Self {
        SetExpr::Cofinite(canonical(excluded.into_iter().collect()))
    }

    pub fn empty(field: FieldOfSets) -> Self {
        match field {
            FieldOfSets::FinitePowerSet { .. } => SetExpr::Atoms(Vec::new()),
            FieldOfSets::FiniteCofinite => SetExpr::Finite(Vec::new()),
        }
    }

    pub fn universe(field: FieldOfSets) -> Self {
        match field {
            FieldOfSets::FinitePowerSet { atom_count } => {
                SetExpr::Atoms((0..atom_count).collect())
            }
            FieldOfSets::FiniteCofinite => SetExpr::Cofinite(Vec::new()),
        }
    }

    fn same_variant(&self, other: &SetExpr) -> bool {
        matches!(
            (self, other),
            (SetExpr::Atoms(_), SetExpr::Atoms(_))
                | (SetExpr::Finite(_) | SetExpr::Cofinite(_), SetExpr::Finite(_) | SetExpr::Cofinite(_))
        )
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetExpr::Atoms(v) | SetExpr::Finite(v) => v.is_empty(),
            SetExpr::Cofinite(_) => false,
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        match self {
            SetExpr::Atoms(v) | SetExpr::Finite(v) => v.binary_search(&x).is_ok(),
            SetExpr::Cofinite(v) => v.binary_search(&x).is_err(),
        }
    }

    pub fn union(&self, other: &SetExpr) -> Result<SetExpr, ChargeError> {
        if !self.same_variant(other) {
            return Err(ChargeError::FieldMismatch);
        }
        Ok(match (self, other) {
            (SetExpr::Atoms(a), SetExpr::Atoms(b)) => SetExpr::Atoms(merge_union(a, b)),
            (SetExpr::Finite(a), SetExpr::Finite(b)) => SetExpr::Finite(merge_union(a, b)),
            (SetExpr::Finite(f), SetExpr::Cofinite(c))
            | (SetExpr::Cofinite(c), SetExpr::Finite(f)) => {
                SetExpr::Cofinite(merge_difference(c, f))
            }
            (SetExpr::Cofinite(a), SetExpr::Cofinite(b)) => {
                SetExpr::Cofinite(merge_intersection(a, b))
            }
            _ => unreachable!(),
        })
    }

    pub fn intersect(&self, other: &SetExpr) -> Result<SetExpr, ChargeError> {
        if !self.same_variant(other) {
            return Err(ChargeError::FieldMismatch);
        }
        Ok(match (self, other) {
            (SetExpr::Atoms(a), SetExpr::Atoms(b)) => SetExpr::Atoms(merge_intersection(a, b)),
            (SetExpr::Finite(a), SetExpr::Finite(b)) => SetExpr::Finite(merge_intersection(a, b)),
            (SetExpr::Finite(f), SetExpr::Cofinite(c))
            | (SetExpr::Cofinite(c), SetExpr::Finite(f)) => {
                SetExpr::Finite(merge_difference(f, c))
            }
            (SetExpr::Cofinite(a), SetExpr::Cofinite(b)) => SetExpr::Cofinite(merge_union(a, b)),
            _ => unreachable!(),
        })
    }

    pub fn difference(&self, other: &SetExpr) -> Result<SetExpr, ChargeError> {
        if !self.same_variant(other) {
            return Err(ChargeError::FieldMismatch);
        }
        Ok(match (self, other) {
            (SetExpr::Atoms(a), SetExpr::Atoms(b)) => SetExpr::Atoms(merge_difference(a, b)),
            (SetExpr::Finite(a), SetExpr::Finite(b)) => SetExpr::Finite(merge_difference(a, b)),
            (SetExpr::Finite(f), SetExpr::Cofinite(c)) => {
                SetExpr::Finite(merge_intersection(f, c))
            }
            (SetExpr::Cofinite(c), SetExpr::Finite(f)) => SetExpr::Cofinite(merge_union(c, f)),
            (SetExpr::Cofinite(a), SetExpr::Cofinite(b)) => {
                SetExpr::Finite(merge_difference(b, a))
            }
            _ => unreachable!(),
        })
    }

    pub fn complement(&self, field: FieldOfSets) -> Result<SetExpr, ChargeError> {
        match (self, field) {
            (SetExpr::Atoms(a), FieldOfSets::FinitePowerSet { atom_count }) => Ok(SetExpr::Atoms(
                (0..atom_count).filter(|x| a.binary_search(x).is_err()).collect(),
            )),
            (SetExpr::Finite(v), FieldOfSets::FiniteCofinite) => Ok(SetExpr::Cofinite(v.clone())),
            (SetExpr::Cofinite(v), FieldOfSets::FiniteCofinite) => Ok(SetExpr::Finite(v.clone())),
            _ => Err(ChargeError::FieldMismatch),
        }
    }
}

/// Point weights of a finite/co-finite charge. The weight sum over all of ℕ
/// must be available in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CofiniteWeights {
    /// `w_n = ratio^n`, `0 < ratio < 1`. The dyadic weights `2^{-n}` are
    /// `ratio = 0.5`.
    Geometric { ratio: f64 },
    /// `w_n = values[n - 1]` for `n` up to the list length, zero beyond.
    Finite { values: Vec<f64> },
}

impl CofiniteWeights {
    pub fn point_mass(&self, n: u64) -> f64 {
        match self {
            CofiniteWeights::Geometric { ratio } => {
                if n == 0 {
                    0.0
                } else {
                    ratio.powi(n as i32)
                }
            }
            CofiniteWeights::Finite { values } => {
                if n == 0 || n as usize > values.len() {
                    0.0
                } else {
                    values[n as usize - 1]
                }
            }
        }
    }

    fn mass_of(&self, pts: &[u64]) -> f64 {
        pts.iter().map(|&n| self.point_mass(n)).sum()
    }

    /// Closed-form value of `Σ_{n ≥ 1} w_n`.
    pub fn point_mass_sum(&self) -> f64 {
        match self {
            CofiniteWeights::Geometric { ratio } => ratio / (1.0 - ratio),
            CofiniteWeights::Finite { values } => values.iter().sum(),
        }
    }
}

/// A finitely additive charge on one of the two supported fields.
///
/// Serializes to/from `{"variant": ..., "atom_weights": ...}` or
/// `{"variant": ..., "weights": ..., "total_mass": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Charge {
    FinitePowerSet {
        atom_weights: Vec<f64>,
    },
    /// `μ(F) = Σ_{n∈F} w_n` for finite `F`, `μ(ℕ∖F) = total_mass − Σ_{n∈F} w_n`.
    /// `total_mass` may exceed `Σ w_n`; the excess is the charge the field
    /// sees "at infinity".
    FiniteCofinite {
        weights: CofiniteWeights,
        total_mass: f64,
    },
}

impl Charge {
    /// Uniform weight on each of `n` atoms.
    pub fn uniform_atoms(n: u64, weight: f64) -> Self {
        Charge::FinitePowerSet { atom_weights: vec![weight; n as usize] }
    }

    /// The finite/co-finite charge with `w_n = ratio^n` and the given total.
    pub fn cofinite_geometric(ratio: f64, total_mass: f64) -> Self {
        Charge::FiniteCofinite { weights: CofiniteWeights::Geometric { ratio }, total_mass }
    }

    pub fn field(&self) -> FieldOfSets {
        match self {
            Charge::FinitePowerSet { atom_weights } => {
                FieldOfSets::FinitePowerSet { atom_count: atom_weights.len() as u64 }
            }
            Charge::FiniteCofinite { .. } => FieldOfSets::FiniteCofinite,
        }
    }

    pub fn validate(&self) -> Result<(), ChargeError> {
        match self {
            Charge::FinitePowerSet { atom_weights } => {
                if atom_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(ChargeError::InvalidCharge(
                        "atom weights must be finite and nonnegative".into(),
                    ));
                }
            }
            Charge::FiniteCofinite { weights, total_mass } => {
                if let CofiniteWeights::Geometric { ratio } = weights {
                    if !(*ratio > 0.0 && *ratio < 1.0) {
                        return Err(ChargeError::InvalidCharge(
                            "geometric ratio must lie in (0, 1)".into(),
                        ));
                    }
                }
                if let CofiniteWeights::Finite { values } = weights {
                    if values.iter().any(|w| !w.is_finite() || *w < 0.0) {
                        return Err(ChargeError::InvalidCharge(
                            "point weights must be finite and nonnegative".into(),
                        ));
                    }
                }
                if !total_mass.is_finite() || *total_mass < weights.point_mass_sum() - 1e-12 {
                    return Err(ChargeError::InvalidCharge(
                        "total mass must be finite and at least the point mass sum".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Charge of a field member.
    pub fn value(&self, e: &SetExpr) -> Result<f64, ChargeError> {
        match (self, e) {
            (Charge::FinitePowerSet { atom_weights }, SetExpr::Atoms(pts)) => Ok(pts
                .iter()
                .map(|&a| atom_weights.get(a as usize).copied().unwrap_or(0.0))
                .sum()),
            (Charge::FiniteCofinite { weights, .. }, SetExpr::Finite(pts)) => {
                Ok(weights.mass_of(pts))
            }
            (Charge::FiniteCofinite { weights, total_mass }, SetExpr::Cofinite(pts)) => {
                Ok(total_mass - weights.mass_of(pts))
            }
            _ => Err(ChargeError::FieldMismatch),
        }
    }

    /// Outer charge `μ*(E) = inf{μ(F) : E ⊆ F, F in the field}`. Every
    /// representable set already lies in the field, so this is `μ(E)`.
    pub fn outer_charge(&self, e: &SetExpr) -> Result<f64, ChargeError> {
        self.value(e)
    }

    pub fn total(&self) -> f64 {
        match self {
            Charge::FinitePowerSet { atom_weights } => atom_weights.iter().sum(),
            Charge::FiniteCofinite { total_mass, .. } => *total_mass,
        }
    }
}

/// Pointwise binary operations on simple functions, evaluated on the common
/// refinement of their partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointwiseOp {
    Max,
    Min,
    Add,
    Sub,
    Mul,
}

impl PointwiseOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            PointwiseOp::Max => a.max(b),
            PointwiseOp::Min => a.min(b),
            PointwiseOp::Add => a + b,
            PointwiseOp::Sub => a - b,
            PointwiseOp::Mul => a * b,
        }
    }
}

/// A simple function `Σ β_j I_{E_j}` with pairwise disjoint `E_j`, held in
/// canonical form: distinct nonzero values, one (merged) set per value,
/// terms sorted by value.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    terms: Vec<(f64, SetExpr)>,
}

impl SimpleFunction {
    /// Builds a simple function from value/set terms. The sets must be
    /// pairwise disjoint and of one field variant; the result is
    /// canonicalized.
    pub fn new(terms: Vec<(f64, SetExpr)>) -> Result<Self, ChargeError> {
        let live: Vec<&SetExpr> =
            terms.iter().filter(|(v, e)| *v != 0.0 && !e.is_empty()).map(|(_, e)| e).collect();
        for i in 1..live.len() {
            if !live[0].same_variant(live[i]) {
                return Err(ChargeError::FieldMismatch);
            }
        }
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                if !live[i].intersect(live[j])?.is_empty() {
                    return Err(ChargeError::NotDisjoint);
                }
            }
        }
        Ok(Self::canonicalized(terms))
    }

    fn canonicalized(terms: Vec<(f64, SetExpr)>) -> Self {
        let mut live: Vec<(f64, SetExpr)> =
            terms.into_iter().filter(|(v, e)| *v != 0.0 && !e.is_empty()).collect();
        live.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, SetExpr)> = Vec::with_capacity(live.len());
        for (v, e) in live {
            match merged.last_mut() {
                Some((last_v, last_e)) if *last_v == v => {
                    *last_e = last_e.union(&e).expect("same variant by construction");
                }
                _ => merged.push((v, e)),
            }
        }
        SimpleFunction { terms: merged }
    }

    pub fn zero() -> Self {
        SimpleFunction { terms: Vec::new() }
    }

    pub fn indicator(set: SetExpr) -> Self {
        Self::canonicalized(vec![(1.0, set)])
    }

    pub fn scaled_indicator(value: f64, set: SetExpr) -> Self {
        Self::canonicalized(vec![(value, set)])
    }

    pub fn terms(&self) -> &[(f64, SetExpr)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, x: u64) -> f64 {
        self.terms.iter().find(|(_, e)| e.contains(x)).map_or(0.0, |(v, _)| *v)
    }

    /// Union of the nonzero level sets, `None` when the function is zero.
    pub fn support(&self) -> Option<SetExpr> {
        let mut it = self.terms.iter();
        let first = it.next()?.1.clone();
        Some(it.fold(first, |acc, (_, e)| acc.union(e).expect("same variant")))
    }

    /// The set `{|f| > t}`; `None` means the empty set.
    pub fn level_set(&self, t: f64) -> Option<SetExpr> {
        let mut out: Option<SetExpr> = None;
        for (v, e) in &self.terms {
            if v.abs() > t {
                out = Some(match out {
                    None => e.clone(),
                    Some(acc) => acc.union(e).expect("same variant"),
                });
            }
        }
        out
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::canonicalized(self.terms.iter().map(|(v, e)| (f(*v), e.clone())).collect())
    }

    pub fn abs(&self) -> Self {
        self.map_values(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_values(|v| c * v)
    }

    /// `f⁻ = max(−f, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map_values(|v| (-v).max(0.0))
    }

    pub fn positive_part(&self) -> Self {
        self.map_values(|v| v.max(0.0))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(|(v, _)| *v >= 0.0)
    }

    pub fn is_nonpositive(&self) -> bool {
        self.terms.iter().all(|(v, _)| *v <= 0.0)
    }

    /// Pointwise combination on the common refinement of the two partitions.
    pub fn combine(&self, other: &SimpleFunction, op: PointwiseOp) -> Result<Self, ChargeError> {
        let mut cells: Vec<(f64, SetExpr)> = Vec::new();
        for (a, e) in &self.terms {
            let mut rem = e.clone();
            for (b, f) in &other.terms {
                let inter = e.intersect(f)?;
                if !inter.is_empty() {
                    cells.push((op.apply(*a, *b), inter));
                }
                rem = rem.difference(f)?;
                if rem.is_empty() {
                    break;
                }
            }
            if !rem.is_empty() {
                cells.push((op.apply(*a, 0.0), rem));
            }
        }
        let self_support = self.support();
        for (b, f) in &other.terms {
            let rem = match &self_support {
                Some(s) => f.difference(s)?,
                None => f.clone(),
            };
            if !rem.is_empty() {
                cells.push((op.apply(0.0, *b), rem));
            }
        }
        Ok(Self::canonicalized(cells))
    }
}

/// A decreasing, right-continuous step function `t ↦ μ_f(t)`: the carrier of
/// every closed-form Lorentz norm in the crate.
///
/// `values[i]` is taken on `[breakpoints[i], breakpoints[i+1])`; the function
/// vanishes past the last breakpoint. `breakpoints[0] = 0` always.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDistribution {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepDistribution {
    /// Builds from `(t_i, c_i)` pairs meaning "value `c_i` on
    /// `[t_{i-1}, t_i)`" with `t_0 = 0` implicit. Requires `t` strictly
    /// increasing and positive, `c` nonincreasing and nonnegative. Steps with
    /// zero value are dropped and equal adjacent values merged.
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self, ChargeError> {
        let mut prev_t = 0.0;
        let mut prev_c = f64::INFINITY;
        for &(t, c) in &steps {
            if !(t.is_finite() && t > prev_t) {
                return Err(ChargeError::InvalidDistribution(
                    "breakpoints must be finite, positive, strictly increasing".into(),
                ));
            }
            if !(c.is_finite() && c >= 0.0 && c <= prev_c) {
                return Err(ChargeError::InvalidDistribution(
                    "values must be finite, nonnegative, nonincreasing".into(),
                ));
            }
            prev_t = t;
            prev_c = c;
        }
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for (t, c) in steps {
            if c == 0.0 {
                break; // zeros form a suffix; the function already vanishes
            }
            if values.last() == Some(&c) {
                *breakpoints.last_mut().unwrap() = t;
            } else {
                breakpoints.push(t);
                values.push(c);
            }
        }
        Ok(StepDistribution { breakpoints, values })
    }

    pub fn empty() -> Self {
        StepDistribution { breakpoints: vec![0.0], values: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        // partition_point: first breakpoint strictly above t
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 || idx > self.values.len() {
            if idx == 0 {
                self.values.first().copied().unwrap_or(0.0)
            } else {
                0.0
            }
        } else {
            self.values[idx - 1]
        }
    }

    /// Iterates the constancy cells as `(lo, hi, value)`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.breakpoints[i], self.breakpoints[i + 1], c))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_breakpoint(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// `∫_0^∞ μ_f(t) dt` as a finite sum.
    pub fn total_integral(&self) -> f64 {
        self.steps().map(|(lo, hi, c)| c * (hi - lo)).sum()
    }

    /// `min(1, inf_{a>0} max(a, μ_f(a)))`. The infimum is attained where the
    /// identity line crosses the step graph, so a single scan suffices.
    pub fn f_metric_value(&self) -> f64 {
        for (lo, hi, c) in self.steps() {
            if c < hi {
                return lo.max(c).min(1.0);
            }
        }
        self.max_breakpoint().min(1.0)
    }

    /// `∫_lower^∞ |d₁(t)^r − d₂(t)^r| t^{q-1} dt` on the merged cell
    /// decomposition; exact because both functions are piecewise constant.
    pub fn abs_pow_diff_integral(&self, other: &StepDistribution, r: f64, q: f64, lower: f64) -> f64 {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .filter(|&t| t > lower)
            .collect();
        cuts.push(lower);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let powr = |c: f64| if r == 1.0 { c } else { c.powf(r) };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let diff = (powr(self.eval(lo)) - powr(other.eval(lo))).abs();
            if diff == 0.0 {
                continue;
            }
            let weight = if q == 1.0 { hi - lo } else { (hi.powf(q) - lo.powf(q)) / q };
            total += diff * weight;
        }
        total
    }

    /// `sup_{t>0} t · |d₁(t)^r − d₂(t)^r|`, with the left-limit convention at
    /// breakpoints.
    pub fn sup_weighted_abs_pow_diff(&self, other: &StepDistribution, r: f64) -> f64 {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .filter(|&t| t > 0.0)
            .collect();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let powr = |c: f64| if r == 1.0 { c } else { c.powf(r) };
        let mut sup = 0.0f64;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let diff = (powr(self.eval(lo)) - powr(other.eval(lo))).abs();
            sup = sup.max(hi * diff);
        }
        sup
    }
}

/// `∫ f dμ = Σ_j β_j μ(E_j)` on the canonical form.
pub fn integrate_simple(mu: &Charge, f: &SimpleFunction) -> Result<f64, ChargeError> {
    let mut total = 0.0;
    for (v, e) in f.terms() {
        total += v * mu.value(e)?;
    }
    Ok(total)
}

/// The distribution `t ↦ μ*({|f| > t})` of a simple function, with one step
/// per distinct nonzero value of `|f|`.
pub fn distribution_simple(mu: &Charge, f: &SimpleFunction) -> Result<StepDistribution, ChargeError> {
    let mut levels: Vec<f64> = f.terms().iter().map(|(v, _)| v.abs()).filter(|v| *v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut steps = Vec::with_capacity(levels.len());
    for &t in &levels {
        // On [prev_level, t) the level set is {|f| ≥ t}.
        let mut set: Option<SetExpr> = None;
        for (v, e) in f.terms() {
            if v.abs() >= t {
                set = Some(match set {
                    None => e.clone(),
                    Some(acc) => acc.union(e)?,
                });
            }
        }
        let mass = match set {
            Some(e) => mu.outer_charge(&e)?,
            None => 0.0,
        };
        steps.push((t, mass));
    }
    StepDistribution::new(steps)
}

/// `‖f‖_{F(Ω)} = min(1, inf_{a>0} max(a, μ*({|f| > a})))`.
pub fn f_metric_norm(mu: &Charge, f: &SimpleFunction) -> Result<f64, ChargeError> {
    Ok(distribution_simple(mu, f)?.f_metric_value())
}

/// One side-by-side comparison in a [`LayerCakeReport`].
#[derive(Clone, Copy, Debug)]
pub struct LayerCakeRelation {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl LayerCakeRelation {
    fn equality(lhs: f64, rhs: f64, tol: f64) -> Self {
        LayerCakeRelation { lhs, rhs, pass: (lhs - rhs).abs() <= tol }
    }

    fn upper_bound(lhs: f64, rhs: f64, tol: f64) -> Self {
        LayerCakeRelation { lhs, rhs, pass: lhs <= rhs + tol }
    }
}

/// Report of the layer-cake identities for a pair of simple functions, all
/// sides evaluated in closed form.
#[derive(Clone, Debug)]
pub struct LayerCakeReport {
    /// `∫|f|dμ` vs `∫_0^∞ μ_f(t)dt`.
    pub integral_identity: LayerCakeRelation,
    /// For `f, g ≥ 0` (or both `≤ 0`): `∫|f−g|dμ` vs `∫_0^∞ |μ_{f∨g} − μ_{f∧g}|dt`.
    /// `None` when the pair is mixed-sign.
    pub lattice_identity: Option<LayerCakeRelation>,
    /// `∫_0^∞ |μ_f − μ_g|dt ≤ ∫||f|−|g||dμ`.
    pub distribution_contraction: LayerCakeRelation,
    /// Tail version at the requested `δ`: `∫_δ^∞ |μ_f − μ_g|dt ≤`
    /// `∫_{{|f|>δ}∪{|g|>δ}} ||f|−|g||dμ`.
    pub tail_contraction: LayerCakeRelation,
    pub delta: f64,
}

impl LayerCakeReport {
    pub fn all_pass(&self) -> bool {
        self.integral_identity.pass
            && self.lattice_identity.map_or(true, |r| r.pass)
            && self.distribution_contraction.pass
            && self.tail_contraction.pass
    }
}

pub const LAYER_CAKE_TOL: f64 = 1e-12;

/// Evaluates the layer-cake identities for `f, g` and the tail inequality at
/// `delta ≥ 0`.
pub fn layer_cake_check(
    mu: &Charge,
    f: &SimpleFunction,
    g: &SimpleFunction,
    delta: f64,
) -> Result<LayerCakeReport, ChargeError> {
    let tol = LAYER_CAKE_TOL;
    let df = distribution_simple(mu, f)?;
    let dg = distribution_simple(mu, g)?;

    let integral_identity = LayerCakeRelation::equality(
        integrate_simple(mu, &f.abs())?,
        df.total_integral(),
        tol,
    );

    let lattice_identity = if (f.is_nonnegative() && g.is_nonnegative())
        || (f.is_nonpositive() && g.is_nonpositive())
    {
        let lhs = integrate_simple(mu, &f.combine(g, PointwiseOp::Sub)?.abs())?;
        let dmax = distribution_simple(mu, &f.combine(g, PointwiseOp::Max)?)?;
        let dmin = distribution_simple(mu, &f.combine(g, PointwiseOp::Min)?)?;
        let rhs = dmax.abs_pow_diff_integral(&dmin, 1.0, 1.0, 0.0);
        Some(LayerCakeRelation::equality(lhs, rhs, tol))
    } else {
        None
    };

    let abs_gap = f.abs().combine(&g.abs(), PointwiseOp::Sub)?.abs();
    let distribution_contraction = LayerCakeRelation::upper_bound(
        df.abs_pow_diff_integral(&dg, 1.0, 1.0, 0.0),
        integrate_simple(mu, &abs_gap)?,
        tol,
    );

    let tail_lhs = df.abs_pow_diff_integral(&dg, 1.0, 1.0, delta);
    let over_delta = match (f.level_set(delta), g.level_set(delta)) {
        (Some(a), Some(b)) => Some(a.union(&b)?),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    let tail_rhs = match over_delta {
        Some(set) => {
            integrate_simple(mu, &abs_gap.combine(&SimpleFunction::indicator(set), PointwiseOp::Mul)?)?
        }
        None => 0.0,
    };
    let tail_contraction = LayerCakeRelation::upper_bound(tail_lhs, tail_rhs, tol);

    Ok(LayerCakeReport {
        integral_identity,
        lattice_identity,
        distribution_contraction,
        tail_contraction,
        delta,
    })
}
