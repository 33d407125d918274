//! A concrete measure-space model for the finite/co-finite charge space: the
//! one-point compactification ℕ ∪ {∞} with point masses `w_n` and mass
//! `V − Σw_n` at infinity. The embedding of simple functions and of Cauchy
//! sequences into this space preserves order, multiplication, integrals, and
//! the `L^p` / `L^{p,q}` norms; all model-side quantities are finite sums in
//! closed form.

use serde::Serialize;
use thiserror::Error;

use crate::charge::{Charge, ChargeError, CofiniteWeights, PointwiseOp, SetExpr, SimpleFunction, StepDistribution};
use crate::lorentz::{lorentz_norm_from_distribution, LorentzParams};
use crate::tm::{SimpleFunctionSequence, TmError, DEFAULT_DELTA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("the model applies to finite/co-finite charges only")]
    NotCofinite,
    #[error("sequence is not Cauchy in outer charge (residual {residual:.3e})")]
    NotCauchy { residual: f64 },
    #[error("tail values do not stabilize on the ladder (gap {gap:.3e})")]
    TailNotConvergent { gap: f64 },
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

/// The measure space ℕ ∪ {∞} attached to a finite/co-finite charge.
#[derive(Clone, Debug)]
pub struct CofiniteModelSpace {
    weights: CofiniteWeights,
    total_mass: f64,
}

/// A measurable function on the model with a finite description: finitely
/// many exceptional points of ℕ, one value on the rest of ℕ, and one value
/// at ∞.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelFunction {
    exceptions: Vec<(u64, f64)>,
    tail_value: f64,
    infinity_value: f64,
}

impl ModelFunction {
    pub fn new(exceptions: Vec<(u64, f64)>, tail_value: f64, infinity_value: f64) -> Self {
        let mut exceptions: Vec<(u64, f64)> =
            exceptions.into_iter().filter(|(_, v)| *v != tail_value).collect();
        exceptions.sort_by_key(|(n, _)| *n);
        exceptions.dedup_by_key(|(n, _)| *n);
        ModelFunction { exceptions, tail_value, infinity_value }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(Vec::new(), v, v)
    }

    pub fn exceptions(&self) -> &[(u64, f64)] {
        &self.exceptions
    }

    pub fn tail_value(&self) -> f64 {
        self.tail_value
    }

    pub fn infinity_value(&self) -> f64 {
        self.infinity_value
    }

    pub fn value_at(&self, n: u64) -> f64 {
        match self.exceptions.binary_search_by_key(&n, |(p, _)| *p) {
            Ok(i) => self.exceptions[i].1,
            Err(_) => self.tail_value,
        }
    }

    /// Pointwise combination; exact on the finite description.
    pub fn combine(&self, other: &ModelFunction, op: PointwiseOp) -> ModelFunction {
        let mut points: Vec<u64> = self
            .exceptions
            .iter()
            .chain(other.exceptions.iter())
            .map(|(n, _)| *n)
            .collect();
        points.sort_unstable();
        points.dedup();
        let exceptions = points
            .into_iter()
            .map(|n| (n, op.apply(self.value_at(n), other.value_at(n))))
            .collect();
        ModelFunction::new(
            exceptions,
            op.apply(self.tail_value, other.tail_value),
            op.apply(self.infinity_value, other.infinity_value),
        )
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ModelFunction {
        ModelFunction::new(
            self.exceptions.iter().map(|(n, v)| (*n, f(*v))).collect(),
            f(self.tail_value),
            f(self.infinity_value),
        )
    }

    pub fn is_indicator(&self) -> bool {
        self.exceptions.iter().all(|(_, v)| *v == 0.0 || *v == 1.0)
            && (self.tail_value == 0.0 || self.tail_value == 1.0)
            && (self.infinity_value == 0.0 || self.infinity_value == 1.0)
    }

    pub fn min_value(&self) -> f64 {
        self.exceptions
            .iter()
            .map(|(_, v)| *v)
            .fold(self.tail_value.min(self.infinity_value), f64::min)
    }
}

/// Image of a simple function under the embedding: each point of ℕ keeps its
/// value, and ∞ takes the value whose level set is co-finite (zero if all
/// level sets are finite).
pub fn embed_simple(f: &SimpleFunction) -> Result<ModelFunction, ModelError> {
    let mut tail = 0.0;
    let mut points: Vec<u64> = Vec::new();
    for (v, e) in f.terms() {
        match e {
            SetExpr::Finite(pts) => points.extend_from_slice(pts),
            SetExpr::Cofinite(pts) => {
                tail = *v;
                points.extend_from_slice(pts);
            }
            SetExpr::Atoms(_) => return Err(ModelError::NotCofinite),
        }
    }
    points.sort_unstable();
    points.dedup();
    let exceptions = points.into_iter().map(|n| (n, f.evaluate(n))).collect();
    Ok(ModelFunction::new(exceptions, tail, tail))
}

/// Norms the model can evaluate.
#[derive(Clone, Copy, Debug)]
pub enum ModelNorm {
    /// The (signed) integral.
    Integral,
    /// `L^p` for `0 < p ≤ ∞`.
    Lp(f64),
    /// `L^{p,q}` including `q = ∞`.
    Lorentz(LorentzParams),
}

impl ModelNorm {
    pub fn label(&self) -> String {
        match self {
            ModelNorm::Integral => "integral".to_string(),
            ModelNorm::Lp(p) => format!("L^{p}"),
            ModelNorm::Lorentz(params) => format!("L^({},{})", params.p(), params.q()),
        }
    }
}

/// One norm comparison between the charge side and the model side.
#[derive(Clone, Debug, Serialize)]
pub struct IsometryRow {
    pub space: String,
    pub charge_side: f64,
    pub model_side: f64,
    pub discrepancy: f64,
    pub residual: f64,
}

/// Side-by-side verification of the embedding for one sequence.
#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub rows: Vec<IsometryRow>,
    pub multiplication_max_deviation: f64,
    pub order_preserved: Option<bool>,
    pub max_discrepancy: f64,
}

impl CofiniteModelSpace {
    pub fn from_charge(mu: &Charge) -> Result<Self, ModelError> {
        match mu {
            Charge::FiniteCofinite { weights, total_mass } => {
                Ok(CofiniteModelSpace { weights: weights.clone(), total_mass: *total_mass })
            }
            Charge::FinitePowerSet { .. } => Err(ModelError::NotCofinite),
        }
    }

    pub fn point_mass(&self, n: u64) -> f64 {
        self.weights.point_mass(n)
    }

    /// `Σ_{n≥1} w_n` in closed form.
    pub fn point_mass_sum(&self) -> f64 {
        self.weights.point_mass_sum()
    }

    /// Mass of the point at infinity, `V − Σ w_n`.
    pub fn infinity_mass(&self) -> f64 {
        (self.total_mass - self.point_mass_sum()).max(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// The in-measure limit of the embedded sequence.
    ///
    /// The value at ∞ is the ladder-stabilized tail value of the `f_n` (the
    /// tail carries at least the infinity mass, so Cauchy in `μ*` forces it
    /// to settle). On ℕ, points that agree across the ladder are settled;
    /// points still in flux form the frontier. When the frontier outweighs
    /// the unlisted remainder of ℕ, the exceptional sets are swallowing the
    /// whole space and the limit's tail is the value the frontier is moving
    /// to; otherwise the tail is the horizon function's own tail.
    pub fn embed_sequence(
        &self,
        seq: &SimpleFunctionSequence,
        tol: f64,
    ) -> Result<ModelFunction, ModelError> {
        let diag = seq.is_cauchy(DEFAULT_DELTA, tol)?;
        if !diag.converged {
            return Err(ModelError::NotCauchy { residual: diag.residual });
        }
        let (lo, hi) = diag.indices_used;
        let g_hi = embed_simple(&seq.at(hi))?;
        let g_lo = embed_simple(&seq.at(lo))?;
        if self.infinity_mass() > 0.0 {
            let gap = (g_hi.tail_value() - g_lo.tail_value()).abs();
            if gap > DEFAULT_DELTA {
                return Err(ModelError::TailNotConvergent { gap });
            }
        }
        let infinity_value = g_hi.tail_value();

        let mut points: Vec<u64> = g_hi
            .exceptions()
            .iter()
            .chain(g_lo.exceptions().iter())
            .map(|(n, _)| *n)
            .collect();
        points.sort_unstable();
        points.dedup();
        let listed_mass: f64 = points.iter().map(|&n| self.point_mass(n)).sum();
        let unlisted_mass = (self.point_mass_sum() - listed_mass).max(0.0);

        let mut settled: Vec<(u64, f64)> = Vec::new();
        let mut frontier: Vec<(u64, f64)> = Vec::new();
        for &n in &points {
            let (v_lo, v_hi) = (g_lo.value_at(n), g_hi.value_at(n));
            if (v_lo - v_hi).abs() <= DEFAULT_DELTA {
                settled.push((n, v_hi));
            } else {
                frontier.push((n, v_hi));
            }
        }
        let frontier_mass: f64 = frontier.iter().map(|(n, _)| self.point_mass(*n)).sum();

        let tail_value = if frontier_mass > unlisted_mass {
            // mass-dominant destination value of the frontier
            let mut masses: Vec<(f64, f64)> = Vec::new();
            for (n, v) in &frontier {
                match masses.iter_mut().find(|(val, _)| val == v) {
                    Some((_, m)) => *m += self.point_mass(*n),
                    None => masses.push((*v, self.point_mass(*n))),
                }
            }
            masses
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
                .map(|(v, _)| v)
                .unwrap_or(g_hi.tail_value())
        } else {
            g_hi.tail_value()
        };

        let exceptions = settled.into_iter().filter(|(_, v)| *v != tail_value).collect();
        Ok(ModelFunction::new(exceptions, tail_value, infinity_value))
    }

    /// Exact distribution of a model function: finitely many distinct values,
    /// each with a closed-form mass.
    pub fn distribution(&self, g: &ModelFunction) -> StepDistribution {
        let exc_mass: f64 = g.exceptions().iter().map(|(n, _)| self.point_mass(*n)).sum();
        let mut parts: Vec<(f64, f64)> = vec![
            (g.tail_value().abs(), self.point_mass_sum() - exc_mass),
            (g.infinity_value().abs(), self.infinity_mass()),
        ];
        for (n, v) in g.exceptions() {
            parts.push((v.abs(), self.point_mass(*n)));
        }
        let mut levels: Vec<f64> = parts.iter().map(|(v, _)| *v).filter(|v| *v > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let steps = levels
            .iter()
            .map(|&t| {
                let mass: f64 =
                    parts.iter().filter(|(v, _)| *v >= t).map(|(_, m)| *m).sum();
                (t, mass)
            })
            .collect();
        StepDistribution::new(steps).expect("levels ascending, masses nonincreasing")
    }

    /// Exact model-side norm or integral.
    pub fn model_norm(&self, g: &ModelFunction, norm: ModelNorm) -> f64 {
        match norm {
            ModelNorm::Integral => {
                let exc_mass: f64 =
                    g.exceptions().iter().map(|(n, _)| self.point_mass(*n)).sum();
                let mut total = g.tail_value() * (self.point_mass_sum() - exc_mass)
                    + g.infinity_value() * self.infinity_mass();
                for (n, v) in g.exceptions() {
                    total += v * self.point_mass(*n);
                }
                total
            }
            ModelNorm::Lp(p) if p.is_infinite() => {
                // essential sup: ignore zero-mass parts
                let mut sup = 0.0f64;
                for (n, v) in g.exceptions() {
                    if self.point_mass(*n) > 0.0 {
                        sup = sup.max(v.abs());
                    }
                }
                let exc_mass: f64 =
                    g.exceptions().iter().map(|(n, _)| self.point_mass(*n)).sum();
                if self.point_mass_sum() - exc_mass > 0.0 {
                    sup = sup.max(g.tail_value().abs());
                }
                if self.infinity_mass() > 0.0 {
                    sup = sup.max(g.infinity_value().abs());
                }
                sup
            }
            ModelNorm::Lp(p) => {
                let abs_pow = g.map_values(|v| v.abs().powf(p));
                self.model_norm(&abs_pow, ModelNorm::Integral).powf(1.0 / p)
            }
            ModelNorm::Lorentz(params) => {
                lorentz_norm_from_distribution(&self.distribution(g), params)
            }
        }
    }

    /// Compares charge-side norms of the sequence with model-side norms of
    /// its embedding, and checks multiplication and order preservation.
    pub fn verify_isometry(
        &self,
        seq: &SimpleFunctionSequence,
        norms: &[ModelNorm],
        tol: f64,
    ) -> Result<IsometryReport, ModelError> {
        let g = self.embed_sequence(seq, tol)?;
        let mut rows = Vec::with_capacity(norms.len());
        for norm in norms {
            let diag = match norm {
                ModelNorm::Integral => seq.integrate_sequence(tol)?,
                ModelNorm::Lp(p) => seq.ldot_p_norm(*p, tol)?,
                ModelNorm::Lorentz(params) => seq.ldot_pq_norm(*params, tol)?,
            };
            let model_side = self.model_norm(&g, *norm);
            rows.push(IsometryRow {
                space: norm.label(),
                charge_side: diag.estimate,
                model_side,
                discrepancy: (diag.estimate - model_side).abs(),
                residual: diag.residual,
            });
        }

        // φ₂ preserves products exactly: embed(f_N·f_N) = embed(f_N)²
        let f_hi = seq.at(seq.horizon());
        let embedded_product = embed_simple(&f_hi.combine(&f_hi, PointwiseOp::Mul)?)?;
        let product_of_embeds = {
            let e = embed_simple(&f_hi)?;
            e.combine(&e, PointwiseOp::Mul)
        };
        let multiplication_max_deviation = model_deviation(&embedded_product, &product_of_embeds);

        let order_preserved = if seq.order_geq_zero(tol)? {
            Some(g.min_value() >= -DEFAULT_DELTA)
        } else {
            None
        };

        let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
        Ok(IsometryReport { rows, multiplication_max_deviation, order_preserved, max_discrepancy })
    }
}

fn model_deviation(a: &ModelFunction, b: &ModelFunction) -> f64 {
    let mut dev = (a.tail_value() - b.tail_value())
        .abs()
        .max((a.infinity_value() - b.infinity_value()).abs());
    for (n, _) in a.exceptions().iter().chain(b.exceptions().iter()) {
        dev = dev.max((a.value_at(*n) - b.value_at(*n)).abs());
    }
    dev
}
