//! Sequences of simple functions that are Cauchy in outer charge, with
//! integrals and `L^p` / `L^{p,q}` norms certified at a finite horizon.
//!
//! Genuine limits are out of reach at desk scale, so every operation
//! evaluates a two-point index ladder `(⌊N/2⌋, N)` and reports the last gap
//! as a residual. A diagnostic is `converged` when that residual clears the
//! requested tolerance; nothing is claimed otherwise.

use std::fmt;

use thiserror::Error;

use crate::charge::{
    distribution_simple, f_metric_norm, integrate_simple, Charge, ChargeError, PointwiseOp,
    SimpleFunction,
};
use crate::lorentz::{lorentz_norm_from_distribution, LorentzParams};

/// Default tolerance for Cauchy residuals.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default horizon.
pub const DEFAULT_HORIZON: u32 = 64;
/// Value gap used when an operation needs the hazy-Cauchy gate but the caller
/// supplied no gap of its own.
pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TmError {
    #[error("horizon {horizon} is too small for a ladder (need at least 4)")]
    HorizonTooSmall { horizon: u32 },
    #[error("sequence is not Cauchy in outer charge at this horizon (residual {residual:.3e})")]
    NotCauchy { residual: f64 },
    #[error("sequence is not L1-Cauchy at this horizon (residual {residual:.3e})")]
    NotCauchyL1 { residual: f64 },
    #[error("sequence is not Lp-Cauchy at this horizon (residual {residual:.3e})")]
    NotCauchyLp { residual: f64 },
    #[error("sequence is not Lorentz-Cauchy at this horizon (residual {residual:.3e})")]
    NotCauchyLorentz { residual: f64 },
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

/// A numerically certified limit: the estimate at the horizon, the last-gap
/// Cauchy residual, and whether the residual cleared the tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitDiagnostic {
    pub estimate: f64,
    pub residual: f64,
    pub indices_used: (u32, u32),
    pub converged: bool,
}

/// An indexed sequence of simple functions over a fixed charge space, given
/// by a pure generator total on `1..=horizon`.
pub struct SimpleFunctionSequence {
    charge: Charge,
    horizon: u32,
    generator: Box<dyn Fn(u32) -> SimpleFunction + Send + Sync>,
}

impl fmt::Debug for SimpleFunctionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimpleFunctionSequence")
            .field("charge", &self.charge)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl SimpleFunctionSequence {
    pub fn new(
        charge: Charge,
        horizon: u32,
        generator: impl Fn(u32) -> SimpleFunction + Send + Sync + 'static,
    ) -> Self {
        SimpleFunctionSequence { charge, horizon, generator: Box::new(generator) }
    }

    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn at(&self, n: u32) -> SimpleFunction {
        (self.generator)(n)
    }

    fn ladder(&self) -> Result<(u32, u32), TmError> {
        if self.horizon < 4 {
            return Err(TmError::HorizonTooSmall { horizon: self.horizon });
        }
        Ok((self.horizon / 2, self.horizon))
    }

    /// `μ*({|f_m − f_n| > delta})` on the ladder.
    pub fn is_cauchy(&self, delta: f64, tol: f64) -> Result<LimitDiagnostic, TmError> {
        let (lo, hi) = self.ladder()?;
        let diff = self.at(hi).combine(&self.at(lo), PointwiseOp::Sub)?;
        let residual = match diff.level_set(delta) {
            Some(set) => self.charge.outer_charge(&set)?,
            None => 0.0,
        };
        Ok(LimitDiagnostic {
            estimate: residual,
            residual,
            indices_used: (lo, hi),
            converged: residual <= tol,
        })
    }

    /// `μ*({|f − f_N| > delta})` at the horizon.
    pub fn converges_to(
        &self,
        f: &SimpleFunction,
        delta: f64,
        tol: f64,
    ) -> Result<LimitDiagnostic, TmError> {
        let (_, hi) = self.ladder()?;
        let diff = f.combine(&self.at(hi), PointwiseOp::Sub)?;
        let residual = match diff.level_set(delta) {
            Some(set) => self.charge.outer_charge(&set)?,
            None => 0.0,
        };
        Ok(LimitDiagnostic {
            estimate: residual,
            residual,
            indices_used: (hi, hi),
            converged: residual <= tol,
        })
    }

    /// Fails with [`TmError::NotCauchy`] unless the sequence passes the hazy
    /// Cauchy gate at the module default value gap.
    pub fn ensure_cauchy(&self, tol: f64) -> Result<LimitDiagnostic, TmError> {
        let diag = self.is_cauchy(DEFAULT_DELTA, tol)?;
        if !diag.converged {
            return Err(TmError::NotCauchy { residual: diag.residual });
        }
        Ok(diag)
    }

    /// `‖{f_n}‖_{ṪM} = lim ‖f_n‖_{F(Ω)}`, estimated at the horizon.
    pub fn tmdot_norm(&self) -> Result<LimitDiagnostic, TmError> {
        let (lo, hi) = self.ladder()?;
        let n_hi = f_metric_norm(&self.charge, &self.at(hi))?;
        let n_lo = f_metric_norm(&self.charge, &self.at(lo))?;
        let residual = (n_hi - n_lo).abs();
        Ok(LimitDiagnostic {
            estimate: n_hi,
            residual,
            indices_used: (lo, hi),
            converged: residual <= DEFAULT_TOL,
        })
    }

    /// `{f_n} ≥ {0}`: the negative parts must vanish in the `F(Ω)` norm —
    /// nonincreasing along the ladder and below `tol` at the horizon.
    pub fn order_geq_zero(&self, tol: f64) -> Result<bool, TmError> {
        let (lo, hi) = self.ladder()?;
        let n_lo = f_metric_norm(&self.charge, &self.at(lo).negative_part())?;
        let n_hi = f_metric_norm(&self.charge, &self.at(hi).negative_part())?;
        Ok(n_hi <= tol && n_hi <= n_lo + 1e-12)
    }

    /// The integral of a determining sequence: requires the hazy Cauchy gate
    /// and an `L¹` Cauchy residual below `tol`.
    pub fn integrate_sequence(&self, tol: f64) -> Result<LimitDiagnostic, TmError> {
        self.ensure_cauchy(tol)?;
        let (lo, hi) = self.ladder()?;
        let f_hi = self.at(hi);
        let gap = f_hi.combine(&self.at(lo), PointwiseOp::Sub)?.abs();
        let residual = integrate_simple(&self.charge, &gap)?;
        if residual > tol {
            return Err(TmError::NotCauchyL1 { residual });
        }
        Ok(LimitDiagnostic {
            estimate: integrate_simple(&self.charge, &f_hi)?,
            residual,
            indices_used: (lo, hi),
            converged: true,
        })
    }

    /// `L̇^p` norm for `0 < p ≤ ∞`. For finite `p` the `|f_n|^p` gap must be
    /// `L¹`-Cauchy; for `p = ∞` the infimum over essential bounds scans the
    /// finitely many level values of the horizon function.
    pub fn ldot_p_norm(&self, p: f64, tol: f64) -> Result<LimitDiagnostic, TmError> {
        self.ensure_cauchy(tol)?;
        let (lo, hi) = self.ladder()?;
        let f_hi = self.at(hi);
        if p.is_infinite() {
            let mut candidates: Vec<f64> =
                f_hi.terms().iter().map(|(v, _)| v.abs()).collect();
            candidates.push(0.0);
            candidates.sort_by(f64::total_cmp);
            candidates.dedup();
            for c in candidates {
                let mass = match f_hi.level_set(c) {
                    Some(set) => self.charge.outer_charge(&set)?,
                    None => 0.0,
                };
                if mass <= tol {
                    return Ok(LimitDiagnostic {
                        estimate: c,
                        residual: mass,
                        indices_used: (hi, hi),
                        converged: true,
                    });
                }
            }
            unreachable!("the top level value always has an empty level set");
        }
        let pow_hi = f_hi.map_values(|v| v.abs().powf(p));
        let pow_lo = self.at(lo).map_values(|v| v.abs().powf(p));
        let residual =
            integrate_simple(&self.charge, &pow_hi.combine(&pow_lo, PointwiseOp::Sub)?.abs())?;
        if residual > tol {
            return Err(TmError::NotCauchyLp { residual });
        }
        Ok(LimitDiagnostic {
            estimate: integrate_simple(&self.charge, &pow_hi)?.powf(1.0 / p),
            residual,
            indices_used: (lo, hi),
            converged: true,
        })
    }

    /// `L̇^{p,q}` norm. The Cauchy residual is the closed-form Lorentz gap
    /// `∫_0^∞ |μ_{f_N}^{q/p} − μ_{f_{N/2}}^{q/p}| t^{q-1} dt` (for `q = ∞`:
    /// `sup_t t |μ_{f_N}^{1/p} − μ_{f_{N/2}}^{1/p}|`).
    pub fn ldot_pq_norm(
        &self,
        params: LorentzParams,
        tol: f64,
    ) -> Result<LimitDiagnostic, TmError> {
        self.ensure_cauchy(tol)?;
        let (lo, hi) = self.ladder()?;
        let d_hi = distribution_simple(&self.charge, &self.at(hi))?;
        let d_lo = distribution_simple(&self.charge, &self.at(lo))?;
        let (p, q) = (params.p(), params.q());
        let residual = if q.is_infinite() {
            d_hi.sup_weighted_abs_pow_diff(&d_lo, 1.0 / p)
        } else {
            d_hi.abs_pow_diff_integral(&d_lo, q / p, q, 0.0)
        };
        if residual > tol {
            return Err(TmError::NotCauchyLorentz { residual });
        }
        Ok(LimitDiagnostic {
            estimate: lorentz_norm_from_distribution(&d_hi, params),
            residual,
            indices_used: (lo, hi),
            converged: true,
        })
    }

    /// Equivalence of representatives: `lim ‖f_n − g_n‖_{F(Ω)} = 0`, reported
    /// at the horizon.
    pub fn equivalent_to(
        &self,
        other: &SimpleFunctionSequence,
        tol: f64,
    ) -> Result<LimitDiagnostic, TmError> {
        let (lo, hi) = self.ladder()?;
        let gap_hi = self.at(hi).combine(&other.at(hi), PointwiseOp::Sub)?;
        let gap_lo = self.at(lo).combine(&other.at(lo), PointwiseOp::Sub)?;
        let n_hi = f_metric_norm(&self.charge, &gap_hi)?;
        let n_lo = f_metric_norm(&self.charge, &gap_lo)?;
        Ok(LimitDiagnostic {
            estimate: n_hi,
            residual: (n_hi - n_lo).abs().max(n_hi),
            indices_used: (lo, hi),
            converged: n_hi <= tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge::SetExpr;

    fn dyadic_charge() -> Charge {
        Charge::cofinite_geometric(0.5, 5.0)
    }

    /// `f_n = I_{(0, n]}` on the finite/co-finite charge: Cauchy in `μ*` but
    /// convergent to nothing in the space.
    fn prefix_indicators(horizon: u32) -> SimpleFunctionSequence {
        SimpleFunctionSequence::new(dyadic_charge(), horizon, |n| {
            SimpleFunction::indicator(SetExpr::finite(1..=n as u64))
        })
    }

    #[test]
    fn is_cauchy_prefix_example() {
        let seq = prefix_indicators(32);
        let diag = seq.is_cauchy(0.1, 1e-4).unwrap();
        let expected = 0.5f64.powi(16) - 0.5f64.powi(32);
        assert!((diag.residual - expected).abs() < 1e-18);
        assert!(diag.converged);
        assert_eq!(diag.indices_used, (16, 32));
    }

    #[test]
    fn is_cauchy_constant_and_alternating() {
        let f = SimpleFunction::indicator(SetExpr::finite([3]));
        let constant =
            SimpleFunctionSequence::new(dyadic_charge(), 16, move |_| f.clone());
        assert_eq!(constant.is_cauchy(0.1, 1e-9).unwrap().residual, 0.0);

        // alternating supports on a two-atom space never settle; with an odd
        // horizon the ladder pair has opposite parity and the full symmetric
        // difference (both atoms) shows up in the residual
        let mu = Charge::FinitePowerSet { atom_weights: vec![0.3, 0.3] };
        let alternating = SimpleFunctionSequence::new(mu, 33, |n| {
            SimpleFunction::indicator(SetExpr::atoms([(n % 2) as u64]))
        });
        let diag = alternating.is_cauchy(0.1, 1e-6).unwrap();
        assert!((diag.residual - 0.6).abs() < 1e-15);
        assert!(!diag.converged);
    }

    #[test]
    fn converges_to_examples() {
        let seq = prefix_indicators(32);
        // the pointwise limit I_ℕ is cofinite, and the tail mass keeps it
        // at distance ≥ 4 from every prefix
        let all = SimpleFunction::indicator(SetExpr::cofinite([]));
        let diag = seq.converges_to(&all, 0.1, 1e-6).unwrap();
        assert!(diag.residual >= 4.0);
        assert!(!diag.converged);

        let f = SimpleFunction::indicator(SetExpr::finite([7]));
        let constant = {
            let f = f.clone();
            SimpleFunctionSequence::new(dyadic_charge(), 16, move |_| f.clone())
        };
        let diag = constant.converges_to(&f, 0.05, 1e-9).unwrap();
        assert_eq!(diag.residual, 0.0);
        assert!(diag.converged);

        // values creep up to the indicator: below delta once 2^{-n} < 0.1
        let creeping = SimpleFunctionSequence::new(dyadic_charge(), 16, |n| {
            SimpleFunction::scaled_indicator(1.0 - 0.5f64.powi(n as i32), SetExpr::finite([1]))
        });
        let target = SimpleFunction::indicator(SetExpr::finite([1]));
        let diag = creeping.converges_to(&target, 0.1, 1e-9).unwrap();
        assert_eq!(diag.residual, 0.0);
        assert!(diag.converged);
    }

    #[test]
    fn horizon_too_small() {
        let seq = prefix_indicators(3);
        assert!(matches!(
            seq.is_cauchy(0.1, 1e-6),
            Err(TmError::HorizonTooSmall { horizon: 3 })
        ));
    }

    #[test]
    fn tmdot_norm_examples() {
        let seq = prefix_indicators(64);
        let diag = seq.tmdot_norm().unwrap();
        assert!((diag.estimate - (1.0 - 0.5f64.powi(64))).abs() < 1e-15);

        let zero = SimpleFunctionSequence::new(dyadic_charge(), 16, |_| SimpleFunction::zero());
        assert_eq!(zero.tmdot_norm().unwrap().estimate, 0.0);

        let f = SimpleFunction::new(vec![
            (2.0, SetExpr::finite([1])),
            (1.0, SetExpr::finite([2])),
        ])
        .unwrap();
        let constant = SimpleFunctionSequence::new(dyadic_charge(), 16, move |_| f.clone());
        let diag = constant.tmdot_norm().unwrap();
        assert_eq!(diag.estimate, 0.75);
        assert_eq!(diag.residual, 0.0);
    }

    #[test]
    fn order_examples() {
        assert!(prefix_indicators(32).order_geq_zero(1e-9).unwrap());

        let mu = Charge::FinitePowerSet { atom_weights: vec![0.3] };
        let negative = SimpleFunctionSequence::new(mu, 16, |_| {
            SimpleFunction::scaled_indicator(-1.0, SetExpr::atoms([0]))
        });
        assert!(!negative.order_geq_zero(1e-9).unwrap());

        let prob = Charge::uniform_atoms(4, 0.25);
        let vanishing = SimpleFunctionSequence::new(prob, 64, |n| {
            SimpleFunction::scaled_indicator(-(0.5f64.powi(n as i32)), SetExpr::atoms(0..4))
        });
        assert!(vanishing.order_geq_zero(1e-6).unwrap());
    }

    #[test]
    fn integrate_examples() {
        let seq = prefix_indicators(64);
        let diag = seq.integrate_sequence(1e-6).unwrap();
        assert!((diag.estimate - (1.0 - 0.5f64.powi(64))).abs() < 1e-15);
        assert!(diag.converged);

        let zero = SimpleFunctionSequence::new(dyadic_charge(), 16, |_| SimpleFunction::zero());
        assert_eq!(zero.integrate_sequence(1e-9).unwrap().estimate, 0.0);

        let constant = SimpleFunctionSequence::new(dyadic_charge(), 16, |_| {
            SimpleFunction::indicator(SetExpr::finite([1]))
        });
        assert_eq!(constant.integrate_sequence(1e-9).unwrap().estimate, 0.5);
    }

    #[test]
    fn integrate_is_linear() {
        let mu = dyadic_charge();
        let a = SimpleFunctionSequence::new(mu.clone(), 64, |n| {
            SimpleFunction::indicator(SetExpr::finite(1..=n as u64))
        });
        let b = SimpleFunctionSequence::new(mu.clone(), 64, |_| {
            SimpleFunction::scaled_indicator(1.5, SetExpr::finite([2, 5]))
        });
        let combo = SimpleFunctionSequence::new(mu, 64, |n| {
            let fa = SimpleFunction::indicator(SetExpr::finite(1..=n as u64));
            let fb = SimpleFunction::scaled_indicator(1.5, SetExpr::finite([2, 5]));
            fa.scale(2.0).combine(&fb.scale(-3.0), PointwiseOp::Add).unwrap()
        });
        let ia = a.integrate_sequence(1e-6).unwrap().estimate;
        let ib = b.integrate_sequence(1e-6).unwrap().estimate;
        let ic = combo.integrate_sequence(1e-5).unwrap().estimate;
        assert!((ic - (2.0 * ia - 3.0 * ib)).abs() < 1e-12);
    }

    #[test]
    fn ldot_p_examples() {
        let seq = prefix_indicators(64);
        for p in [1.0, 2.0] {
            let diag = seq.ldot_p_norm(p, 1e-6).unwrap();
            assert!((diag.estimate - (1.0 - 0.5f64.powi(64)).powf(1.0 / p)).abs() < 1e-12);
        }

        let bounded = SimpleFunctionSequence::new(dyadic_charge(), 16, |_| {
            SimpleFunction::scaled_indicator(3.0, SetExpr::cofinite([]))
        });
        let diag = bounded.ldot_p_norm(f64::INFINITY, 1e-6).unwrap();
        assert_eq!(diag.estimate, 3.0);
    }

    #[test]
    fn ldot_pq_examples() {
        let seq = prefix_indicators(64);
        let params = LorentzParams::new(2.0, 1.0).unwrap();
        let diag = seq.ldot_pq_norm(params, 1e-6).unwrap();
        assert!((diag.estimate - 2.0 * (1.0 - 0.5f64.powi(64)).sqrt()).abs() < 1e-12);
        assert!((diag.estimate - 2.0).abs() < 1e-9);

        let zero = SimpleFunctionSequence::new(dyadic_charge(), 16, |_| SimpleFunction::zero());
        assert_eq!(zero.ldot_pq_norm(params, 1e-9).unwrap().estimate, 0.0);
    }

    #[test]
    fn ldot_pq_rejects_mass_escaping_spike() {
        // values 2^{2n/p} on singletons of charge 2^{-n}: a representative of
        // {0} in ṪM whose Lorentz norms diverge — the residual must flag it
        let p = 2.0;
        let spikes = SimpleFunctionSequence::new(dyadic_charge(), 24, move |n| {
            SimpleFunction::scaled_indicator(
                2.0f64.powf(2.0 * n as f64 / p),
                SetExpr::finite([n as u64]),
            )
        });
        assert!(spikes.is_cauchy(DEFAULT_DELTA, 1e-3).unwrap().converged);
        let params = LorentzParams::new(p, 1.0).unwrap();
        match spikes.ldot_pq_norm(params, 1e-3) {
            Err(TmError::NotCauchyLorentz { residual }) => assert!(residual > 1.0),
            other => panic!("expected NotCauchyLorentz, got {other:?}"),
        }
    }

    #[test]
    fn representative_independence_under_small_perturbations() {
        // g_n = f_n + v·I_{{n+1}} perturbs on sets of charge 2^{-(n+1)}
        let mu = dyadic_charge();
        for (p, q, vmax) in [(2.0, 1.0, 3.0), (1.5, 3.0, 2.0), (2.0, f64::INFINITY, 3.0)] {
            let params = LorentzParams::new(p, q).unwrap();
            let base = SimpleFunctionSequence::new(mu.clone(), 64, |n| {
                SimpleFunction::new(vec![
                    (2.5, SetExpr::finite(1..=n.min(9) as u64)),
                    (-1.25, SetExpr::finite(10..10 + n.min(6) as u64)),
                ])
                .unwrap()
            });
            let perturbed = SimpleFunctionSequence::new(mu.clone(), 64, move |n| {
                let f = SimpleFunction::new(vec![
                    (2.5, SetExpr::finite(1..=n.min(9) as u64)),
                    (-1.25, SetExpr::finite(10..10 + n.min(6) as u64)),
                ])
                .unwrap();
                let bump = SimpleFunction::scaled_indicator(
                    vmax,
                    SetExpr::finite([40 + n as u64]),
                );
                f.combine(&bump, PointwiseOp::Add).unwrap()
            });
            let a = base.ldot_pq_norm(params, 1e-3).unwrap();
            let b = perturbed.ldot_pq_norm(params, 1e-3).unwrap();
            assert!(
                (a.estimate - b.estimate).abs() <= a.residual + b.residual + 1e-9,
                "p={p} q={q}: {} vs {}",
                a.estimate,
                b.estimate
            );
        }
    }

    #[test]
    fn lattice_closure_keeps_cauchy_scale() {
        let mu = dyadic_charge();
        let f = prefix_indicators(64);
        let g = SimpleFunctionSequence::new(mu.clone(), 64, |n| {
            SimpleFunction::scaled_indicator(2.0, SetExpr::finite((n as u64 / 2)..=n as u64))
        });
        let rf = f.is_cauchy(DEFAULT_DELTA, 1e-3).unwrap().residual;
        let rg = g.is_cauchy(DEFAULT_DELTA, 1e-3).unwrap().residual;
        for op in [PointwiseOp::Max, PointwiseOp::Min] {
            let combined = SimpleFunctionSequence::new(mu.clone(), 64, move |n| {
                let fa = SimpleFunction::indicator(SetExpr::finite(1..=n as u64));
                let fb = SimpleFunction::scaled_indicator(
                    2.0,
                    SetExpr::finite((n as u64 / 2)..=n as u64),
                );
                fa.combine(&fb, op).unwrap()
            });
            let rc = combined.is_cauchy(DEFAULT_DELTA, 1e-3).unwrap();
            assert!(rc.residual <= 2.0 * (rf + rg) + 1e-15);
            assert!(rc.converged);
        }
    }

    #[test]
    fn equivalence_predicate() {
        let mu = dyadic_charge();
        let a = prefix_indicators(64);
        let b = SimpleFunctionSequence::new(mu, 64, |n| {
            // differs from the prefix indicator on a single shrinking atom
            SimpleFunction::indicator(SetExpr::finite(2..=n as u64))
        });
        let diag = a.equivalent_to(&b, 1e-6).unwrap();
        // ‖f_n − g_n‖_F = min over the crossing of a and 2^{-1}... the gap is
        // I_{{1}} with charge 1/2, so the F-norm is 1/2 at every index
        assert!((diag.estimate - 0.5).abs() < 1e-15);
        assert!(!diag.converged);

        let c = prefix_indicators(64);
        let d = prefix_indicators(64);
        assert!(c.equivalent_to(&d, 1e-9).unwrap().converged);
    }
}
