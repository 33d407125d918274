//! Decreasing rearrangements and `L^{p,q}` / `ℓ^{p,q}` norms, all in closed
//! form: the inputs are step distributions or finite sequences, so every
//! integral is a finite sum of exact antiderivatives.

use num_complex::Complex64;
use thiserror::Error;

use crate::charge::StepDistribution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("invalid Lorentz parameters: {0}")]
    InvalidParams(String),
}

/// Lorentz exponents. `q` may be `f64::INFINITY`; `p` must be finite and
/// positive. The quasi-norm regime `0 < p < 1` or `0 < q < 1` is computed by
/// the same formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzParams {
    p: f64,
    q: f64,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self, LorentzError> {
        if !(p.is_finite() && p > 0.0) {
            return Err(LorentzError::InvalidParams(format!("p must be in (0, ∞), got {p}")));
        }
        if !(q > 0.0) || q.is_nan() {
            return Err(LorentzError::InvalidParams(format!("q must be in (0, ∞], got {q}")));
        }
        Ok(LorentzParams { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_is_infinite(&self) -> bool {
        self.q.is_infinite()
    }

    /// The conjugate exponent `p' = p/(p−1)`, defined for `p > 1`.
    pub fn conjugate_p(&self) -> Option<f64> {
        (self.p > 1.0).then(|| self.p / (self.p - 1.0))
    }
}

/// Absolute values of a finite sequence, sorted nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct RearrangedSeq {
    values: Vec<f64>,
}

impl RearrangedSeq {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(Σ_n [n^{1/p} a*_n]^q / n)^{1/q}` for finite `q`, `sup_n n^{1/p} a*_n`
    /// for `q = ∞`. Coincides with the plain `ℓ^p` norm when `q = p`.
    pub fn lorentz_norm(&self, params: LorentzParams) -> f64 {
        let (p, q) = (params.p, params.q);
        if q.is_infinite() {
            return self
                .values
                .iter()
                .enumerate()
                .map(|(i, a)| ((i + 1) as f64).powf(1.0 / p) * a)
                .fold(0.0, f64::max);
        }
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, a)| ((i + 1) as f64).powf(q / p - 1.0) * a.powf(q))
            .sum();
        sum.powf(1.0 / q)
    }
}

/// Sorts the moduli of a real sequence in nonincreasing order.
pub fn rearrange_seq(values: &[f64]) -> RearrangedSeq {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    RearrangedSeq { values: v }
}

/// Sorts the moduli of a complex sequence in nonincreasing order.
pub fn rearrange_seq_complex(values: &[Complex64]) -> RearrangedSeq {
    let mut v: Vec<f64> = values.iter().map(|x| x.norm()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    RearrangedSeq { values: v }
}

/// `ℓ^{p,q}` norm of a complex sequence.
pub fn seq_lorentz_norm(values: &[Complex64], params: LorentzParams) -> f64 {
    rearrange_seq_complex(values).lorentz_norm(params)
}

/// `ℓ^{p,q}` norm of a real sequence.
pub fn seq_lorentz_norm_real(values: &[f64], params: LorentzParams) -> f64 {
    rearrange_seq(values).lorentz_norm(params)
}

/// `(p ∫_0^∞ μ_f(s)^{q/p} s^{q-1} ds)^{1/q}` for finite `q`, evaluated cell
/// by cell; for `q = ∞`, `sup_t t μ_f(t)^{1/p}` with the left-limit
/// convention at breakpoints.
pub fn lorentz_norm_from_distribution(d: &StepDistribution, params: LorentzParams) -> f64 {
    let (p, q) = (params.p, params.q);
    if q.is_infinite() {
        return d.steps().map(|(_, hi, c)| hi * c.powf(1.0 / p)).fold(0.0, f64::max);
    }
    let sum: f64 = d
        .steps()
        .map(|(lo, hi, c)| c.powf(q / p) * (hi.powf(q) - lo.powf(q)) / q)
        .sum();
    (p * sum).powf(1.0 / q)
}

/// The decreasing rearrangement `f*(t) = inf{γ : μ_f(γ) ≤ t}` of a step
/// distribution. The result is itself a decreasing right-continuous step
/// function, so it is returned as a [`StepDistribution`]; applying this
/// transform twice returns the input.
pub fn rearrangement_from_distribution(d: &StepDistribution) -> StepDistribution {
    let steps: Vec<(f64, f64)> = d
        .steps()
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .map(|(_, hi, c)| (c, hi))
        .collect();
    StepDistribution::new(steps).expect("transpose of a canonical distribution is canonical")
}

/// `(∫_0^∞ [t^{1/p} f*(t)]^q dt/t)^{1/q}` for finite `q`, the second route of
/// the norm; for `q = ∞`, `sup_t t^{1/p} f*(t)`.
pub fn lorentz_norm_from_rearrangement(fstar: &StepDistribution, params: LorentzParams) -> f64 {
    let (p, q) = (params.p, params.q);
    if q.is_infinite() {
        return fstar.steps().map(|(_, hi, v)| hi.powf(1.0 / p) * v).fold(0.0, f64::max);
    }
    let sum: f64 = fstar
        .steps()
        .map(|(lo, hi, v)| v.powf(q) * (hi.powf(q / p) - lo.powf(q / p)) * p / q)
        .sum();
    sum.powf(1.0 / q)
}

/// The distribution of `|f|^q` given the distribution of `f`: breakpoints map
/// through `t ↦ t^q`, values are unchanged.
pub fn power_distribution(d: &StepDistribution, q: f64) -> StepDistribution {
    let steps: Vec<(f64, f64)> = d.steps().map(|(_, hi, c)| (hi.powf(q), c)).collect();
    StepDistribution::new(steps).expect("strictly monotone breakpoint map preserves canonicity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(p: f64, q: f64) -> LorentzParams {
        LorentzParams::new(p, q).unwrap()
    }

    fn dist(steps: &[(f64, f64)]) -> StepDistribution {
        StepDistribution::new(steps.to_vec()).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn params_validation() {
        assert!(LorentzParams::new(0.0, 1.0).is_err());
        assert!(LorentzParams::new(2.0, 0.0).is_err());
        assert!(LorentzParams::new(2.0, f64::INFINITY).is_ok());
        assert_eq!(params(2.0, 1.0).conjugate_p(), Some(2.0));
        assert_eq!(params(1.0, 1.0).conjugate_p(), None);
        let p = params(1.5, 1.0).conjugate_p().unwrap();
        assert!((p - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rearrange_examples() {
        assert_eq!(rearrange_seq(&[1.0, 3.0, 2.0]).values(), &[3.0, 2.0, 1.0]);
        assert_eq!(rearrange_seq(&[0.0, 0.0]).values(), &[0.0, 0.0]);
        let r = rearrange_seq_complex(&[Complex64::new(-2.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(r.values(), &[2.0, 1.0]);
    }

    #[test]
    fn seq_norm_examples() {
        let one = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!((seq_lorentz_norm(&one, params(1.7, 0.6)) - 1.0).abs() < 1e-14);
        assert!((seq_lorentz_norm(&one, params(2.0, f64::INFINITY)) - 1.0).abs() < 1e-14);

        assert!(
            (seq_lorentz_norm_real(&[1.0, 1.0], params(2.0, 2.0)) - 2.0f64.sqrt()).abs() < 1e-14
        );
        assert_eq!(
            seq_lorentz_norm_real(&[3.0, 2.0, 1.0], params(1.0, f64::INFINITY)),
            4.0
        );
    }

    #[test]
    fn distribution_norm_examples() {
        let ind = dist(&[(1.0, 1.0 / 3.0)]);
        let n21 = lorentz_norm_from_distribution(&ind, params(2.0, 1.0));
        assert!((n21 - 2.0 * (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        // L^{p,p} of an indicator is the L^p norm
        for p in [1.0, 1.5, 2.0, 3.0] {
            let n = lorentz_norm_from_distribution(&ind, params(p, p));
            assert!(rel_close(n, (1.0f64 / 3.0).powf(1.0 / p), 1e-14));
        }
        assert_eq!(
            lorentz_norm_from_distribution(&StepDistribution::empty(), params(2.0, 1.0)),
            0.0
        );
    }

    #[test]
    fn rearrangement_example() {
        let d = dist(&[(1.0, 0.75), (2.0, 0.5)]);
        let fstar = rearrangement_from_distribution(&d);
        assert_eq!(fstar.breakpoints(), &[0.0, 0.5, 0.75]);
        assert_eq!(fstar.values(), &[2.0, 1.0]);

        let single = dist(&[(5.0, 0.25)]);
        let fstar = rearrangement_from_distribution(&single);
        assert_eq!(fstar.breakpoints(), &[0.0, 0.25]);
        assert_eq!(fstar.values(), &[5.0]);

        assert!(rearrangement_from_distribution(&StepDistribution::empty()).is_empty());
    }

    fn step_distribution_strategy() -> impl Strategy<Value = StepDistribution> {
        // strictly increasing breakpoints, strictly decreasing values
        proptest::collection::vec((1u32..=40, 1u32..=40), 1..6).prop_map(|incs| {
            let mut t = 0.0;
            let mut c: f64 = incs.iter().map(|(_, dc)| *dc as f64 / 8.0).sum();
            let mut steps = Vec::new();
            for (dt, dc) in incs {
                t += dt as f64 / 8.0;
                steps.push((t, c));
                c -= dc as f64 / 8.0;
            }
            StepDistribution::new(steps).unwrap()
        })
    }

    fn lorentz_params_strategy() -> impl Strategy<Value = LorentzParams> {
        (1u32..=40, 1u32..=40, proptest::bool::ANY).prop_map(|(p8, q8, inf)| {
            let p = p8 as f64 / 8.0;
            let q = if inf { f64::INFINITY } else { q8 as f64 / 8.0 };
            LorentzParams::new(p, q).unwrap()
        })
    }

    proptest! {
        #[test]
        fn distribution_rearrangement_involution(d in step_distribution_strategy()) {
            let back = rearrangement_from_distribution(&rearrangement_from_distribution(&d));
            prop_assert_eq!(back, d);
        }

        #[test]
        fn equimeasurability_of_both_routes(
            d in step_distribution_strategy(),
            params in lorentz_params_strategy(),
        ) {
            let via_mu = lorentz_norm_from_distribution(&d, params);
            let via_fstar = lorentz_norm_from_rearrangement(&rearrangement_from_distribution(&d), params);
            prop_assert!(rel_close(via_mu, via_fstar, 1e-12), "{via_mu} vs {via_fstar}");
        }

        #[test]
        fn change_of_variables(
            d in step_distribution_strategy(),
            params in lorentz_params_strategy(),
        ) {
            prop_assume!(params.q().is_finite());
            let (p, q) = (params.p(), params.q());
            let dq = power_distribution(&d, q);
            let via_power: f64 = ((p / q)
                * dq.steps().map(|(lo, hi, c)| c.powf(q / p) * (hi - lo)).sum::<f64>())
            .powf(1.0 / q);
            let direct = lorentz_norm_from_distribution(&d, params);
            prop_assert!(rel_close(direct, via_power, 1e-12), "{direct} vs {via_power}");
        }

        #[test]
        fn sign_constant_cell_identity(
            d1 in step_distribution_strategy(),
            d2 in step_distribution_strategy(),
            params in lorentz_params_strategy(),
        ) {
            prop_assume!(params.q().is_finite());
            let (p, q) = (params.p(), params.q());
            let lhs = d1.abs_pow_diff_integral(&d2, q / p, q, 0.0);
            let rhs = power_distribution(&d1, q)
                .abs_pow_diff_integral(&power_distribution(&d2, q), q / p, 1.0, 0.0)
                / q;
            prop_assert!(rel_close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
        }

        #[test]
        fn norm_nesting_in_the_embedding_regime(
            values in proptest::collection::vec(0u32..=64, 1..10),
            p8 in 8u32..=40,
            q8 in 2u32..=40,
            r_extra in 0u32..=40,
            r_inf in proptest::bool::ANY,
        ) {
            // constant-1 nesting ‖a‖_{p,r} ≤ ‖a‖_{p,q} holds for q ≤ min(p, r);
            // this is the regime of the coefficient inequalities (q ≤ 2 ≤ q' = p)
            let p = p8 as f64 / 8.0;
            let q = (q8 as f64 / 8.0).min(p);
            let r = if r_inf { f64::INFINITY } else { q + r_extra as f64 / 8.0 };
            let a: Vec<f64> = values.iter().map(|v| *v as f64 / 16.0).collect();
            let nq = seq_lorentz_norm_real(&a, LorentzParams::new(p, q).unwrap());
            let nr = seq_lorentz_norm_real(&a, LorentzParams::new(p, r).unwrap());
            prop_assert!(nr <= nq + 1e-12, "p={p} q={q} r={r}: {nr} > {nq}");
        }

        #[test]
        fn absolute_homogeneity(
            values in proptest::collection::vec(-64i32..=64, 1..8),
            lambda in -32i32..=32,
            params in lorentz_params_strategy(),
        ) {
            let a: Vec<f64> = values.iter().map(|v| *v as f64 / 16.0).collect();
            let scaled: Vec<f64> = a.iter().map(|v| v * lambda as f64 / 8.0).collect();
            let lhs = seq_lorentz_norm_real(&scaled, params);
            let rhs = (lambda as f64 / 8.0).abs() * seq_lorentz_norm_real(&a, params);
            prop_assert!(rel_close(lhs, rhs, 1e-12));
        }

        #[test]
        fn distribution_norm_homogeneity(
            d in step_distribution_strategy(),
            lambda in 1u32..=64,
            params in lorentz_params_strategy(),
        ) {
            // scaling f by λ scales breakpoints of μ_f by λ
            let lambda = lambda as f64 / 8.0;
            let scaled = StepDistribution::new(
                d.steps().map(|(_, hi, c)| (hi * lambda, c)).collect(),
            ).unwrap();
            let lhs = lorentz_norm_from_distribution(&scaled, params);
            let rhs = lambda * lorentz_norm_from_distribution(&d, params);
            prop_assert!(rel_close(lhs, rhs, 1e-12));
        }
    }
}
