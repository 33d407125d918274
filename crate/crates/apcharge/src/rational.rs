//! Rational detection by continued fractions.
//!
//! A convergent is accepted only when it is unreasonably good for its
//! denominator (error far below the generic `1/q²` of best approximations),
//! so genuinely irrational ratios are rejected instead of fitted: every real
//! has convergents within any fixed tolerance, but only near-rationals have
//! ones this sharp.

/// Error must beat `QUALITY / q²` to count as an exact ratio.
const QUALITY: f64 = 1e-3;
const MAX_TERMS: u32 = 64;

/// Returns `(numerator, denominator)` with denominator `≤ max_den` when `x`
/// is within `tol` of a rational that the quality gate accepts.
pub(crate) fn detect_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let x = x.abs();

    // convergents h/k of the continued fraction of x
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    for _ in 0..MAX_TERMS {
        if k as u64 <= max_den {
            let approx = h as f64 / k as f64;
            let err = (x - approx).abs();
            if err <= tol && err * (k * k) as f64 <= QUALITY {
                let num = if negative { -(h as i64) } else { h as i64 };
                return Some((num, k as u64));
            }
        } else {
            return None;
        }
        if frac < f64::EPSILON {
            return None; // expansion terminated but the gate already said no
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i128;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        if k > (u64::MAX / 2) as i128 {
            return None;
        }
    }
    None
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}
