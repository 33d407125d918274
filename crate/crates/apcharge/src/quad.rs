//! Adaptive Simpson quadrature with a depth limit.

/// Result of a quadrature attempt that exhausted its depth budget somewhere:
/// carries the best estimate so callers can report it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DepthExhausted {
    pub best: f64,
}

const INITIAL_PANELS: u32 = 16;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`. The interval is
/// pre-split into fixed panels so symmetric integrands cannot fool the first
/// error estimate, then each panel is refined adaptively.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, DepthExhausted> {
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut ok = true;
    // compensated accumulation keeps panel sums order-stable
    let mut comp = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * h;
        let hi = if i == INITIAL_PANELS - 1 { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0;
        let (value, panel_ok) = refine(
            f,
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            tol / INITIAL_PANELS as f64,
            max_depth,
        );
        ok &= panel_ok;
        let y = value - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if ok {
        Ok(total)
    } else {
        Err(DepthExhausted { best: total })
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, bool) {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (flmid, frmid) = (f(lmid), f(rmid));
    let left = (mid - lo) * (flo + 4.0 * flmid + fmid) / 6.0;
    let right = (hi - mid) * (fmid + 4.0 * frmid + fhi) / 6.0;
    let split = left + right;
    let err = split - whole;
    if err.abs() <= 15.0 * tol {
        return (split + err / 15.0, true);
    }
    if depth == 0 {
        return (split + err / 15.0, false);
    }
    let (lv, lok) = refine(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1);
    let (rv, rok) = refine(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
    (lv + rv, lok && rok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_trig() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, 1e-12, 40).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);

        let v = adaptive_simpson(&|x: f64| x.cos().abs(), 0.0, 2.0 * std::f64::consts::PI, 1e-11, 48)
            .unwrap();
        assert!((v - 4.0).abs() < 1e-10);

        // full-period cancellation must not be declared converged prematurely
        let v = adaptive_simpson(&|x: f64| x.cos(), 0.0, 2.0 * std::f64::consts::PI, 1e-12, 48)
            .unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        // a needle the fixed depth cannot resolve
        let needle = |x: f64| if x.abs() < 1e-9 { 1e9 } else { 0.0 };
        assert!(adaptive_simpson(&needle, -1.0, 1.0, 1e-12, 4).is_err());
    }
}
