//! Root of a continuous nondecreasing function on `[0, ∞)` with `f(0) < 0`.

use crate::error::{Error, Result};

const MAX_DOUBLINGS: usize = 1100;
const MAX_STEPS: usize = 400;

/// Outcome of bracketing: `None` when `f` never becomes positive.
fn bracket<F>(f: &F, hint: f64) -> Option<(f64, f64)>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut lo = 0.0;
    let mut hi = if hint.is_finite() && hint > 0.0 { hint } else { 1.0 };
    for _ in 0..MAX_DOUBLINGS {
        let (fh, _) = f(hi);
        if fh > 0.0 {
            return Some((lo, hi));
        }
        if fh == 0.0 {
            return Some((hi, hi));
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    None
}

/// Safeguarded Newton–bisection. `f` returns `(value, derivative)`.
///
/// Stops when `|f| <= tol` or the bracket can no longer shrink, so `tol = 0`
/// gives a root to machine precision.
pub(crate) fn solve_nondecreasing<F>(f: F, hint: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    if hint.is_finite() && hint > 0.0 && f(hint).0.abs() <= tol {
        return Ok(hint);
    }
    let (mut lo, mut hi) = bracket(&f, hint).ok_or_else(|| {
        Error::InvalidParameter("function stays nonpositive on [0, ∞)".into())
    })?;
    if lo == hi {
        return Ok(hi);
    }
    let mut x = if hint > lo && hint < hi { hint } else { 0.5 * (lo + hi) };
    let mut best = (f64::INFINITY, x);
    let mut last_step = hi - lo;
    for _ in 0..MAX_STEPS {
        let (fx, dfx) = f(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if dfx > 0.0 { x - fx / dfx } else { f64::NAN };
        let step_ok = newton > lo && newton < hi && (newton - x).abs() < 0.5 * last_step;
        let next = if step_ok { newton } else { 0.5 * (lo + hi) };
        last_step = (next - x).abs();
        if last_step <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi {
            let (fn_, _) = f(next);
            return Ok(if fn_.abs() < best.0 { next } else { best.1 });
        }
        x = next;
    }
    Ok(best.1)
}
