//! Stationary occupancy of a single RND-TTL item.
//!
//! With insertion rate `x2` while out of cache, refresh rate `x1` while
//! cached and timer `x3`, the item alternates between an exponential off
//! period of mean `1/x2` and an on period equal to the busy period of an
//! M/D/∞ queue, of mean `expm1(x1·x3)/x1`. Hence
//!
//! ```text
//! g = x2·expm1(x1·x3) / (x1 + x2·expm1(x1·x3)) = x2 / (x2 + φ),  φ = x1 / expm1(x1·x3)
//! ```
//!
//! `φ` is evaluated by a series near `x1·x3 = 0`, where it tends to `1/x3`.

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientG {
    pub d_refresh: f64,
    pub d_insertion: f64,
    pub d_timer: f64,
}

fn check(x1: f64, x2: f64, x3: f64) -> Result<()> {
    if !(x1 >= 0.0) || !(x2 >= 0.0) || !(x3 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "occupancy arguments must be nonnegative, got ({x1}, {x2}, {x3})"
        )));
    }
    Ok(())
}

/// `g(refresh, insertion, timer)`, checked.
pub fn occupancy_g(refresh: f64, insertion: f64, timer: f64) -> Result<f64> {
    check(refresh, insertion, timer)?;
    Ok(g(refresh, insertion, timer))
}

/// Analytic partial derivatives of `g`, checked.
pub fn occupancy_g_partials(refresh: f64, insertion: f64, timer: f64) -> Result<GradientG> {
    check(refresh, insertion, timer)?;
    Ok(g_partials(refresh, insertion, timer))
}

// φ = x1 / expm1(x1 x3) and its partials (∂φ/∂x1, ∂φ/∂x3).
#[inline]
fn phi(x1: f64, x3: f64) -> (f64, f64, f64) {
    let u = x1 * x3;
    if u < SERIES_CUTOFF {
        // φ = (1/x3)(1 − u/2 + u²/12 − u⁴/720 + …)
        let inv = 1.0 / x3;
        let value = inv * (1.0 - u / 2.0 + u * u / 12.0 - u.powi(4) / 720.0);
        let d1 = -0.5 + u / 6.0 - u.powi(3) / 180.0;
        let d3 = -inv * inv + x1 * x1 / 12.0 - x1.powi(4) * x3 * x3 / 240.0;
        (value, d1, d3)
    } else {
        let em = u.exp_m1();
        // e^u / expm1(u)² written without overflow
        let ratio = 1.0 / (em * -(-u).exp_m1());
        let value = x1 / em;
        let d1 = 1.0 / em - u * ratio;
        let d3 = -x1 * x1 * ratio;
        (value, d1, d3)
    }
}

#[inline]
pub(crate) fn g(x1: f64, x2: f64, x3: f64) -> f64 {
    if x2 == 0.0 {
        return 0.0;
    }
    if x3 == 0.0 {
        return 0.0;
    }
    let (p, _, _) = phi(x1, x3);
    x2 / (x2 + p)
}

#[inline]
pub(crate) fn g_partials(x1: f64, x2: f64, x3: f64) -> GradientG {
    if x3 == 0.0 {
        // g(·,·,T) ≈ x2·T near T = 0
        return GradientG {
            d_refresh: 0.0,
            d_insertion: 0.0,
            d_timer: x2,
        };
    }
    let (p, p1, p3) = phi(x1, x3);
    let denom = x2 + p;
    if denom == 0.0 {
        return GradientG {
            d_refresh: 0.0,
            d_insertion: 0.0,
            d_timer: 0.0,
        };
    }
    let sq = denom * denom;
    let dg_dphi = -x2 / sq;
    GradientG {
        d_refresh: dg_dphi * p1,
        d_insertion: p / sq,
        d_timer: dg_dphi * p3,
    }
}
