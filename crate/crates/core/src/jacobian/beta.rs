use serde::{Deserialize, Serialize};

/// Damping values whose quadratic bound on `‖J_{Gβ}‖₂²` stays below one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInterval {
    pub gamma: f64,
    pub eta: f64,
    pub discriminant: f64,
    /// Open interval `(a, b)`; `None` when the discriminant is negative or `a ≥ b`.
    pub interval: Option<(f64, f64)>,
}

impl BetaInterval {
    pub fn contains(&self, beta: f64) -> bool {
        self.interval.is_some_and(|(a, b)| a < beta && beta < b)
    }

    pub fn midpoint(&self) -> Option<f64> {
        self.interval.map(|(a, b)| 0.5 * (a + b))
    }
}

/// Roots of `(1+γ)β² − (2γ−η)β + γ − 1`, clipped to `[0, 1]`.
pub fn beta_interval(gamma: f64, eta: f64) -> BetaInterval {
    let discriminant = eta * eta - 4.0 * eta * gamma + 4.0;
    let interval = if discriminant >= 0.0 {
        let s = discriminant.sqrt();
        let a = ((2.0 * gamma - eta - s) / (2.0 * (gamma + 1.0))).max(0.0);
        let b = ((2.0 * gamma - eta + s) / (2.0 * (gamma + 1.0))).min(1.0);
        (a < b).then_some((a, b))
    } else {
        None
    };
    BetaInterval {
        gamma,
        eta,
        discriminant,
        interval,
    }
}

/// `(1+γ)β² − (2γ−η)β + γ`; bounds `‖J_{Gβ}‖₂²` when `γ ≤ 1`.
pub fn quadratic_norm_bound(gamma: f64, eta: f64, beta: f64) -> f64 {
    (1.0 + gamma) * beta * beta - (2.0 * gamma - eta) * beta + gamma
}

/// `(1−β)²γ² + β(1−β)η + β²`, a bound on `‖J_{Gβ}‖₂²` for every `γ`.
pub fn convex_norm_bound(gamma: f64, eta: f64, beta: f64) -> f64 {
    let c = 1.0 - beta;
    c * c * gamma * gamma + beta * c * eta + beta * beta
}
