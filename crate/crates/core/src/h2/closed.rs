//! Explicit per-mode expressions: small depths for general `α`, and the
//! memoryless, pure-memory and infinite-depth (`α = 1/2`) cases.

use crate::error::{ensure_param, Result};

/// Contribution of one mode for `θ ∈ {1, 2, 3, 4}`.
pub fn closed_small_theta_contribution(alpha: f64, phi: f64, theta: usize) -> Result<f64> {
    let mu = (1.0 - alpha) * phi;
    let c = 1.0 - 2.0 * alpha;
    let value = match theta {
        1 => (1.0 - mu) / ((1.0 - phi) * (1.0 + mu) * (-c * phi + 1.0)),
        2 => (1.0 - mu * phi) / ((1.0 - phi * phi) * (1.0 - c * mu * phi)),
        3 => {
            let num = c * mu * phi * phi - mu * mu - mu + 1.0;
            let den = (1.0 - phi) * (c * phi - 1.0) * (c * mu * phi * phi + mu * mu - mu - 1.0);
            num / den
        }
        4 => {
            let phi3 = phi * phi * phi;
            let num = c * mu * phi3 - (2.0 - alpha) * mu * phi + 1.0;
            let den =
                (1.0 - phi * phi) * (c * c * mu * phi3 + (3.0 * alpha - 2.0) * mu * phi + 1.0);
            num / den
        }
        _ => {
            return Err(crate::error::Error::Parameter(format!(
                "closed forms exist for theta in 1..=4, got {theta}"
            )))
        }
    };
    Ok(value)
}

/// `1/(1 − φ²)`, shared by the memoryless (`α = 1`) and pure-memory (`α = 0`) cases.
pub fn memoryless_contribution(phi: f64) -> Result<f64> {
    ensure_param!(phi.abs() < 1.0, "|phi| = {} >= 1", phi.abs());
    Ok(1.0 / (1.0 - phi * phi))
}

/// `2/(2 − φ²)`: the `θ → ∞` limit at `α = 1/2`.
pub fn limit_half_alpha_contribution(phi: f64) -> f64 {
    2.0 / (2.0 - phi * phi)
}
