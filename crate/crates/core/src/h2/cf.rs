//! The continued fractions `ℱₙ(τ)` and `𝒢ₙ(τ)`, evaluated by the forward
//! recursion `xₙ₊₁ = 2/τ − 1/xₙ` from `ℱ₀ = 1` and `𝒢₀ = 1/τ`.

use crate::error::{ensure_param, Result};

fn check_tau(tau: f64) -> Result<()> {
    ensure_param!(
        tau.is_finite() && tau != 0.0 && tau.abs() < 1.0,
        "tau must lie in (-1, 0) or (0, 1), got {tau}"
    );
    Ok(())
}

fn forward(n: usize, tau: f64, start: f64) -> f64 {
    let lead = 2.0 / tau;
    (0..n).fold(start, |x, _| lead - 1.0 / x)
}

pub fn cf_f(n: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(forward(n, tau, 1.0))
}

pub fn cf_g(n: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(forward(n, tau, 1.0 / tau))
}

/// Per-mode contribution at `α = 1/2`:
/// `ϖ = (φ − 2ℋ) / ((φ² − 2)ℋ + φ)` with `ℋ = ℱ_{ι−1}(φ)` for odd `θ` and
/// `𝒢_{ι−1}(φ)` for even `θ`. Returns 1 for `φ = 0`.
pub fn half_alpha_contribution(phi: f64, theta: usize) -> Result<f64> {
    ensure_param!(theta >= 1, "memory depth must be >= 1");
    if phi.abs() <= super::TOL_PHI {
        return Ok(1.0);
    }
    let order = theta.div_ceil(2) - 1;
    let h = if theta % 2 == 1 {
        cf_f(order, phi)?
    } else {
        cf_g(order, phi)?
    };
    Ok((phi - 2.0 * h) / ((phi * phi - 2.0) * h + phi))
}
