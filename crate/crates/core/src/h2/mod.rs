//! The H₂ performance metric `‖T_{α,β,θ}(z)‖₂²`, i.e. the steady-state total
//! mean-square deviation of the noisy network.
//!
//! Every route decomposes over the nonzero Laplacian eigenvalues: the metric
//! is a sum of per-mode contributions, each depending only on
//! `φ = 1 − βλ`, `α` and `θ`. Repeated eigenvalues are evaluated once and
//! weighted by multiplicity.

mod cf;
mod closed;
mod modes;
mod oracle;
mod table_ii;

use nalgebra::LU;
use serde::Serialize;

use crate::error::{ensure_param, ensure_pre, Error, Result};
use crate::graph::Spectrum;
use crate::stability::{consensus_check, ProtocolParams};

pub use cf::{cf_f, cf_g, half_alpha_contribution};
pub use closed::{
    closed_small_theta_contribution, limit_half_alpha_contribution, memoryless_contribution,
};
pub use modes::{mode_quantities, ModeQuantities};
pub use oracle::{
    discrete_lyapunov_last_input, h2_gramian_bruteforce, lyapunov_contribution, mode_state_matrix,
    GramianEstimate, GRAMIAN_MAX_DIM,
};
pub use table_ii::{table_ii_system, TOL_PHI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TableIi,
    ClosedSmallTheta,
    HalfAlphaCf,
    Memoryless,
    PureMemory,
    LyapunovOracle,
    GramianBruteforce,
    LimitHalfAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeContribution {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Total over all copies of this eigenvalue.
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: usize,
}

/// Metric value with its per-eigenvalue breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub method: Method,
    pub value: f64,
    pub per_mode: Vec<ModeContribution>,
    pub params: ReportParams,
}

fn assemble(
    spec: &Spectrum,
    method: Method,
    params: ReportParams,
    mut per_mode: impl FnMut(usize, f64) -> Result<f64>,
) -> Result<H2Report> {
    let per_mode = spec
        .modes()
        .into_iter()
        .enumerate()
        .map(|(idx, m)| {
            let c = per_mode(idx, m.lambda)?;
            Ok(ModeContribution {
                lambda: m.lambda,
                multiplicity: m.multiplicity,
                contribution: c * m.multiplicity as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = per_mode.iter().map(|m| m.contribution).sum();
    Ok(H2Report {
        method,
        value,
        per_mode,
        params,
    })
}

/// Rejects LU factors whose smallest pivot is negligible next to the largest.
pub(crate) fn well_conditioned_pivots(pivots: &[f64]) -> bool {
    let max = pivots.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    let min = pivots.iter().fold(f64::INFINITY, |m, p| m.min(p.abs()));
    max > 0.0 && min > 1e-13 * max
}

fn report_params(p: &ProtocolParams) -> ReportParams {
    ReportParams {
        alpha: p.alpha(),
        beta: p.beta(),
        theta: p.theta(),
    }
}

fn require_beta_range(spec: &Spectrum, beta: f64) -> Result<()> {
    ensure_pre!(spec.is_connected(), "graph is disconnected");
    ensure_pre!(
        beta > 0.0 && beta < spec.beta_bound(),
        "beta = {beta} outside (0, 2/lambda_n = {})",
        spec.beta_bound()
    );
    Ok(())
}

fn require_consensus(spec: &Spectrum, params: &ProtocolParams) -> Result<()> {
    ensure_pre!(
        consensus_check(spec, params)?,
        "(alpha = {}, beta = {}) is outside the depth-{} consensus region",
        params.alpha(),
        params.beta(),
        params.theta()
    );
    Ok(())
}

fn require_interior_alpha(alpha: f64) -> Result<()> {
    ensure_param!(
        alpha > 0.0 && alpha < 1.0,
        "general formula needs alpha in (0, 1), got {alpha}; use the memoryless or pure-memory forms"
    );
    Ok(())
}

/// Per-mode value `(−1 − ζw)/η` with `w` the last component of the solution
/// of the reduced system; `1` when `φ = 0`.
pub fn table_ii_contribution(alpha: f64, beta: f64, theta: usize, lambda: f64) -> Result<f64> {
    let mq = mode_quantities(alpha, beta, theta, lambda);
    if mq.phi.abs() <= TOL_PHI {
        return Ok(1.0);
    }
    let (gamma, xi) = table_ii_system(theta, alpha, &mq)?;
    let lu = LU::new(gamma);
    let singular = || Error::Numeric(format!("singular reduced system for lambda = {lambda}"));
    if !well_conditioned_pivots(lu.u().diagonal().as_slice()) {
        return Err(singular());
    }
    let w = lu.solve(&xi).ok_or_else(singular)?;
    let last = w[w.len() - 1];
    Ok((-1.0 - mq.zeta * last) / mq.eta)
}

/// General-`α` metric via the reduced linear systems.
pub fn h2_table_ii(spec: &Spectrum, params: &ProtocolParams) -> Result<H2Report> {
    require_interior_alpha(params.alpha())?;
    require_beta_range(spec, params.beta())?;
    require_consensus(spec, params)?;
    let (a, b, t) = (params.alpha(), params.beta(), params.theta());
    assemble(
        spec,
        Method::TableIi,
        report_params(params),
        |idx, lambda| {
            table_ii_contribution(a, b, t, lambda).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("mode {}: {msg}", idx + 2)),
                other => other,
            })
        },
    )
}

/// Explicit rational expressions for `θ ≤ 4`.
pub fn h2_closed_small_theta(spec: &Spectrum, params: &ProtocolParams) -> Result<H2Report> {
    ensure_param!(
        (1..=4).contains(&params.theta()),
        "closed forms exist for theta in 1..=4, got {}",
        params.theta()
    );
    require_interior_alpha(params.alpha())?;
    require_beta_range(spec, params.beta())?;
    require_consensus(spec, params)?;
    let (a, b, t) = (params.alpha(), params.beta(), params.theta());
    assemble(
        spec,
        Method::ClosedSmallTheta,
        report_params(params),
        |_, lambda| closed_small_theta_contribution(a, 1.0 - b * lambda, t),
    )
}

/// `α = 1/2` metric through the continued fractions.
pub fn h2_half_alpha(spec: &Spectrum, beta: f64, theta: usize) -> Result<H2Report> {
    let params = ProtocolParams::new(0.5, beta, theta)?;
    require_beta_range(spec, beta)?;
    require_consensus(spec, &params)?;
    assemble(
        spec,
        Method::HalfAlphaCf,
        report_params(&params),
        |_, lambda| half_alpha_contribution(1.0 - beta * lambda, theta),
    )
}

/// `α = 1`: `Σ 1/(1 − φᵢ²)`.
pub fn h2_memoryless(spec: &Spectrum, beta: f64) -> Result<H2Report> {
    require_beta_range(spec, beta)?;
    let params = ReportParams {
        alpha: 1.0,
        beta,
        theta: 1,
    };
    assemble(spec, Method::Memoryless, params, |_, lambda| {
        memoryless_contribution(1.0 - beta * lambda)
    })
}

/// `α = 0`: identical to the memoryless value for every depth.
pub fn h2_pure_memory(spec: &Spectrum, beta: f64, theta: usize) -> Result<H2Report> {
    ensure_param!(theta >= 1, "memory depth must be >= 1");
    require_beta_range(spec, beta)?;
    let params = ReportParams {
        alpha: 0.0,
        beta,
        theta,
    };
    assemble(spec, Method::PureMemory, params, |_, lambda| {
        memoryless_contribution(1.0 - beta * lambda)
    })
}

/// `θ → ∞` at `α = 1/2`: `Σ 2/(2 − φᵢ²)`.
///
/// The finite-depth values computed by every other route settle instead at
/// `Σ 1/√(1 − φᵢ²)`, the fixed point of the continued-fraction recursion;
/// the two agree only when every `φᵢ = 0`.
pub fn h2_limit_half_alpha(spec: &Spectrum, beta: f64) -> Result<H2Report> {
    require_beta_range(spec, beta)?;
    let params = ReportParams {
        alpha: 0.5,
        beta,
        theta: 0,
    };
    assemble(spec, Method::LimitHalfAlpha, params, |_, lambda| {
        Ok(limit_half_alpha_contribution(1.0 - beta * lambda))
    })
}

/// Per-mode discrete Lyapunov solve. Valid anywhere in the consensus
/// region, including `α ∈ {0, 1}` and `β ≥ 2/λₙ`.
pub fn h2_lyapunov_oracle(spec: &Spectrum, params: &ProtocolParams) -> Result<H2Report> {
    require_consensus(spec, params)?;
    let (a, b, t) = (params.alpha(), params.beta(), params.theta());
    assemble(
        spec,
        Method::LyapunovOracle,
        report_params(params),
        |idx, lambda| {
            lyapunov_contribution(a, 1.0 - b * lambda, t).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("mode {}: {msg}", idx + 2)),
                other => other,
            })
        },
    )
}

/// Default route: the closed forms at the endpoints `α ∈ {0, 1}`, the
/// reduced systems for interior `α`, and the Lyapunov oracle once
/// `β ≥ 2/λₙ`, where the closed-form analysis does not apply.
pub fn h2(spec: &Spectrum, params: &ProtocolParams) -> Result<H2Report> {
    ensure_pre!(spec.is_connected(), "graph is disconnected");
    if params.beta() >= spec.beta_bound() {
        return h2_lyapunov_oracle(spec, params);
    }
    if params.alpha() == 1.0 {
        let mut r = h2_memoryless(spec, params.beta())?;
        r.params.theta = params.theta();
        Ok(r)
    } else if params.alpha() == 0.0 {
        h2_pure_memory(spec, params.beta(), params.theta())
    } else {
        h2_table_ii(spec, params)
    }
}
