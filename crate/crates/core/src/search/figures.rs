//! Data series for the standard plots. Each generator returns flat rows that
//! serialize directly to CSV or JSON.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    default_param_grids, interior_grid, linspace, optimal_depth, optimal_params, sweep_beta,
    BetaRegion, DepthMethod, ParamSearchResult,
};
use crate::error::{ensure_param, Result};
use crate::graph::{barabasi_albert, chain, complete, ring_lattice, star, Spectrum, WeightedGraph};
use crate::h2::h2;
use crate::stability::{consensus_check, ProtocolParams};

/// Deterministic topologies used across the figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Complete,
    Star,
    Chain,
    Ring(usize),
}

impl Topology {
    pub const STANDARD: [Topology; 6] = [
        Topology::Complete,
        Topology::Star,
        Topology::Chain,
        Topology::Ring(1),
        Topology::Ring(2),
        Topology::Ring(3),
    ];

    pub fn build(&self, n: usize) -> Result<WeightedGraph> {
        match *self {
            Topology::Complete => complete(n),
            Topology::Star => star(n),
            Topology::Chain => chain(n),
            Topology::Ring(d) => ring_lattice(n, d),
        }
    }

    /// Smallest size with a valid, non-degenerate instance.
    pub fn min_n(&self) -> usize {
        match *self {
            Topology::Complete | Topology::Chain => 2,
            Topology::Star => 3,
            Topology::Ring(d) => 2 * d + 2,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Topology::Complete => "K".into(),
            Topology::Star => "S".into(),
            Topology::Chain => "P".into(),
            Topology::Ring(d) => format!("C{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub graph: String,
    pub n: usize,
    pub beta: f64,
    pub optimal_theta: Option<usize>,
    pub h2: Option<f64>,
    pub region: BetaRegion,
    pub inv_lambda2: f64,
    pub inv_lambda_n: f64,
    pub two_over_lambda_n: f64,
}

/// Optimal depth over `(n, β)` at `α = 1/2` for each topology and size
/// `min_n..=n_max`; `β` runs over an interior grid of `(0, 2/λₙ)`.
pub fn fig1(
    topologies: &[Topology],
    n_max: usize,
    theta_max: usize,
    beta_steps: usize,
) -> Result<Vec<Fig1Row>> {
    ensure_param!(beta_steps >= 1, "beta_steps must be >= 1");
    let mut jobs = Vec::new();
    for t in topologies {
        for n in t.min_n().max(3)..=n_max {
            jobs.push((*t, n));
        }
    }
    let chunks = jobs
        .par_iter()
        .map(|&(t, n)| -> Result<Vec<Fig1Row>> {
            let spec = t.build(n)?.spectrum()?;
            let grid = interior_grid(0.0, spec.beta_bound(), beta_steps);
            let sweep = sweep_beta(&spec, 0.5, theta_max, &grid)?;
            let r = sweep.reference;
            Ok(sweep
                .rows
                .into_iter()
                .map(|row| Fig1Row {
                    graph: t.label(),
                    n,
                    beta: row.beta,
                    optimal_theta: row.optimal_theta,
                    h2: row.h2,
                    region: row.region,
                    inv_lambda2: r.inv_lambda2,
                    inv_lambda_n: r.inv_lambda_n,
                    two_over_lambda_n: r.two_over_lambda_n,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub graph: String,
    /// `β·λₙ`.
    pub beta_scaled: f64,
    pub beta: f64,
    pub alpha: f64,
    pub theta: usize,
    pub h2: Option<f64>,
    pub stable: bool,
}

fn curve_point(spec: &Spectrum, label: &str, c: f64, alpha: f64, theta: usize) -> Result<CurveRow> {
    let beta = c / spec.lambda_max();
    let params = ProtocolParams::new(alpha, beta, theta)?;
    let stable = consensus_check(spec, &params)?;
    let h2 = if stable {
        Some(h2(spec, &params)?.value)
    } else {
        None
    };
    Ok(CurveRow {
        graph: label.to_string(),
        beta_scaled: c,
        beta,
        alpha,
        theta,
        h2,
        stable,
    })
}

/// Metric against `α` on `K`, `C²` and `P` of size `n`, for `β = c/λₙ` with
/// `c ∈ {0.2, 1, 1.9}` and every depth `1..=θ̂`.
pub fn fig2(n: usize, theta_max: usize, alpha_steps: usize) -> Result<Vec<CurveRow>> {
    let topologies = [Topology::Complete, Topology::Ring(2), Topology::Chain];
    let alphas = linspace(0.02, 0.98, alpha_steps);
    let mut rows = Vec::new();
    for t in topologies {
        let spec = t.build(n)?.spectrum()?;
        for c in [0.2, 1.0, 1.9] {
            let chunk = (1..=theta_max)
                .into_par_iter()
                .map(|theta| {
                    alphas
                        .iter()
                        .map(|&a| curve_point(&spec, &t.label(), c, a, theta))
                        .collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            rows.extend(chunk.into_iter().flatten());
        }
    }
    Ok(rows)
}

/// Metric against depth at `α = 3/4` on the six standard topologies of size
/// `n`, for `β = 0.2/λₙ` and `β = 1.9/λₙ`.
pub fn fig3(n: usize, theta_max: usize) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for t in Topology::STANDARD {
        let spec = t.build(n)?.spectrum()?;
        for c in [0.2, 1.9] {
            for theta in 1..=theta_max {
                rows.push(curve_point(&spec, &t.label(), c, 0.75, theta)?);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4 {
    pub search: ParamSearchResult,
    /// For each `α`, the best `β` on the grid and its metric.
    pub best_beta_per_alpha: Vec<(f64, Option<f64>, Option<f64>)>,
    /// For each `β`, the best `α` on the grid and its metric.
    pub best_alpha_per_beta: Vec<(f64, Option<f64>, Option<f64>)>,
}

fn argmin_opt(vals: impl Iterator<Item = (f64, Option<f64>)>) -> (Option<f64>, Option<f64>) {
    let mut best: (Option<f64>, Option<f64>) = (None, None);
    for (x, v) in vals {
        if let Some(v) = v {
            if best.1.is_none_or(|b| v < b) {
                best = (Some(x), Some(v));
            }
        }
    }
    best
}

/// Metric surface over `(α, β)` for `C²` of size `n` at depth one, with the
/// refined joint optimum.
pub fn fig4(n: usize, steps: usize, refine: usize) -> Result<Fig4> {
    let spec = ring_lattice(n, 2)?.spectrum()?;
    let (ag, bg) = default_param_grids(&spec, steps);
    let search = optimal_params(&spec, 1, &ag, &bg, refine)?;
    let best_beta_per_alpha = ag
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let (b, v) = argmin_opt(
                bg.iter()
                    .copied()
                    .zip(search.grid_values[i].iter().copied()),
            );
            (a, b, v)
        })
        .collect();
    let best_alpha_per_beta = bg
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let (a, v) = argmin_opt(
                ag.iter()
                    .copied()
                    .zip(search.grid_values.iter().map(|r| r[j])),
            );
            (b, a, v)
        })
        .collect();
    Ok(Fig4 {
        search,
        best_beta_per_alpha,
        best_alpha_per_beta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig5Row {
    pub alpha: f64,
    pub beta: f64,
    pub optimal_theta: Option<usize>,
    pub h2: Option<f64>,
}

/// Optimal depth over an `(α, β)` grid on a seeded Barabási–Albert graph.
pub fn fig5(n: usize, m: usize, seed: u64, theta_max: usize, steps: usize) -> Result<Vec<Fig5Row>> {
    let spec = barabasi_albert(n, m, seed)?.spectrum()?;
    let (ag, bg) = default_param_grids(&spec, steps);
    let rows = ag
        .par_iter()
        .map(|&alpha| {
            bg.iter()
                .map(|&beta| {
                    match optimal_depth(&spec, alpha, beta, theta_max, DepthMethod::Analytic) {
                        Ok(r) => Ok(Fig5Row {
                            alpha,
                            beta,
                            optimal_theta: Some(r.optimal_theta),
                            h2: Some(r.optimal_value),
                        }),
                        Err(crate::Error::Precondition(_)) => Ok(Fig5Row {
                            alpha,
                            beta,
                            optimal_theta: None,
                            h2: None,
                        }),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
