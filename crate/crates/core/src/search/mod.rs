//! Memory-depth and parameter search, plus the sweeps behind the figures.

pub mod figures;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_param, ensure_pre, Result};
use crate::graph::{Spectrum, WeightedGraph};
use crate::h2::{h2, h2_table_ii};
use crate::simulate::{estimate_msd, SimConfig};
use crate::stability::{consensus_check, ProtocolParams};

/// Relative margin below which two metric values count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Position of `β` relative to `1/λₙ`, `1/λ₂` and `2/λₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRegion {
    /// `0 < β ≤ 1/λₙ`: deepest memory is optimal at `α = 1/2`.
    Low,
    /// `1/λ₂ ≤ β < 2/λₙ`: depth one is optimal at `α = 1/2`.
    High,
    /// `1/λₙ < β < 1/λ₂`.
    Middle,
    OutOfRange,
}

impl BetaRegion {
    pub fn classify(spec: &Spectrum, beta: f64) -> Self {
        let slack = 1.0 + 1e-12;
        let (inv_l2, inv_ln) = (1.0 / spec.lambda2(), 1.0 / spec.lambda_max());
        if !(beta > 0.0 && beta < spec.beta_bound()) {
            BetaRegion::OutOfRange
        } else if beta <= inv_ln * slack {
            BetaRegion::Low
        } else if beta * slack >= inv_l2 {
            BetaRegion::High
        } else {
            BetaRegion::Middle
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BetaRegion::Low => "low",
            BetaRegion::High => "high",
            BetaRegion::Middle => "middle",
            BetaRegion::OutOfRange => "out_of_range",
        }
    }
}

fn better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE_TOL * incumbent.abs()
}

/// How each depth is scored.
#[derive(Debug, Clone, Copy)]
pub enum DepthMethod<'a> {
    /// Analytic metric via [`crate::h2::h2`].
    Analytic,
    /// Monte Carlo estimate on `graph`, which must have the searched spectrum.
    Simulate {
        graph: &'a WeightedGraph,
        config: SimConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthValue {
    pub theta: usize,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthSearchResult {
    pub optimal_theta: usize,
    pub optimal_value: f64,
    /// Metric for each stable depth `1..=stable_theta_max`.
    pub values: Vec<DepthValue>,
    pub beta_region: BetaRegion,
    /// Largest depth of the stable prefix; below `theta_max` when deeper
    /// memory loses consensus.
    pub stable_theta_max: usize,
    pub theta_max: usize,
}

/// Scores depths `1..=θ̂` and returns the minimiser, ties going to the
/// smallest depth. Only the stable prefix of depths is evaluated.
pub fn optimal_depth(
    spec: &Spectrum,
    alpha: f64,
    beta: f64,
    theta_max: usize,
    method: DepthMethod<'_>,
) -> Result<DepthSearchResult> {
    ensure_param!(theta_max >= 1, "theta_max must be >= 1");
    let mut values = Vec::with_capacity(theta_max);
    for theta in 1..=theta_max {
        let params = ProtocolParams::with_theta_max(alpha, beta, theta, theta_max)?;
        if !consensus_check(spec, &params)? {
            break;
        }
        let h2 = match method {
            DepthMethod::Analytic => h2(spec, &params)?.value,
            DepthMethod::Simulate { graph, config } => {
                estimate_msd(graph, &params, &config)?.msd_estimate
            }
        };
        values.push(DepthValue { theta, h2 });
    }
    ensure_pre!(
        !values.is_empty(),
        "no memory depth reaches consensus at alpha = {alpha}, beta = {beta}"
    );
    let best = values
        .iter()
        .skip(1)
        .fold(values[0], |b, v| if better(v.h2, b.h2) { *v } else { b });
    Ok(DepthSearchResult {
        optimal_theta: best.theta,
        optimal_value: best.h2,
        stable_theta_max: values.len(),
        values,
        beta_region: BetaRegion::classify(spec, beta),
        theta_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineStep {
    pub round: usize,
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSearchResult {
    pub theta: usize,
    pub alpha_opt: f64,
    pub beta_opt: f64,
    pub value: f64,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    /// Coarse-grid metric, `None` where consensus fails.
    pub grid_values: Vec<Vec<Option<f64>>>,
    /// Incumbent after the coarse scan (round 0) and after each refinement.
    pub history: Vec<RefineStep>,
}

impl ParamSearchResult {
    /// Rows `(alpha, beta, h2)` of the coarse grid in alpha-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        self.alpha_grid.iter().enumerate().flat_map(move |(i, &a)| {
            self.beta_grid
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, self.grid_values[i][j]))
        })
    }
}

fn metric_if_stable(spec: &Spectrum, alpha: f64, beta: f64, theta: usize) -> Result<Option<f64>> {
    let params = ProtocolParams::new(alpha, beta, theta)?;
    if !consensus_check(spec, &params)? {
        return Ok(None);
    }
    Ok(Some(h2_table_ii(spec, &params)?.value))
}

fn grid_step(grid: &[f64], lo: f64, hi: f64) -> f64 {
    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if grid.len() > 1 && max > min {
        (max - min) / (grid.len() - 1) as f64
    } else {
        (min - lo).min(hi - min) / 2.0
    }
}

/// Evenly spaced interior grid: `lo + (hi − lo)·k/(steps+1)`, `k = 1..=steps`.
pub fn interior_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps + 1) as f64)
        .collect()
}

/// Inclusive evenly spaced grid over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Default coarse grids: `60 × 60` over `[0.02, 0.98] × [0.02, 0.98]·(2/λₙ)`.
pub fn default_param_grids(spec: &Spectrum, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let bound = spec.beta_bound();
    (
        linspace(0.02, 0.98, steps),
        linspace(0.02 * bound, 0.98 * bound, steps),
    )
}

/// Coarse grid scan of the reduced-system metric followed by `refine_iters`
/// rounds of local refinement: each round halves the spacing and scans a
/// `5 × 5` stencil around the incumbent, which moves only on strict
/// improvement.
pub fn optimal_params(
    spec: &Spectrum,
    theta: usize,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    refine_iters: usize,
) -> Result<ParamSearchResult> {
    ensure_param!(
        !alpha_grid.is_empty() && !beta_grid.is_empty(),
        "grids must be nonempty"
    );
    ensure_param!(
        alpha_grid.iter().all(|a| *a > 0.0 && *a < 1.0),
        "alpha grid must lie in (0, 1)"
    );
    let bound = spec.beta_bound();
    ensure_param!(
        beta_grid.iter().all(|b| *b > 0.0 && *b < bound),
        "beta grid must lie in (0, 2/lambda_n = {bound})"
    );
    ensure_pre!(spec.is_connected(), "graph is disconnected");

    let grid_values = alpha_grid
        .par_iter()
        .map(|&a| {
            beta_grid
                .iter()
                .map(|&b| metric_if_stable(spec, a, b, theta))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, f64, f64)> = None;
    for (i, row) in grid_values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, _, bv)| better(v, bv)) {
                    best = Some((alpha_grid[i], beta_grid[j], v));
                }
            }
        }
    }
    let (mut a_opt, mut b_opt, mut value) =
        best.ok_or_else(|| crate::Error::Precondition("no grid cell reaches consensus".into()))?;
    let mut history = vec![RefineStep {
        round: 0,
        alpha: a_opt,
        beta: b_opt,
        value,
    }];

    let mut da = grid_step(alpha_grid, 0.0, 1.0);
    let mut db = grid_step(beta_grid, 0.0, bound);
    for round in 1..=refine_iters {
        da /= 2.0;
        db /= 2.0;
        let candidates: Vec<(f64, f64)> = (-2..=2_i32)
            .flat_map(|i| (-2..=2_i32).map(move |j| (i, j)))
            .filter(|&(i, j)| (i, j) != (0, 0))
            .map(|(i, j)| (a_opt + i as f64 * da, b_opt + j as f64 * db))
            .filter(|&(a, b)| a > 0.0 && a < 1.0 && b > 0.0 && b < bound)
            .collect();
        let scored = candidates
            .par_iter()
            .map(|&(a, b)| metric_if_stable(spec, a, b, theta))
            .collect::<Result<Vec<_>>>()?;
        for (&(a, b), v) in candidates.iter().zip(scored) {
            if let Some(v) = v {
                if better(v, value) {
                    (a_opt, b_opt, value) = (a, b, v);
                }
            }
        }
        history.push(RefineStep {
            round,
            alpha: a_opt,
            beta: b_opt,
            value,
        });
    }

    Ok(ParamSearchResult {
        theta,
        alpha_opt: a_opt,
        beta_opt: b_opt,
        value,
        alpha_grid: alpha_grid.to_vec(),
        beta_grid: beta_grid.to_vec(),
        grid_values,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceLines {
    pub inv_lambda2: f64,
    pub inv_lambda_n: f64,
    pub two_over_lambda_n: f64,
}

impl ReferenceLines {
    pub fn of(spec: &Spectrum) -> Self {
        Self {
            inv_lambda2: 1.0 / spec.lambda2(),
            inv_lambda_n: 1.0 / spec.lambda_max(),
            two_over_lambda_n: spec.beta_bound(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    /// `None` when no depth reaches consensus.
    pub optimal_theta: Option<usize>,
    pub h2: Option<f64>,
    pub region: BetaRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSweep {
    pub alpha: f64,
    pub theta_max: usize,
    pub reference: ReferenceLines,
    pub rows: Vec<SweepRow>,
}

/// Optimal depth and metric for each `β` of the grid.
pub fn sweep_beta(
    spec: &Spectrum,
    alpha: f64,
    theta_max: usize,
    beta_grid: &[f64],
) -> Result<BetaSweep> {
    let bound = spec.beta_bound();
    ensure_param!(
        beta_grid.iter().all(|b| *b > 0.0 && *b < bound),
        "beta grid must lie in (0, 2/lambda_n = {bound})"
    );
    ensure_pre!(spec.is_connected(), "graph is disconnected");
    let rows = beta_grid
        .par_iter()
        .map(|&beta| {
            let region = BetaRegion::classify(spec, beta);
            match optimal_depth(spec, alpha, beta, theta_max, DepthMethod::Analytic) {
                Ok(r) => Ok(SweepRow {
                    beta,
                    optimal_theta: Some(r.optimal_theta),
                    h2: Some(r.optimal_value),
                    region,
                }),
                Err(crate::Error::Precondition(_)) => Ok(SweepRow {
                    beta,
                    optimal_theta: None,
                    h2: None,
                    region,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BetaSweep {
        alpha,
        theta_max,
        reference: ReferenceLines::of(spec),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, ring_lattice};

    fn k3() -> Spectrum {
        complete(3).unwrap().spectrum().unwrap()
    }

    #[test]
    fn low_beta_prefers_deepest_memory() {
        let r = optimal_depth(&k3(), 0.5, 1.0 / 6.0, 10, DepthMethod::Analytic).unwrap();
        assert_eq!(r.optimal_theta, 10);
        assert_eq!(r.beta_region, BetaRegion::Low);
        assert_eq!(r.values.len(), 10);
        assert!((r.values[0].h2 - 2.4).abs() < 1e-12);
        assert!((r.values[1].h2 - 7.0 / 3.0).abs() < 1e-12);
        assert!((r.values[2].h2 - 44.0 / 19.0).abs() < 1e-12);
        assert!(r.values.iter().all(|v| v.h2 > 16.0 / 7.0));
    }

    #[test]
    fn high_beta_prefers_depth_one() {
        let r = optimal_depth(&k3(), 0.5, 0.5, 10, DepthMethod::Analytic).unwrap();
        assert_eq!(r.beta_region, BetaRegion::High);
        assert_eq!(r.optimal_theta, 1);
    }

    #[test]
    fn phi_zero_ties_go_to_depth_one() {
        let spec = complete(8).unwrap().spectrum().unwrap();
        let r = optimal_depth(&spec, 0.5, 1.0 / 8.0, 6, DepthMethod::Analytic).unwrap();
        assert_eq!(r.optimal_theta, 1);
        assert!(r.values.iter().all(|v| (v.h2 - 7.0).abs() < 1e-12));
    }

    #[test]
    fn stable_prefix_is_recorded() {
        // beta beyond 2/lambda_n: deep memory eventually loses consensus
        let r = optimal_depth(&k3(), 0.5, 0.7, 12, DepthMethod::Analytic).unwrap();
        assert!(r.stable_theta_max >= 1 && r.stable_theta_max < 12);
        assert_eq!(r.values.len(), r.stable_theta_max);
        assert_eq!(r.beta_region, BetaRegion::OutOfRange);
        assert_eq!(
            optimal_depth(&k3(), 1.0, 0.7, 3, DepthMethod::Analytic)
                .unwrap_err()
                .exit_code(),
            3
        );
    }

    #[test]
    fn simulated_depth_search_runs() {
        let g = complete(3).unwrap();
        let cfg = SimConfig {
            seed: 5,
            trials: 8,
            horizon: 4000,
            burn_in: 400,
            init_scale: 0.0,
        };
        let r = optimal_depth(
            &k3(),
            0.5,
            0.5,
            3,
            DepthMethod::Simulate {
                graph: &g,
                config: cfg,
            },
        )
        .unwrap();
        assert_eq!(r.values.len(), 3);
        assert!(r.values.iter().all(|v| v.h2 > 1.5 && v.h2 < 4.0));
    }

    #[test]
    fn complete_graph_optimum_sits_at_phi_zero() {
        let n = 6;
        let spec = complete(n).unwrap().spectrum().unwrap();
        let (ag, bg) = default_param_grids(&spec, 15);
        let r = optimal_params(&spec, 2, &ag, &bg, 6).unwrap();
        assert!((r.value - (n - 1) as f64).abs() < 1e-6, "{}", r.value);
        assert!((r.beta_opt - 1.0 / n as f64).abs() < 0.01);
        let again = optimal_params(&spec, 2, &ag, &bg, 6).unwrap();
        assert_eq!(r, again);
        for w in r.history.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn ring_lattice_optimum_is_interior() {
        let spec = ring_lattice(20, 2).unwrap().spectrum().unwrap();
        let (ag, bg) = default_param_grids(&spec, 20);
        let r = optimal_params(&spec, 1, &ag, &bg, 4).unwrap();
        assert!(r.alpha_opt > ag[0] && r.alpha_opt < ag[ag.len() - 1]);
        assert!(r.beta_opt > bg[0] && r.beta_opt < bg[bg.len() - 1]);
        let coarse = (ag[1] - ag[0]).max((bg[1] - bg[0]) / spec.beta_bound());
        let n = r.history.len();
        let moved_a = (r.history[n - 1].alpha - r.history[n - 2].alpha).abs();
        let moved_b = (r.history[n - 1].beta - r.history[n - 2].beta).abs() / spec.beta_bound();
        assert!(moved_a < coarse && moved_b < coarse);
    }

    #[test]
    fn sweep_marks_regions() {
        let spec = k3();
        let grid = interior_grid(0.0, spec.beta_bound(), 20);
        let s = sweep_beta(&spec, 0.5, 6, &grid).unwrap();
        assert_eq!(s.rows.len(), 20);
        for row in &s.rows {
            match row.region {
                BetaRegion::Low => assert_eq!(row.optimal_theta, Some(6)),
                BetaRegion::High => assert_eq!(row.optimal_theta, Some(1)),
                _ => {}
            }
        }
        assert!(sweep_beta(&spec, 0.5, 6, &[1.0]).is_err());
    }

    #[test]
    fn region_classification() {
        let spec = crate::graph::chain(5).unwrap().spectrum().unwrap();
        let ln = spec.lambda_max();
        assert_eq!(BetaRegion::classify(&spec, 0.5 / ln), BetaRegion::Low);
        assert_eq!(BetaRegion::classify(&spec, 1.0 / ln), BetaRegion::Low);
        assert_eq!(BetaRegion::classify(&spec, 1.5 / ln), BetaRegion::Middle);
        assert_eq!(
            BetaRegion::classify(&spec, 2.0 / ln),
            BetaRegion::OutOfRange
        );
        let k = k3();
        assert_eq!(BetaRegion::classify(&k, 0.4), BetaRegion::High);
    }
}
