use std::fs;
use std::io::{self, Write};
use std::path::Path;

use memcons_core::graph::{generate_graph, read_edge_list, Family, WeightedGraph};
use memcons_core::h2::{
    h2, h2_closed_small_theta, h2_gramian_bruteforce, h2_half_alpha, h2_limit_half_alpha,
    h2_lyapunov_oracle, h2_memoryless, h2_pure_memory, h2_table_ii,
};
use memcons_core::search::figures::{fig1, fig2, fig3, fig4, fig5, Topology};
use memcons_core::search::{
    default_param_grids, interior_grid, optimal_depth, optimal_params, sweep_beta, DepthMethod,
};
use memcons_core::simulate::{estimate_msd, simulate_noise_free, NormalStream};
use memcons_core::stability::consensus_region;
use memcons_core::{Error, ProtocolParams, Result, SimConfig, Spectrum};
use serde::Serialize;

use crate::args::*;

fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(io::Error::other(e)))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn to_csv<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(io::Error::other(e.to_string())))
}

fn emit(out: &OutArgs, bytes: Vec<u8>) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, bytes)?,
        None => match io::stdout().lock().write_all(&bytes) {
            // a closed pipe (`| head`) is a normal way to stop reading
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn render<T: Serialize, R: Serialize>(
    out: &OutArgs,
    json: &T,
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    let bytes = match out.format {
        Format::Json => to_json(json)?,
        Format::Csv => to_csv(rows)?,
    };
    emit(out, bytes)
}

fn build_graph(g: &GraphArgs) -> Result<WeightedGraph> {
    if let Some(path) = &g.graph_file {
        return read_edge_list(path);
    }
    let fam = g
        .family
        .ok_or_else(|| param("either --family or --graph-file is required"))?;
    let n = g.n.ok_or_else(|| param("--n is required with --family"))?;
    let d = match (fam.d, g.d) {
        (Some(a), Some(b)) if a != b => {
            return Err(param(format!("--family ring{a} conflicts with --d {b}")))
        }
        (a, b) => a.or(b),
    };
    if fam.family == Family::RingLattice && d.is_none() {
        return Err(param("ring lattices need --d or a ring<d> family"));
    }
    if fam.family == Family::BarabasiAlbert && g.seed.is_none() {
        return Err(param("random graphs require --seed"));
    }
    generate_graph(fam.family, n, d, Some(g.m), g.seed)
}

fn resolve_beta(b: &BetaArgs, spec: &Spectrum) -> Result<Option<f64>> {
    Ok(match (b.beta, b.beta_rel) {
        (Some(beta), _) => Some(beta),
        (None, Some(x)) => Some(x * spec.beta_bound()),
        (None, None) => None,
    })
}

fn require_beta(b: &BetaArgs, spec: &Spectrum) -> Result<f64> {
    resolve_beta(b, spec)?.ok_or_else(|| param("--beta or --beta-rel is required"))
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| param("stochastic jobs require --seed"))
}

fn sim_config(seed: u64, s: &SimArgs) -> Result<SimConfig> {
    let cfg = SimConfig {
        seed,
        trials: s.trials,
        horizon: s.horizon,
        burn_in: s.burn_in,
        init_scale: 0.0,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    edge_count: usize,
    /// 1-based endpoints.
    edges: Vec<(usize, usize, f64)>,
    eigenvalues: Vec<f64>,
    lambda2: f64,
    lambda_n: f64,
    connected: bool,
    beta_bound: f64,
}

#[derive(Serialize)]
struct EdgeRow {
    i: usize,
    j: usize,
    w: f64,
}

pub fn graph(cmd: &GraphCmd) -> Result<()> {
    let g = build_graph(&cmd.graph)?;
    let spec = g.spectrum()?;
    let edges: Vec<_> = g.edges().map(|(i, j, w)| (i + 1, j + 1, w)).collect();
    let summary = GraphSummary {
        n: g.n(),
        edge_count: edges.len(),
        eigenvalues: spec.eigenvalues().to_vec(),
        lambda2: spec.lambda2(),
        lambda_n: spec.lambda_max(),
        connected: spec.is_connected(),
        beta_bound: spec.beta_bound(),
        edges,
    };
    let rows = summary.edges.iter().map(|&(i, j, w)| EdgeRow { i, j, w });
    render(&cmd.out, &summary, rows)
}

#[derive(Serialize)]
struct RegionRow {
    alpha: f64,
    beta: f64,
    stable: bool,
}

pub fn region(cmd: &RegionCmd) -> Result<()> {
    let spec = build_graph(&cmd.graph)?.spectrum()?;
    if cmd.alpha_steps == 0 || cmd.beta_steps == 0 {
        return Err(param("grid steps must be positive"));
    }
    let alphas = interior_grid(0.0, 1.0, cmd.alpha_steps);
    let top = 2.0 * spec.beta_bound();
    let betas: Vec<f64> = (1..=cmd.beta_steps)
        .map(|k| top * k as f64 / cmd.beta_steps as f64)
        .collect();
    let region = consensus_region(&spec, cmd.theta, &alphas, &betas)?;
    let rows = region.cells().map(|(alpha, beta, stable)| RegionRow {
        alpha,
        beta,
        stable,
    });
    render(&cmd.out, &region, rows)
}

#[derive(Serialize)]
struct ModeRow {
    lambda: f64,
    multiplicity: usize,
    contribution: f64,
}

pub fn h2_job(cmd: &H2Cmd) -> Result<()> {
    let g = build_graph(&cmd.graph)?;
    let spec = g.spectrum()?;
    let beta = require_beta(&cmd.beta, &spec)?;
    let params = ProtocolParams::new(cmd.alpha, beta, cmd.theta)?;
    let report = match cmd.method {
        H2MethodArg::GramianBruteforce => {
            let est = h2_gramian_bruteforce(&g, &params, cmd.horizon)?;
            return render(&cmd.out, &est, [est]);
        }
        H2MethodArg::Auto => h2(&spec, &params)?,
        H2MethodArg::TableIi => h2_table_ii(&spec, &params)?,
        H2MethodArg::ClosedSmallTheta => h2_closed_small_theta(&spec, &params)?,
        H2MethodArg::HalfAlphaCf => h2_half_alpha(&spec, beta, cmd.theta)?,
        H2MethodArg::Memoryless => h2_memoryless(&spec, beta)?,
        H2MethodArg::PureMemory => h2_pure_memory(&spec, beta, cmd.theta)?,
        H2MethodArg::LyapunovOracle => h2_lyapunov_oracle(&spec, &params)?,
        H2MethodArg::LimitHalfAlpha => h2_limit_half_alpha(&spec, beta)?,
    };
    let rows = report.per_mode.iter().map(|m| ModeRow {
        lambda: m.lambda,
        multiplicity: m.multiplicity,
        contribution: m.contribution,
    });
    render(&cmd.out, &report, rows)
}

#[derive(Serialize)]
struct TraceRow {
    t: usize,
    disagreement: f64,
}

pub fn simulate(cmd: &SimulateCmd) -> Result<()> {
    let seed = require_seed(cmd.graph.seed)?;
    let cfg = sim_config(seed, &cmd.sim)?;
    let g = build_graph(&cmd.graph)?;
    let spec = g.spectrum()?;
    let beta = require_beta(&cmd.beta, &spec)?;
    let params = ProtocolParams::new(cmd.alpha, beta, cmd.theta)?;
    let result = estimate_msd(&g, &params, &cfg)?;
    if let Some(path) = &cmd.trace {
        // stream index past every trial so the history is independent of the noise
        let mut rng = NormalStream::new(seed, cfg.trials as u64);
        let history: Vec<Vec<f64>> = (0..=cmd.theta)
            .map(|_| (0..g.n()).map(|_| rng.next_normal()).collect())
            .collect();
        let traj = simulate_noise_free(&g, &params, &history, cfg.horizon)?;
        let rows = traj
            .into_iter()
            .enumerate()
            .map(|(t, disagreement)| TraceRow { t, disagreement });
        write_file(path, to_csv(rows)?)?;
    }
    render(&cmd.out, &result, [result])
}

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    fs::write(path, bytes)?;
    Ok(())
}

#[derive(Serialize)]
struct DepthRow {
    theta: usize,
    h2: f64,
}

#[derive(Serialize)]
struct SweepCsvRow {
    beta: f64,
    optimal_theta: Option<usize>,
    h2: Option<f64>,
    region: &'static str,
}

pub fn optimal_depth_job(cmd: &DepthCmd) -> Result<()> {
    let g = build_graph(&cmd.graph)?;
    let spec = g.spectrum()?;
    let method = match cmd.method {
        DepthMethodArg::Analytic => DepthMethod::Analytic,
        DepthMethodArg::Simulate => DepthMethod::Simulate {
            graph: &g,
            config: sim_config(require_seed(cmd.graph.seed)?, &cmd.sim)?,
        },
    };
    match resolve_beta(&cmd.beta, &spec)? {
        Some(beta) => {
            let r = optimal_depth(&spec, cmd.alpha, beta, cmd.theta_max, method)?;
            let rows = r.values.iter().map(|v| DepthRow {
                theta: v.theta,
                h2: v.h2,
            });
            render(&cmd.out, &r, rows)
        }
        None => {
            if cmd.method == DepthMethodArg::Simulate {
                return Err(param(
                    "beta sweeps are analytic only; pass --beta for --method simulate",
                ));
            }
            if cmd.beta_steps == 0 {
                return Err(param("--beta-steps must be positive"));
            }
            let grid = interior_grid(0.0, spec.beta_bound(), cmd.beta_steps);
            let sweep = sweep_beta(&spec, cmd.alpha, cmd.theta_max, &grid)?;
            let rows = sweep.rows.iter().map(|r| SweepCsvRow {
                beta: r.beta,
                optimal_theta: r.optimal_theta,
                h2: r.h2,
                region: r.region.as_str(),
            });
            render(&cmd.out, &sweep, rows)
        }
    }
}

#[derive(Serialize)]
struct SurfaceRow {
    alpha: f64,
    beta: f64,
    h2: Option<f64>,
    stable: bool,
}

fn surface_rows(r: &memcons_core::search::ParamSearchResult) -> Vec<SurfaceRow> {
    r.cells()
        .map(|(alpha, beta, h2)| SurfaceRow {
            alpha,
            beta,
            h2,
            stable: h2.is_some(),
        })
        .collect()
}

pub fn optimal_params_job(cmd: &ParamsCmd) -> Result<()> {
    let spec = build_graph(&cmd.graph)?.spectrum()?;
    let (ag, _) = default_param_grids(&spec, cmd.alpha_steps);
    let (_, bg) = default_param_grids(&spec, cmd.beta_steps);
    let r = optimal_params(&spec, cmd.theta, &ag, &bg, cmd.refine)?;
    render(&cmd.out, &r, surface_rows(&r))
}

fn topology(f: FamilyArg) -> Result<Topology> {
    Ok(match f.family {
        Family::Complete => Topology::Complete,
        Family::Star => Topology::Star,
        Family::Chain => Topology::Chain,
        Family::RingLattice => {
            Topology::Ring(f.d.ok_or_else(|| param("fig1 needs ring<d>, e.g. ring2"))?)
        }
        Family::BarabasiAlbert => return Err(param("fig1 covers deterministic families only")),
    })
}

pub fn figure(cmd: &FigureCmd) -> Result<()> {
    if cmd.family.is_some() && cmd.id != FigureId::Fig1 {
        return Err(param("--family applies to fig1 only"));
    }
    let out = &cmd.out;
    match cmd.id {
        FigureId::Fig1 => {
            let families = match cmd.family {
                Some(f) => vec![topology(f)?],
                None => Topology::STANDARD.to_vec(),
            };
            let rows = fig1(
                &families,
                cmd.n.unwrap_or(20),
                cmd.theta_max,
                cmd.beta_steps.unwrap_or(100),
            )?;
            render(out, &rows, &rows)
        }
        FigureId::Fig2 => {
            let rows = fig2(
                cmd.n.unwrap_or(15),
                cmd.theta_max,
                cmd.alpha_steps.unwrap_or(49),
            )?;
            render(out, &rows, &rows)
        }
        FigureId::Fig3 => {
            let rows = fig3(cmd.n.unwrap_or(20), cmd.theta_max)?;
            render(out, &rows, &rows)
        }
        FigureId::Fig4 => {
            let f = fig4(
                cmd.n.unwrap_or(20),
                cmd.alpha_steps.unwrap_or(60),
                cmd.refine,
            )?;
            render(out, &f, surface_rows(&f.search))
        }
        FigureId::Fig5 => {
            let seed = require_seed(cmd.seed)?;
            let rows = fig5(
                cmd.n.unwrap_or(50),
                cmd.m,
                seed,
                cmd.theta_max,
                cmd.alpha_steps.unwrap_or(30),
            )?;
            render(out, &rows, &rows)
        }
    }
}
