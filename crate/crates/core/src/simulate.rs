//! Time-domain simulation of the memory protocol.
//!
//! Agents keep a ring buffer of the last `θ+1` values of
//! `φ(t) = (I − βL) x(t)` and update `x(t+1) = α φ(t) + (1−α) φ(t−θ) + ω(t)`.
//!
//! Noise is reproducible bit for bit: trial `k` draws from a ChaCha8 stream
//! seeded with `seed` and stream id `k`, and standard normals come from the
//! Box–Muller transform applied to consecutive uniforms `u₁, u₂`
//! (`u₁` mapped into `(0, 1]`), both outputs of each pair used in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, ensure_pre, Result};
use crate::graph::WeightedGraph;
use crate::stability::{consensus_check, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    /// Number of update steps per trial.
    pub horizon: usize,
    /// Steps discarded before averaging; samples are `t ∈ (burn_in, horizon]`.
    pub burn_in: usize,
    /// Standard deviation of the random initial history; zero starts at consensus.
    pub init_scale: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 64,
            horizon: 20_000,
            burn_in: 2_000,
            init_scale: 0.0,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_param!(self.trials >= 1, "trials must be >= 1");
        ensure_param!(
            self.burn_in < self.horizon,
            "burn_in ({}) must be < horizon ({})",
            self.burn_in,
            self.horizon
        );
        ensure_param!(
            self.init_scale.is_finite() && self.init_scale >= 0.0,
            "init_scale must be finite and >= 0"
        );
        Ok(())
    }
}

/// Monte Carlo estimate of the steady-state mean-square deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub msd_estimate: f64,
    /// Across-trial standard error; NaN for a single trial.
    pub std_error: f64,
    pub trials: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Standard normals by Box–Muller over a 64-bit ChaCha8 stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Sparse form of `I − βL` plus the ring buffer of past `φ` layers.
struct Protocol {
    n: usize,
    alpha: f64,
    beta: f64,
    theta: usize,
    neighbours: Vec<Vec<(usize, f64)>>,
    phi_layers: Vec<Vec<f64>>,
}

impl Protocol {
    fn new(g: &WeightedGraph, params: &ProtocolParams) -> Self {
        let n = g.n();
        let neighbours = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| g.weight(i, j) > 0.0)
                    .map(|j| (j, g.weight(i, j)))
                    .collect()
            })
            .collect();
        Self {
            n,
            alpha: params.alpha(),
            beta: params.beta(),
            theta: params.theta(),
            neighbours,
            phi_layers: vec![vec![0.0; n]; params.theta() + 1],
        }
    }

    fn phi_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, nb) in self.neighbours.iter().enumerate() {
            let coupling: f64 = nb.iter().map(|&(j, w)| w * (x[j] - x[i])).sum();
            out[i] = x[i] + self.beta * coupling;
        }
    }

    /// Loads `x(−θ), …, x(0)`; returns `x(0)`.
    fn load_history(&mut self, history: &[Vec<f64>]) -> Vec<f64> {
        let mut layers = std::mem::take(&mut self.phi_layers);
        for (k, x) in history.iter().enumerate() {
            // x(k−θ) lands in slot k, matching `step` at t = k − θ
            self.phi_into(x, &mut layers[k]);
        }
        self.phi_layers = layers;
        history[self.theta].clone()
    }

    /// Advances `x` from time `t` to `t+1`. The noise is added by the caller.
    fn step(&mut self, t: usize, x: &mut [f64]) {
        let slots = self.theta + 1;
        let current = (t + self.theta) % slots;
        let mut layer = std::mem::take(&mut self.phi_layers[current]);
        self.phi_into(x, &mut layer);
        self.phi_layers[current] = layer;
        let delayed = &self.phi_layers[t % slots];
        let now = &self.phi_layers[current];
        for i in 0..self.n {
            x[i] = self.alpha * now[i] + (1.0 - self.alpha) * delayed[i];
        }
    }
}

fn disagreement_sq(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Noise-free run from the initial history `x(−θ), …, x(0)` (oldest first).
/// Returns `‖Ψx(t)‖` for `t = 0..=horizon`.
pub fn simulate_noise_free(
    g: &WeightedGraph,
    params: &ProtocolParams,
    x0_history: &[Vec<f64>],
    horizon: usize,
) -> Result<Vec<f64>> {
    ensure_param!(horizon > 0, "horizon must be positive");
    ensure_param!(
        x0_history.len() == params.theta() + 1,
        "initial history needs theta + 1 = {} layers, got {}",
        params.theta() + 1,
        x0_history.len()
    );
    ensure_param!(
        x0_history.iter().all(|l| l.len() == g.n()),
        "every initial layer needs {} entries",
        g.n()
    );
    ensure_pre!(g.is_connected(), "graph is disconnected");

    let mut proto = Protocol::new(g, params);
    let mut x = proto.load_history(x0_history);
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(disagreement_sq(&x).sqrt());
    for t in 0..horizon {
        proto.step(t, &mut x);
        out.push(disagreement_sq(&x).sqrt());
    }
    Ok(out)
}

fn run_trial(g: &WeightedGraph, params: &ProtocolParams, cfg: &SimConfig, trial: usize) -> f64 {
    let n = g.n();
    let mut noise = NormalStream::new(cfg.seed, trial as u64);
    let history: Vec<Vec<f64>> = (0..=params.theta())
        .map(|_| {
            (0..n)
                .map(|_| {
                    if cfg.init_scale > 0.0 {
                        cfg.init_scale * noise.next_normal()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut proto = Protocol::new(g, params);
    let mut x = proto.load_history(&history);
    let mut acc = 0.0;
    for t in 0..cfg.horizon {
        proto.step(t, &mut x);
        for xi in x.iter_mut() {
            *xi += noise.next_normal();
        }
        if t + 1 > cfg.burn_in {
            acc += disagreement_sq(&x);
        }
    }
    acc / (cfg.horizon - cfg.burn_in) as f64
}

/// Time- and trial-averaged `εᵀε` under unit white noise.
///
/// Trials run in parallel; per-trial means are reduced in trial order, so the
/// result does not depend on the thread count.
pub fn estimate_msd(
    g: &WeightedGraph,
    params: &ProtocolParams,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    let spec = g.spectrum()?;
    ensure_pre!(
        consensus_check(&spec, params)?,
        "parameters do not reach consensus; the deviation diverges"
    );
    let means: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| run_trial(g, params, cfg, k))
        .collect();
    let trials = means.len() as f64;
    let msd = means.iter().sum::<f64>() / trials;
    let std_error = if means.len() > 1 {
        let var = means.iter().map(|m| (m - msd).powi(2)).sum::<f64>() / (trials - 1.0);
        (var / trials).sqrt()
    } else {
        f64::NAN
    };
    Ok(SimResult {
        msd_estimate: msd,
        std_error,
        trials: cfg.trials,
        horizon: cfg.horizon,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{chain, complete};

    fn p(alpha: f64, beta: f64, theta: usize) -> ProtocolParams {
        ProtocolParams::new(alpha, beta, theta).unwrap()
    }

    #[test]
    fn constant_history_stays_at_consensus() {
        let g = chain(5).unwrap();
        let hist = vec![vec![2.5; 5]; 4];
        let traj = simulate_noise_free(&g, &p(0.4, 0.3, 3), &hist, 50).unwrap();
        assert!(traj.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn k3_decays_geometrically() {
        let g = complete(3).unwrap();
        let hist = vec![vec![1.0, -2.0, 0.5], vec![0.3, 0.1, -1.0]];
        let traj = simulate_noise_free(&g, &p(0.5, 1.0 / 6.0, 1), &hist, 40).unwrap();
        let rate = (traj[40] / traj[20]).powf(1.0 / 20.0);
        // dominant root (0.25 + sqrt(1.0625)) / 2
        assert!((rate - 0.640388).abs() < 1e-3, "rate {rate}");
    }

    #[test]
    fn k3_memoryless_diverges_beyond_bound() {
        let g = complete(3).unwrap();
        let hist = vec![vec![1.0, 0.0, -1.0]; 2];
        let traj = simulate_noise_free(&g, &p(1.0, 0.7, 1), &hist, 100).unwrap();
        assert!(traj[100] > 100.0 * traj[0]);
    }

    #[test]
    fn noise_free_matches_augmented_matrix_iteration() {
        let g = chain(4).unwrap();
        let params = p(0.3, 0.4, 2);
        let hist = vec![
            vec![1.0, 0.0, 0.0, -1.0],
            vec![0.5, 0.5, -0.2, 0.1],
            vec![0.0, 1.0, 2.0, 0.0],
        ];
        let traj = simulate_noise_free(&g, &params, &hist, 10).unwrap();

        let phi = nalgebra::DMatrix::identity(4, 4) - g.laplacian() * 0.4;
        let mut layers: Vec<nalgebra::DVector<f64>> = hist
            .iter()
            .map(|l| nalgebra::DVector::from_column_slice(l))
            .collect();
        for t in 0..10 {
            let next = &phi * (&layers[2] * 0.3 + &layers[0] * 0.7);
            layers.remove(0);
            layers.push(next);
            let x = &layers[2];
            let mean = x.mean();
            let d = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
            assert!((d - traj[t + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_is_bit_reproducible() {
        let g = complete(3).unwrap();
        let cfg = SimConfig {
            seed: 42,
            trials: 4,
            horizon: 500,
            burn_in: 100,
            init_scale: 0.5,
        };
        let a = estimate_msd(&g, &p(0.5, 1.0 / 6.0, 1), &cfg).unwrap();
        let b = estimate_msd(&g, &p(0.5, 1.0 / 6.0, 1), &cfg).unwrap();
        assert_eq!(a.msd_estimate.to_bits(), b.msd_estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = estimate_msd(&g, &p(0.5, 1.0 / 6.0, 1), &SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.msd_estimate, c.msd_estimate);
    }

    #[test]
    fn box_muller_moments() {
        let mut s = NormalStream::new(7, 3);
        let xs: Vec<f64> = (0..200_000).map(|_| s.next_normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn errors() {
        let g = complete(3).unwrap();
        let params = p(0.5, 1.0 / 6.0, 1);
        assert!(simulate_noise_free(&g, &params, &vec![vec![0.0; 3]; 2], 0).is_err());
        assert!(simulate_noise_free(&g, &params, &vec![vec![0.0; 3]; 3], 5).is_err());
        let bad = SimConfig {
            burn_in: 10,
            horizon: 10,
            ..SimConfig::default()
        };
        assert_eq!(estimate_msd(&g, &params, &bad).unwrap_err().exit_code(), 2);
        let unstable = p(1.0, 0.7, 1);
        assert_eq!(
            estimate_msd(&g, &unstable, &SimConfig::default())
                .unwrap_err()
                .exit_code(),
            3
        );
    }
}
