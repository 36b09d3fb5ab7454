//! Consensus of the memory protocol, decided mode by mode.
//!
//! Each nonzero Laplacian eigenvalue `λ` contributes the trinomial
//! `γ^{θ+1} − α(1−βλ)γ^θ − (1−α)(1−βλ)`; the network reaches consensus iff
//! every such trinomial is Schur stable. Two independent Schur tests are
//! provided: companion-matrix root moduli and the Jury table.

use nalgebra::{linalg::Schur, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_param, ensure_pre, Error, Result};
use crate::graph::{Spectrum, TOL_CONN};

/// A root counts as inside the unit disk iff its modulus is below `1 − TOL_SCHUR`.
pub const TOL_SCHUR: f64 = 1e-9;
/// Jury-table entries this close (relative to their row) are treated as marginal.
pub const TOL_JURY: f64 = 1e-12;

/// Memory factor `α`, coupling gain `β`, memory depth `θ` and the maximum
/// accessible depth `θ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    alpha: f64,
    beta: f64,
    theta: usize,
    theta_max: usize,
}

impl ProtocolParams {
    /// Parameters with `θ̂ = θ`.
    pub fn new(alpha: f64, beta: f64, theta: usize) -> Result<Self> {
        Self::with_theta_max(alpha, beta, theta, theta)
    }

    pub fn with_theta_max(alpha: f64, beta: f64, theta: usize, theta_max: usize) -> Result<Self> {
        ensure_param!(
            (0.0..=1.0).contains(&alpha),
            "alpha must lie in [0, 1], got {alpha}"
        );
        ensure_param!(
            beta.is_finite() && beta > 0.0,
            "beta must be positive, got {beta}"
        );
        ensure_param!(theta >= 1, "memory depth must be >= 1");
        ensure_param!(
            theta_max >= theta,
            "theta_max ({theta_max}) < theta ({theta})"
        );
        Ok(Self {
            alpha,
            beta,
            theta,
            theta_max,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn theta_max(&self) -> usize {
        self.theta_max
    }

    /// Same `α`, `β` at another depth; `θ̂` grows if needed.
    pub fn at_depth(&self, theta: usize) -> Result<Self> {
        Self::with_theta_max(self.alpha, self.beta, theta, self.theta_max.max(theta))
    }
}

/// Characteristic trinomial of one Laplacian mode, ascending powers of `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePolynomial {
    coefficients: Vec<f64>,
}

impl ModePolynomial {
    /// `γ^{θ+1} + a_θ γ^θ + a_0`.
    pub fn trinomial(theta: usize, a_theta: f64, a_0: f64) -> Result<Self> {
        ensure_param!(theta >= 1, "trinomial degree must be >= 2");
        let mut coefficients = vec![0.0; theta + 2];
        coefficients[0] = a_0;
        coefficients[theta] = a_theta;
        coefficients[theta + 1] = 1.0;
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn mode_polynomial(params: &ProtocolParams, lambda: f64) -> ModePolynomial {
    let phi = 1.0 - params.beta * lambda;
    let mut coefficients = vec![0.0; params.theta + 2];
    coefficients[0] = -(1.0 - params.alpha) * phi;
    coefficients[params.theta] = -params.alpha * phi;
    coefficients[params.theta + 1] = 1.0;
    ModePolynomial { coefficients }
}

/// Largest root modulus of a monic polynomial, from the eigenvalues of its
/// companion matrix.
pub fn max_root_modulus(p: &ModePolynomial) -> Result<f64> {
    max_root_modulus_coeffs(p.coefficients())
}

pub(crate) fn max_root_modulus_coeffs(coeffs: &[f64]) -> Result<f64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    if lead == 0.0 {
        return Err(Error::Numeric(
            "polynomial has zero leading coefficient".into(),
        ));
    }
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    // Roots spread evenly on a circle (e.g. γ^k − c) can stall the QR sweep;
    // retry on p(y + s) and shift the roots back.
    for shift in [0.0, 0.1, -0.137, 0.29] {
        if let Some(r) = shifted_max_modulus(&monic, shift) {
            return Ok(r);
        }
    }
    Err(Error::Numeric(
        "companion eigensolver did not converge".into(),
    ))
}

fn taylor_shift(monic: &[f64], s: f64) -> Vec<f64> {
    // synthetic division repeated: coefficients of p(y + s)
    let mut c = monic.to_vec();
    let n = c.len() - 1;
    for k in 0..n {
        for j in (k..n).rev() {
            c[j] += s * c[j + 1];
        }
    }
    c
}

fn shifted_max_modulus(monic: &[f64], shift: f64) -> Option<f64> {
    let deg = monic.len() - 1;
    let c = if shift == 0.0 {
        monic.to_vec()
    } else {
        taylor_shift(monic, shift)
    };
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if i == deg - 1 {
            -c[j]
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    });
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000)?;
    Some(
        schur
            .complex_eigenvalues()
            .iter()
            .map(|z| (z + shift).norm())
            .fold(0.0, f64::max),
    )
}

/// Schur test via root moduli: every root strictly inside `|γ| < 1 − TOL_SCHUR`.
pub fn is_schur_roots(p: &ModePolynomial) -> Result<bool> {
    Ok(max_root_modulus(p)? < 1.0 - TOL_SCHUR)
}

/// Outcome of the Jury table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JuryVerdict {
    Stable,
    Unstable,
    /// A test quantity vanished within [`TOL_JURY`]; root on or near the unit circle.
    Marginal,
}

/// Full Jury table of a real polynomial given by ascending coefficients.
pub fn jury_table(coeffs: &[f64]) -> JuryVerdict {
    let n = coeffs.len() - 1;
    let sign = coeffs[n].signum();
    if n == 0 || sign == 0.0 {
        return JuryVerdict::Marginal;
    }
    let a: Vec<f64> = coeffs.iter().map(|c| c * sign).collect();
    let scale: f64 = a.iter().map(|c| c.abs()).sum();
    let tol = TOL_JURY * scale;

    let p1: f64 = a.iter().sum();
    let pm1: f64 = a
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
        .sum();
    let pm1_signed = if n % 2 == 0 { pm1 } else { -pm1 };
    let edge = a[n] - a[0].abs();
    for q in [p1, pm1_signed, edge] {
        if q.abs() <= tol {
            return JuryVerdict::Marginal;
        }
        if q < 0.0 {
            return JuryVerdict::Unstable;
        }
    }

    // Each reduced row: r'_k = r_0 r_k − r_last r_{last−k}.
    let mut row = a;
    while row.len() > 3 {
        let last = row.len() - 1;
        let mut next: Vec<f64> = (0..last)
            .map(|k| row[0] * row[k] - row[last] * row[last - k])
            .collect();
        let max = next.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max == 0.0 || !max.is_finite() {
            return JuryVerdict::Marginal;
        }
        next.iter_mut().for_each(|v| *v /= max);
        let gap = next[0].abs() - next[last - 1].abs();
        if gap.abs() <= TOL_JURY {
            return JuryVerdict::Marginal;
        }
        if gap < 0.0 {
            return JuryVerdict::Unstable;
        }
        row = next;
    }
    JuryVerdict::Stable
}

/// Schur test via the Jury table; marginal tables count as unstable.
pub fn jury_schur(p: &ModePolynomial) -> bool {
    jury_table(p.coefficients()) == JuryVerdict::Stable
}

fn require_connected(spec: &Spectrum) -> Result<()> {
    ensure_pre!(
        spec.is_connected(),
        "graph is disconnected (lambda_2 = {} <= {TOL_CONN})",
        spec.lambda2()
    );
    Ok(())
}

/// True iff every non-consensus mode polynomial is Schur stable, i.e.
/// `(α, β) ∈ Ω_θ`. Repeated eigenvalues are tested once.
pub fn consensus_check(spec: &Spectrum, params: &ProtocolParams) -> Result<bool> {
    require_connected(spec)?;
    for mode in spec.modes() {
        if !is_schur_roots(&mode_polynomial(params, mode.lambda))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest root modulus over all non-consensus modes. Values below one mean
/// consensus; `1 − ρ` is the stability margin of the error dynamics.
pub fn spectral_radius(spec: &Spectrum, params: &ProtocolParams) -> Result<f64> {
    require_connected(spec)?;
    spec.modes()
        .iter()
        .map(|m| max_root_modulus(&mode_polynomial(params, m.lambda)))
        .try_fold(0.0_f64, |acc, r| r.map(|r| acc.max(r)))
}

/// Stability verdicts over an `(α, β)` grid; `stable[a][b]` follows the
/// input grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusRegion {
    pub theta: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub stable: Vec<Vec<bool>>,
}

impl ConsensusRegion {
    /// Rows `(alpha, beta, stable)` in alpha-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        self.alpha.iter().enumerate().flat_map(move |(i, &a)| {
            self.beta
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, self.stable[i][j]))
        })
    }
}

pub fn consensus_region(
    spec: &Spectrum,
    theta: usize,
    alpha_grid: &[f64],
    beta_grid: &[f64],
) -> Result<ConsensusRegion> {
    ensure_param!(
        !alpha_grid.is_empty() && !beta_grid.is_empty(),
        "grids must be nonempty"
    );
    ensure_param!(
        alpha_grid.iter().all(|a| *a > 0.0 && *a < 1.0),
        "alpha grid must lie in (0, 1)"
    );
    ensure_param!(
        beta_grid.iter().all(|b| b.is_finite() && *b > 0.0),
        "beta grid must be positive"
    );
    require_connected(spec)?;
    let stable = alpha_grid
        .par_iter()
        .map(|&a| {
            beta_grid
                .iter()
                .map(|&b| consensus_check(spec, &ProtocolParams::new(a, b, theta)?))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsensusRegion {
        theta,
        alpha: alpha_grid.to_vec(),
        beta: beta_grid.to_vec(),
        stable,
    })
}

/// Checks that consensus at depth `θ+1` implies consensus at depth `θ`.
pub fn verify_inheritance(spec: &Spectrum, alpha: f64, beta: f64, theta: usize) -> Result<bool> {
    require_connected(spec)?;
    ensure_pre!(
        beta > 0.0 && beta < spec.beta_bound(),
        "beta = {beta} outside (0, 2/lambda_n = {})",
        spec.beta_bound()
    );
    let deeper = ProtocolParams::new(alpha, beta, theta + 1)?;
    if !consensus_check(spec, &deeper)? {
        return Ok(true);
    }
    consensus_check(spec, &ProtocolParams::new(alpha, beta, theta)?)
}
