//! Independent H₂ routes: the per-mode discrete Lyapunov equation solved as
//! a Kronecker linear system, and a truncated Gramian series on the full
//! augmented network state.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{ensure_param, ensure_pre, Error, Result};
use crate::graph::WeightedGraph;
use crate::stability::{consensus_check, spectral_radius, ProtocolParams};

/// Companion-form state matrix of one mode: a shift register of `θ+1` lags
/// whose last row is `[(1−α)φ, 0, …, 0, αφ]`.
pub fn mode_state_matrix(alpha: f64, phi: f64, theta: usize) -> DMatrix<f64> {
    let m = theta + 1;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m - 1 {
        a[(i, i + 1)] = 1.0;
    }
    a[(m - 1, 0)] += (1.0 - alpha) * phi;
    a[(m - 1, m - 1)] += alpha * phi;
    a
}

/// Solves `A W Aᵀ + B Bᵀ = W` through `(I − A⊗A) vec W = vec(B Bᵀ)` with
/// `B = e_m`.
pub fn discrete_lyapunov_last_input(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    let k = DMatrix::identity(m * m, m * m) - a.kronecker(a);
    let mut rhs = DVector::zeros(m * m);
    rhs[(m - 1) * m + (m - 1)] = 1.0;
    let lu = k.lu();
    let singular =
        || Error::Numeric("singular Lyapunov system (mode on the stability boundary)".into());
    if !super::well_conditioned_pivots(lu.u().diagonal().as_slice()) {
        return Err(singular());
    }
    let vec_w = lu.solve(&rhs).ok_or_else(singular)?;
    Ok(DMatrix::from_column_slice(m, m, vec_w.as_slice()))
}

/// Output-coordinate variance of one mode, from its controllability Gramian.
pub fn lyapunov_contribution(alpha: f64, phi: f64, theta: usize) -> Result<f64> {
    let w = discrete_lyapunov_last_input(&mode_state_matrix(alpha, phi, theta))?;
    Ok(w[(theta, theta)])
}

/// Result of the truncated Gramian series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramianEstimate {
    pub value: f64,
    pub horizon: usize,
    /// Geometric estimate of the neglected tail, `last_term · ρ²/(1 − ρ²)`.
    pub tail_bound: f64,
    /// Whether `tail_bound < 1e-10`.
    pub converged: bool,
}

/// Largest augmented dimension `n(θ+1)` accepted by the brute-force route.
pub const GRAMIAN_MAX_DIM: usize = 400;

/// Accumulates `Σ_k ‖[0 Ψ] Θᵏ [0; I]‖_F²` for `k < horizon` on the full
/// `n(θ+1)`-dimensional system, `Ψ = I − 𝟏𝟏ᵀ/n`.
pub fn h2_gramian_bruteforce(
    g: &WeightedGraph,
    params: &ProtocolParams,
    horizon: usize,
) -> Result<GramianEstimate> {
    let n = g.n();
    let theta = params.theta();
    let h = n * (theta + 1);
    ensure_param!(
        h <= GRAMIAN_MAX_DIM,
        "n(theta+1) = {h} exceeds {GRAMIAN_MAX_DIM}"
    );
    ensure_param!(horizon >= 1, "horizon must be positive");
    let spec = g.spectrum()?;
    ensure_pre!(
        consensus_check(&spec, params)?,
        "parameters do not reach consensus"
    );
    let rho = spectral_radius(&spec, params)?;

    let (alpha, beta) = (params.alpha(), params.beta());
    let phi_mat = DMatrix::identity(n, n) - g.laplacian() * beta;
    let mut big = DMatrix::zeros(h, h);
    for blk in 0..theta {
        big.view_mut((blk * n, (blk + 1) * n), (n, n))
            .fill_with_identity();
    }
    let last = theta * n;
    big.view_mut((last, 0), (n, n))
        .copy_from(&(&phi_mat * (1.0 - alpha)));
    let mut corner = big.view_mut((last, last), (n, n));
    corner += &phi_mat * alpha;

    let psi = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut state = DMatrix::zeros(h, n);
    state.view_mut((last, 0), (n, n)).fill_with_identity();

    let mut value = 0.0;
    let mut term = 0.0;
    for _ in 0..horizon {
        let out = &psi * state.view((last, 0), (n, n));
        term = out.norm_squared();
        value += term;
        state = &big * &state;
    }
    let tail_bound = if rho < 1.0 {
        term * rho * rho / (1.0 - rho * rho)
    } else {
        f64::INFINITY
    };
    Ok(GramianEstimate {
        value,
        horizon,
        tail_bound,
        converged: tail_bound < 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete;

    #[test]
    fn k3_mode_lyapunov() {
        assert!((lyapunov_contribution(0.5, 0.5, 1).unwrap() - 1.2).abs() < 1e-13);
        assert!((lyapunov_contribution(1.0, 0.5, 1).unwrap() - 4.0 / 3.0).abs() < 1e-13);
        assert!((lyapunov_contribution(0.3, 0.0, 4).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gramian_solution_satisfies_lyapunov_equation() {
        let a = mode_state_matrix(0.35, -0.6, 4);
        let w = discrete_lyapunov_last_input(&a).unwrap();
        let mut bbt = DMatrix::zeros(5, 5);
        bbt[(4, 4)] = 1.0;
        let resid = &a * &w * a.transpose() + bbt - &w;
        assert!(resid.amax() < 1e-12);
        assert!((&w - w.transpose()).amax() < 1e-12);
    }

    #[test]
    fn singular_on_boundary() {
        // phi = 1 keeps the consensus root at gamma = 1
        assert!(lyapunov_contribution(0.5, 1.0, 2).is_err());
    }

    #[test]
    fn truncated_series_on_small_graphs() {
        let g = complete(3).unwrap();
        let p = ProtocolParams::new(0.5, 1.0 / 6.0, 1).unwrap();
        let est = h2_gramian_bruteforce(&g, &p, 200).unwrap();
        assert!((est.value - 2.4).abs() < 1e-8, "{est:?}");
        assert!(est.converged);

        let short = h2_gramian_bruteforce(&g, &p, 3).unwrap();
        assert!(!short.converged);

        let unstable = ProtocolParams::new(1.0, 0.7, 1).unwrap();
        assert_eq!(
            h2_gramian_bruteforce(&g, &unstable, 50)
                .unwrap_err()
                .exit_code(),
            3
        );

        let big = complete(101).unwrap();
        assert_eq!(
            h2_gramian_bruteforce(&big, &ProtocolParams::new(0.5, 0.001, 3).unwrap(), 10)
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
