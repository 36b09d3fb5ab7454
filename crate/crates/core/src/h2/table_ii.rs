//! The reduced `ι × ι` linear system whose solution's last component yields
//! the stationary lag-`θ` covariance of a mode.
//!
//! The stationary autocovariances `r_k` of one mode satisfy
//! `r_k = ν r_{k−1} + μ r_{θ+1−k}` for `k = 1..θ` and
//! `η r_0 + ζ r_θ = −1`. Eliminating the lower half of the unknowns leaves
//! the band system assembled here, with `w_ι = r_θ`.

use nalgebra::{DMatrix, DVector};

use super::ModeQuantities;
use crate::error::{ensure_param, ensure_pre, Result};

/// `|φ|` at or below this value uses the exact `φ = 0` contribution of one.
pub const TOL_PHI: f64 = 1e-10;

pub fn table_ii_system(
    theta: usize,
    alpha: f64,
    mq: &ModeQuantities,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    ensure_param!(theta >= 1, "memory depth must be >= 1");
    ensure_param!(
        alpha > 0.0 && alpha < 1.0,
        "reduced system needs alpha in (0, 1), got {alpha}"
    );
    let phi = mq.phi;
    ensure_pre!(phi.abs() < 1.0, "mode has |phi| = {} >= 1", phi.abs());
    ensure_pre!(
        phi.abs() > TOL_PHI,
        "degenerate mode with phi = {phi}; use the phi = 0 branch"
    );

    let iota = theta.div_ceil(2);
    let (psi, eta) = (mq.psi, mq.eta);
    let odd = theta % 2 == 1;

    let mut gamma = DMatrix::zeros(iota, iota);
    let mut xi = DVector::zeros(iota);
    match theta {
        1 => {
            gamma[(0, 0)] = -psi - 1.0;
            xi[0] = alpha * phi / eta;
        }
        2 => {
            gamma[(0, 0)] = -psi * phi - 1.0;
            xi[0] = alpha * phi * phi / eta;
        }
        _ => {
            let chi1 = if odd {
                (1.0 - 2.0 * alpha) / (1.0 - alpha) * phi - 1.0
            } else {
                (1.0 - 2.0 * alpha) / (1.0 - alpha) * phi * phi - 1.0
            };
            let chi2 = if odd {
                alpha / (1.0 - alpha)
            } else {
                alpha * phi / (1.0 - alpha)
            };
            let nu = alpha * phi;
            let centre = (1.0 - 2.0 * alpha) * phi * phi - 1.0;

            gamma[(0, iota - 2)] = nu;
            gamma[(0, iota - 1)] = -(1.0 - alpha) * psi * phi - 1.0;
            // anti-tridiagonal band: row r carries (ν, centre, ν) ending at column ι−r+1
            for r in 1..iota - 1 {
                let c = iota - 1 - r;
                gamma[(r, c - 1)] = nu;
                gamma[(r, c)] = centre;
                gamma[(r, c + 1)] = nu;
            }
            gamma[(iota - 1, 0)] = chi1;
            gamma[(iota - 1, 1)] = chi2;
            xi[0] = alpha * (1.0 - alpha) * phi * phi / eta;
        }
    }
    Ok((gamma, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h2::mode_quantities;

    #[test]
    fn theta_one_k3() {
        let mq = mode_quantities(0.5, 1.0 / 6.0, 1, 3.0);
        let (g, x) = table_ii_system(1, 0.5, &mq).unwrap();
        assert!((g[(0, 0)] + 5.0 / 7.0).abs() < 1e-12);
        assert!((x[0] + 2.0 / 7.0).abs() < 1e-12);
        let w = x[0] / g[(0, 0)];
        assert!((w - 0.4).abs() < 1e-12);
    }

    #[test]
    fn theta_two_and_three_layout() {
        let mq = mode_quantities(0.5, 1.0 / 6.0, 2, 3.0);
        let (g, x) = table_ii_system(2, 0.5, &mq).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert!((g[(0, 0)] - (-mq.psi * mq.phi - 1.0)).abs() < 1e-15);
        assert!((x[0] - 0.5 * 0.25 / mq.eta).abs() < 1e-15);

        let mq = mode_quantities(0.3, 0.1, 3, 2.0);
        let (g, x) = table_ii_system(3, 0.3, &mq).unwrap();
        let phi = mq.phi;
        assert_eq!(g.shape(), (2, 2));
        assert!((g[(0, 0)] - 0.3 * phi).abs() < 1e-15);
        assert!((g[(0, 1)] - (-(0.7) * mq.psi * phi - 1.0)).abs() < 1e-15);
        assert!((g[(1, 0)] - (0.4 / 0.7 * phi - 1.0)).abs() < 1e-15);
        assert!((g[(1, 1)] - 0.3 / 0.7).abs() < 1e-15);
        assert!((x[0] - 0.21 * phi * phi / mq.eta).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn band_layout_for_deep_memory() {
        let mq = mode_quantities(0.4, 0.1, 9, 3.0);
        let (g, x) = table_ii_system(9, 0.4, &mq).unwrap();
        assert_eq!(g.shape(), (5, 5));
        let nu = 0.4 * mq.phi;
        let centre = 0.2 * mq.phi * mq.phi - 1.0;
        // row 2 (index 1): columns 2..4 (index 2..4)
        assert_eq!((g[(1, 2)], g[(1, 3)], g[(1, 4)]), (nu, centre, nu));
        assert_eq!((g[(3, 0)], g[(3, 1)], g[(3, 2)]), (nu, centre, nu));
        assert_eq!(g[(4, 2)], 0.0);
        assert_eq!(x.iter().skip(1).filter(|v| **v != 0.0).count(), 0);
    }

    #[test]
    fn rejects_degenerate_modes() {
        let mq = mode_quantities(0.5, 0.25, 3, 4.0);
        assert!(table_ii_system(3, 0.5, &mq).is_err());
        let mq = mode_quantities(0.5, 1.0, 3, 2.5);
        assert!(table_ii_system(3, 0.5, &mq).is_err());
        let mq = mode_quantities(1.0, 0.1, 3, 2.5);
        assert!(table_ii_system(3, 1.0, &mq).is_err());
    }
}
