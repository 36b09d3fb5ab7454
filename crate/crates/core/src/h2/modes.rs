use serde::Serialize;

/// Per-eigenvalue scalars entering the H₂ expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeQuantities {
    /// `1 − βλ`
    pub phi: f64,
    /// `2α(1−α)φ²`
    pub zeta: f64,
    /// `((1−α)² + α²)φ² − 1`
    pub eta: f64,
    /// `αφ`
    pub nu: f64,
    /// `(1−α)φ`
    pub mu: f64,
    /// `αζφ/η − (1−α)φ`; NaN when `η = 0`.
    pub psi: f64,
    /// Size `⌊(θ+1)/2⌋` of the reduced linear system.
    pub iota: usize,
}

pub fn mode_quantities(alpha: f64, beta: f64, theta: usize, lambda: f64) -> ModeQuantities {
    let phi = 1.0 - beta * lambda;
    let phi2 = phi * phi;
    let zeta = 2.0 * alpha * (1.0 - alpha) * phi2;
    let eta = ((1.0 - alpha).powi(2) + alpha * alpha) * phi2 - 1.0;
    let psi = if eta == 0.0 {
        f64::NAN
    } else {
        alpha * zeta * phi / eta - (1.0 - alpha) * phi
    };
    ModeQuantities {
        phi,
        zeta,
        eta,
        nu: alpha * phi,
        mu: (1.0 - alpha) * phi,
        psi,
        iota: theta.div_ceil(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_mode_values() {
        let q = mode_quantities(0.5, 1.0 / 6.0, 1, 3.0);
        assert!((q.phi - 0.5).abs() < 1e-15);
        assert!((q.zeta - 0.125).abs() < 1e-15);
        assert!((q.eta + 0.875).abs() < 1e-15);
        assert!((q.nu - 0.25).abs() < 1e-15);
        assert!((q.mu - 0.25).abs() < 1e-15);
        assert!((q.psi + 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(q.iota, 1);
    }

    #[test]
    fn degenerate_modes() {
        let q = mode_quantities(0.3, 0.25, 4, 4.0);
        assert_eq!((q.phi, q.zeta, q.eta), (0.0, 0.0, -1.0));
        assert_eq!(q.iota, 2);

        let q = mode_quantities(1.0, 0.2, 2, 3.0);
        assert_eq!(q.zeta, 0.0);
        assert!((q.eta - (q.phi * q.phi - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn eta_negative_inside_unit_interval() {
        for a in 0..=20 {
            for p in -19..=19 {
                let alpha = a as f64 / 20.0;
                let phi = p as f64 / 20.0;
                let q = mode_quantities(alpha, (1.0 - phi) / 2.0, 3, 2.0);
                assert!(q.eta < 0.0);
            }
        }
    }
}
