use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::WeightedGraph;
use crate::error::{ensure_param, Error, Result};

/// Absolute tolerance for eigenvalue cleanup.
pub const TOL_EIG: f64 = 1e-9;
/// `λ₂` above this value means the graph is connected.
pub const TOL_CONN: f64 = 1e-8;

/// Ascending Laplacian eigenvalues, `λ₁ = 0` first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

/// A distinct nonzero Laplacian eigenvalue and how often it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub lambda: f64,
    pub multiplicity: usize,
}

impl Spectrum {
    /// Wraps a list of Laplacian eigenvalues (any order). The smallest must
    /// lie within [`TOL_EIG`] of zero and is clamped to exactly zero.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        ensure_param!(
            eigenvalues.len() >= 2,
            "spectrum needs at least 2 eigenvalues"
        );
        ensure_param!(
            eigenvalues.iter().all(|l| l.is_finite()),
            "spectrum contains non-finite values"
        );
        eigenvalues.sort_by(f64::total_cmp);
        ensure_param!(
            eigenvalues[0].abs() <= TOL_EIG,
            "smallest Laplacian eigenvalue {} is not zero",
            eigenvalues[0]
        );
        eigenvalues[0] = 0.0;
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Algebraic connectivity `λ₂`.
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    /// Largest eigenvalue `λₙ`.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn is_connected(&self) -> bool {
        self.lambda2() > TOL_CONN
    }

    /// Upper end `2/λₙ` of the coupling-gain range analysed in closed form.
    pub fn beta_bound(&self) -> f64 {
        2.0 / self.lambda_max()
    }

    /// Distinct eigenvalues `λ₂..λₙ`, merged when they agree within
    /// `TOL_EIG·max(1, λₙ)`.
    pub fn modes(&self) -> Vec<Mode> {
        let tol = TOL_EIG * self.lambda_max().max(1.0);
        let mut modes: Vec<Mode> = Vec::new();
        let mut anchor = f64::NAN;
        let mut sum = 0.0;
        for &l in &self.eigenvalues[1..] {
            match modes.last_mut() {
                Some(last) if (l - anchor).abs() <= tol => {
                    sum += l;
                    last.multiplicity += 1;
                    last.lambda = sum / last.multiplicity as f64;
                }
                _ => {
                    anchor = l;
                    sum = l;
                    modes.push(Mode {
                        lambda: l,
                        multiplicity: 1,
                    });
                }
            }
        }
        modes
    }
}

/// Dense symmetric eigendecomposition of the Laplacian of `g`.
pub fn spectrum(g: &WeightedGraph) -> Result<Spectrum> {
    let eig = SymmetricEigen::try_new(g.laplacian(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    if values[0].abs() > TOL_EIG {
        return Err(Error::Numeric(format!(
            "smallest Laplacian eigenvalue {} is not zero",
            values[0]
        )));
    }
    values[0] = 0.0;
    Ok(Spectrum {
        eigenvalues: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{chain, complete, ring_lattice, star};

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < TOL_EIG, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn small_graph_spectra() {
        assert_close(
            complete(3).unwrap().spectrum().unwrap().eigenvalues(),
            &[0., 3., 3.],
        );
        assert_close(
            star(4).unwrap().spectrum().unwrap().eigenvalues(),
            &[0., 1., 1., 4.],
        );
        assert_close(
            chain(3).unwrap().spectrum().unwrap().eigenvalues(),
            &[0., 1., 3.],
        );
    }

    #[test]
    fn ring_lattice_matches_circulant_formula() {
        for (n, d) in [(7, 1), (11, 2), (20, 3), (9, 4)] {
            let spec = ring_lattice(n, d).unwrap().spectrum().unwrap();
            let mut want: Vec<f64> = (0..n)
                .map(|k| {
                    2.0 * d as f64
                        - 2.0
                            * (1..=d)
                                .map(|j| {
                                    (2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64).cos()
                                })
                                .sum::<f64>()
                })
                .collect();
            want.sort_by(f64::total_cmp);
            want[0] = 0.0;
            assert_close(spec.eigenvalues(), &want);
        }
    }

    #[test]
    fn modes_merge_repeated_eigenvalues() {
        let spec = complete(5).unwrap().spectrum().unwrap();
        let modes = spec.modes();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].multiplicity, 4);
        assert!((modes[0].lambda - 5.0).abs() < 1e-12);

        let spec = Spectrum::from_eigenvalues(vec![4.0, 0.0, 1.0, 1.0 + 1e-12]).unwrap();
        let modes = spec.modes();
        assert_eq!(modes.len(), 2);
        assert_eq!(modes[0].multiplicity, 2);
        assert_eq!(
            modes[1],
            Mode {
                lambda: 4.0,
                multiplicity: 1
            }
        );
    }

    #[test]
    fn from_eigenvalues_requires_zero_mode() {
        assert!(Spectrum::from_eigenvalues(vec![0.5, 1.0]).is_err());
        assert!(Spectrum::from_eigenvalues(vec![1.0]).is_err());
        let s = Spectrum::from_eigenvalues(vec![3.0, -1e-12, 3.0]).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 3.0, 3.0]);
    }
}
