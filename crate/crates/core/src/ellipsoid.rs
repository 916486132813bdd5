//! Perturbed-ellipsoid eigenvalue study.
//!
//! For Ω_δ = {Σ x_i²(1+α_i δ)² < 1} the Robin function has its unique
//! critical point at the origin and, by coordinate symmetry, a near-diagonal
//! Hessian there. The linear-in-δ prediction of its eigenvalues is
//!
//! ```text
//! λ_i(δ) = 2/(Nω_N) + [ (N−1)(N²−2N−4) + 8(N+1)α_i ] / (N(N+2)ω_N) · δ
//! ```
//!
//! and the study compares it against eigenvalues of the finite-difference
//! Hessian of the collocation solver's Robin function at the origin,
//! reporting the residual ratio |λ_numeric − λ_predicted|/δ per δ.

use crate::asym::eigen_ascending;
use crate::context::unit_ball_volume;
use crate::geom::DomainSpec;
use crate::mfs::{MfsConfig, MfsSystem};
use crate::{real, Error, PointF, Real, Result, Scalar};
use serde::{Deserialize, Serialize};

/// Linear-in-δ eigenvalue prediction, ascending with α.
pub fn predicted_eigenvalues<T: Real>(dim: usize, alpha: &[T], delta: T) -> Result<Vec<T>> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    if alpha.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: alpha.len(),
        });
    }
    if delta < T::zero() {
        return Err(Error::InvalidParam("delta must be nonnegative".into()));
    }
    let n = dim as f64;
    let omega = unit_ball_volume::<T>(dim);
    let base = real::<T>(2.0 / n) / omega;
    let denom = real::<T>(n * (n + 2.0)) * omega;
    let c0 = real::<T>((n - 1.0) * (n * n - 2.0 * n - 4.0));
    let c1 = real::<T>(8.0 * (n + 1.0));
    Ok(alpha
        .iter()
        .map(|&a| base + (c0 + c1 * a) / denom * delta)
        .collect())
}

/// Numeric Hessian eigenvalues of the Robin function at the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianEigenSample {
    /// Ascending eigenvalues of the symmetrized FD Hessian.
    pub eigenvalues: Vec<Scalar>,
    /// Largest off-diagonal entry (coordinate symmetry diagnostic).
    pub max_offdiag: Scalar,
    /// |∇R(0)| (must vanish by symmetry, up to solver noise).
    pub grad_norm_at_origin: Scalar,
}

pub fn numeric_hessian_eigenvalues(
    dim: usize,
    alpha: &[Scalar],
    delta: Scalar,
    cfg: &MfsConfig,
) -> Result<HessianEigenSample> {
    let domain = DomainSpec::PerturbedEllipsoid {
        alpha: alpha.to_vec(),
        delta,
    };
    domain.validate()?;
    if dim != alpha.len() {
        return Err(Error::DimMismatch {
            expected: dim,
            got: alpha.len(),
        });
    }
    let sys = MfsSystem::plain(domain, cfg.clone())?;
    let origin = PointF::zeros(dim);
    let grad = sys.robin_gradient(&origin, crate::mfs::GradientMethod::BoundaryFormula)?;
    let hess = sys.robin_hessian(&origin)?;
    let mut max_offdiag: Scalar = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                max_offdiag = max_offdiag.max(hess.matrix[(i, j)].abs());
            }
        }
    }
    let (vals, _) = eigen_ascending(&hess.matrix);
    Ok(HessianEigenSample {
        eigenvalues: vals,
        max_offdiag,
        grad_norm_at_origin: grad.norm(),
    })
}

/// One δ row of the study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: Scalar,
    pub predicted: Vec<Scalar>,
    pub numeric: Option<Vec<Scalar>>,
    pub residuals: Option<Vec<Scalar>>,
    /// residual / δ.
    pub ratios: Option<Vec<Scalar>>,
    pub max_offdiag: Option<Scalar>,
    pub grad_norm_at_origin: Option<Scalar>,
    pub error: Option<String>,
}

/// Study results over a δ grid. Per-δ failures are recorded in their rows;
/// the study is still returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidStudy {
    pub dim: usize,
    pub alpha: Vec<Scalar>,
    pub rows: Vec<StudyRow>,
}

pub fn run_study(
    dim: usize,
    alpha: &[Scalar],
    deltas: &[Scalar],
    cfg: &MfsConfig,
) -> Result<EllipsoidStudy> {
    if alpha.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: alpha.len(),
        });
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(|a, b| a.partial_cmp(b).expect("finite deltas"));
    let mut rows = Vec::new();
    for &delta in &deltas {
        let predicted = predicted_eigenvalues(dim, alpha, delta)?;
        let row = match numeric_hessian_eigenvalues(dim, alpha, delta, cfg) {
            Ok(sample) => {
                let residuals: Vec<Scalar> = sample
                    .eigenvalues
                    .iter()
                    .zip(&predicted)
                    .map(|(n, p)| (n - p).abs())
                    .collect();
                let ratios = if delta > 0.0 {
                    Some(residuals.iter().map(|r| r / delta).collect())
                } else {
                    None
                };
                StudyRow {
                    delta,
                    predicted,
                    numeric: Some(sample.eigenvalues),
                    residuals: Some(residuals),
                    ratios,
                    max_offdiag: Some(sample.max_offdiag),
                    grad_norm_at_origin: Some(sample.grad_norm_at_origin),
                    error: None,
                }
            }
            Err(e) => StudyRow {
                delta,
                predicted,
                numeric: None,
                residuals: None,
                ratios: None,
                max_offdiag: None,
                grad_norm_at_origin: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(EllipsoidStudy {
        dim,
        alpha: alpha.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn prediction_baseline_and_example() {
        // δ = 0: all entries 2/(Nω_N)
        let v = predicted_eigenvalues::<f64>(2, &[1.0, 2.0], 0.0).unwrap();
        assert_relative_eq!(v[0], 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(v[1], 1.0 / PI, max_relative = 1e-15);

        // N = 2, α = 1, δ = 0.1: 1/π + 5·0.1/(2π) = 1.25/π
        let v = predicted_eigenvalues::<f64>(2, &[1.0, 1.0], 0.1).unwrap();
        assert_relative_eq!(v[0], 0.39788735772973834, max_relative = 1e-14);

        let v3 = predicted_eigenvalues::<f64>(3, &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_relative_eq!(v3[0], 2.0 / (3.0 * 4.0 * PI / 3.0), max_relative = 1e-15);
    }

    #[test]
    fn prediction_is_affine_with_the_stated_slope() {
        let alpha = [1.0, 2.0];
        let d1 = 0.01;
        let d2 = 0.02;
        let v1 = predicted_eigenvalues::<f64>(2, &alpha, d1).unwrap();
        let v2 = predicted_eigenvalues::<f64>(2, &alpha, d2).unwrap();
        for (i, &a) in alpha.iter().enumerate() {
            let slope = (v2[i] - v1[i]) / (d2 - d1);
            let want = (1.0 * (4.0 - 4.0 - 4.0) + 24.0 * a) / (8.0 * PI);
            assert_relative_eq!(slope, want, max_relative = 1e-12);
        }
        // ordering follows α for δ > 0
        assert!(v1[0] < v1[1]);
    }

    #[test]
    fn prediction_rejects_bad_input() {
        assert!(predicted_eigenvalues::<f64>(2, &[1.0], 0.1).is_err());
        assert!(predicted_eigenvalues::<f64>(2, &[1.0, 2.0], -0.1).is_err());
    }

    #[test]
    fn numeric_baseline_matches_ball() {
        let cfg = MfsConfig::for_dim(2);
        let s = numeric_hessian_eigenvalues(2, &[1.0, 2.0], 0.0, &cfg).unwrap();
        for v in &s.eigenvalues {
            assert!((v - 1.0 / PI).abs() < 1e-5, "eigenvalue {v}");
        }
        assert!(s.max_offdiag < 1e-6);
        assert!(s.grad_norm_at_origin < 1e-7);
    }

    #[test]
    fn study_collects_rows_and_sorts_deltas() {
        let cfg = MfsConfig::for_dim(2);
        let study = run_study(2, &[1.0, 2.0], &[0.04, 0.02], &cfg).unwrap();
        assert_eq!(study.rows.len(), 2);
        assert!(study.rows[0].delta < study.rows[1].delta);
        for row in &study.rows {
            assert!(row.error.is_none());
            let num = row.numeric.as_ref().unwrap();
            assert_eq!(num.len(), 2);
            // ordering matches α ordering
            assert!(num[0] < num[1]);
        }
    }
}
