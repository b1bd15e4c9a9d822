use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::pose::{self_normalize, Pose, NUM_JOINTS};

/// Dimension of a flattened pose vector.
pub const POSE_DIM: usize = 2 * NUM_JOINTS;

/// Diagonal loading added to both covariances before the square root.
pub const COVARIANCE_REGULARIZATION: f64 = 1e-6;

/// Mean and (unbiased) covariance of a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianStats {
    /// Two-pass estimate; requires more samples than dimensions.
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let dim = samples.first().map_or(0, Vec::len);
        if samples.len() <= dim || dim == 0 {
            return Err(Error::InsufficientSamples {
                needed: dim.max(1) + 1,
                got: samples.len(),
            });
        }
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidConfig("samples differ in dimension".into()));
        }
        let n = samples.len() as f64;
        let mut mean = DVector::<f64>::zeros(dim);
        for s in samples {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v;
            }
        }
        mean /= n;

        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        let mut centred = vec![0.0; dim];
        for s in samples {
            for (c, (v, m)) in centred.iter_mut().zip(s.iter().zip(mean.iter())) {
                *c = v - m;
            }
            for i in 0..dim {
                let ci = centred[i];
                for j in i..dim {
                    cov[(i, j)] += ci * centred[j];
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let v = cov[(i, j)] / (n - 1.0);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        if cov.iter().any(|v| !v.is_finite()) || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCovariance);
        }
        Ok(Self {
            mean,
            covariance: cov,
        })
    }
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Fréchet distance between two Gaussians:
/// `|μa - μb|² + tr(Σa + Σb - 2 (Σa Σb)^½)`, clamped at zero.
///
/// The trace of the cross term is evaluated as the sum of square roots of
/// the eigenvalues of `Σa^½ Σb Σa^½`, which share their spectrum with `Σa Σb`.
pub fn frechet_distance(a: &GaussianStats, b: &GaussianStats) -> Result<f64> {
    let dim = a.mean.len();
    if b.mean.len() != dim {
        return Err(Error::InvalidConfig(
            "statistics differ in dimension".into(),
        ));
    }
    let eye = DMatrix::<f64>::identity(dim, dim) * COVARIANCE_REGULARIZATION;
    let sa = &a.covariance + &eye;
    let sb = &b.covariance + &eye;
    if sa.iter().chain(sb.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCovariance);
    }
    let root_a = psd_sqrt(&(&sa + sa.transpose()).scale(0.5));
    let inner = &root_a * &sb * &root_a;
    let inner = (&inner + inner.transpose()).scale(0.5);
    let cross: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    let diff = &a.mean - &b.mean;
    let d = diff.norm_squared() + sa.trace() + sb.trace() - 2.0 * cross;
    Ok(d.max(0.0))
}

/// Flattened self-normalised pose vectors.
pub fn pose_vectors(poses: &[Pose]) -> Result<Vec<Vec<f64>>> {
    poses
        .iter()
        .map(|p| Ok(self_normalize(p)?.flatten().to_vec()))
        .collect()
}

/// FID between two pose sets in normalised keypoint space. Each set needs at
/// least `POSE_DIM + 1` poses.
pub fn pose_fid(set_a: &[Pose], set_b: &[Pose]) -> Result<f64> {
    for set in [set_a, set_b] {
        if set.len() <= POSE_DIM {
            return Err(Error::InsufficientSamples {
                needed: POSE_DIM + 1,
                got: set.len(),
            });
        }
    }
    let a = GaussianStats::from_samples(&pose_vectors(set_a)?)?;
    let b = GaussianStats::from_samples(&pose_vectors(set_b)?)?;
    frechet_distance(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Keypoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn random_poses(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Vec<Pose> {
        let noise = Normal::new(0.0, spread).unwrap();
        (0..n)
            .map(|_| {
                let mut joints = [Keypoint::new(0.0, 0.0, 1.0); NUM_JOINTS];
                for (j, k) in joints.iter_mut().enumerate() {
                    k.x = 100.0 + 10.0 * j as f64 + noise.sample(rng);
                    k.y = 300.0 + 25.0 * (j % 4) as f64 + noise.sample(rng);
                }
                Pose::new(joints).unwrap()
            })
            .collect()
    }

    #[test]
    fn self_distance_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let poses = random_poses(&mut rng, 200, 5.0);
        assert!(pose_fid(&poses, &poses).unwrap() <= 1e-6);
    }

    #[test]
    fn symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_poses(&mut rng, 300, 4.0);
        let b = random_poses(&mut rng, 300, 9.0);
        let ab = pose_fid(&a, &b).unwrap();
        let ba = pose_fid(&b, &a).unwrap();
        assert!(ab > 0.0);
        assert!((ab - ba).abs() < 1e-8);
    }

    #[test]
    fn too_few_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_poses(&mut rng, 34, 4.0);
        let b = random_poses(&mut rng, 100, 4.0);
        assert_eq!(
            pose_fid(&a, &b),
            Err(Error::InsufficientSamples {
                needed: 35,
                got: 34
            })
        );
    }

    #[test]
    fn commuting_closed_form() {
        // Known Gaussians: distance of the *exact* parameters, without sampling.
        let a = GaussianStats {
            mean: DVector::from_vec(vec![0.0, 1.0]),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
        };
        let b = GaussianStats {
            mean: DVector::from_vec(vec![1.0, 1.0]),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 9.0])),
        };
        let eps = COVARIANCE_REGULARIZATION;
        let s = |v: f64| (v + eps).sqrt();
        let expected = 1.0 + (s(4.0) - s(1.0)).powi(2) + (s(1.0) - s(9.0)).powi(2);
        assert!((frechet_distance(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn non_commuting_matches_direct_formula() {
        // For 2x2 SPD matrices, tr sqrt(A B) = sqrt(tr(AB) + 2 sqrt(det(AB))).
        let a = GaussianStats {
            mean: DVector::from_vec(vec![0.0, 0.0]),
            covariance: DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.0]),
        };
        let b = GaussianStats {
            mean: DVector::from_vec(vec![0.5, -0.5]),
            covariance: DMatrix::from_row_slice(2, 2, &[1.0, -0.3, -0.3, 3.0]),
        };
        let eye = DMatrix::<f64>::identity(2, 2) * COVARIANCE_REGULARIZATION;
        let ab = (&a.covariance + &eye) * (&b.covariance + &eye);
        let tr_sqrt = (ab.trace() + 2.0 * ab.determinant().sqrt()).sqrt();
        let expected = 0.5
            + (a.covariance.trace() + b.covariance.trace() + 4.0 * COVARIANCE_REGULARIZATION)
            - 2.0 * tr_sqrt;
        assert!((frechet_distance(&a, &b).unwrap() - expected).abs() < 1e-9);
    }
}
