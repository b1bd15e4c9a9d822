//! Least-squares Bézier fitting through the Bernstein basis matrix.
//!
//! For degree `d` and parameters `τ_0..τ_{m-1}`, row `i` of the Bernstein
//! matrix holds `C(d, j) (1 - τ_i)^(d - j) τ_i^j` for `j = 0..=d`. Control
//! points are recovered from samples `R` as `M⁺ R`, the Moore–Penrose
//! solution, which is the minimum-norm solution when there are fewer
//! samples than control points.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The `m × (degree + 1)` Bernstein basis matrix for the given parameters.
pub fn bernstein_matrix(degree: usize, taus: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(&bad) = taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::ParameterOutOfRange { value: bad });
    }
    let coeffs: Vec<f64> = (0..=degree).map(|j| binomial(degree, j)).collect();
    Ok(DMatrix::from_fn(taus.len(), degree + 1, |i, j| {
        let t = taus[i];
        coeffs[j] * (1.0 - t).powi((degree - j) as i32) * t.powi(j as i32)
    }))
}

fn pseudo_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let svd = m.svd(true, true);
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = largest * rows.max(cols) as f64 * f64::EPSILON;
    svd.pseudo_inverse(eps)
        .expect("both singular vector sets were computed")
}

/// Fits every column of `samples` (one row per parameter) at once.
pub(crate) fn fit_columns(
    taus: &[f64],
    degree: usize,
    samples: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let pinv = pseudo_inverse(bernstein_matrix(degree, taus)?);
    Ok(pinv * samples)
}

/// Control points (`degree + 1` of them) fitted to `points` at `taus`.
pub fn fit_bezier(points: &[[f64; 2]], taus: &[f64], degree: usize) -> Result<Vec<[f64; 2]>> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    if points.len() != taus.len() {
        return Err(Error::InvalidConfig(format!(
            "{} points but {} parameters",
            points.len(),
            taus.len()
        )));
    }
    let samples = DMatrix::from_fn(points.len(), 2, |i, c| points[i][c]);
    let control = fit_columns(taus, degree, &samples)?;
    Ok((0..=degree)
        .map(|j| [control[(j, 0)], control[(j, 1)]])
        .collect())
}

/// Evaluates the curve with the given control points at each parameter.
pub fn evaluate_bezier(control: &[[f64; 2]], taus: &[f64]) -> Result<Vec<[f64; 2]>> {
    if control.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let basis = bernstein_matrix(control.len() - 1, taus)?;
    Ok((0..taus.len())
        .map(|i| {
            let mut acc = [0.0; 2];
            for (j, p) in control.iter().enumerate() {
                acc[0] += basis[(i, j)] * p[0];
                acc[1] += basis[(i, j)] * p[1];
            }
            acc
        })
        .collect())
}
