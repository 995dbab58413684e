//! Small dense helpers on top of nalgebra: jittered Cholesky and the
//! generalized least-squares solve shared by the estimator and `sigma2_d`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Diagonal jitter, relative to `trace / n`, added when a plain Cholesky fails.
pub const JITTER: f64 = 1e-10;

/// Cholesky factor of a covariance matrix. On failure the diagonal is
/// loaded with `JITTER * trace / n` and the factorization retried once.
pub fn robust_cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let n = m.nrows();
    let bump = JITTER * m.trace() / n as f64;
    let mut jittered = m.clone();
    for i in 0..n {
        jittered[(i, i)] += bump;
    }
    Cholesky::new(jittered).ok_or_else(|| Error::Singular(format!("{n}x{n} covariance after jitter {bump:e}")))
}

/// Result of a weighted straight-line fit `y ≈ intercept + slope * x`.
#[derive(Debug, Clone)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// `(Z' W Z)^{-1}` for the two coefficients.
    pub coef_cov: [[f64; 2]; 2],
    /// Residuals `y - Z θ`.
    pub residuals: Vec<f64>,
    /// `r' W r`, with `W` the inverse covariance (identity for OLS).
    pub weighted_rss: f64,
}

/// Design matrix with rows `(1, x_i)`.
pub fn line_design(x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), 2, |r, c| if c == 0 { 1.0 } else { x[r] })
}

fn invert_2x2(m: &DMatrix<f64>) -> Result<[[f64; 2]; 2]> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let det = a * d - b * c;
    let scale = (a.abs() * d.abs()).max(f64::MIN_POSITIVE);
    if !(det.abs() > 1e-13 * scale) {
        return Err(Error::Degenerate("collinear regression design".into()));
    }
    Ok([[d / det, -b / det], [-c / det, a / det]])
}

/// Ordinary least squares line fit.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::invalid("line fit needs matching x/y with at least two points"));
    }
    // Centered normal equations are far better conditioned than (Z'Z).
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 1e-14 * x.iter().map(|v| v * v).sum::<f64>() {
        return Err(Error::Degenerate("collinear regression design (repeated abscissae)".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let weighted_rss = residuals.iter().map(|r| r * r).sum();
    let inv = invert_2x2(&(line_design(x).transpose() * line_design(x)))?;
    Ok(LineFit {
        intercept,
        slope,
        coef_cov: inv,
        residuals,
        weighted_rss,
    })
}

/// Generalized least squares line fit with error covariance `cov`.
pub fn gls_line(x: &[f64], y: &[f64], cov: &DMatrix<f64>) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || cov.nrows() != n || cov.ncols() != n {
        return Err(Error::invalid("gls: dimension mismatch"));
    }
    let chol = robust_cholesky(cov)?;
    let z = line_design(x);
    let yv = DVector::from_column_slice(y);
    let winv_z = chol.solve(&z);
    let ztwz = z.transpose() * &winv_z;
    let inv = invert_2x2(&ztwz)?;
    let zty = winv_z.transpose() * &yv;
    let intercept = inv[0][0] * zty[0] + inv[0][1] * zty[1];
    let slope = inv[1][0] * zty[0] + inv[1][1] * zty[1];
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let rv = DVector::from_column_slice(&residuals);
    let weighted_rss = rv.dot(&chol.solve(&rv));
    Ok(LineFit {
        intercept,
        slope,
        coef_cov: inv,
        residuals,
        weighted_rss,
    })
}
