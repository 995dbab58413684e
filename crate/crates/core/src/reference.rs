//! Fourier-domain estimators of `d` used as comparison columns: Robinson's
//! local Whittle estimator and a FEXP log-periodogram regression with a
//! penalized choice of the cosine order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Variance of `log` of a standard exponential variable.
const LOG_EXP_VARIANCE: f64 = PI * PI / 6.0;

/// Search interval for the local Whittle minimizer.
pub const WHITTLE_BOUNDS: (f64, f64) = (-0.5, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    /// `λ_j = 2πj/N`, `j = 1..⌊(N−1)/2⌋`.
    pub freqs: Vec<f64>,
    /// `I(λ_j) = |Σ_t X_t e^{−itλ_j}|² / (2πN)`.
    pub ordinates: Vec<f64>,
    pub n: usize,
}

impl Periodogram {
    pub fn new(x: &[f64]) -> Result<Periodogram> {
        let n = x.len();
        if n < 5 {
            return Err(Error::invalid(format!("periodogram needs at least 5 points, got {n}")));
        }
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let m = (n - 1) / 2;
        let norm = 1.0 / (2.0 * PI * n as f64);
        Ok(Periodogram {
            freqs: (1..=m).map(|j| 2.0 * PI * j as f64 / n as f64).collect(),
            ordinates: buf[1..=m].iter().map(|z| z.norm_sqr() * norm).collect(),
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Robinson's default bandwidth `⌊N/30⌋`.
pub fn default_bandwidth(n: usize) -> usize {
    n / 30
}

/// Local Whittle estimate from the `m` lowest Fourier frequencies.
pub fn local_whittle(x: &[f64], m: usize) -> Result<f64> {
    local_whittle_periodogram(&Periodogram::new(x)?, m)
}

/// Minimizes `R(d) = log(m⁻¹ Σ_{j≤m} j^{2d} I_j) − 2d m⁻¹ Σ_{j≤m} log j`.
pub fn local_whittle_periodogram(p: &Periodogram, m: usize) -> Result<f64> {
    if m < 2 || m > p.len() {
        return Err(Error::invalid(format!("bandwidth {m} outside [2, {}]", p.len())));
    }
    let ords = &p.ordinates[..m];
    let peak = ords.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Degenerate("all periodogram ordinates vanish".into()));
    }
    let log_j: Vec<f64> = (1..=m).map(|j| (j as f64).ln()).collect();
    let mean_log_j = log_j.iter().sum::<f64>() / m as f64;
    let objective = |d: f64| {
        let s: f64 = ords.iter().zip(&log_j).map(|(i, lj)| (i / peak) * (2.0 * d * lj).exp()).sum();
        (s / m as f64).ln() - 2.0 * d * mean_log_j
    };
    Ok(golden_section(objective, WHITTLE_BOUNDS.0, WHITTLE_BOUNDS.1, 1e-7))
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Outcome of a FEXP fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FexpFit {
    pub d: f64,
    /// Number of cosine terms retained.
    pub order: usize,
    /// Penalized criterion for orders `0..=p_max`.
    pub criterion: Vec<f64>,
}

/// FEXP estimate of `d` over all Fourier frequencies.
pub fn fexp_estimate(x: &[f64], kappa: f64) -> Result<FexpFit> {
    fexp_periodogram(&Periodogram::new(x)?, kappa)
}

/// Regresses `log I(λ_j) + γ` on `1`, `−2 log|2 sin(λ_j/2)|` and
/// `cos(kλ_j)`, `k = 1..p`. The order minimizes
/// `RSS_p/n + κ (p+1) π²/(6n)` over `p ≤ ⌊√n⌋`.
pub fn fexp_periodogram(p: &Periodogram, kappa: f64) -> Result<FexpFit> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let nf = p.len();
    if nf < 4 {
        return Err(Error::invalid(format!("FEXP needs at least 4 frequencies, got {nf}")));
    }
    if p.ordinates.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Degenerate("zero periodogram ordinate; log undefined".into()));
    }
    let p_max = ((nf as f64).sqrt().floor() as usize).min(nf - 3);
    let cols = p_max + 2;
    let design = DMatrix::from_fn(nf, cols, |r, c| {
        let l = p.freqs[r];
        match c {
            0 => 1.0,
            1 => -2.0 * (2.0 * (l / 2.0).sin()).abs().ln(),
            k => ((k - 1) as f64 * l).cos(),
        }
    });
    let y = DVector::from_iterator(nf, p.ordinates.iter().map(|v| v.ln() + EULER_GAMMA));
    let qr = design.qr();
    let r = qr.r();
    let scale = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|i| !(r[(i, i)].abs() > 1e-10 * scale)) {
        return Err(Error::Singular("FEXP design is rank deficient".into()));
    }
    let qty = qr.q().transpose() * &y;
    // Nested fits share the factorization: RSS_p = |y|² − Σ_{k<p+2} (Q'y)_k².
    let mut rss = y.norm_squared() - qty[0] * qty[0] - qty[1] * qty[1];
    let mut criterion = Vec::with_capacity(p_max + 1);
    for order in 0..=p_max {
        if order > 0 {
            rss -= qty[order + 1] * qty[order + 1];
        }
        criterion.push((rss.max(0.0) + kappa * (order + 1) as f64 * LOG_EXP_VARIANCE) / nf as f64);
    }
    let order = criterion
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty");
    let k = order + 2;
    let r_k = r.view((0, 0), (k, k)).into_owned();
    let beta = r_k
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::Singular("FEXP triangular solve".into()))?;
    Ok(FexpFit {
        d: beta[1],
        order,
        criterion,
    })
}
