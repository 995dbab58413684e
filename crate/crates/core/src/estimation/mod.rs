//! The adaptive wavelet estimator of the memory parameter.
//!
//! Stage one scans a grid of scale exponents `α` and keeps the one where the
//! points `(log a_i, log T_N(a_i))` at `a_i = i·N^α` are closest to a line.
//! Stage two refits at the slightly larger exponent `α̃` with many more
//! scales, weighting the regression by the asymptotic covariance `Γ̂`, and
//! reports a confidence interval and a chi-square goodness-of-fit test.

mod chi2;
mod variogram;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gls_line, ols_line, LineFit};
use crate::wavelet::{gamma_matrix, sigma2_d, CovarianceModel, GammaCache, D_CLAMP};

pub use chi2::{chi2_cdf, chi2_quantile, chi2_sf};
pub use variogram::{variogram, wavelet_coeffs, Variogram, VariogramEngine};

/// Two-sided 97.5% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

/// Diagonal load on `Γ̂`, relative to `trace/ℓ`, before the weighted fit.
///
/// `Γ` has eigenvalues spanning ten or more decades; at finite `N` the
/// variogram's covariance in the weakest directions sits well above them.
pub const GAMMA_RIDGE: f64 = 1e-5;

/// Where the stage-two covariance comes from.
#[derive(Clone, Copy)]
pub enum GammaSource<'a> {
    /// Evaluate `Γ(1..ℓ₂, d̂̂)` from scratch.
    Exact,
    /// Interpolate in a shared table.
    Cached(&'a GammaCache),
    /// Unweighted fit.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Stage-one regression size; `⌊2 log N⌋` when unset.
    pub ell1: Option<usize>,
    /// Upper bound on the stage-two regression size.
    pub ell2_cap: Option<usize>,
    /// Grid density `c` in `α ∈ {k/c}`; `⌊10 log N⌋` when unset.
    pub grid_density: Option<usize>,
    /// Level of the goodness-of-fit test.
    pub level: f64,
    /// Diagonal load on `Γ̂`; see [`GAMMA_RIDGE`].
    pub gamma_ridge: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            ell1: None,
            ell2_cap: None,
            grid_density: None,
            level: 0.95,
            gamma_ridge: GAMMA_RIDGE,
        }
    }
}

impl EstimatorConfig {
    /// Settings for ensembles: stage two capped at 50 scales.
    pub fn monte_carlo() -> Self {
        Self {
            ell2_cap: Some(50),
            ..Self::default()
        }
    }
}

/// Straight-line fit of a variogram in log-log coordinates: `(c, d)`.
pub fn ols_fit(vg: &Variogram) -> Result<(f64, f64)> {
    if vg.len() < 3 {
        return Err(Error::invalid("line fit needs at least three scales"));
    }
    let fit = ols_line(&vg.log_scales(), &vg.log_t())?;
    Ok((fit.intercept, fit.slope / 2.0))
}

/// Stage-one outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleSelection {
    pub alpha_grid: Vec<f64>,
    pub q_values: Vec<f64>,
    pub alpha_hat: f64,
    pub alpha_tilde: f64,
    pub ell_stage1: usize,
    /// Variogram at `α̂`.
    pub first_stage: Variogram,
}

/// Smallest usable scale. Below it the sampled filter's energy
/// `Σ ψ(j/a)²/a` misses `∫ψ²` by more than 1% (by 98% at `a = 4`, and at
/// `a = 2` the only tap is `ψ(1/2) = 0`).
pub const MIN_SCALE: usize = 8;

/// `max(MIN_SCALE, round(i·base))` for `i = 1..=ell`, deduplicated.
pub fn scales_for(base: f64, ell: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (1..=ell)
        .map(|i| ((i as f64 * base).round() as usize).max(MIN_SCALE))
        .collect();
    s.dedup();
    s
}

pub fn default_ell1(n: usize) -> usize {
    (2.0 * (n as f64).ln()).floor() as usize
}

pub fn default_grid_density(n: usize) -> usize {
    (10.0 * (n as f64).ln()).floor() as usize
}

/// Stage one over a prepared engine.
pub fn select_scale_with(engine: &mut VariogramEngine<'_>, ell1: usize, grid_density: usize) -> Result<ScaleSelection> {
    let n = engine.n();
    let ln_n = (n as f64).ln();
    if ell1 < 3 {
        return Err(Error::invalid(format!("stage one needs at least 3 scales, got {ell1}")));
    }
    if n < 16 || grid_density < 2 {
        return Err(Error::invalid(format!("series of length {n} is too short")));
    }
    let alpha_max = ((n as f64) / ell1 as f64).ln() / ln_n;
    let mut alpha_grid = Vec::new();
    let mut q_values = Vec::new();
    let mut best: Option<(f64, f64, Variogram)> = None;
    for k in 2.. {
        let alpha = k as f64 / grid_density as f64;
        if alpha > alpha_max + 1e-12 {
            break;
        }
        let base = (n as f64).powf(alpha);
        if base < MIN_SCALE as f64 {
            continue;
        }
        let scales = scales_for(base, ell1);
        if scales.len() < 3 {
            continue;
        }
        if 2 * scales[scales.len() - 1] > n {
            break;
        }
        let vg = engine.variogram(&scales)?;
        let fit = ols_line(&vg.log_scales(), &vg.log_t())?;
        let q = fit.weighted_rss;
        alpha_grid.push(alpha);
        q_values.push(q);
        if best.as_ref().is_none_or(|(_, bq, _)| q < *bq) {
            best = Some((alpha, q, vg));
        }
    }
    let (alpha_hat, _, first_stage) =
        best.ok_or_else(|| Error::invalid(format!("no admissible scale grid for n = {n}, ell = {ell1}")))?;
    let correction = 6.0 * alpha_hat / ((ell1 as f64 - 2.0) * (1.0 - alpha_hat)) * ln_n.ln() / ln_n;
    let alpha_tilde = alpha_hat + correction;
    if !(alpha_tilde < 1.0) {
        return Err(Error::Degenerate(format!("corrected scale exponent {alpha_tilde} >= 1")));
    }
    Ok(ScaleSelection {
        alpha_grid,
        q_values,
        alpha_hat,
        alpha_tilde,
        ell_stage1: ell1,
        first_stage,
    })
}

/// Stage one on a raw series.
pub fn select_scale(x: &[f64], ell1: usize) -> Result<ScaleSelection> {
    select_scale_with(&mut VariogramEngine::new(x), ell1, default_grid_density(x.len()))
}

/// Full estimator output.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub d_tilde: f64,
    pub c_tilde: f64,
    pub d_hat_hat: f64,
    pub alpha_hat: f64,
    pub alpha_tilde: f64,
    pub ell1: usize,
    pub ell2: usize,
    /// Stage-two base scale `max(MIN_SCALE, round(N^{α̃}))`.
    pub base_scale: f64,
    pub ci95: [f64; 2],
    /// `σ²_{d̂̂}(ℓ₂)`.
    pub sigma2: f64,
    pub gof_stat: f64,
    pub gof_pvalue: f64,
    pub gof_dof: usize,
    pub gof_critical: f64,
    pub scales: Vec<usize>,
    pub log_t_values: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub q_values: Vec<f64>,
    #[serde(skip)]
    pub gamma_hat: CovarianceModel,
}

impl EstimateReport {
    /// Whether the goodness-of-fit test accepts at the configured level.
    pub fn gof_accepted(&self) -> bool {
        self.gof_stat < self.gof_critical
    }

    pub fn ci_covers(&self, d: f64) -> bool {
        self.ci95[0] <= d && d <= self.ci95[1]
    }
}

/// Stage-two regression size and base scale for a selection. The base is an
/// integer so that the scales `i·base` keep the exact ratios `Γ` is built on.
pub fn stage_two_plan(n: usize, alpha_tilde: f64, cap: Option<usize>) -> Result<(usize, f64)> {
    let nf = n as f64;
    let base = nf.powf(alpha_tilde).round().max(MIN_SCALE as f64);
    let mut ell2 = ((nf.powf(1.0 - alpha_tilde) / nf.ln()).floor() as usize).max(3);
    if let Some(cap) = cap {
        ell2 = ell2.min(cap.max(3));
    }
    while ell2 >= 3 && 2 * (ell2 as f64 * base).round() as usize > n {
        ell2 -= 1;
    }
    if ell2 < 3 {
        return Err(Error::Degenerate(format!("fewer than 3 stage-two scales fit in n = {n}")));
    }
    Ok((ell2, base))
}

/// Stage two given a selection.
pub fn pgls_fit_with(
    engine: &mut VariogramEngine<'_>,
    selection: &ScaleSelection,
    config: &EstimatorConfig,
    source: GammaSource<'_>,
) -> Result<EstimateReport> {
    let n = engine.n();
    let (ell2, base) = stage_two_plan(n, selection.alpha_tilde, config.ell2_cap)?;
    let scales = scales_for(base, ell2);
    let vg = engine.variogram(&scales)?;
    let (_, d_hat_hat) = ols_fit(&selection.first_stage)?;
    let d_plug = d_hat_hat.clamp(-D_CLAMP, D_CLAMP);
    let gamma_hat = match source {
        GammaSource::Exact => gamma_matrix(d_plug, ell2)?.regularized(config.gamma_ridge),
        GammaSource::Cached(cache) => cache.get(d_plug, ell2)?.regularized(config.gamma_ridge),
        GammaSource::Identity => CovarianceModel::identity(ell2),
    };
    let fit: LineFit = gls_line(&vg.log_scales(), &vg.log_t(), &gamma_hat.gamma)?;
    let d_tilde = fit.slope / 2.0;
    let gof_dof = ell2 - 2;
    let gof_stat = n as f64 / base * fit.weighted_rss;
    let sigma2 = sigma2_d(&gamma_hat)?;
    let half = Z_975 * sigma2.sqrt() * (base / n as f64).sqrt();
    Ok(EstimateReport {
        n,
        d_tilde,
        c_tilde: fit.intercept,
        d_hat_hat,
        alpha_hat: selection.alpha_hat,
        alpha_tilde: selection.alpha_tilde,
        ell1: selection.ell_stage1,
        ell2,
        base_scale: base,
        ci95: [d_tilde - half, d_tilde + half],
        sigma2,
        gof_stat,
        gof_pvalue: chi2_sf(gof_stat, gof_dof),
        gof_dof,
        gof_critical: chi2_quantile(config.level, gof_dof)?,
        scales: vg.scales.clone(),
        log_t_values: vg.log_t(),
        alpha_grid: selection.alpha_grid.clone(),
        q_values: selection.q_values.clone(),
        gamma_hat,
    })
}

/// Both stages on a raw series.
pub fn estimate(x: &[f64], config: &EstimatorConfig, source: GammaSource<'_>) -> Result<EstimateReport> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    let n = x.len();
    let ell1 = config.ell1.unwrap_or_else(|| default_ell1(n));
    let density = config.grid_density.unwrap_or_else(|| default_grid_density(n));
    let mut engine = VariogramEngine::new(x);
    let selection = select_scale_with(&mut engine, ell1, density)?;
    pgls_fit_with(&mut engine, &selection, config, source)
}

/// `(T̃_N, p-value)` for residuals of a weighted fit.
pub fn gof_test(fit: &LineFit, n: usize, base_scale: f64) -> Result<(f64, f64)> {
    let ell = fit.residuals.len();
    if ell < 3 {
        return Err(Error::invalid("goodness-of-fit needs at least three scales"));
    }
    let stat = n as f64 / base_scale * fit.weighted_rss;
    Ok((stat, chi2_sf(stat, ell - 2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_deduplicate_and_respect_floor() {
        assert_eq!(scales_for(3.0, 4), vec![8, 9, 12]);
        assert_eq!(scales_for(8.4, 3), vec![8, 17, 25]);
    }

    #[test]
    fn stage_one_sizes() {
        assert_eq!(default_ell1(1000), 13);
        assert_eq!(default_ell1(10_000), 18);
        assert_eq!(default_grid_density(1000), 69);
    }

    #[test]
    fn stage_two_plan_respects_cap_and_length() {
        let (ell, base) = stage_two_plan(10_000, 0.3, Some(50)).unwrap();
        assert_eq!(ell, 50);
        assert_eq!(base, 16.0);
        let (ell, _) = stage_two_plan(10_000, 0.3, None).unwrap();
        assert_eq!(ell, (10_000f64.powf(0.7) / 10_000f64.ln()).floor() as usize);
        assert!(stage_two_plan(40, 0.9, None).is_err());
    }
}
