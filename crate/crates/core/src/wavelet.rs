//! The analyzing wavelet and the asymptotic covariance of log-variograms.
//!
//! The wavelet is the degree-9 polynomial
//! `ψ(x) = x³(1−x)³(x³ − 3/2 x² + 15/22 x − 1/11)` on `[0, 1]`, zero elsewhere.
//! It is antisymmetric about `1/2`, has three vanishing moments, and is `C²`
//! on the real line. Its Fourier transform `ψ̂(u) = ∫₀¹ ψ(t) e^{−iut} dt`
//! is evaluated two ways:
//!
//! * `|u| < SERIES_SWITCH`: Taylor series `Σ (−iu)^m/m! · ∫ t^m ψ`, with the
//!   moments computed in exact integer arithmetic;
//! * otherwise: the closed form obtained by integrating by parts ten times.
//!
//! The closed form subtracts terms of size `9!/u^10` from each other and is
//! useless near `u = 1` (about 13 digits cancel), so the switch sits at 8.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::robust_cholesky;
use crate::quadrature::{filon_integrate, integrate_with_breaks, QuadOptions};

/// Monomial coefficients of ψ times 22, lowest degree first.
const NUMERATORS: [i64; 10] = [0, 0, 0, -2, 21, -84, 168, -180, 99, -22];
const DENOMINATOR: i64 = 22;

/// |u| below which ψ̂ is summed as a power series.
pub const SERIES_SWITCH: f64 = 8.0;
const SERIES_TERMS: usize = 48;

/// The polynomial analyzing wavelet with its cached transform data.
#[derive(Debug, Clone)]
pub struct WaveletSpec {
    coeffs: [f64; 10],
    deriv_at_0: [f64; 10],
    deriv_at_1: [f64; 10],
    moments: Vec<f64>,
    series: Vec<f64>,
    regularity: u32,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// `∫₀¹ t^m ψ(t) dt`, exact up to the final rounding.
fn exact_moment(m: usize) -> f64 {
    let mut lcm: i128 = 1;
    for k in 3..10 {
        let q = (k + m + 1) as i128;
        lcm = lcm / gcd(lcm, q) * q;
    }
    let num: i128 = (3..10)
        .map(|k| NUMERATORS[k] as i128 * (lcm / (k + m + 1) as i128))
        .sum();
    let den = lcm * DENOMINATOR as i128;
    let g = gcd(num, den).max(1);
    (num / g) as f64 / (den / g) as f64
}

impl WaveletSpec {
    fn build() -> Self {
        let mut coeffs = [0.0; 10];
        let mut deriv_at_0 = [0.0; 10];
        let mut deriv_at_1 = [0.0; 10];
        for k in 0..10 {
            coeffs[k] = NUMERATORS[k] as f64 / DENOMINATOR as f64;
            deriv_at_0[k] = (factorial(k) * NUMERATORS[k]) as f64 / DENOMINATOR as f64;
            let at_one: i64 = (k..10)
                .map(|j| NUMERATORS[j] * factorial(j) / factorial(j - k))
                .sum();
            deriv_at_1[k] = at_one as f64 / DENOMINATOR as f64;
        }
        let moments: Vec<f64> = (0..SERIES_TERMS).map(exact_moment).collect();
        let mut series = Vec::with_capacity(SERIES_TERMS);
        let mut inv_fact = 1.0;
        for (m, mom) in moments.iter().enumerate() {
            if m > 0 {
                inv_fact /= m as f64;
            }
            series.push(mom * inv_fact);
        }
        Self {
            coeffs,
            deriv_at_0,
            deriv_at_1,
            moments,
            series,
            regularity: 2,
        }
    }

    /// Shared instance; construction is deterministic so one copy suffices.
    pub fn standard() -> &'static WaveletSpec {
        static SPEC: OnceLock<WaveletSpec> = OnceLock::new();
        SPEC.get_or_init(WaveletSpec::build)
    }

    pub fn poly_coeffs(&self) -> &[f64; 10] {
        &self.coeffs
    }

    pub fn regularity(&self) -> u32 {
        self.regularity
    }

    pub fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// `∫₀¹ t^m ψ(t) dt` for `m < 48`.
    pub fn moment(&self, m: usize) -> f64 {
        self.moments[m]
    }

    /// `∫₀¹ ψ²`, exactly `1 / 469464996`.
    pub fn l2_norm_sq(&self) -> f64 {
        1.0 / 469_464_996.0
    }

    pub fn psi(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        // Factored form: exact zeros at the support ends.
        let y = x * (1.0 - x);
        y * y * y * (((x - 1.5) * x + 15.0 / 22.0) * x - 1.0 / 11.0)
    }

    /// k-th derivative of the polynomial at 0 and at 1.
    pub fn boundary_derivatives(&self, k: usize) -> (f64, f64) {
        (self.deriv_at_0[k], self.deriv_at_1[k])
    }

    pub fn psi_hat(&self, u: f64) -> Complex64 {
        if u.abs() < SERIES_SWITCH {
            self.psi_hat_series(u)
        } else {
            self.psi_hat_closed(u)
        }
    }

    /// Power-series branch, valid (numerically) for moderate |u|.
    pub fn psi_hat_series(&self, u: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut pow = 1.0;
        for (m, s) in self.series.iter().enumerate() {
            let t = s * pow;
            match m % 4 {
                0 => re += t,
                1 => im -= t,
                2 => re -= t,
                _ => im += t,
            }
            pow *= u;
        }
        Complex64::new(re, im)
    }

    /// Integration-by-parts branch, valid for |u| well away from 0.
    pub fn psi_hat_closed(&self, u: f64) -> Complex64 {
        let (s0, s1) = self.boundary_sums(u);
        s0 - s1 * Complex64::from_polar(1.0, -u)
    }

    /// `(S₀(u), S₁(u))` with `S_x(u) = Σ_k p^(k)(x) / (iu)^{k+1}`, so that
    /// `ψ̂(u) = S₀(u) − S₁(u) e^{−iu}`.
    pub fn boundary_sums(&self, u: f64) -> (Complex64, Complex64) {
        let w = Complex64::new(0.0, -1.0 / u);
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for k in (3..10).rev() {
            a = a * w + self.deriv_at_0[k];
            b = b * w + self.deriv_at_1[k];
        }
        let w4 = (w * w) * (w * w);
        (a * w4, b * w4)
    }

    #[inline]
    pub fn psi_hat_norm_sq(&self, u: f64) -> f64 {
        self.psi_hat(u).norm_sqr()
    }

    /// Upper envelope `Σ (|p^(k)(0)| + |p^(k)(1)|) / |u|^{k+1}` of |ψ̂(u)|.
    pub fn psi_hat_envelope(&self, u: f64) -> f64 {
        let inv = 1.0 / u.abs();
        let mut acc = 0.0;
        for k in (3..10).rev() {
            acc = acc * inv + self.deriv_at_0[k].abs() + self.deriv_at_1[k].abs();
        }
        acc * inv.powi(4)
    }

    /// `K(ψ, α) = ∫ |ψ̂(u)|² |u|^{−α} du` over the real line, for `α < 1`.
    pub fn k_integral(&self, alpha: f64) -> Result<f64> {
        self.k_integral_with(alpha, QuadOptions::with_rel_tol(1e-12))
    }

    pub fn k_integral_with(&self, alpha: f64, opts: QuadOptions) -> Result<f64> {
        if !(alpha < 1.0) {
            return Err(Error::invalid(format!("K(psi, alpha) diverges for alpha = {alpha} >= 1")));
        }
        if alpha <= -6.0 {
            return Err(Error::invalid(format!("K(psi, alpha) tail bound needs alpha > -6, got {alpha}")));
        }
        let integrand = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                self.psi_hat_norm_sq(u) * u.powf(-alpha)
            }
        };
        // |ψ̂(u)| u^4 is bounded by the envelope, which decreases in u.
        let tail = |upper: f64| {
            let e = self.psi_hat_envelope(upper) * upper.powi(4);
            e * e * upper.powf(-7.0 - alpha) / (7.0 + alpha)
        };
        let mut upper = 64.0;
        let mut value = integrate_with_breaks(integrand, &pi_breaks(0.0, upper), opts)?.value;
        while tail(upper) > 1e-13 * value.abs() {
            value += integrate_with_breaks(integrand, &pi_breaks(upper, 2.0 * upper), opts)?.value;
            upper *= 2.0;
        }
        Ok(2.0 * value)
    }
}

/// Breakpoints every π on [lo, hi].
fn pi_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut v = vec![lo];
    let mut x = (lo / PI).floor() * PI + PI;
    while x < hi {
        if x > lo {
            v.push(x);
        }
        x += PI;
    }
    v.push(hi);
    v
}

/// Asymptotic covariance matrix of `(log T_N(i a))_{i=1..ℓ}` scaled by `N/a`.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub d: f64,
    pub ratios: Vec<usize>,
    pub gamma: DMatrix<f64>,
    pub k_2d: f64,
}

impl CovarianceModel {
    pub fn ell(&self) -> usize {
        self.ratios.len()
    }

    /// The model restricted to ratios `1..=ell`.
    pub fn leading(&self, ell: usize) -> Result<CovarianceModel> {
        if ell > self.ell() || ell == 0 {
            return Err(Error::invalid(format!("cannot take {ell} leading ratios of {}", self.ell())));
        }
        Ok(CovarianceModel {
            d: self.d,
            ratios: self.ratios[..ell].to_vec(),
            gamma: self.gamma.view((0, 0), (ell, ell)).into_owned(),
            k_2d: self.k_2d,
        })
    }

    /// Copy with `ridge · trace/ℓ` added to the diagonal.
    pub fn regularized(&self, ridge: f64) -> CovarianceModel {
        let ell = self.ell();
        let bump = ridge * self.gamma.trace() / ell as f64;
        let mut out = self.clone();
        for i in 0..ell {
            out.gamma[(i, i)] += bump;
        }
        out
    }

    /// Identity covariance; turns the weighted fit into ordinary least squares.
    pub fn identity(ell: usize) -> CovarianceModel {
        CovarianceModel {
            d: 0.0,
            ratios: (1..=ell).collect(),
            gamma: DMatrix::identity(ell, ell),
            k_2d: 1.0,
        }
    }
}

/// `∫₀^∞ |ψ̂(u)|² |ψ̂(ρu)|² u^{−4d} du` for `ρ ≥ 1`.
///
/// Below `u₀ = SERIES_SWITCH / ρ` the integrand is handled by adaptive
/// Gauss-Kronrod. Above it `|ψ̂(ρu)|² = |S₀|² + |S₁|² − 2 Re(S₀ S̄₁ e^{iρu})`
/// with slowly varying `S₀, S₁`, and the Filon rule takes the `e^{iρu}`
/// factor exactly.
#[doc(hidden)]
pub fn pair_integral(spec: &WaveletSpec, rho: f64, d: f64, opts: QuadOptions) -> Result<f64> {
    let weight = |u: f64| spec.psi_hat_norm_sq(u) * u.powf(-4.0 * d);
    let integrand = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            weight(u) * spec.psi_hat_norm_sq(rho * u)
        }
    };
    let amplitude = |u: f64| {
        let g = weight(u);
        let (s0, s1) = spec.boundary_sums(rho * u);
        (g * (s0.norm_sqr() + s1.norm_sqr()), -2.0 * g * s0 * s1.conj())
    };
    let tail = |upper: f64| {
        let e1 = spec.psi_hat_envelope(upper) * upper.powi(4);
        let e2 = spec.psi_hat_envelope(rho * upper) * (rho * upper).powi(4);
        (e1 * e2).powi(2) * rho.powi(-8) * upper.powf(-15.0 - 4.0 * d) / (15.0 + 4.0 * d)
    };
    let u0 = SERIES_SWITCH / rho;
    let mut low = vec![0.0, u0 / 8.0, u0 / 4.0, u0 / 2.0];
    low.extend(pi_breaks(u0 / 2.0, u0).into_iter().skip(1));
    let mut value = integrate_with_breaks(integrand, &low, opts)?.value;

    let mut upper = 64.0;
    let mut high = vec![u0];
    let mut x = 2.0 * u0;
    while x < PI {
        high.push(x);
        x *= 2.0;
    }
    high.extend(pi_breaks(PI.max(u0), upper).into_iter().filter(|&b| b > u0));
    // |ψ̂(u)|² switches branch at SERIES_SWITCH; keep it on a panel edge.
    if u0 < SERIES_SWITCH {
        high.push(SERIES_SWITCH);
        high.sort_by(f64::total_cmp);
        high.dedup();
    }
    value += filon_integrate(amplitude, rho, &high, opts.rel_tol)?;
    while tail(upper) > 1e-12 * value.abs() {
        value += filon_integrate(amplitude, rho, &pi_breaks(upper, 2.0 * upper), opts.rel_tol)?;
        upper *= 2.0;
    }
    Ok(value)
}

/// Reference value of [`pair_integral`] by plain adaptive quadrature.
#[doc(hidden)]
pub fn pair_integral_direct(spec: &WaveletSpec, rho: f64, d: f64, opts: QuadOptions) -> Result<f64> {
    let integrand = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            spec.psi_hat_norm_sq(u) * spec.psi_hat_norm_sq(rho * u) * u.powf(-4.0 * d)
        }
    };
    let mut breaks = vec![0.0];
    let mut x = 1.0 / rho;
    while x < PI {
        breaks.push(x);
        x *= std::f64::consts::SQRT_2;
    }
    breaks.extend(pi_breaks(PI, 1024.0));
    breaks.dedup();
    Ok(integrate_with_breaks(integrand, &breaks, opts)?.value)
}

/// Default options for covariance entries.
pub fn gamma_quad_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    }
}

/// Covariance matrix for ratios `1..=ell` at memory parameter `d`.
pub fn gamma_matrix(d: f64, ell: usize) -> Result<CovarianceModel> {
    gamma_matrix_with(d, ell, gamma_quad_options())
}

pub fn gamma_matrix_with(d: f64, ell: usize, opts: QuadOptions) -> Result<CovarianceModel> {
    if !(d < 0.5) || !d.is_finite() {
        return Err(Error::invalid(format!("covariance needs d < 1/2, got {d}")));
    }
    if ell < 1 {
        return Err(Error::invalid("covariance needs at least one ratio"));
    }
    let spec = WaveletSpec::standard();
    let k_2d = spec.k_integral(2.0 * d)?;
    // The integral depends on (i, j) only through j/i; evaluate each
    // reduced ratio once.
    let mut ratios: Vec<(usize, usize)> = (1..=ell)
        .flat_map(|i| (i..=ell).map(move |j| (i, j)))
        .filter(|&(i, j)| gcd(i as i128, j as i128) == 1)
        .collect();
    ratios.sort_unstable();
    let values: Vec<f64> = ratios
        .par_iter()
        .map(|&(i, j)| {
            pair_integral(spec, j as f64 / i as f64, d, opts).map_err(|e| Error::GammaEntry {
                i,
                j,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let lookup: HashMap<(usize, usize), f64> = ratios.into_iter().zip(values).collect();
    let mut gamma = DMatrix::zeros(ell, ell);
    for i in 1..=ell {
        for j in i..=ell {
            let g = gcd(i as i128, j as i128) as usize;
            let integral = lookup[&(i / g, j / g)];
            let (fi, fj) = (i as f64, j as f64);
            let full = 2.0 * fi.powf(4.0 * d - 1.0) * integral;
            let v = 4.0 * PI * (fi * fj).powf(1.0 - 2.0 * d) * full / (k_2d * k_2d);
            gamma[(i - 1, j - 1)] = v;
            gamma[(j - 1, i - 1)] = v;
        }
    }
    Ok(CovarianceModel {
        d,
        ratios: (1..=ell).collect(),
        gamma,
        k_2d,
    })
}

/// Asymptotic variance of the weighted-regression estimate of `d`:
/// `(0 ½)(Z₁' Γ⁻¹ Z₁)⁻¹(0 ½)'` with `Z₁` rows `(1, log i)`.
pub fn sigma2_d(cov: &CovarianceModel) -> Result<f64> {
    let ell = cov.ell();
    if ell < 2 {
        return Err(Error::invalid("sigma2_d needs at least two ratios"));
    }
    let chol = robust_cholesky(&cov.gamma)?;
    let z = DMatrix::from_fn(ell, 2, |r, c| if c == 0 { 1.0 } else { (cov.ratios[r] as f64).ln() });
    let m = z.transpose() * chol.solve(&z);
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if !(det > 0.0) {
        return Err(Error::Singular("Z' Γ^{-1} Z".into()));
    }
    Ok(0.25 * m[(0, 0)] / det)
}

/// Lazily filled table of `Γ(1..ℓ_max, d)` on a grid in `d`, linearly
/// interpolated. Sub-matrices for smaller `ℓ` are leading blocks.
pub struct GammaCache {
    step: f64,
    ell_max: usize,
    nodes: Mutex<HashMap<i64, Arc<CovarianceModel>>>,
}

/// Bounds applied to `d` before evaluating Γ (the integral diverges at 1/2).
pub const D_CLAMP: f64 = 0.49;

impl GammaCache {
    pub fn new(step: f64, ell_max: usize) -> Self {
        Self {
            step,
            ell_max,
            nodes: Mutex::new(HashMap::new()),
        }
    }

    pub fn ell_max(&self) -> usize {
        self.ell_max
    }

    fn node(&self, idx: i64) -> Result<Arc<CovarianceModel>> {
        if let Some(n) = self.nodes.lock().unwrap().get(&idx) {
            return Ok(n.clone());
        }
        // Computed outside the lock; a racing duplicate is identical.
        let model = Arc::new(gamma_matrix(idx as f64 * self.step, self.ell_max)?);
        Ok(self.nodes.lock().unwrap().entry(idx).or_insert(model).clone())
    }

    pub fn get(&self, d: f64, ell: usize) -> Result<CovarianceModel> {
        if ell > self.ell_max {
            return Err(Error::invalid(format!("cache holds ell <= {}, asked {ell}", self.ell_max)));
        }
        let d = d.clamp(-D_CLAMP, D_CLAMP);
        let pos = d / self.step;
        let lo = pos.floor() as i64;
        let w = pos - lo as f64;
        let a = self.node(lo)?;
        let model = if w < 1e-12 {
            a.leading(ell)?
        } else {
            let b = self.node(lo + 1)?;
            let ga = a.gamma.view((0, 0), (ell, ell));
            let gb = b.gamma.view((0, 0), (ell, ell));
            CovarianceModel {
                d,
                ratios: (1..=ell).collect(),
                gamma: ga * (1.0 - w) + gb * w,
                k_2d: a.k_2d * (1.0 - w) + b.k_2d * w,
            }
        };
        Ok(CovarianceModel { d, ..model })
    }
}

/// `σ²_d(ℓ)` for every `(d, ℓ)` in the grid; one Γ per `d` at the largest `ℓ`.
pub fn sigma2_grid(d_values: &[f64], ells: &[usize]) -> Result<Vec<(f64, usize, f64)>> {
    let ell_max = ells.iter().copied().max().unwrap_or(0);
    let rows: Vec<Vec<(f64, usize, f64)>> = d_values
        .par_iter()
        .map(|&d| {
            let full = gamma_matrix(d, ell_max)?;
            ells.iter()
                .map(|&ell| Ok((d, ell, sigma2_d(&full.leading(ell)?)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
