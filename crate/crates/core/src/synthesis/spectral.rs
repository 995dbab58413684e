//! Spectral densities with power-law singularities and their autocovariances
//! `γ(k) = ∫_{−π}^{π} f(λ) cos(kλ) dλ`.
//!
//! Every density here is a sum of terms `c |λ − λ₀|^s`, so each `γ(k)`
//! reduces to the kernel `C(s, ω) = ∫₀¹ t^s cos(ωt) dt`. Small `ω` goes to
//! adaptive quadrature after the substitution `v = t^{s+1}`, which removes
//! the endpoint singularity; large `ω` uses `∫₀^∞` in closed form minus an
//! asymptotic expansion of `∫₁^∞`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// `ω` from which the asymptotic branch of the kernel is used.
const ASYMPTOTIC_SWITCH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Density {
    /// `f(λ) = |λ|^{−2d} (1 + |λ|^{d′})`.
    F3 { d_prime: f64 },
    /// `f(λ) = ||λ| − π/2|^{−2d}`: a pole away from the origin.
    Garma,
    /// `f ≡ 1`.
    Flat,
}

impl Density {
    pub fn validate(&self, d: f64) -> Result<()> {
        if !(d > -0.5 && d < 0.5) {
            return Err(Error::invalid(format!("spectral density needs |d| < 1/2, got {d}")));
        }
        if let Density::F3 { d_prime } = self {
            if !(*d_prime > 0.0 && d_prime.is_finite()) {
                return Err(Error::invalid(format!("d' must be positive, got {d_prime}")));
            }
        }
        Ok(())
    }

    /// Memory parameter at the origin.
    pub fn memory(&self, d: f64) -> f64 {
        match self {
            Density::F3 { .. } => d,
            Density::Garma | Density::Flat => 0.0,
        }
    }

    pub fn eval(&self, d: f64, lambda: f64) -> f64 {
        let l = lambda.abs();
        match self {
            Density::F3 { d_prime } => l.powf(-2.0 * d) * (1.0 + l.powf(*d_prime)),
            Density::Garma => (l - PI / 2.0).abs().powf(-2.0 * d),
            Density::Flat => 1.0,
        }
    }
}

/// `γ(0..=max_lag)` for the given density.
pub fn autocovariances(density: Density, d: f64, max_lag: usize) -> Result<Vec<f64>> {
    density.validate(d)?;
    let s = -2.0 * d;
    (0..=max_lag)
        .map(|k| {
            let k_f = k as f64;
            Ok(match density {
                Density::F3 { d_prime } => {
                    let s2 = s + d_prime;
                    2.0 * (PI.powf(s + 1.0) * cos_power(s, k_f * PI)?
                        + PI.powf(s2 + 1.0) * cos_power(s2, k_f * PI)?)
                }
                Density::Garma => {
                    let c = match k % 4 {
                        0 => 1.0,
                        2 => -1.0,
                        _ => return Ok(0.0),
                    };
                    4.0 * c * (PI / 2.0).powf(s + 1.0) * cos_power(s, k_f * PI / 2.0)?
                }
                Density::Flat => {
                    if k == 0 {
                        2.0 * PI
                    } else {
                        0.0
                    }
                }
            })
        })
        .collect()
}

/// `C(s, ω) = ∫₀¹ t^s cos(ωt) dt` for `s > −1`, `ω ≥ 0`.
pub fn cos_power(s: f64, omega: f64) -> Result<f64> {
    if !(s > -1.0) {
        return Err(Error::invalid(format!("t^s is not integrable at 0 for s = {s}")));
    }
    if omega == 0.0 {
        return Ok(1.0 / (s + 1.0));
    }
    if omega >= ASYMPTOTIC_SWITCH {
        return Ok(cos_power_asymptotic(s, omega));
    }
    cos_power_quadrature(s, omega)
}

fn cos_power_quadrature(s: f64, omega: f64) -> Result<f64> {
    let p = 1.0 / (s + 1.0);
    // Breaks at the zeros of cos(ωt), mapped through v = t^{s+1}.
    let mut breaks = vec![0.0];
    let mut j = 0.5;
    while j * PI < omega {
        breaks.push((j * PI / omega).powf(s + 1.0));
        j += 1.0;
    }
    breaks.push(1.0);
    let opts = QuadOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-13,
        max_intervals: 20_000,
    };
    let r = integrate_with_breaks(|v: f64| (omega * v.powf(p)).cos(), &breaks, opts)?;
    Ok(p * r.value)
}

fn cos_power_asymptotic(s: f64, omega: f64) -> f64 {
    let whole = Complex64::from_polar(gamma(s + 1.0) * omega.powf(-(s + 1.0)), PI * (s + 1.0) / 2.0);
    let inv = Complex64::new(0.0, -1.0 / omega); // 1 / (iω)
    let mut term = inv;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for m in 0..200 {
        let size = term.norm();
        if size == 0.0 || size > last {
            break;
        }
        sum += term;
        if size < 1e-18 * sum.norm() {
            break;
        }
        last = size;
        term *= -(s - m as f64) * inv;
    }
    (whole + Complex64::from_polar(1.0, omega) * sum).re
}
