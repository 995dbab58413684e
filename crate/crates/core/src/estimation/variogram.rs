use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::next_smooth;
use crate::wavelet::WaveletSpec;

/// Scales up to this size are filtered by direct summation.
const DIRECT_MAX_SCALE: usize = 24;

/// Filter taps `h_j = ψ(j/a)/√a` for `j = 1..a−1`; `taps[j]` holds `h_j`.
fn taps(a: usize) -> Vec<f64> {
    let spec = WaveletSpec::standard();
    let norm = (a as f64).sqrt().recip();
    (0..a).map(|j| spec.psi(j as f64 / a as f64) * norm).collect()
}

fn check_scale(n: usize, a: usize) -> Result<()> {
    if a < 2 || 2 * a > n {
        return Err(Error::invalid(format!("scale {a} outside [2, n/2] for n = {n}")));
    }
    Ok(())
}

/// Wavelet coefficients `e(a, b) = a^{−1/2} Σ_t X_t ψ((t − b)/a)` for
/// `b = 1..N−a`, by direct summation.
pub fn wavelet_coeffs(x: &[f64], a: usize) -> Result<Vec<f64>> {
    check_scale(x.len(), a)?;
    let h = taps(a);
    Ok((0..x.len() - a)
        .map(|b| (1..a).map(|j| h[j] * x[b + j]).sum())
        .collect())
}

/// Sample variances `T_N(a_i)` of the wavelet coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variogram {
    pub scales: Vec<usize>,
    pub t_values: Vec<f64>,
    pub n: usize,
}

impl Variogram {
    pub fn log_scales(&self) -> Vec<f64> {
        self.scales.iter().map(|&a| (a as f64).ln()).collect()
    }

    pub fn log_t(&self) -> Vec<f64> {
        self.t_values.iter().map(|t| t.ln()).collect()
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// Computes and memoizes `T_N(a)` for one series.
///
/// Small scales are summed directly. Larger ones use one circular
/// cross-correlation per pair of scales: the two real filters ride in the
/// real and imaginary parts of a single complex FFT.
pub struct VariogramEngine<'a> {
    x: &'a [f64],
    spectrum: Option<Vec<Complex64>>,
    forward: Option<Arc<dyn Fft<f64>>>,
    inverse: Option<Arc<dyn Fft<f64>>>,
    cache: HashMap<usize, f64>,
}

impl<'a> VariogramEngine<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        Self {
            x,
            spectrum: None,
            forward: None,
            inverse: None,
            cache: HashMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn prepare_fft(&mut self) {
        if self.spectrum.is_some() {
            return;
        }
        let len = next_smooth(self.x.len());
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut buf: Vec<Complex64> = self.x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        buf.resize(len, Complex64::new(0.0, 0.0));
        forward.process(&mut buf);
        self.spectrum = Some(buf);
        self.forward = Some(forward);
        self.inverse = Some(inverse);
    }

    fn direct(&self, a: usize) -> f64 {
        let h = taps(a);
        let x = self.x;
        let count = x.len() - a;
        let mut acc = 0.0;
        for b in 0..count {
            let e: f64 = (1..a).map(|j| h[j] * x[b + j]).sum();
            acc += e * e;
        }
        acc / count as f64
    }

    /// Two scales through one complex FFT round trip.
    fn via_fft(&mut self, a1: usize, a2: Option<usize>) -> (f64, Option<f64>) {
        self.prepare_fft();
        let spectrum = self.spectrum.as_ref().expect("prepared");
        let len = spectrum.len();
        let mut g = vec![Complex64::new(0.0, 0.0); len];
        for (j, h) in taps(a1).into_iter().enumerate() {
            g[j].re = h;
        }
        if let Some(a2) = a2 {
            for (j, h) in taps(a2).into_iter().enumerate() {
                g[j].im = h;
            }
        }
        self.forward.as_ref().expect("prepared").process(&mut g);
        for (gk, xk) in g.iter_mut().zip(spectrum) {
            *gk = xk * gk.conj();
        }
        self.inverse.as_ref().expect("prepared").process(&mut g);
        // g now holds len·(c₁ − i c₂), c_k the cross-correlations.
        let scale = 1.0 / len as f64;
        let n = self.x.len();
        let sum_sq = |count: usize, part: &dyn Fn(&Complex64) -> f64| {
            g[..count].iter().map(|z| (part(z) * scale).powi(2)).sum::<f64>() / count as f64
        };
        let t1 = sum_sq(n - a1, &|z| z.re);
        let t2 = a2.map(|a2| sum_sq(n - a2, &|z| z.im));
        (t1, t2)
    }

    /// `T_N(a)` for every requested scale, computing only the missing ones.
    pub fn t_values(&mut self, scales: &[usize]) -> Result<Vec<f64>> {
        let n = self.x.len();
        for &a in scales {
            check_scale(n, a)?;
        }
        let mut missing: Vec<usize> = scales.iter().copied().filter(|a| !self.cache.contains_key(a)).collect();
        missing.sort_unstable();
        missing.dedup();
        let (small, large): (Vec<usize>, Vec<usize>) = missing.into_iter().partition(|&a| a <= DIRECT_MAX_SCALE);
        for a in small {
            let t = self.direct(a);
            self.cache.insert(a, t);
        }
        for pair in large.chunks(2) {
            let (t1, t2) = self.via_fft(pair[0], pair.get(1).copied());
            self.cache.insert(pair[0], t1);
            if let (Some(&a2), Some(t2)) = (pair.get(1), t2) {
                self.cache.insert(a2, t2);
            }
        }
        // Rounding leaves ~1e-16 relative residue where the exact value is 0.
        let floor = 1e-26 * self.x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        scales
            .iter()
            .map(|a| {
                let t = self.cache[a];
                if t > floor && t.is_finite() {
                    Ok(t)
                } else {
                    Err(Error::Degenerate(format!("wavelet coefficients vanish at scale {a}")))
                }
            })
            .collect()
    }

    pub fn variogram(&mut self, scales: &[usize]) -> Result<Variogram> {
        let t_values = self.t_values(scales)?;
        Ok(Variogram {
            scales: scales.to_vec(),
            t_values,
            n: self.x.len(),
        })
    }
}

/// `T_N(a)` at each scale.
pub fn variogram(x: &[f64], scales: &[usize]) -> Result<Variogram> {
    VariogramEngine::new(x).variogram(scales)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(x: &[f64], a: usize) -> f64 {
        let spec = WaveletSpec::standard();
        let n = x.len();
        let mut acc = 0.0;
        for b in 1..=n - a {
            let mut e = 0.0;
            for t in 1..=n {
                e += x[t - 1] * spec.psi((t as f64 - b as f64) / a as f64);
            }
            e /= (a as f64).sqrt();
            acc += e * e;
        }
        acc / (n - a) as f64
    }

    #[test]
    fn fft_and_direct_paths_agree_with_brute_force() {
        let x: Vec<f64> = (0..300).map(|t| ((t * 7919) % 101) as f64 / 50.0 - 1.0 + 0.01 * t as f64).collect();
        let scales = [3, 5, 24, 25, 31, 64, 100, 150];
        let vg = variogram(&x, &scales).unwrap();
        for (&a, &t) in scales.iter().zip(&vg.t_values) {
            let b = brute(&x, a);
            assert!((t - b).abs() < 1e-10 * b, "a={a}: {t} vs {b}");
        }
    }

    #[test]
    fn scale_two_vanishes() {
        let x: Vec<f64> = (0..40).map(|t| (t as f64).sin()).collect();
        assert!(wavelet_coeffs(&x, 2).unwrap().iter().all(|e| e.abs() < 1e-16));
    }

    #[test]
    fn out_of_range_scales_rejected() {
        let x = vec![1.0; 20];
        assert!(wavelet_coeffs(&x, 1).is_err());
        assert!(wavelet_coeffs(&x, 11).is_err());
        assert!(wavelet_coeffs(&x, 10).is_ok());
    }

    #[test]
    fn constant_series_is_degenerate() {
        let x = vec![3.0; 100];
        assert!(matches!(variogram(&x, &[4, 8]), Err(Error::Degenerate(_))));
    }
}
