use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::spectral::{autocovariances, Density};
use crate::error::{Error, Result};
use crate::fft::next_smooth;

/// Autocovariances `γ(0..=max_lag)` of unit-variance fGn.
pub fn fgn_autocovariance(hurst: f64, max_lag: usize) -> Vec<f64> {
    let h2 = 2.0 * hurst;
    (0..=max_lag)
        .map(|k| {
            let k = k as f64;
            0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
        })
        .collect()
}

/// Exact Gaussian sampler from a circulant embedding of a Toeplitz covariance.
pub struct CirculantEmbedding {
    n: usize,
    /// `sqrt(λ_k / m)` for the embedding eigenvalues `λ_k`.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    clipped_mass: f64,
}

impl CirculantEmbedding {
    /// Embeds `acov[0..=L]` into a circulant of size `2L`, `L ≥ n − 1`.
    /// Negative eigenvalues are set to zero when their total mass is at most
    /// `clip_tol` times the total absolute mass, and rejected otherwise.
    pub fn from_autocovariance(acov: &[f64], n: usize, clip_tol: f64) -> Result<Self> {
        let half = acov.len().saturating_sub(1);
        if half + 1 < n || half == 0 {
            return Err(Error::invalid(format!("need {n} autocovariances, got {}", acov.len())));
        }
        let m = 2 * half;
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new(acov[k.min(m - k)], 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let negative: f64 = row.iter().map(|z| (-z.re).max(0.0)).sum();
        let total: f64 = row.iter().map(|z| z.re.abs()).sum();
        if negative > clip_tol * total {
            return Err(Error::Embedding(format!(
                "negative eigenvalue mass {:.3e} of {:.3e} exceeds tolerance",
                negative, total
            )));
        }
        let scale = row.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(Self {
            n,
            scale,
            fft,
            clipped_mass: negative / total,
        })
    }

    pub fn fgn(hurst: f64, n: usize) -> Result<Self> {
        let half = next_smooth(n.max(2) - 1);
        Self::from_autocovariance(&fgn_autocovariance(hurst, half), n, 1e-9)
    }

    /// Embedding for a Gaussian process with spectral density `density`.
    /// The circulant is doubled up to twice when the first one is too defective.
    pub fn from_density(density: Density, d: f64, n: usize) -> Result<Self> {
        let mut half = next_smooth(n.max(2) - 1);
        let mut last = None;
        for _ in 0..3 {
            let acov = autocovariances(density, d, half)?;
            match Self::from_autocovariance(&acov, n, 1e-6) {
                Ok(e) => return Ok(e),
                Err(e) => last = Some(e),
            }
            half = next_smooth(2 * half);
        }
        Err(last.expect("at least one attempt"))
    }

    /// Fraction of eigenvalue mass removed by clipping.
    pub fn clipped_mass(&self) -> f64 {
        self.clipped_mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(s * a, s * b)
            })
            .collect();
        self.fft.process(&mut w);
        w.iter().take(self.n).map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::rng_for;

    #[test]
    fn fgn_autocovariance_at_half_is_white() {
        let g = fgn_autocovariance(0.5, 5);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!(g[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn fgn_embedding_has_no_clipping() {
        for &h in &[0.1, 0.5, 0.7, 0.9, 0.95] {
            let e = CirculantEmbedding::fgn(h, 1000).unwrap();
            assert!(e.clipped_mass() < 1e-12, "H={h}");
        }
    }

    #[test]
    fn sample_has_requested_length_and_is_deterministic() {
        let e = CirculantEmbedding::fgn(0.8, 777).unwrap();
        let a = e.sample(&mut rng_for(3));
        let b = e.sample(&mut rng_for(3));
        assert_eq!(a.len(), 777);
        assert_eq!(a, b);
    }

    #[test]
    fn indefinite_sequence_is_rejected() {
        let acov = [1.0, 0.9, -0.9, 0.9];
        assert!(matches!(
            CirculantEmbedding::from_autocovariance(&acov, 4, 1e-6),
            Err(Error::Embedding(_))
        ));
    }
}
