use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Open01, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Innovation;
use crate::error::{Error, Result};
use crate::fft::next_smooth;

/// Coefficients of `(1 − B)^{−d}`: `a_0 = 1`, `a_j = a_{j−1} (j − 1 + d) / j`.
pub fn fractional_weights(d: f64, len: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(len);
    if len == 0 {
        return a;
    }
    a.push(1.0);
    for j in 1..len {
        let prev = a[j - 1];
        a.push(prev * (j as f64 - 1.0 + d) / j as f64);
    }
    a
}

/// MA(∞) weights of `φ(B) X = θ(B)(1 − B)^{−d} ξ`, first `len` terms.
pub fn farima_weights(d: f64, ar: &[f64], ma: &[f64], len: usize) -> Vec<f64> {
    let a = fractional_weights(d, len);
    let mut c = vec![0.0; len];
    for j in 0..len {
        let mut v = a[j];
        for (i, theta) in ma.iter().enumerate() {
            if j > i {
                v += theta * a[j - i - 1];
            }
        }
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * c[j - i - 1];
            }
        }
        c[j] = v;
    }
    c
}

/// True when every root of `1 − Σ ar_i z^i` lies outside the unit circle.
pub fn arma_is_stable(ar: &[f64]) -> bool {
    let p = ar.len();
    if p == 0 {
        return true;
    }
    if ar.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let companion = DMatrix::from_fn(p, p, |r, c| {
        if r == 0 {
            ar[c]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .all(|z| z.norm() < 1.0 - 1e-12)
}

/// Truncated moving-average sampler for FARIMA(p, d, q).
///
/// `X_t = Σ_{j=0}^{M} c_j ξ_{t−j}` with `M = max(10⁴, 10 n)`; the first `M`
/// filtered values serve as burn-in.
pub struct ArmaFilter {
    n: usize,
    truncation: usize,
    innovation: Innovation,
    filter: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ArmaFilter {
    pub fn truncation_for(n: usize) -> usize {
        10_000.max(10 * n)
    }

    pub fn new(d: f64, ar: &[f64], ma: &[f64], innovation: Innovation, n: usize) -> Result<Self> {
        if !arma_is_stable(ar) {
            return Err(Error::invalid(format!("AR polynomial {ar:?} is not stable")));
        }
        let truncation = Self::truncation_for(n);
        let weights = farima_weights(d, ar, ma, truncation + 1);
        let len = next_smooth(n + truncation);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut filter = vec![Complex64::new(0.0, 0.0); len];
        for (f, w) in filter.iter_mut().zip(&weights) {
            f.re = *w;
        }
        forward.process(&mut filter);
        let norm = 1.0 / len as f64;
        for f in &mut filter {
            *f *= norm;
        }
        Ok(Self {
            n,
            truncation,
            innovation,
            filter,
            forward,
            inverse,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let len = self.filter.len();
        let draws = self.n + self.truncation;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for z in buf.iter_mut().take(draws) {
            z.re = draw(self.innovation, rng);
        }
        self.forward.process(&mut buf);
        for (z, h) in buf.iter_mut().zip(&self.filter) {
            *z *= h;
        }
        self.inverse.process(&mut buf);
        // Circular wrap-around only touches outputs before the burn-in ends.
        buf[self.truncation..draws].iter().map(|z| z.re).collect()
    }
}

fn draw<R: Rng + ?Sized>(innovation: Innovation, rng: &mut R) -> f64 {
    match innovation {
        Innovation::Gaussian => rng.sample(StandardNormal),
        Innovation::Uniform => 2.0 * rng.sample::<f64, _>(Open01) - 1.0,
        Innovation::Burr => Innovation::burr_quantile(rng.sample(Open01)),
        Innovation::Cauchy => Cauchy::new(0.0, 1.0).expect("unit scale").sample(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::rng_for;

    #[test]
    fn d_zero_weights_are_arma_impulse_response() {
        let c = farima_weights(0.0, &[0.7], &[-0.3], 5);
        // (1 − 0.3B)/(1 − 0.7B): 1, 0.4, 0.28, 0.196, 0.1372
        let expect = [1.0, 0.4, 0.28, 0.196, 0.1372];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stability() {
        assert!(arma_is_stable(&[0.7]));
        assert!(!arma_is_stable(&[1.0]));
        assert!(!arma_is_stable(&[0.5, 0.6]));
        assert!(arma_is_stable(&[0.5, -0.3]));
    }

    #[test]
    fn fft_filter_matches_direct_convolution() {
        let f = ArmaFilter::new(0.3, &[0.7], &[-0.3], Innovation::Gaussian, 50).unwrap();
        let mut rng = rng_for(11);
        let fast = f.sample(&mut rng);
        let mut rng = rng_for(11);
        let xi: Vec<f64> = (0..50 + f.truncation()).map(|_| draw(Innovation::Gaussian, &mut rng)).collect();
        let c = farima_weights(0.3, &[0.7], &[-0.3], f.truncation() + 1);
        for t in [0usize, 17, 49] {
            let idx = f.truncation() + t;
            let direct: f64 = (0..=f.truncation()).map(|j| c[j] * xi[idx - j]).sum();
            assert!((fast[t] - direct).abs() < 1e-9, "t={t}: {} vs {direct}", fast[t]);
        }
    }
}
