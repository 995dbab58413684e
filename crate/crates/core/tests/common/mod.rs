//! Reference implementations written independently of the library: exact
//! rational arithmetic for ψ, a from-scratch Fourier transform, brute-force
//! variograms and fixed-grid quadrature rules.

#![allow(dead_code)]

use std::f64::consts::PI;

/// ψ(t) = Σ NUM[k] t^k / 22 on [0, 1].
pub const NUM: [i64; 10] = [0, 0, 0, -2, 21, -84, 168, -180, 99, -22];
pub const DEN: i64 = 22;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced fraction `p / q` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(pub i128, pub i128);

impl Frac {
    pub fn new(p: i128, q: i128) -> Frac {
        let g = gcd(p, q).max(1);
        let s = if q < 0 { -1 } else { 1 };
        Frac(s * p / g, s * q / g)
    }

    pub fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// `∫₀¹ t^m ψ(t) dt` as an exact fraction.
pub fn exact_moment(m: usize) -> Frac {
    NUM.iter()
        .enumerate()
        .fold(Frac(0, 1), |acc, (k, &c)| acc.add(Frac::new(c as i128, DEN as i128 * (m + k + 1) as i128)))
}

/// `∫₀¹ ψ²` as an exact fraction.
pub fn exact_norm_sq() -> Frac {
    let mut acc = Frac(0, 1);
    for (i, &a) in NUM.iter().enumerate() {
        for (j, &b) in NUM.iter().enumerate() {
            acc = acc.add(Frac::new((a * b) as i128, (DEN * DEN) as i128 * (i + j + 1) as i128));
        }
    }
    acc
}

/// ψ by Horner on the monomial coefficients.
pub fn psi(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    NUM.iter().rev().fold(0.0, |acc, &c| acc * t + c as f64 / DEN as f64)
}

/// `(re, im)` of `ψ̂(u) = ∫₀¹ ψ(t) e^{−iut} dt`: Taylor series below
/// |u| = 2, repeated integration by parts above.
pub fn psi_hat(u: f64) -> (f64, f64) {
    if u.abs() < 2.0 {
        let (mut re, mut im) = (0.0, 0.0);
        let mut term = 1.0;
        for n in 0..40 {
            if n > 0 {
                term *= u / n as f64;
            }
            let v = term * exact_moment(n).to_f64();
            // (−i)^n
            match n % 4 {
                0 => re += v,
                1 => im -= v,
                2 => re -= v,
                _ => im += v,
            }
        }
        return (re, im);
    }
    let mut coeffs: Vec<f64> = NUM.iter().map(|&c| c as f64 / DEN as f64).collect();
    let (c, s) = (u.cos(), u.sin());
    let (mut re, mut im) = (0.0, 0.0);
    // (iu)^{−(k+1)} = (−i/u)^{k+1}
    let (mut wr, mut wi) = (0.0, -1.0 / u);
    for _ in 0..10 {
        let p0 = coeffs[0];
        let p1: f64 = coeffs.iter().sum();
        // p0 − p1 e^{−iu}
        let (ar, ai) = (p0 - p1 * c, p1 * s);
        re += ar * wr - ai * wi;
        im += ar * wi + ai * wr;
        let (nr, ni) = (wr * 0.0 - wi * (-1.0 / u), wr * (-1.0 / u) + wi * 0.0);
        wr = nr;
        wi = ni;
        coeffs = coeffs.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect();
        if coeffs.is_empty() {
            break;
        }
    }
    (re, im)
}

pub fn psi_hat_sq(u: f64) -> f64 {
    let (r, i) = psi_hat(u);
    r * r + i * i
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Composite Gauss-Legendre on [a, b].
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            x.iter().zip(&w).map(|(xi, wi)| wi * f(lo + 0.5 * h * (xi + 1.0))).sum::<f64>() * 0.5 * h
        })
        .sum()
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Wavelet coefficient `a^{−1/2} Σ_t X_t ψ((t − b)/a)` summed over every t.
pub fn brute_coeff(x: &[f64], a: usize, b: usize) -> f64 {
    let mut e = 0.0;
    for (t, &v) in x.iter().enumerate() {
        e += v * psi((t as f64 + 1.0 - b as f64) / a as f64);
    }
    e / (a as f64).sqrt()
}

/// `T_N(a)` by the double loop over shifts and times.
pub fn brute_variogram(x: &[f64], a: usize) -> f64 {
    let n = x.len();
    (1..=n - a).map(|b| brute_coeff(x, a, b).powi(2)).sum::<f64>() / (n - a) as f64
}

/// Deterministic pseudo-random series from a 64-bit LCG.
pub fn lcg_series(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// Straight-line least squares by the textbook centered formulas.
pub fn textbook_ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
