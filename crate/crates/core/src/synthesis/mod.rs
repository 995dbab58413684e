//! Reproducible generators for the benchmark, robustness and
//! alternative-hypothesis processes.
//!
//! A [`Generator`] does the expensive, seed-independent preparation once
//! (embedding eigenvalues, filter spectra) so Monte-Carlo loops only pay for
//! random draws and one or two FFTs per path.

mod circulant;
mod farima;
pub mod io;
pub mod spectral;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circulant::{fgn_autocovariance, CirculantEmbedding};
pub use farima::{arma_is_stable, farima_weights, fractional_weights, ArmaFilter};
pub use spectral::Density;

/// Law of the innovations `ξ_t`. All are symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    /// `U[−1, 1]`, left with variance 1/3.
    Uniform,
    /// Symmetric Burr (2, 1): `P(|ξ| > x) = (1 + x²)^{−1}`.
    Burr,
    Cauchy,
}

impl Innovation {
    /// Inverse CDF of the symmetric Burr (2, 1) law.
    pub fn burr_quantile(u: f64) -> f64 {
        if u >= 0.5 {
            (0.5 / (1.0 - u) - 1.0).sqrt()
        } else {
            -(0.5 / u - 1.0).sqrt()
        }
    }

    pub fn burr_cdf(x: f64) -> f64 {
        let tail = 0.5 / (1.0 + x * x);
        if x >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

/// A stochastic model for the observed series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessModel {
    /// Fractional Gaussian noise with Hurst index `H = d + 1/2`.
    Fgn { hurst: f64 },
    /// `φ(B) X = θ(B) (1 − B)^{−d} ξ` with `φ(z) = 1 − Σ ar_i z^i` and
    /// `θ(z) = 1 + Σ ma_i z^i`.
    Farima {
        d: f64,
        #[serde(default)]
        ar: Vec<f64>,
        #[serde(default)]
        ma: Vec<f64>,
        innovation: Innovation,
    },
    /// Gaussian process with a prescribed spectral density.
    Spectral { density: Density, d: f64 },
    /// A base process plus `1 − 2t/n` and/or `sin(πt/6)`.
    Contaminated {
        base: Box<ProcessModel>,
        trend: bool,
        seasonal: bool,
    },
    /// Two independent Gaussian FARIMA(0, d, 0) halves.
    Mfarima { d_first: f64, d_second: f64 },
}

impl ProcessModel {
    pub fn fgn(hurst: f64) -> Self {
        ProcessModel::Fgn { hurst }
    }

    pub fn farima(d: f64, innovation: Innovation) -> Self {
        ProcessModel::Farima {
            d,
            ar: Vec::new(),
            ma: Vec::new(),
            innovation,
        }
    }

    pub fn farima_arma(d: f64, ar: f64, ma: f64, innovation: Innovation) -> Self {
        ProcessModel::Farima {
            d,
            ar: vec![ar],
            ma: vec![ma],
            innovation,
        }
    }

    /// The memory parameter the estimators should recover, if the model has one.
    pub fn memory(&self) -> Option<f64> {
        match self {
            ProcessModel::Fgn { hurst } => Some(hurst - 0.5),
            ProcessModel::Farima { d, .. } => Some(*d),
            ProcessModel::Spectral { density, d } => Some(density.memory(*d)),
            ProcessModel::Contaminated { base, .. } => base.memory(),
            ProcessModel::Mfarima { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessModel::Fgn { hurst } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(Error::invalid(format!("fGn needs 0 < H < 1, got {hurst}")));
                }
            }
            ProcessModel::Farima { d, ar, ma, .. } => {
                check_d(*d)?;
                if !arma_is_stable(ar) {
                    return Err(Error::invalid(format!("AR polynomial {ar:?} is not stable")));
                }
                if ma.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("MA coefficients must be finite"));
                }
            }
            ProcessModel::Spectral { density, d } => density.validate(*d)?,
            ProcessModel::Contaminated { base, .. } => base.validate()?,
            ProcessModel::Mfarima { d_first, d_second } => {
                check_d(*d_first)?;
                check_d(*d_second)?;
            }
        }
        Ok(())
    }
}

fn check_d(d: f64) -> Result<()> {
    if !(d > -0.5 && d < 0.5) {
        return Err(Error::invalid(format!("FARIMA needs |d| < 1/2, got {d}")));
    }
    Ok(())
}

/// An observed or simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub model: Option<ProcessModel>,
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values,
            model: None,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// RNG for one path. ChaCha keeps streams for different seeds independent.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for replication `rep` of cell `cell` under `base` (SplitMix64 finalizer
/// over the three counters).
pub fn derive_seed(base: u64, cell: u64, rep: u64) -> u64 {
    let mut z = base;
    for v in [cell, rep] {
        z = mix(z ^ mix(v.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    z
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Plan {
    Circulant(CirculantEmbedding),
    Filter(ArmaFilter),
    Halves(ArmaFilter, ArmaFilter),
}

/// Seed-independent state for drawing paths of length `n` from a model.
pub struct Generator {
    model: ProcessModel,
    n: usize,
    plan: Plan,
    trend: bool,
    seasonal: bool,
}

impl Generator {
    pub fn new(model: &ProcessModel, n: usize) -> Result<Self> {
        model.validate()?;
        if n < 2 {
            return Err(Error::invalid(format!("series length must be at least 2, got {n}")));
        }
        let (core, trend, seasonal) = match model {
            ProcessModel::Contaminated { base, trend, seasonal } => {
                let mut base = base.as_ref();
                let (mut t, mut s) = (*trend, *seasonal);
                while let ProcessModel::Contaminated { base: b, trend, seasonal } = base {
                    t |= *trend;
                    s |= *seasonal;
                    base = b;
                }
                (base, t, s)
            }
            other => (other, false, false),
        };
        let plan = match core {
            ProcessModel::Fgn { hurst } => Plan::Circulant(CirculantEmbedding::fgn(*hurst, n)?),
            ProcessModel::Farima { d, ar, ma, innovation } => Plan::Filter(ArmaFilter::new(*d, ar, ma, *innovation, n)?),
            ProcessModel::Spectral { density, d } => Plan::Circulant(CirculantEmbedding::from_density(*density, *d, n)?),
            ProcessModel::Mfarima { d_first, d_second } => {
                let n1 = n / 2;
                Plan::Halves(
                    ArmaFilter::new(*d_first, &[], &[], Innovation::Gaussian, n1)?,
                    ArmaFilter::new(*d_second, &[], &[], Innovation::Gaussian, n - n1)?,
                )
            }
            ProcessModel::Contaminated { .. } => unreachable!("contamination layers were peeled above"),
        };
        Ok(Self {
            model: model.clone(),
            n,
            plan,
            trend,
            seasonal,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    pub fn sample(&self, seed: u64) -> TimeSeries {
        let mut rng = rng_for(seed);
        let mut values = match &self.plan {
            Plan::Circulant(c) => c.sample(&mut rng),
            Plan::Filter(f) => f.sample(&mut rng),
            Plan::Halves(a, b) => {
                let mut v = a.sample(&mut rng);
                v.extend(b.sample(&mut rng));
                v
            }
        };
        contaminate_in_place(&mut values, self.trend, self.seasonal);
        TimeSeries {
            values,
            model: Some(self.model.clone()),
            seed: Some(seed),
        }
    }
}

/// One path of `model` with length `n`.
pub fn generate(model: &ProcessModel, n: usize, seed: u64) -> Result<TimeSeries> {
    Ok(Generator::new(model, n)?.sample(seed))
}

pub fn gen_fgn(hurst: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    generate(&ProcessModel::fgn(hurst), n, seed)
}

pub fn gen_farima(d: f64, ar: &[f64], ma: &[f64], innovation: Innovation, n: usize, seed: u64) -> Result<TimeSeries> {
    let model = ProcessModel::Farima {
        d,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        innovation,
    };
    generate(&model, n, seed)
}

pub fn gen_spectral(density: Density, d: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    generate(&ProcessModel::Spectral { density, d }, n, seed)
}

pub fn gen_mfarima(d_first: f64, d_second: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    generate(&ProcessModel::Mfarima { d_first, d_second }, n, seed)
}

/// Adds `1 − 2t/n` and/or `sin(πt/6)` for `t = 1..=n`.
pub fn contaminate(ts: &TimeSeries, trend: bool, seasonal: bool) -> TimeSeries {
    let mut values = ts.values.clone();
    contaminate_in_place(&mut values, trend, seasonal);
    let model = ts.model.clone().map(|base| {
        if trend || seasonal {
            ProcessModel::Contaminated {
                base: Box::new(base),
                trend,
                seasonal,
            }
        } else {
            base
        }
    });
    TimeSeries {
        values,
        model,
        seed: ts.seed,
    }
}

fn contaminate_in_place(values: &mut [f64], trend: bool, seasonal: bool) {
    let n = values.len() as f64;
    for (idx, v) in values.iter_mut().enumerate() {
        let t = (idx + 1) as f64;
        if trend {
            *v += 1.0 - 2.0 * t / n;
        }
        if seasonal {
            *v += (std::f64::consts::PI * t / 6.0).sin();
        }
    }
}
