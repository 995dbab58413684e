//! Seeded, parallel Monte-Carlo ensembles over a grid of processes, memory
//! parameters and sample sizes.
//!
//! Every replication draws its series from a seed derived from the base
//! seed, a stable key of its cell and its index, so results do not depend on
//! the worker count, on scheduling, or on which other cells are in the run.

mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimation::{estimate, EstimatorConfig, GammaSource, GAMMA_RIDGE};
use crate::reference::{default_bandwidth, fexp_estimate, local_whittle};
use crate::synthesis::{derive_seed, Density, Generator, Innovation, ProcessModel};
use crate::wavelet::GammaCache;

pub use report::{render_csv, render_table, write_run, RunPaths};

/// Benchmark, robustness and alternative-hypothesis processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProcessId {
    /// fGn with `H = d + 1/2`.
    X1,
    /// Gaussian FARIMA(0, d, 0).
    X2,
    /// FARIMA(0, d, 0), `U[−1, 1]` innovations.
    X3,
    /// FARIMA(0, d, 0), symmetric Burr (2, 1) innovations.
    X4,
    /// FARIMA(0, d, 0), Cauchy innovations.
    X5,
    /// Gaussian FARIMA(1, d, 1), AR 0.7, MA −0.3.
    X6,
    /// FARIMA(1, d, 1) with uniform innovations.
    X7,
    /// Gaussian, `f(λ) = |λ|^{−2d}(1 + |λ|)`.
    X8,
    /// Gaussian, `f(λ) = ||λ| − π/2|^{−2d}`; memory 0 at the origin.
    Garma,
    /// X2 plus `1 − 2t/n`.
    Trend,
    /// X2 plus `1 − 2t/n` and `sin(πt/6)`.
    TrendSeasonal,
    /// FARIMA(0, 0.1, 0) then FARIMA(0, 0.4, 0); ignores the `d` grid.
    Mfarima,
}

impl ProcessId {
    pub const ALL: [ProcessId; 12] = [
        ProcessId::X1,
        ProcessId::X2,
        ProcessId::X3,
        ProcessId::X4,
        ProcessId::X5,
        ProcessId::X6,
        ProcessId::X7,
        ProcessId::X8,
        ProcessId::Garma,
        ProcessId::Trend,
        ProcessId::TrendSeasonal,
        ProcessId::Mfarima,
    ];

    pub const BENCHMARK: [ProcessId; 8] = [
        ProcessId::X1,
        ProcessId::X2,
        ProcessId::X3,
        ProcessId::X4,
        ProcessId::X5,
        ProcessId::X6,
        ProcessId::X7,
        ProcessId::X8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProcessId::X1 => "X1",
            ProcessId::X2 => "X2",
            ProcessId::X3 => "X3",
            ProcessId::X4 => "X4",
            ProcessId::X5 => "X5",
            ProcessId::X6 => "X6",
            ProcessId::X7 => "X7",
            ProcessId::X8 => "X8",
            ProcessId::Garma => "GARMA",
            ProcessId::Trend => "TREND",
            ProcessId::TrendSeasonal => "TREND_SEASONAL",
            ProcessId::Mfarima => "MFARIMA",
        }
    }

    /// Whether the process is indexed by the `d` grid.
    pub fn uses_d(self) -> bool {
        self != ProcessId::Mfarima
    }

    pub fn model(self, d: f64) -> ProcessModel {
        let contaminated = |seasonal| ProcessModel::Contaminated {
            base: Box::new(ProcessModel::farima(d, Innovation::Gaussian)),
            trend: true,
            seasonal,
        };
        match self {
            ProcessId::X1 => ProcessModel::fgn(d + 0.5),
            ProcessId::X2 => ProcessModel::farima(d, Innovation::Gaussian),
            ProcessId::X3 => ProcessModel::farima(d, Innovation::Uniform),
            ProcessId::X4 => ProcessModel::farima(d, Innovation::Burr),
            ProcessId::X5 => ProcessModel::farima(d, Innovation::Cauchy),
            ProcessId::X6 => ProcessModel::farima_arma(d, 0.7, -0.3, Innovation::Gaussian),
            ProcessId::X7 => ProcessModel::farima_arma(d, 0.7, -0.3, Innovation::Uniform),
            ProcessId::X8 => ProcessModel::Spectral {
                density: Density::F3 { d_prime: 1.0 },
                d,
            },
            ProcessId::Garma => ProcessModel::Spectral {
                density: Density::Garma,
                d,
            },
            ProcessId::Trend => contaminated(false),
            ProcessId::TrendSeasonal => contaminated(true),
            ProcessId::Mfarima => ProcessModel::Mfarima {
                d_first: 0.1,
                d_second: 0.4,
            },
        }
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProcessId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        ProcessId::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown process `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EstimatorKind {
    WaveletPgls,
    LocalWhittle,
    Fexp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::WaveletPgls, EstimatorKind::LocalWhittle, EstimatorKind::Fexp];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::WaveletPgls => "WAVELET_PGLS",
            EstimatorKind::LocalWhittle => "LOCAL_WHITTLE",
            EstimatorKind::Fexp => "FEXP",
        }
    }

    /// Row label in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::WaveletPgls => "d_tilde",
            EstimatorKind::LocalWhittle => "d_R",
            EstimatorKind::Fexp => "d_MS",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        match key.as_str() {
            "WAVELET_PGLS" | "WAVELET" | "PGLS" => Ok(EstimatorKind::WaveletPgls),
            "LOCAL_WHITTLE" | "LW" | "WHITTLE" => Ok(EstimatorKind::LocalWhittle),
            "FEXP" | "MS" => Ok(EstimatorKind::Fexp),
            _ => Err(Error::invalid(format!("unknown estimator `{s}`"))),
        }
    }
}

fn default_processes() -> Vec<ProcessId> {
    ProcessId::BENCHMARK.to_vec()
}
fn default_d_values() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3, 0.4]
}
fn default_n_values() -> Vec<usize> {
    vec![1000, 10_000]
}
fn default_replications() -> usize {
    100
}
fn default_base_seed() -> u64 {
    20_100_101
}
fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}
fn default_level() -> f64 {
    0.95
}
fn default_ell2_cap() -> Option<usize> {
    Some(50)
}
fn default_kappa() -> f64 {
    2.0
}
fn default_gamma_step() -> f64 {
    0.01
}
fn default_gamma_ridge() -> f64 {
    GAMMA_RIDGE
}

/// Monte-Carlo design, read from JSON. Missing keys take the defaults of
/// the benchmark table: X1–X8, `d ∈ {0, …, 0.4}`, `N ∈ {10³, 10⁴}`, 100
/// replications and all three estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_processes")]
    pub processes: Vec<ProcessId>,
    #[serde(default = "default_d_values")]
    pub d_values: Vec<f64>,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// Level of the goodness-of-fit test.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Bound on the stage-two regression size; `null` for none.
    #[serde(default = "default_ell2_cap")]
    pub ell2_cap: Option<usize>,
    /// FEXP penalty weight.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Local Whittle bandwidth; `⌊N/30⌋` when unset.
    #[serde(default)]
    pub whittle_bandwidth: Option<usize>,
    /// Spacing of the interpolation grid for `Γ̂` in `d`.
    #[serde(default = "default_gamma_step")]
    pub gamma_step: f64,
    #[serde(default = "default_gamma_ridge")]
    pub gamma_ridge: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl McConfig {
    /// Smoke profile: 25 replications at `N = 10³`.
    pub fn quick() -> Self {
        McConfig {
            replications: 25,
            n_values: vec![1000],
            ..McConfig::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: McConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.processes.is_empty() || self.n_values.is_empty() || self.estimators.is_empty() {
            return Err(Error::invalid("processes, n_values and estimators must be non-empty"));
        }
        if self.processes.iter().any(|p| p.uses_d()) && self.d_values.is_empty() {
            return Err(Error::invalid("d_values must be non-empty"));
        }
        if !(self.gamma_step > 0.0) || !(self.gamma_ridge >= 0.0) || !(self.kappa > 0.0) {
            return Err(Error::invalid("gamma_step and kappa must be positive, gamma_ridge non-negative"));
        }
        for cell in self.cells() {
            cell.model().validate()?;
        }
        Ok(())
    }

    /// Keeps only the listed processes.
    pub fn restrict(&mut self, only: &[ProcessId]) {
        self.processes.retain(|p| only.contains(p));
    }

    /// Short stable digest of the configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&canonical)[..6])
    }

    /// Cells in table order: process, then `N`, then `d`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &process in &self.processes {
            for &n in &self.n_values {
                if process.uses_d() {
                    out.extend(self.d_values.iter().map(|&d| Cell { process, d: Some(d), n }));
                } else {
                    out.push(Cell { process, d: None, n });
                }
            }
        }
        out
    }

    fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            ell2_cap: self.ell2_cap,
            level: self.level,
            gamma_ridge: self.gamma_ridge,
            ..EstimatorConfig::default()
        }
    }
}

/// One `(process, d, N)` combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub process: ProcessId,
    pub d: Option<f64>,
    pub n: usize,
}

impl Cell {
    pub fn model(&self) -> ProcessModel {
        self.process.model(self.d.unwrap_or(0.0))
    }

    /// Value the estimators should recover, if any.
    pub fn truth(&self) -> Option<f64> {
        self.model().memory()
    }

    /// Seed-derivation key that depends only on the cell itself.
    pub fn key(&self) -> u64 {
        let text = format!("{}|{:?}|{}", self.process.name(), self.d.map(f64::to_bits), self.n);
        let digest = Sha256::digest(text.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }
}

/// Everything measured on one replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub wavelet: Option<f64>,
    pub local_whittle: Option<f64>,
    pub fexp: Option<f64>,
    pub gof_stat: Option<f64>,
    pub gof_accepted: Option<bool>,
    pub ci95: Option<[f64; 2]>,
    pub ell2: Option<usize>,
    pub errors: Vec<String>,
}

impl Replication {
    pub fn estimate(&self, kind: EstimatorKind) -> Option<f64> {
        match kind {
            EstimatorKind::WaveletPgls => self.wavelet,
            EstimatorKind::LocalWhittle => self.local_whittle,
            EstimatorKind::Fexp => self.fexp,
        }
    }
}

/// Ensemble statistics of one estimator on one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub successes: usize,
    pub failures: usize,
    /// False when more than half of the replications failed.
    pub valid: bool,
    /// `√(mean (d̂ − d)²)`; absent without a true `d` or without successes.
    pub rmse: Option<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

/// Ensemble statistics of one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub truth: Option<f64>,
    pub estimators: Vec<EstimatorSummary>,
    /// Frequency of `T̃_N` below the chi-square quantile.
    pub p_tilde: Option<f64>,
    /// Frequency of the 95% interval covering the true `d`.
    pub ci_coverage: Option<f64>,
    pub wall_seconds: f64,
    pub replications: Vec<Replication>,
}

impl CellSummary {
    pub fn estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == kind)
    }

    pub fn rmse(&self, kind: EstimatorKind) -> Option<f64> {
        self.estimator(kind).and_then(|e| e.rmse)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSummary {
    pub config: McConfig,
    pub config_hash: String,
    pub cells: Vec<CellSummary>,
    pub wall_seconds: f64,
}

impl McSummary {
    pub fn cell(&self, process: ProcessId, d: Option<f64>, n: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.cell.process == process && c.cell.n == n && match (c.cell.d, d) {
                (Some(a), Some(b)) => (a - b).abs() < 1e-12,
                (None, None) => true,
                _ => false,
            }
        })
    }
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn moments(values: &[f64], truth: Option<f64>) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let n = values.len() as f64;
    let mut s = KahanSum::default();
    values.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n;
    let mut ss = KahanSum::default();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let sd = if values.len() > 1 { Some((ss.value() / (n - 1.0)).sqrt()) } else { None };
    let rmse = truth.map(|t| {
        let mut se = KahanSum::default();
        values.iter().for_each(|&v| se.add((v - t) * (v - t)));
        (se.value() / n).sqrt()
    });
    (rmse, Some(mean), sd)
}

fn frequency(flags: impl Iterator<Item = bool>) -> Option<f64> {
    let (hits, total) = flags.fold((0usize, 0usize), |(h, t), f| (h + f as usize, t + 1));
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Runs one cell with the given shared `Γ̂` cache.
pub fn run_cell(config: &McConfig, cell: Cell, cache: &GammaCache) -> Result<CellSummary> {
    let start = Instant::now();
    let generator = Generator::new(&cell.model(), cell.n)?;
    let est_config = config.estimator_config();
    let truth = cell.truth();
    let key = cell.key();
    let wants = |k| config.estimators.contains(&k);
    let bandwidth = config.whittle_bandwidth.unwrap_or_else(|| default_bandwidth(cell.n));
    let replications: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(config.base_seed, key, index as u64);
            let x = generator.sample(seed).values;
            let mut rep = Replication {
                index,
                seed,
                wavelet: None,
                local_whittle: None,
                fexp: None,
                gof_stat: None,
                gof_accepted: None,
                ci95: None,
                ell2: None,
                errors: Vec::new(),
            };
            if wants(EstimatorKind::WaveletPgls) {
                match estimate(&x, &est_config, GammaSource::Cached(cache)) {
                    Ok(r) => {
                        rep.wavelet = Some(r.d_tilde);
                        rep.gof_stat = Some(r.gof_stat);
                        rep.gof_accepted = Some(r.gof_accepted());
                        rep.ci95 = Some(r.ci95);
                        rep.ell2 = Some(r.ell2);
                    }
                    Err(e) => rep.errors.push(format!("WAVELET_PGLS: {e}")),
                }
            }
            if wants(EstimatorKind::LocalWhittle) {
                match local_whittle(&x, bandwidth) {
                    Ok(d) => rep.local_whittle = Some(d),
                    Err(e) => rep.errors.push(format!("LOCAL_WHITTLE: {e}")),
                }
            }
            if wants(EstimatorKind::Fexp) {
                match fexp_estimate(&x, config.kappa) {
                    Ok(f) => rep.fexp = Some(f.d),
                    Err(e) => rep.errors.push(format!("FEXP: {e}")),
                }
            }
            rep
        })
        .collect();
    let estimators = EstimatorKind::ALL
        .into_iter()
        .filter(|k| wants(*k))
        .map(|kind| {
            let values: Vec<f64> = replications.iter().filter_map(|r| r.estimate(kind)).collect();
            let failures = replications.len() - values.len();
            let (rmse, mean, sd) = moments(&values, truth);
            EstimatorSummary {
                estimator: kind,
                successes: values.len(),
                failures,
                valid: 2 * failures <= replications.len(),
                rmse,
                mean,
                sd,
            }
        })
        .collect();
    let p_tilde = frequency(replications.iter().filter_map(|r| r.gof_accepted));
    let ci_coverage = truth.and_then(|t| frequency(replications.iter().filter_map(|r| r.ci95.map(|c| c[0] <= t && t <= c[1]))));
    Ok(CellSummary {
        cell,
        truth,
        estimators,
        p_tilde,
        ci_coverage,
        wall_seconds: start.elapsed().as_secs_f64(),
        replications,
    })
}

/// Runs every cell, reporting each one as it completes.
pub fn run_with_progress(config: &McConfig, mut progress: impl FnMut(&CellSummary)) -> Result<McSummary> {
    config.validate()?;
    let start = Instant::now();
    let ell_cap = config.ell2_cap.unwrap_or(usize::MAX);
    let ell_max = config
        .n_values
        .iter()
        .map(|&n| {
            let nf = n as f64;
            ((nf / nf.ln()) as usize).min(ell_cap).max(3)
        })
        .max()
        .unwrap_or(3);
    let cache = GammaCache::new(config.gamma_step, ell_max);
    let mut cells = Vec::new();
    for cell in config.cells() {
        let summary = run_cell(config, cell, &cache)?;
        progress(&summary);
        cells.push(summary);
    }
    Ok(McSummary {
        config: config.clone(),
        config_hash: config.hash(),
        cells,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run(config: &McConfig) -> Result<McSummary> {
    run_with_progress(config, |_| {})
}
