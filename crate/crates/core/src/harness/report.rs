use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;

use super::{EstimatorKind, McSummary};
use crate::error::Result;

pub const CSV_HEADER: [&str; 12] = [
    "process",
    "d",
    "n",
    "estimator",
    "rmse",
    "mean",
    "sd",
    "failures",
    "valid",
    "p_tilde",
    "ci_coverage",
    "wall_seconds",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One row per `(process, d, N, estimator)`; header only when empty.
pub fn render_csv(summary: &McSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for cell in &summary.cells {
        for e in &cell.estimators {
            let wavelet = e.estimator == EstimatorKind::WaveletPgls;
            w.write_record([
                cell.cell.process.name().to_string(),
                cell.cell.d.map(|d| d.to_string()).unwrap_or_default(),
                cell.cell.n.to_string(),
                e.estimator.name().to_string(),
                opt(e.rmse),
                opt(e.mean),
                opt(e.sd),
                e.failures.to_string(),
                e.valid.to_string(),
                if wavelet { opt(cell.p_tilde) } else { String::new() },
                if wavelet { opt(cell.ci_coverage) } else { String::new() },
                format!("{:.3}", cell.wall_seconds),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aligned text: a block per process and `N`, one column per `d`, rows
/// for each estimator's √MSE and the acceptance frequency `p̃`.
pub fn render_table(summary: &McSummary) -> String {
    let mut out = String::new();
    let mut blocks: Vec<(super::ProcessId, usize)> = Vec::new();
    for c in &summary.cells {
        let key = (c.cell.process, c.cell.n);
        if !blocks.contains(&key) {
            blocks.push(key);
        }
    }
    for (process, n) in blocks {
        let cells: Vec<_> = summary.cells.iter().filter(|c| c.cell.process == process && c.cell.n == n).collect();
        let _ = writeln!(out, "{process}  N = {n}");
        let mut header = format!("{:<12}", "");
        for c in &cells {
            let label = match c.cell.d {
                Some(d) => format!("d = {d}"),
                None => "-".to_string(),
            };
            let _ = write!(header, "{label:>10}");
        }
        let _ = writeln!(out, "{header}");
        for &kind in &summary.config.estimators {
            let mut line = format!("{:<12}", kind.label());
            for c in &cells {
                let e = c.estimator(kind);
                // Without a true d the mean and spread are what matter.
                let text = match (c.truth, e) {
                    (_, Some(e)) if !e.valid => "invalid".to_string(),
                    (Some(_), Some(e)) => opt_short(e.rmse),
                    (None, Some(e)) => format!("{}±{}", opt_short(e.mean), opt_short(e.sd)),
                    _ => String::new(),
                };
                let _ = write!(line, "{text:>10}");
            }
            let _ = writeln!(out, "{line}");
        }
        if summary.config.estimators.contains(&EstimatorKind::WaveletPgls) {
            let mut line = format!("{:<12}", "p_tilde");
            for c in &cells {
                let _ = write!(line, "{:>10}", opt_short(c.p_tilde));
            }
            let _ = writeln!(out, "{line}");
        }
        out.push('\n');
    }
    out
}

fn opt_short(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

#[derive(Debug, Clone)]
pub struct RunPaths {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub table: PathBuf,
}

/// Writes `summary.csv`, `summary.json` and `table.txt` under
/// `root/{UTC timestamp}_{config hash}`.
pub fn write_run(summary: &McSummary, root: &Path) -> Result<RunPaths> {
    let stamp = Utc::now().format("%Y%m%dT%H%M%SZ");
    let dir = root.join(format!("{stamp}_{}", summary.config_hash));
    fs::create_dir_all(&dir)?;
    let paths = RunPaths {
        csv: dir.join("summary.csv"),
        json: dir.join("summary.json"),
        table: dir.join("table.txt"),
        dir,
    };
    fs::write(&paths.csv, render_csv(summary)?)?;
    fs::write(&paths.json, serde_json::to_string_pretty(summary)?)?;
    fs::write(&paths.table, render_table(summary))?;
    Ok(paths)
}
