//! Automated dashed-vs-solid checking: per-column deviation report between
//! two observable CSV files on the same time grid.

use std::path::Path;

use crate::csvio::Table;
use crate::error::CliError;

#[derive(Debug)]
pub struct ColumnDeviation {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Debug)]
pub struct CompareReport {
    pub columns: Vec<ColumnDeviation>,
    pub points: usize,
}

impl CompareReport {
    pub fn worst(&self) -> f64 {
        self.columns.iter().map(|c| c.max_abs).fold(0.0, f64::max)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<14} {:>14} {:>14}\n", "column", "max_abs", "rms");
        for col in &self.columns {
            out.push_str(&format!(
                "{:<14} {:>14.6e} {:>14.6e}\n",
                col.name, col.max_abs, col.rms
            ));
        }
        out.push_str(&format!("({} grid points compared)\n", self.points));
        out
    }
}

/// Compare the shared columns of two CSV files over an identical time grid.
///
/// Grids must agree point by point; the column sets must overlap beyond `t`
/// (the analytic oracles deliberately omit observables they cannot capture,
/// so comparing the intersection is the useful contract). Passing a tolerance
/// turns any excess deviation into a nonzero exit.
pub fn compare_files(
    path_a: &Path,
    path_b: &Path,
    tolerance: Option<f64>,
) -> Result<CompareReport, CliError> {
    let a = Table::read(path_a)?;
    let b = Table::read(path_b)?;

    let ta = a
        .column_index("t")
        .ok_or_else(|| CliError::Config(format!("{}: no `t` column", path_a.display())))?;
    let tb = b
        .column_index("t")
        .ok_or_else(|| CliError::Config(format!("{}: no `t` column", path_b.display())))?;

    if a.rows.len() != b.rows.len() {
        return Err(CliError::Config(format!(
            "grid mismatch: {} rows vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        let (x, y) = (ra[ta], rb[tb]);
        if (x - y).abs() > 1e-9 * x.abs().max(y.abs()).max(1.0) {
            return Err(CliError::Config(format!(
                "grid mismatch at row {i}: t = {x} vs {y}"
            )));
        }
    }

    let shared: Vec<(String, usize, usize)> = a
        .columns
        .iter()
        .enumerate()
        .filter(|&(i, name)| i != ta && name != "t")
        .filter_map(|(i, name)| b.column_index(name).map(|j| (name.clone(), i, j)))
        .collect();
    if shared.is_empty() {
        return Err(CliError::Config(format!(
            "schema mismatch: no shared columns between {} and {}",
            path_a.display(),
            path_b.display()
        )));
    }

    let n = a.rows.len() as f64;
    let columns: Vec<ColumnDeviation> = shared
        .into_iter()
        .map(|(name, i, j)| {
            let mut max_abs = 0.0_f64;
            let mut sum_sq = 0.0_f64;
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                let d = ra[i] - rb[j];
                max_abs = max_abs.max(d.abs());
                sum_sq += d * d;
            }
            ColumnDeviation {
                name,
                max_abs,
                rms: (sum_sq / n).sqrt(),
            }
        })
        .collect();

    let report = CompareReport {
        columns,
        points: a.rows.len(),
    };
    if let Some(tol) = tolerance {
        let offenders: Vec<String> = report
            .columns
            .iter()
            .filter(|c| c.max_abs > tol)
            .map(|c| format!("{} ({:.3e})", c.name, c.max_abs))
            .collect();
        if !offenders.is_empty() {
            return Err(CliError::ToleranceExceeded(format!(
                "columns over {tol:.3e}: {}",
                offenders.join(", ")
            )));
        }
    }
    Ok(report)
}
