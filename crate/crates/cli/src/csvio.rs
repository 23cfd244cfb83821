//! CSV writing and reading. One header row; the time column is `t` in
//! inverse-energy units; values carry 12 significant digits so repeated runs
//! are byte-identical.

use std::path::Path;

use crate::error::CliError;

pub struct Table {
    pub columns: Vec<String>,
    /// Row-major values, `rows[i].len() == columns.len()`.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, idx: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[idx])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * self.columns.len() * 20);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format_value(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Config(format!("{}: empty file", path.display())))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| {
                CliError::Config(format!("{} line {}: {e}", path.display(), ln + 2))
            })?;
            if row.len() != columns.len() {
                return Err(CliError::Config(format!(
                    "{} line {}: expected {} fields, got {}",
                    path.display(),
                    ln + 2,
                    columns.len(),
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// 12 significant digits, scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_keep_twelve_significant_digits() {
        assert_eq!(format_value(0.1579520269128992), "1.57952026913e-1");
        assert_eq!(format_value(0.0), "0.00000000000e0");
        assert_eq!(format_value(-25000.0), "-2.50000000000e4");
    }

    #[test]
    fn round_trip_via_temp_file() {
        let dir = std::env::temp_dir().join("qme_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut table = Table::new(vec!["t".into(), "x".into()]);
        table.push_row(vec![0.0, 1.0 / 3.0]);
        table.push_row(vec![2.5, -1.0e-7]);
        table.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back.columns, table.columns);
        assert!((back.rows[0][1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((back.rows[1][1] + 1.0e-7).abs() < 1e-19);
        std::fs::remove_dir_all(&dir).ok();
    }
}
