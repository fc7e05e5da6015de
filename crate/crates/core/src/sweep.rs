//! Tabular output shared by every scan.

use std::io::Write;

use crate::error::{Error, Result};

/// One row per sweep point; the first CSV column is the swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: String,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<f64>,
}

impl SweepResult {
    pub fn new(variable: impl Into<String>, columns: Vec<String>) -> Self {
        SweepResult { variable: variable.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, x: f64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(SweepRow { x, values });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>> {
        let index =
            self.column_index(name).ok_or_else(|| Error::invalid("column", format!("no column named `{name}`")))?;
        Ok(self.column(index))
    }

    /// Swept value at which column `index` is largest (first one on ties).
    pub fn argmax(&self, index: usize) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for row in &self.rows {
            let v = row.values[index];
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((row.x, v));
            }
        }
        best.map(|(x, _)| x)
    }

    /// Keep only the x values and one column.
    pub fn select(&self, index: usize) -> SweepResult {
        let mut out = SweepResult::new(self.variable.clone(), vec![self.columns[index].clone()]);
        for row in &self.rows {
            out.push(row.x, vec![row.values[index]]);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let mut header = Vec::with_capacity(self.columns.len() + 1);
        header.push(self.variable.as_str());
        header.extend(self.columns.iter().map(String::as_str));
        csv.write_record(&header)?;
        for row in &self.rows {
            let mut record = Vec::with_capacity(row.values.len() + 1);
            record.push(format_value(row.x));
            record.extend(row.values.iter().map(|&v| format_value(v)));
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Shortest round-trip representation; deterministic across runs and platforms.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { start + step * i as f64 }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let mut sweep = SweepResult::new("delay_s", vec!["p_cc_1_1".into(), "p_cc_1_2".into()]);
        sweep.push(-1e-9, vec![0.5, 0.0]);
        sweep.push(0.0, vec![0.25, 1.5e-3]);
        let text = sweep.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "delay_s,p_cc_1_1,p_cc_1_2");
        assert_eq!(lines[1], "-1e-9,5e-1,0");
        assert_eq!(lines[2], "0,2.5e-1,1.5e-3");
    }

    #[test]
    fn formatted_values_round_trip() {
        for v in [1.0 / 3.0, 4.528e-3, -7.25e11, f64::MIN_POSITIVE] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn argmax_takes_first_maximum() {
        let mut sweep = SweepResult::new("x", vec!["y".into()]);
        for (x, y) in [(0.0, 1.0), (1.0, 3.0), (2.0, 3.0), (3.0, 2.0)] {
            sweep.push(x, vec![y]);
        }
        assert_eq!(sweep.argmax(0), Some(1.0));
    }

    #[test]
    fn linspace_hits_both_ends() {
        let xs = linspace(-1.5e-9, 1.5e-9, 61);
        assert_eq!(xs.len(), 61);
        assert_eq!(xs[0], -1.5e-9);
        assert_eq!(xs[60], 1.5e-9);
        assert!(xs[30].abs() < 1e-24);
    }
}
