//! Minimal CSV reading/writing for the price input schema and the emitted
//! plot tables. Floats are written with Rust's shortest round-trip
//! formatting, so re-reading a table reproduces the values bit-for-bit.

// `!(x > 0.0)` rejects NaN as well; keep the negated form in validations.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub struct CsvError {
    pub message: String,
    /// 1-based line number when the failure is tied to a specific row.
    pub line: Option<usize>,
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn err(message: impl Into<String>, line: Option<usize>) -> CsvError {
    CsvError {
        message: message.into(),
        line,
    }
}

/// One price observation: date string (ordering only) and close.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRow {
    pub date: String,
    pub close: f64,
}

/// Read a `date,close` CSV. Dates must be nonempty and closes strictly
/// positive; violations name the offending line.
pub fn read_price_csv(path: &Path) -> Result<Vec<PriceRow>, CsvError> {
    let content = fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display()), None))?;
    let mut rows = Vec::new();
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err("empty file", None))?;
    if header.trim() != "date,close" {
        return Err(err(
            format!("expected header `date,close`, found `{header}`"),
            Some(1),
        ));
    }
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let date = parts
            .next()
            .map(str::trim)
            .filter(|d| !d.is_empty())
            .ok_or_else(|| err("missing date field", Some(line_no)))?;
        let close_str = parts
            .next()
            .map(str::trim)
            .ok_or_else(|| err("missing close field", Some(line_no)))?;
        let close: f64 = close_str.parse().map_err(|_| {
            err(
                format!("close `{close_str}` is not a number"),
                Some(line_no),
            )
        })?;
        if !(close > 0.0) {
            return Err(err(
                format!("close must be > 0, got {close}"),
                Some(line_no),
            ));
        }
        rows.push(PriceRow {
            date: date.to_string(),
            close,
        });
    }
    if rows.len() < 2 {
        return Err(err("need at least 2 data rows", None));
    }
    Ok(rows)
}

/// Write a table of f64 columns under a header line.
pub fn write_table(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), CsvError> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to String cannot fail");
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| err(format!("cannot write {}: {e}", path.display()), None))
}

/// Read back a table written by [`write_table`]: (header, rows). Cells that
/// are not numeric (regime labels, `inf`) are surfaced as `f64::NAN`-free
/// strings by the caller instead; this reader is for all-numeric tables.
pub fn read_table(path: &Path) -> Result<(String, Vec<Vec<f64>>), CsvError> {
    let content = fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display()), None))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err("empty file", None))?;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect();
        rows.push(row.map_err(|_| err("non-numeric cell", Some(idx + 1)))?);
    }
    Ok((header.to_string(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_csv_round_trip_and_errors() {
        let dir = std::env::temp_dir().join(format!("bubblekit-csv-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("prices.csv");
        std::fs::write(&p, "date,close\n1999-04-12,2500.0\n1999-04-13,2520.5\n").unwrap();
        let rows = read_price_csv(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].date, "1999-04-12");
        assert_eq!(rows[1].close, 2520.5);

        std::fs::write(&p, "date,close\n1999-04-12,2500.0\n1999-04-13,oops\n").unwrap();
        let e = read_price_csv(&p).unwrap_err();
        assert_eq!(e.line, Some(3));

        std::fs::write(&p, "date,close\n1999-04-12,-4\n1999-04-13,5\n").unwrap();
        let e = read_price_csv(&p).unwrap_err();
        assert_eq!(e.line, Some(2));

        std::fs::write(&p, "wrong,header\n1,2\n").unwrap();
        assert!(read_price_csv(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn table_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("bubblekit-table-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        let rows = vec![vec![0.1, 1.0 / 3.0], vec![2.5e-17, 1e300]];
        write_table(&p, "a,b", &rows).unwrap();
        let (header, back) = read_table(&p).unwrap();
        assert_eq!(header, "a,b");
        assert_eq!(back, rows);
        std::fs::remove_dir_all(&dir).ok();
    }
}
