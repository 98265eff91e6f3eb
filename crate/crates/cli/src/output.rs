//! CSV and JSON-lines emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::OutputFormat;

/// Write `rows` to `out` (stdout when `None`).
///
/// CSV always carries the header, even with zero rows. Missing values are
/// empty cells in CSV and `null` in records.
pub fn emit<T: Serialize>(
    rows: &[T],
    columns: &[&str],
    format: OutputFormat,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_rows(rows, columns, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_rows(rows, columns, format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    columns: &[&str],
    format: OutputFormat,
    w: &mut W,
) -> anyhow::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            csv.write_record(columns)?;
            for r in rows {
                csv.serialize(r)?;
            }
            csv.flush()?;
        }
        OutputFormat::Records => {
            for r in rows {
                serde_json::to_writer(&mut *w, r)?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

pub fn to_string<T: Serialize>(rows: &[T], columns: &[&str], format: OutputFormat) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, columns, format, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Option<f64>,
        note: String,
    }

    #[test]
    fn csv_quotes_and_leaves_missing_cells_empty() {
        let rows = [Row { a: 0.5, b: None, note: "x, \"y\"".into() }];
        let s = to_string(&rows, &["a", "b", "note"], OutputFormat::Csv).unwrap();
        assert_eq!(s, "a,b,note\n0.5,,\"x, \"\"y\"\"\"\n");
    }

    #[test]
    fn header_is_written_without_rows() {
        let rows: [Row; 0] = [];
        assert_eq!(to_string(&rows, &["a", "b", "note"], OutputFormat::Csv).unwrap(), "a,b,note\n");
    }

    #[test]
    fn records_are_one_object_per_line() {
        let rows = [Row { a: 1.0, b: Some(2.0), note: String::new() }, Row { a: 3.0, b: None, note: "n".into() }];
        let s = to_string(&rows, &["a", "b", "note"], OutputFormat::Records).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert!(v["b"].is_null());
        assert_eq!(v["note"], "n");
    }
}
