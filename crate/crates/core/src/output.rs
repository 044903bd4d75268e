//! CSV and JSON emission with versioned schemas.
//!
//! CSV files start with a `# schema: <name>/<version>` line followed by the column
//! header. Floats are written with 17 significant digits so that every value
//! round-trips exactly.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::dispersion::SpectrumSample;
use crate::solver::DiagnosticRow;

pub const SCHEMA_VERSION: u32 = 1;

/// `{:.16e}` formatting; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn csv_string(schema: &str, header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {schema}/{SCHEMA_VERSION}");
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_f64(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn diagnostics_csv(rows: &[DiagnosticRow]) -> String {
    let header: Vec<&str> = DiagnosticRow::CSV_HEADER.split(',').collect();
    let rows: Vec<Vec<Cell>> = rows.iter().map(|r| r.values().iter().map(|&x| x.into()).collect()).collect();
    csv_string("cglb-diagnostics", &header, &rows)
}

pub const SPECTRUM_HEADER: [&str; 7] = ["k", "re1", "im1", "re2", "im2", "re3", "im3"];

pub fn spectrum_csv(samples: &[SpectrumSample]) -> String {
    let rows: Vec<Vec<Cell>> = samples
        .iter()
        .map(|s| {
            let mut r = vec![Cell::Num(s.k)];
            for l in s.lambdas {
                // `+ 0.0` turns a signed zero into `0`
                r.push((l.re + 0.0).into());
                r.push((l.im + 0.0).into());
            }
            r
        })
        .collect();
    csv_string("cglb-spectrum", &SPECTRUM_HEADER, &rows)
}

/// Pretty JSON with a `schema` field added to the top-level object (keys sorted).
pub fn json_string(schema: &str, value: &impl Serialize) -> String {
    let inner = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), format!("{schema}/{SCHEMA_VERSION}").into());
    match inner {
        serde_json::Value::Object(obj) => map.extend(obj),
        other => {
            map.insert("data".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("serializable");
    s.push('\n');
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

/// Parse the numeric body of a CSV produced by [`csv_string`] (text cells become NaN).
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().map(|h| h.split(',').map(str::to_owned).collect()).unwrap_or_default();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let s = csv_string("t", &["a", "b"], &[vec![1.0.into(), "x".into()]]);
        assert_eq!(s, "# schema: t/1\na,b\n1.0000000000000000e0,x\n");
        let (h, rows) = parse_csv(&s);
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(rows[0][0], 1.0);
    }

    #[test]
    fn json_has_schema() {
        #[derive(Serialize)]
        struct R {
            pass: bool,
        }
        let s = json_string("r", &R { pass: true });
        assert!(s.contains("\"schema\": \"r/1\""));
        assert!(s.contains("\"pass\": true"));
    }
}
