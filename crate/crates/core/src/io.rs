//! CSV series input and JSON report output.

use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::TimeSeries;

/// `v` rounded to 10 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.9e}").parse().unwrap_or(v)
}

/// Shortest decimal text of [`round_sig`]`(v)`.
pub fn format_sig(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn ser_sig<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(round_sig(*v))
    } else {
        s.serialize_none()
    }
}

pub fn ser_sig_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_sig(x, s),
        None => s.serialize_none(),
    }
}

fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(';') && !first.contains(',') {
        b';'
    } else {
        b','
    }
}

fn parse_value(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses one numeric column (times `1..=T`) or `label,value` rows, with an
/// optional header line. Comma or semicolon delimited.
pub fn parse_series_csv(text: &str, path: &Path) -> Result<TimeSeries> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let err = |row: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        row: row as usize,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(detect_delimiter(text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(i as u64 + 1, e.to_string()))?;
        let row = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let w = rec.len();
        if w != 1 && w != 2 {
            return Err(err(row, format!("expected 1 or 2 columns, found {w}")));
        }
        let field = &rec[w - 1];
        let value = parse_value(field);
        if width.is_none() {
            width = Some(w);
            if value.is_none() && values.is_empty() {
                // header line
                continue;
            }
        }
        if Some(w) != width {
            return Err(err(row, format!("expected {} columns, found {w}", width.unwrap())));
        }
        let v = value.ok_or_else(|| {
            if field.is_empty() {
                err(row, "blank value".into())
            } else {
                err(row, format!("not a finite number: {field:?}"))
            }
        })?;
        values.push(v);
        if w == 2 {
            labels.push(rec[0].to_string());
        }
    }
    if values.is_empty() {
        return Err(err(0, "no data rows".into()));
    }
    if labels.is_empty() {
        TimeSeries::new(values)
    } else {
        TimeSeries::with_labels(values, labels)
    }
}

pub fn read_series_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series_csv(&text, path)
}

/// File stem used as the series id.
pub fn series_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Every `*.csv` file in `dir`, sorted by file name, with its parse result.
pub fn read_series_dir(dir: &Path) -> Result<Vec<(String, Result<TimeSeries>)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            paths.push(p);
        }
    }
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| (series_id(&p), read_series_csv(&p)))
        .collect())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(value)?).map_err(|e| Error::io(path, e))
}

/// Writes a series report (or a batch summary).
pub fn write_report_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    write_json(report, path)
}

pub fn read_report_json(path: &Path) -> Result<crate::monitor::SeriesReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
