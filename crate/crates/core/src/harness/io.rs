use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

use super::config::ColumnSelector;
use super::study::{CurvePoint, StudyResult, StudyRow};

pub const CSV_HEADER: &str = "replicate,k,h,gamma,gamma_h,kappa,ci_low,ci_high,b_hat";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultFormat {
    Csv,
    #[default]
    Json,
}

impl ResultFormat {
    /// `.csv` means CSV; anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ResultFormat::Csv,
            _ => ResultFormat::Json,
        }
    }
}

impl FromStr for ResultFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ResultFormat::Csv),
            "json" => Ok(ResultFormat::Json),
            other => Err(Error::param(
                "format",
                format!("expected `csv` or `json`, got `{other}`"),
            )),
        }
    }
}

fn io_err(path: &Path, e: impl ToString) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn ingest_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Reads one numeric column of a comma or whitespace delimited file.
///
/// Blank lines and lines starting with `#` are skipped. The first remaining
/// line is a header when any of its fields is not a number. Without a
/// `column`, the file must have exactly one column.
pub fn load_series(path: &Path, column: Option<&ColumnSelector>) -> Result<Series<f64>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let Some(&(_, first)) = lines.peek() else {
        return Err(ingest_err(path, "no data"));
    };
    let first_fields = split_fields(first);
    let header: Option<Vec<String>> = first_fields
        .iter()
        .any(|f| f.parse::<f64>().is_err())
        .then(|| first_fields.iter().map(|f| f.to_string()).collect());
    if header.is_some() {
        lines.next();
    }
    let width = first_fields.len();
    let describe = || match &header {
        Some(names) => names.join(", "),
        None => format!("0..{}", width - 1),
    };

    let col = match column {
        None if width == 1 => 0,
        None => {
            return Err(ingest_err(
                path,
                format!("{width} columns; select one of: {}", describe()),
            ))
        }
        Some(ColumnSelector::Index(i)) if *i < width => *i,
        Some(ColumnSelector::Index(i)) => {
            return Err(ingest_err(
                path,
                format!("column {i} out of range; available: {}", describe()),
            ))
        }
        Some(ColumnSelector::Name(name)) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| {
                ingest_err(path, format!("no column `{name}`; available: {}", describe()))
            })?,
    };

    let mut values = Vec::new();
    for (line, text) in lines {
        let fields = split_fields(text);
        let field = fields.get(col).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("missing column {col}"),
        })?;
        let x: f64 = field.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("`{field}` is not a number"),
        })?;
        if !x.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("non-finite value `{field}`"),
            });
        }
        values.push(x);
    }
    if values.is_empty() {
        return Err(ingest_err(path, "column is empty"));
    }
    let series = Series::new(values)?;
    let name = match (column, &header) {
        (Some(ColumnSelector::Name(n)), _) => n.clone(),
        (_, Some(h)) => h[col].clone(),
        _ => path.display().to_string(),
    };
    Ok(series.with_name(name))
}

/// One value per line, shortest representation that reads back exactly.
pub fn write_series(series: &Series<f64>, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 20);
    for x in series.values() {
        writeln!(out, "{x}").expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.replicate,
            r.k,
            r.h,
            csv_float(r.gamma),
            csv_float(r.gamma_h),
            csv_float(r.kappa),
            csv_float(r.ci_low),
            csv_float(r.ci_high),
            csv_float(r.b_hat)
        )
        .expect("writing to a String");
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes rows as CSV with the fixed column order, or the whole result as
/// JSON (`{config, rows, summary, errors}`).
pub fn write_results(result: &StudyResult, path: &Path, format: ResultFormat) -> Result<()> {
    let text = match format {
        ResultFormat::Csv => rows_to_csv(&result.rows),
        ResultFormat::Json => to_json(result),
    };
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_results(path: &Path) -> Result<StudyResult> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Rows of a results file in either format.
pub fn read_rows(path: &Path, format: ResultFormat) -> Result<Vec<StudyRow>> {
    if format == ResultFormat::Json {
        return read_results(path).map(|r| r.rows);
    }
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(ingest_err(path, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: m,
        };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(bad(format!("expected 9 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        rows.push(StudyRow {
            replicate: int(f[0])?,
            k: int(f[1])?,
            h: int(f[2])?,
            gamma: num(f[3])?,
            gamma_h: num(f[4])?,
            kappa: num(f[5])?,
            ci_low: num(f[6])?,
            ci_high: num(f[7])?,
            b_hat: num(f[8])?,
        });
    }
    Ok(rows)
}

pub const CURVES_HEADER: &str = "replicate,k,h,gamma,gamma_low,gamma_high,alpha,alpha_low,alpha_high,\
gamma_h,kappa,kappa_low_true,kappa_high_true,factor_plug_in,kappa_low_plug_in,kappa_high_plug_in,b_hat";

/// Curve points as CSV; missing true-parameter bounds are empty fields.
pub fn curves_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    let opt = |x: Option<f64>| x.map(csv_float).unwrap_or_default();
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.replicate,
            p.k,
            p.h,
            csv_float(p.gamma),
            csv_float(p.gamma_low),
            csv_float(p.gamma_high),
            csv_float(p.alpha),
            csv_float(p.alpha_low),
            csv_float(p.alpha_high),
            csv_float(p.gamma_h),
            csv_float(p.kappa),
            opt(p.kappa_low_true),
            opt(p.kappa_high_true),
            csv_float(p.factor_plug_in),
            csv_float(p.kappa_low_plug_in),
            csv_float(p.kappa_high_plug_in),
            csv_float(p.b_hat)
        )
        .expect("writing to a String");
    }
    out
}
