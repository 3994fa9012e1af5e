//! CSV artifacts. Floats are written in shortest round-trip form and
//! undefined bounds as empty fields.

use std::path::Path;

use serde::Serialize;

use crate::ecdf::WeightedEcdf;
use crate::error::{Error, Result};
use crate::pstable::{ConfidenceInterval, Target, TnSequence};

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes a header and rows of already formatted fields.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_tn(path: &Path, tn: &TnSequence) -> Result<()> {
    write_rows(
        path,
        &["n", "t_n"],
        tn.values
            .iter()
            .enumerate()
            .map(|(i, t)| vec![(i + 1).to_string(), t.to_string()]),
    )
}

pub fn write_ecdf(path: &Path, ecdf: &WeightedEcdf) -> Result<()> {
    write_rows(
        path,
        &["t", "G"],
        ecdf.points().iter().map(|(t, g)| vec![t.to_string(), g.to_string()]),
    )
}

pub const CI_HEADER: [&str; 7] = [
    "target",
    "level_lo",
    "level_hi",
    "lower",
    "upper",
    "lower_defined",
    "upper_defined",
];

pub fn ci_fields(ci: &ConfidenceInterval) -> Vec<String> {
    vec![
        ci.target.as_str().to_string(),
        ci.level_lo.to_string(),
        ci.level_hi.to_string(),
        fmt_opt(ci.lower),
        fmt_opt(ci.upper),
        ci.lower.is_some().to_string(),
        ci.upper.is_some().to_string(),
    ]
}

pub fn write_ci(path: &Path, intervals: &[ConfidenceInterval]) -> Result<()> {
    write_rows(path, &CI_HEADER, intervals.iter().map(ci_fields))
}

/// Rows of a CSV file with a header, as `(line number, fields)`.
pub fn read_rows(path: &Path, expected_header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(expected_header.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected_header.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

pub(crate) fn parse_f64(path: &Path, line: u64, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("`{field}` is not a number"),
    })
}

pub(crate) fn parse_opt_f64(path: &Path, line: u64, field: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(path, line, field).map(Some)
    }
}

pub fn read_ecdf(path: &Path) -> Result<WeightedEcdf> {
    let rows = read_rows(path, &["t", "G"])?;
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 2,
            message: "ECDF file has no data rows".into(),
        });
    }
    let mut points = Vec::with_capacity(rows.len());
    for (line, f) in &rows {
        points.push((parse_f64(path, *line, &f[0])?, parse_f64(path, *line, &f[1])?));
    }
    let last = rows.last().unwrap().0;
    WeightedEcdf::from_points(points, f64::NAN).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: last,
        message: e.to_string(),
    })
}

/// Reads a single column of numbers; a non-numeric first line is a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 1,
                    message: format!("`{field}` is not a finite number"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no values".into(),
        });
    }
    Ok(values)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_target(path: &Path, line: u64, field: &str) -> Result<Target> {
    match field {
        "mean" => Ok(Target::Mean),
        "alpha" => Ok(Target::Alpha),
        other => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("unknown target `{other}`"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let e = WeightedEcdf::from_samples(&[0.1, -2.5, 3.0, 0.1]).unwrap();
        write_ecdf(&path, &e).unwrap();
        let back = read_ecdf(&path).unwrap();
        assert_eq!(back.points(), e.points());
    }

    #[test]
    fn empty_ecdf_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        std::fs::write(&path, "t,G\n").unwrap();
        assert!(matches!(read_ecdf(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn bad_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        std::fs::write(&path, "t,G\n0,0.5\nx,1\n").unwrap();
        match read_ecdf(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn values_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "value\n1.5\n2\n\n-3e2\n").unwrap();
        assert_eq!(read_values(&path).unwrap(), vec![1.5, 2.0, -300.0]);
        std::fs::write(&path, "1\nfoo\n").unwrap();
        assert!(matches!(read_values(&path), Err(Error::Parse { line: 2, .. })));
    }
}
