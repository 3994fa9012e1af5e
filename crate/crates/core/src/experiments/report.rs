use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::io::{fmt_opt, parse_f64, parse_opt_f64, parse_target, read_rows, write_rows};
use crate::error::{Error, Result};
use crate::numeric::mean_and_sd;
use crate::pstable::{ConfidenceInterval, Target};

/// One interval from one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    pub replication: usize,
    /// Experiment-specific grouping such as the cutoff; may be empty.
    pub group: String,
    pub method: String,
    pub target: Target,
    pub level_lo: f64,
    pub level_hi: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub reference_value: f64,
}

impl IntervalRow {
    pub fn new(replication: usize, group: &str, method: &str, ci: &ConfidenceInterval, reference_value: f64) -> Self {
        Self {
            replication,
            group: group.to_string(),
            method: method.to_string(),
            target: ci.target,
            level_lo: ci.level_lo,
            level_hi: ci.level_hi,
            lower: ci.lower,
            upper: ci.upper,
            reference_value,
        }
    }

    pub fn contains_reference(&self) -> bool {
        matches!((self.lower, self.upper), (Some(l), Some(u)) if l <= self.reference_value && self.reference_value <= u)
    }

    pub fn width(&self) -> Option<f64> {
        Some(self.upper? - self.lower?)
    }
}

pub const INTERVAL_HEADER: [&str; 12] = [
    "replication",
    "group",
    "method",
    "target",
    "level_lo",
    "level_hi",
    "lower",
    "upper",
    "lower_defined",
    "upper_defined",
    "reference_value",
    "contains_reference",
];

pub fn write_intervals(path: &Path, rows: &[IntervalRow]) -> Result<()> {
    write_rows(
        path,
        &INTERVAL_HEADER,
        rows.iter().map(|r| {
            vec![
                r.replication.to_string(),
                r.group.clone(),
                r.method.clone(),
                r.target.as_str().to_string(),
                r.level_lo.to_string(),
                r.level_hi.to_string(),
                fmt_opt(r.lower),
                fmt_opt(r.upper),
                r.lower.is_some().to_string(),
                r.upper.is_some().to_string(),
                r.reference_value.to_string(),
                r.contains_reference().to_string(),
            ]
        }),
    )
}

pub fn read_intervals(path: &Path) -> Result<Vec<IntervalRow>> {
    let mut out = Vec::new();
    for (line, f) in read_rows(path, &INTERVAL_HEADER)? {
        let replication = f[0].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad replication index `{}`", f[0]),
        })?;
        out.push(IntervalRow {
            replication,
            group: f[1].clone(),
            method: f[2].clone(),
            target: parse_target(path, line, &f[3])?,
            level_lo: parse_f64(path, line, &f[4])?,
            level_hi: parse_f64(path, line, &f[5])?,
            lower: parse_opt_f64(path, line, &f[6])?,
            upper: parse_opt_f64(path, line, &f[7])?,
            reference_value: parse_f64(path, line, &f[10])?,
        });
    }
    Ok(out)
}

/// Aggregates over replications for one `(group, method, target, levels)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub group: String,
    pub method: String,
    pub target: Target,
    pub level_lo: f64,
    pub level_hi: f64,
    pub replications: usize,
    /// Fraction of replications whose interval contains the reference.
    pub coverage: f64,
    pub lower_undefined_fraction: f64,
    pub both_defined_fraction: f64,
    pub median_width: Option<f64>,
    /// Across-replication standard deviation of each endpoint.
    pub lower_sd: Option<f64>,
    pub upper_sd: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "group",
    "method",
    "target",
    "level_lo",
    "level_hi",
    "replications",
    "coverage",
    "lower_undefined_fraction",
    "both_defined_fraction",
    "median_width",
    "lower_sd",
    "upper_sd",
];

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

fn sd(values: &[f64]) -> Option<f64> {
    (values.len() >= 2).then(|| mean_and_sd(values).1)
}

/// Groups rows in first-appearance order and aggregates each group.
pub fn summarize(rows: &[IntervalRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str, Target, f64, f64)> = Vec::new();
    for r in rows {
        let k = (r.group.as_str(), r.method.as_str(), r.target, r.level_lo, r.level_hi);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(group, method, target, level_lo, level_hi)| {
            let members: Vec<&IntervalRow> = rows
                .iter()
                .filter(|r| {
                    r.group == group
                        && r.method == method
                        && r.target == target
                        && r.level_lo == level_lo
                        && r.level_hi == level_hi
                })
                .collect();
            let count = members.len();
            let frac =
                |pred: &dyn Fn(&IntervalRow) -> bool| members.iter().filter(|r| pred(r)).count() as f64 / count as f64;
            let mut widths: Vec<f64> = members.iter().filter_map(|r| r.width()).collect();
            let lowers: Vec<f64> = members.iter().filter_map(|r| r.lower).collect();
            let uppers: Vec<f64> = members.iter().filter_map(|r| r.upper).collect();
            SummaryRow {
                group: group.to_string(),
                method: method.to_string(),
                target,
                level_lo,
                level_hi,
                replications: count,
                coverage: frac(&|r| r.contains_reference()),
                lower_undefined_fraction: frac(&|r| r.lower.is_none()),
                both_defined_fraction: frac(&|r| r.lower.is_some() && r.upper.is_some()),
                median_width: median(&mut widths),
                lower_sd: sd(&lowers),
                upper_sd: sd(&uppers),
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.group.clone(),
                r.method.clone(),
                r.target.as_str().to_string(),
                r.level_lo.to_string(),
                r.level_hi.to_string(),
                r.replications.to_string(),
                r.coverage.to_string(),
                r.lower_undefined_fraction.to_string(),
                r.both_defined_fraction.to_string(),
                fmt_opt(r.median_width),
                fmt_opt(r.lower_sd),
                fmt_opt(r.upper_sd),
            ]
        }),
    )
}

/// Sup-distance between the ECDFs at two prefix sizes in one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub replication: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub sup_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub size_a: usize,
    pub size_b: usize,
    pub mean: f64,
    pub max: f64,
}

pub const DISTANCE_HEADER: [&str; 4] = ["replication", "size_a", "size_b", "sup_distance"];

pub fn write_distances(path: &Path, rows: &[DistanceRow]) -> Result<()> {
    write_rows(
        path,
        &DISTANCE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.replication.to_string(),
                r.size_a.to_string(),
                r.size_b.to_string(),
                r.sup_distance.to_string(),
            ]
        }),
    )
}

pub fn summarize_distances(rows: &[DistanceRow]) -> Vec<DistanceSummary> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !pairs.contains(&(r.size_a, r.size_b)) {
            pairs.push((r.size_a, r.size_b));
        }
    }
    pairs
        .into_iter()
        .map(|(a, b)| {
            let d: Vec<f64> = rows
                .iter()
                .filter(|r| r.size_a == a && r.size_b == b)
                .map(|r| r.sup_distance)
                .collect();
            DistanceSummary {
                size_a: a,
                size_b: b,
                mean: crate::numeric::mean(&d),
                max: d.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Everything a run produced. `config` is a lossless echo of the input.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub intervals: Vec<IntervalRow>,
    pub summary: Vec<SummaryRow>,
    pub distances: Vec<DistanceRow>,
    pub distance_summary: Vec<DistanceSummary>,
    /// Reference values by group, for experiments that draw them.
    pub references: Vec<(String, f64)>,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn summary_for(&self, group: &str, method: &str, target: Target) -> Vec<&SummaryRow> {
        self.summary
            .iter()
            .filter(|s| s.group == group && s.method == method && s.target == target)
            .collect()
    }
}
