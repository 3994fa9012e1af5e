use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{Centering, ExperimentConfig, ExperimentId, OutputDir};
use super::io::{fmt_opt, write_ecdf, write_json, write_rows, write_tn};
use super::plot::{ecdf_svg, intervals_svg, IntervalMark, IntervalPanel, Series};
use super::report::{
    summarize, summarize_distances, write_distances, write_intervals, write_summary, DistanceRow, IntervalRow,
    RunReport,
};
use crate::baselines::{
    bootstrap_ecdf, compare_methods, reference_mean, streams, CompareOptions, ComparisonReport, Method,
};
use crate::ecdf::WeightedEcdf;
use crate::error::{Error, Result};
use crate::pstable::{
    build_log_ecdf, ci_mean, compute_tn, permutation_average, Levels, PStableOptions, ProductSummary, Target,
    TnSequence,
};
use crate::rng::{sample_stable, DataSpec, RandomSource};

/// Source for replication `r` of a run seeded with `seed`.
pub fn replication_source(seed: u64, r: usize) -> RandomSource {
    RandomSource::new(seed, 0).derive(r as u64)
}

/// Source for the fig6 reference sample at a given cutoff.
pub fn reference_source(seed: u64, cutoff: u64) -> RandomSource {
    RandomSource::new(seed, 1).derive(cutoff)
}

/// Stream inside a replication under which fig6 keys each cutoff.
const CUTOFF_STREAM: u64 = 100;

struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
    mu_hat: f64,
}

fn draw(cfg: &ExperimentConfig, n: usize, src: &RandomSource) -> Result<Sample> {
    let data_src = src.derive(streams::DATA);
    let (x, mu_hat) = match cfg.estimation.centering {
        Centering::TrueMean => (cfg.data.sample(&data_src, n)?, cfg.data.mean()?),
        Centering::Pilot => {
            let pilot = cfg.pilot_scheme();
            let all = cfg.data.sample(&data_src, n + pilot.size)?;
            let (x, mu_hat) = pilot.split(&all)?;
            (x.to_vec(), mu_hat)
        }
    };
    let y = sample_stable(&cfg.weights, &src.derive(streams::WEIGHTS), x.len())?;
    Ok(Sample { x, y, mu_hat })
}

fn par_replications<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(usize, &RandomSource) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| f(r, &replication_source(cfg.seed, r)))
        .collect()
}

/// Per-replication output of the prefix experiments.
struct PrefixRun {
    ecdfs: Vec<WeightedEcdf>,
    tn: Option<TnSequence>,
}

fn prefix_distances(r: usize, sizes: &[usize], ecdfs: &[WeightedEcdf]) -> Vec<DistanceRow> {
    let mut rows = Vec::new();
    for a in 0..sizes.len() {
        for b in a + 1..sizes.len() {
            rows.push(DistanceRow {
                replication: r,
                size_a: sizes[a],
                size_b: sizes[b],
                sup_distance: ecdfs[a].sup_distance(&ecdfs[b]),
            });
        }
    }
    rows
}

fn run_prefix(cfg: &ExperimentConfig) -> Result<Vec<PrefixRun>> {
    let n_max = *cfg.sizes.last().expect("validated");
    let p = cfg.p();
    par_replications(cfg, |_, src| {
        let s = draw(cfg, n_max, src)?;
        match cfg.experiment {
            ExperimentId::Fig1 => {
                let tn = compute_tn(&s.x, &s.y, s.mu_hat, p)?;
                let ecdfs = cfg
                    .sizes
                    .iter()
                    .map(|&m| {
                        let prefix = TnSequence {
                            values: tn.values[..m].to_vec(),
                            ..tn.clone()
                        };
                        build_log_ecdf(&prefix, cfg.estimation.burn_in)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PrefixRun { ecdfs, tn: Some(tn) })
            }
            _ => {
                let boot = src.derive(streams::BOOTSTRAP);
                let ecdfs = cfg
                    .sizes
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| {
                        bootstrap_ecdf(
                            &s.x[..m],
                            &s.y[..m],
                            s.mu_hat,
                            p,
                            &cfg.bootstrap,
                            &boot.derive(k as u64),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PrefixRun { ecdfs, tn: None })
            }
        }
    })
}

fn pstable_rows(
    r: usize,
    s: &Sample,
    opts: &PStableOptions,
    levels: &[Levels],
    method: &str,
    reference: f64,
    src: &RandomSource,
) -> Result<Vec<IntervalRow>> {
    levels
        .iter()
        .map(|&lv| {
            let est = permutation_average(&s.x, &s.y, s.mu_hat, opts, lv, src)?;
            Ok(IntervalRow::new(r, "", method, &est.interval, reference))
        })
        .collect()
}

fn run_fig4(cfg: &ExperimentConfig) -> Result<Vec<IntervalRow>> {
    let levels = cfg.levels();
    let reference = cfg.data.mean()?;
    let opts = cfg.pstable_options();
    let rows = par_replications(cfg, |r, src| {
        let s = draw(cfg, cfg.estimation.n, src)?;
        let mut rows = pstable_rows(
            r,
            &s,
            &opts,
            &levels,
            "pstable",
            reference,
            &src.derive(streams::PERMUTATIONS),
        )?;
        let boot = bootstrap_ecdf(
            &s.x,
            &s.y,
            s.mu_hat,
            opts.p,
            &cfg.bootstrap,
            &src.derive(streams::BOOTSTRAP),
        )?;
        let summary = ProductSummary::from_samples(&s.x, &s.y)?;
        for &lv in &levels {
            let ci = ci_mean(&summary, boot.quantile(lv.lo)?, boot.quantile(lv.hi)?, opts.p, lv)?;
            rows.push(IntervalRow::new(r, "", "bootstrap", &ci, reference));
        }
        Ok(rows)
    })?;
    Ok(rows.into_iter().flatten().collect())
}

/// Method labels for the fig5 comparison.
pub fn fig5_methods(permutations: usize) -> (String, String) {
    ("pstable_x1".to_string(), format!("pstable_x{permutations}"))
}

fn run_fig5(cfg: &ExperimentConfig) -> Result<Vec<IntervalRow>> {
    let levels = cfg.levels();
    let reference = cfg.data.mean()?;
    let many = cfg.pstable_options();
    let single = PStableOptions {
        permutations: 1,
        ..many
    };
    let (single_name, many_name) = fig5_methods(many.permutations);
    let rows = par_replications(cfg, |r, src| {
        let s = draw(cfg, cfg.estimation.n, src)?;
        let perm = src.derive(streams::PERMUTATIONS);
        let mut rows = pstable_rows(r, &s, &single, &levels, &single_name, reference, &perm)?;
        rows.extend(pstable_rows(r, &s, &many, &levels, &many_name, reference, &perm)?);
        Ok(rows)
    })?;
    Ok(rows.into_iter().flatten().collect())
}

/// Group label used for a fig6 cutoff.
pub fn cutoff_group(cutoff: u64) -> String {
    format!("x_m={cutoff}")
}

struct CutoffRun {
    group: String,
    reference_mean: f64,
    reports: Vec<ComparisonReport>,
}

fn run_fig6(cfg: &ExperimentConfig) -> Result<Vec<CutoffRun>> {
    let levels = cfg.levels();
    let mut runs = Vec::with_capacity(cfg.cutoffs.len());
    for &cutoff in &cfg.cutoffs {
        let spec: DataSpec = cfg.data_with_cutoff(cutoff)?;
        let reference = reference_mean(&spec, cfg.reference_samples, &reference_source(cfg.seed, cutoff))?;
        let per_rep = par_replications(cfg, |_, src| {
            let src = src.derive(CUTOFF_STREAM).derive(cutoff);
            levels
                .iter()
                .map(|&lv| {
                    let opts = CompareOptions {
                        n: cfg.estimation.n,
                        pilot: cfg.pilot_scheme(),
                        weights: cfg.weights,
                        pstable: cfg.pstable_options(),
                        levels: lv,
                        methods: vec![Method::Pstable, Method::Clt],
                        bootstrap: cfg.bootstrap,
                        reference_samples: cfg.reference_samples,
                    };
                    compare_methods(&spec, &opts, &src, Some(reference))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        runs.push(CutoffRun {
            group: cutoff_group(cutoff),
            reference_mean: reference,
            reports: per_rep.into_iter().flatten().collect(),
        });
    }
    Ok(runs)
}

fn fig6_rows(runs: &[CutoffRun], levels_per_rep: usize) -> Vec<IntervalRow> {
    let mut rows = Vec::new();
    for run in runs {
        for (k, rep) in run.reports.iter().enumerate() {
            let r = k / levels_per_rep;
            for m in &rep.results {
                rows.push(IntervalRow::new(
                    r,
                    &run.group,
                    m.method.as_str(),
                    &m.mean,
                    rep.reference_mean,
                ));
                rows.push(IntervalRow::new(
                    r,
                    &run.group,
                    m.method.as_str(),
                    &m.alpha,
                    rep.reference_alpha,
                ));
            }
        }
    }
    rows
}

/// Header of the method comparison table.
pub const COMPARE_HEADER: [&str; 7] = [
    "method",
    "target",
    "lower",
    "upper",
    "lower_defined",
    "upper_defined",
    "reference_value",
];

pub fn write_compare(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut rows = Vec::new();
    for m in &report.results {
        for (ci, reference) in [(&m.mean, report.reference_mean), (&m.alpha, report.reference_alpha)] {
            rows.push(vec![
                m.method.as_str().to_string(),
                ci.target.as_str().to_string(),
                fmt_opt(ci.lower),
                fmt_opt(ci.upper),
                ci.lower.is_some().to_string(),
                ci.upper.is_some().to_string(),
                reference.to_string(),
            ]);
        }
    }
    write_rows(path, &COMPARE_HEADER, rows)
}

/// Panels from the first replication, one per `(group, levels)` pair.
pub fn interval_panels(rows: &[IntervalRow], target: Target) -> Vec<IntervalPanel> {
    let first = rows.iter().map(|r| r.replication).min();
    let mut panels: Vec<(String, f64, f64, IntervalPanel)> = Vec::new();
    for r in rows
        .iter()
        .filter(|r| Some(r.replication) == first && r.target == target)
    {
        let pos = panels
            .iter()
            .position(|(g, lo, hi, _)| *g == r.group && *lo == r.level_lo && *hi == r.level_hi);
        let idx = pos.unwrap_or_else(|| {
            let title = if r.group.is_empty() {
                format!("levels ({}, {})", r.level_lo, r.level_hi)
            } else {
                format!("{} ({}, {})", r.group, r.level_lo, r.level_hi)
            };
            panels.push((
                r.group.clone(),
                r.level_lo,
                r.level_hi,
                IntervalPanel {
                    title,
                    reference: Some(r.reference_value),
                    marks: Vec::new(),
                },
            ));
            panels.len() - 1
        });
        panels[idx].3.marks.push(IntervalMark {
            label: r.method.clone(),
            lower: r.lower,
            upper: r.upper,
        });
    }
    panels.into_iter().map(|p| p.3).collect()
}

struct Artifacts {
    dir: Option<OutputDir>,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn path(&mut self, name: &str) -> Option<PathBuf> {
        let p = self.dir.as_ref()?.join(name);
        self.written.push(p.clone());
        Some(p)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        if let Some(p) = self.path(name) {
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

/// Runs one configured experiment. With `out` set, every CSV, SVG and the
/// JSON report are written there; CSV content depends only on the config.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut art = Artifacts {
        dir: out.map(OutputDir::create).transpose()?,
        written: Vec::new(),
    };
    art.text("config.toml", &cfg.to_toml())?;

    let mut intervals = Vec::new();
    let mut distances = Vec::new();
    let mut references = Vec::new();
    let name = cfg.experiment.as_str();
    match cfg.experiment {
        ExperimentId::Fig1 | ExperimentId::Fig2 | ExperimentId::Fig3 => {
            let runs = run_prefix(cfg)?;
            for (r, run) in runs.iter().enumerate() {
                distances.extend(prefix_distances(r, &cfg.sizes, &run.ecdfs));
            }
            let stem = if cfg.experiment == ExperimentId::Fig1 {
                "ecdf"
            } else {
                "bootstrap"
            };
            let first = &runs[0];
            for (m, e) in cfg.sizes.iter().zip(&first.ecdfs) {
                if let Some(p) = art.path(&format!("{stem}_n{m}.csv")) {
                    write_ecdf(&p, e)?;
                }
            }
            if let Some(tn) = &first.tn {
                if let Some(p) = art.path("tn.csv") {
                    write_tn(&p, tn)?;
                }
            }
            if let Some(p) = art.path("distances.csv") {
                write_distances(&p, &distances)?;
            }
            if art.dir.is_some() {
                let series: Vec<Series> = cfg
                    .sizes
                    .iter()
                    .zip(&first.ecdfs)
                    .map(|(m, e)| Series {
                        label: format!("N={m}"),
                        ecdf: e,
                    })
                    .collect();
                art.text(&format!("{name}.svg"), &ecdf_svg(name, &series)?)?;
            }
        }
        ExperimentId::Fig4 | ExperimentId::Fig5 => {
            intervals = if cfg.experiment == ExperimentId::Fig4 {
                run_fig4(cfg)?
            } else {
                run_fig5(cfg)?
            };
            references.push((String::new(), cfg.data.mean()?));
            art.text(
                &format!("{name}.svg"),
                &intervals_svg(name, &interval_panels(&intervals, Target::Mean)),
            )?;
        }
        ExperimentId::Fig6 => {
            let runs = run_fig6(cfg)?;
            intervals = fig6_rows(&runs, cfg.levels().len());
            for run in &runs {
                references.push((run.group.clone(), run.reference_mean));
                let file = format!("compare_{}.csv", run.group.replace('=', ""));
                if let Some(p) = art.path(&file) {
                    write_compare(&p, &run.reports[0])?;
                }
            }
            art.text(
                &format!("{name}.svg"),
                &intervals_svg(name, &interval_panels(&intervals, Target::Alpha)),
            )?;
        }
    }

    let summary = summarize(&intervals);
    if !intervals.is_empty() {
        if let Some(p) = art.path("intervals.csv") {
            write_intervals(&p, &intervals)?;
        }
        if let Some(p) = art.path("summary.csv") {
            write_summary(&p, &summary)?;
        }
    }
    let report_path = art.path("report.json");
    let report = RunReport {
        config: cfg.clone(),
        intervals,
        summary,
        distance_summary: summarize_distances(&distances),
        distances,
        references,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        artifacts: art.written,
    };
    if let Some(p) = report_path {
        write_json(&p, &report)?;
    }
    Ok(report)
}
