use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heavytail::abelian::{abelian_limits, AbelianParams};
use heavytail::baselines::{compare_methods, BootstrapConfig, CompareOptions, Method};
use heavytail::experiments::io::{read_ecdf, read_values, write_ci, write_ecdf, write_tn};
use heavytail::experiments::plot::{ecdf_svg, intervals_svg, Series};
use heavytail::experiments::report::read_intervals;
use heavytail::experiments::run::{interval_panels, write_compare};
use heavytail::experiments::{run_experiment, ExperimentConfig};
use heavytail::pstable::{
    build_log_ecdf, ci_alpha, compute_tn, permutation_average, Levels, PStableOptions, PermutationMode, PilotScheme,
    Target,
};
use heavytail::rng::{sample_stable, DataSpec, RandomSource, StableParams};
use heavytail::stirling::{
    check_degree4_bound, check_p_decomposition_range, check_product_bound_range, check_rising_identity,
    check_table_against_oracle, check_table_structure, StirlingTable,
};
use heavytail::{Error, Result};

#[derive(Parser)]
#[command(
    name = "heavytail",
    version,
    about = "Heavy-tailed mean estimation with p-stable weights"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment (fig1 to fig6).
    Simulate(SimulateArgs),
    /// Intervals for the mean of one data set.
    Estimate(EstimateArgs),
    /// p-stable, CLT and bootstrap intervals on simulated data.
    Compare(CompareArgs),
    /// Abelian distribution PMF and moments.
    Abelian(AbelianArgs),
    /// Exact checks of the Stirling-number lemmas.
    StirlingCheck(StirlingArgs),
    /// Render SVG from ECDF or interval CSV files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, requires = "level_hi")]
    level_lo: Option<f64>,
    #[arg(long, requires = "level_lo")]
    level_hi: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// One value per row; a non-numeric first row is skipped.
    #[arg(long, conflicts_with = "data")]
    input: Option<PathBuf>,
    /// Generator such as `pareto:2,3,transform` or `powerlaw:1.5,100000`.
    #[arg(long, requires = "count")]
    data: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    level_lo: f64,
    #[arg(long, default_value_t = 0.95)]
    level_hi: f64,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    permutations: usize,
    #[arg(long, value_enum, default_value_t = PermMode::Weights)]
    permutation_mode: PermMode,
    /// Share of the data held out for the pilot mean.
    #[arg(long, default_value_t = 0.1)]
    pilot_fraction: f64,
    /// Location of the stable weights.
    #[arg(long, default_value_t = 1.0)]
    weight_location: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PermMode {
    Weights,
    Pairs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    level_lo: f64,
    #[arg(long)]
    level_hi: f64,
    #[arg(long, value_delimiter = ',', default_value = "pstable,clt,bootstrap")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 900_000)]
    reference_samples: usize,
    #[arg(long, default_value_t = 0)]
    pilot: usize,
    #[arg(long, default_value_t = 1)]
    permutations: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap_replicates: usize,
    #[arg(long, default_value_t = 1.0)]
    weight_location: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AbelianArgs {
    #[arg(long = "size", short = 'n')]
    size: u64,
    #[arg(long, conflicts_with = "p")]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StirlingArgs {
    #[arg(long, default_value_t = 30)]
    i_max: usize,
    #[arg(long, default_value_t = 12)]
    oracle_max: u32,
    #[arg(long, default_value_t = 50)]
    n_max: u64,
    #[arg(long, default_value_t = 10_000)]
    product_n_max: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Ecdf,
    Intervals,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlotTarget::Mean)]
    target: PlotTarget,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotTarget {
    Mean,
    Alpha,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Compare(a) => compare(a),
        Command::Abelian(a) => abelian(a),
        Command::StirlingCheck(a) => stirling_check(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if let (Some(lo), Some(hi)) = (a.level_lo, a.level_hi) {
        cfg.estimation.levels = vec![Levels::new(lo, hi).map_err(|e| Error::Config(e.to_string()))?];
    }
    let report = run_experiment(&cfg, Some(&a.out))?;
    for s in &report.summary {
        println!(
            "{} {} {} ({}, {}): coverage {:.3}, lower undefined {:.3}, median width {}",
            if s.group.is_empty() { "-" } else { &s.group },
            s.method,
            s.target.as_str(),
            s.level_lo,
            s.level_hi,
            s.coverage,
            s.lower_undefined_fraction,
            s.median_width.map_or("NA".into(), |w| format!("{w:.4}"))
        );
    }
    for d in &report.distance_summary {
        println!(
            "sup distance N={} vs N={}: mean {:.4}, max {:.4}",
            d.size_a, d.size_b, d.mean, d.max
        );
    }
    println!("wrote {} artifacts to {}", report.artifacts.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn estimate(a: EstimateArgs) -> Result<ExitCode> {
    let levels = Levels::new(a.level_lo, a.level_hi)?;
    let data = match (&a.input, &a.data) {
        (Some(path), None) => read_values(path)?,
        (None, Some(spec)) => {
            DataSpec::parse_compact(spec)?.sample(&RandomSource::new(a.seed, 2), a.count.unwrap_or(0))?
        }
        _ => return Err(Error::Config("pass exactly one of --input or --data".into())),
    };
    let pilot = PilotScheme::from_fraction(a.pilot_fraction, data.len(), false)?;
    let (x, mu_hat) = pilot.split(&data)?;
    let weights = StableParams::symmetric(a.p, a.weight_location)?;
    let y = sample_stable(&weights, &RandomSource::new(a.seed, 0), x.len())?;
    let opts = PStableOptions {
        p: a.p,
        burn_in: a.burn_in,
        permutations: a.permutations,
        permutation_mode: match a.permutation_mode {
            PermMode::Weights => PermutationMode::Weights,
            PermMode::Pairs => PermutationMode::Pairs,
        },
    };
    let tn = compute_tn(x, &y, mu_hat, a.p)?;
    let ecdf = build_log_ecdf(&tn, a.burn_in)?;
    let est = permutation_average(x, &y, mu_hat, &opts, levels, &RandomSource::new(a.seed, 1))?;
    create_dir(&a.out)?;
    write_tn(&a.out.join("tn.csv"), &tn)?;
    write_ecdf(&a.out.join("ecdf.csv"), &ecdf)?;
    let alpha = ci_alpha(&est.interval);
    write_ci(&a.out.join("ci.csv"), &[est.interval, alpha])?;
    println!(
        "n={} mu_hat={} mean in [{}, {}]",
        x.len(),
        mu_hat,
        fmt(est.interval.lower),
        fmt(est.interval.upper)
    );
    Ok(ExitCode::SUCCESS)
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |x| format!("{x:.6}"))
}

fn compare(a: CompareArgs) -> Result<ExitCode> {
    let spec = DataSpec::parse_compact(&a.data)?;
    let methods = a.methods.iter().map(|m| Method::parse(m)).collect::<Result<Vec<_>>>()?;
    let mut pstable = PStableOptions::new(a.p);
    pstable.permutations = a.permutations;
    let opts = CompareOptions {
        n: a.n,
        pilot: PilotScheme {
            size: a.pilot,
            overlap: false,
        },
        weights: StableParams::symmetric(a.p, a.weight_location)?,
        pstable,
        levels: Levels::new(a.level_lo, a.level_hi)?,
        methods,
        bootstrap: BootstrapConfig {
            replicates: a.bootstrap_replicates,
            ..Default::default()
        },
        reference_samples: a.reference_samples,
    };
    let report = compare_methods(&spec, &opts, &RandomSource::new(a.seed, 0), None)?;
    create_dir(&a.out)?;
    write_compare(&a.out.join("compare.csv"), &report)?;
    for r in &report.results {
        println!(
            "{}: mean [{}, {}], alpha [{}, {}]",
            r.method.as_str(),
            fmt(r.mean.lower),
            fmt(r.mean.upper),
            fmt(r.alpha.lower),
            fmt(r.alpha.upper)
        );
    }
    println!(
        "reference mean {} alpha {}",
        report.reference_mean, report.reference_alpha
    );
    Ok(ExitCode::SUCCESS)
}

fn abelian(a: AbelianArgs) -> Result<ExitCode> {
    let params = match (a.alpha, a.p) {
        (Some(alpha), None) => AbelianParams::from_alpha(a.size, alpha)?,
        (None, Some(p)) => AbelianParams::from_p(a.size, p)?,
        _ => return Err(Error::Config("pass exactly one of --alpha or --p".into())),
    };
    let m = params.moments();
    let (mean_limit, variance_limit) = abelian_limits(params.alpha())?;
    let mut text = String::from("b,pmf\n");
    for (b, pmf) in params.pmf_table().iter().enumerate() {
        text.push_str(&format!("{},{}\n", b + 1, pmf));
    }
    text.push_str("\nN,alpha,mean,second_moment,variance,mean_limit,variance_limit\n");
    text.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        a.size,
        params.alpha(),
        m.mean,
        m.second_moment,
        m.variance,
        mean_limit,
        variance_limit
    ));
    match a.out {
        Some(path) => std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn stirling_check(a: StirlingArgs) -> Result<ExitCode> {
    let rows = a.i_max.max(a.n_max as usize);
    let table = StirlingTable::new(rows);
    let x_values: Vec<i64> = (-5..=20).collect();
    let reports = vec![
        check_table_against_oracle(&table, a.oracle_max)?,
        check_table_structure(&table)?,
        check_rising_identity(&table, &x_values)?,
        check_p_decomposition_range(&table, a.n_max)?,
        check_product_bound_range(product_bound_ns(a.product_n_max))?,
        check_degree4_bound(&table, a.i_max.saturating_sub(2))?,
    ];
    let mut all = true;
    for r in &reports {
        println!("{r}");
        all &= r.passed();
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Every `N` up to 200, then a geometric grid up to `n_max`.
fn product_bound_ns(n_max: u64) -> Vec<u64> {
    let mut ns: Vec<u64> = (1..=n_max.min(200)).collect();
    let mut n = 200.0f64;
    while (n as u64) < n_max {
        n *= 1.25;
        ns.push((n as u64).min(n_max));
    }
    ns.dedup();
    ns
}

fn plot(a: PlotArgs) -> Result<ExitCode> {
    let svg = match a.kind {
        PlotKind::Ecdf => {
            let ecdfs = a.input.iter().map(|p| read_ecdf(p)).collect::<Result<Vec<_>>>()?;
            let series: Vec<Series> = a
                .input
                .iter()
                .zip(&ecdfs)
                .map(|(p, e)| Series {
                    label: p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    ecdf: e,
                })
                .collect();
            ecdf_svg(&a.title, &series)?
        }
        PlotKind::Intervals => {
            let target = match a.target {
                PlotTarget::Mean => Target::Mean,
                PlotTarget::Alpha => Target::Alpha,
            };
            let mut rows = Vec::new();
            for p in &a.input {
                rows.extend(read_intervals(p)?);
            }
            intervals_svg(&a.title, &interval_panels(&rows, target))
        }
    };
    std::fs::write(&a.out, svg).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    Ok(ExitCode::SUCCESS)
}
