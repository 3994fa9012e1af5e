//! Reference methods the p-stable intervals are compared against: the normal
//! approximation and a pairs bootstrap of the same statistic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecdf::WeightedEcdf;
use crate::error::{Error, Result};
use crate::numeric::{mean_and_sd, normal_quantile, CompensatedSum};
use crate::pstable::{
    ci_alpha, ci_mean, permutation_average, ConfidenceInterval, Levels, PStableOptions, PilotScheme, ProductSummary,
    Target,
};
use crate::rng::{sample_stable, uniform_index, DataSpec, RandomSource, StableParams};

/// Normal-approximation interval `xbar + z(level) * s / sqrt(N)` at both levels.
pub fn clt_ci(x: &[f64], levels: Levels) -> Result<ConfidenceInterval> {
    if x.len() < 2 {
        return Err(Error::input("the CLT interval needs at least two observations"));
    }
    let (m, sd) = mean_and_sd(x);
    let se = sd / (x.len() as f64).sqrt();
    let (lower, upper) = if se == 0.0 {
        (m, m)
    } else {
        (m + normal_quantile(levels.lo) * se, m + normal_quantile(levels.hi) * se)
    };
    Ok(ConfidenceInterval {
        lower: Some(lower),
        upper: Some(upper),
        level_lo: levels.lo,
        level_hi: levels.hi,
        target: Target::Mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Resample `(X_i, Y_i)` pairs with replacement.
    #[default]
    Pairs,
    /// Resample `X` only; the stable weights stay in place.
    XOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub mode: ResampleMode,
    /// Exponent `e` in the scaling `N^-e`; `None` means `1/p`.
    #[serde(default)]
    pub norm_exponent: Option<f64>,
}

fn default_replicates() -> usize {
    1000
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: default_replicates(),
            mode: ResampleMode::Pairs,
            norm_exponent: None,
        }
    }
}

/// `N^-e * sum_k (X_{a_k} - mu_hat) Y_{b_k}` for one resample, where
/// `a = b = indices` in pairs mode and `b` is the identity in x-only mode.
pub fn bootstrap_statistic(
    x: &[f64],
    y: &[f64],
    mu_hat: f64,
    exponent: f64,
    mode: ResampleMode,
    indices: &[usize],
) -> f64 {
    let mut acc = CompensatedSum::new();
    for (k, &i) in indices.iter().enumerate() {
        let yk = match mode {
            ResampleMode::Pairs => y[i],
            ResampleMode::XOnly => y[k],
        };
        acc.add((x[i] - mu_hat) * yk);
    }
    acc.value() * (indices.len() as f64).powf(-exponent)
}

/// Bootstrap distribution of the terminal statistic `t_N`, equal weights `1/B`.
///
/// Replicate `b` draws its indices from `src.derive(b)`; replicates run in
/// parallel and are collected in index order.
pub fn bootstrap_ecdf(
    x: &[f64],
    y: &[f64],
    mu_hat: f64,
    p: f64,
    cfg: &BootstrapConfig,
    src: &RandomSource,
) -> Result<WeightedEcdf> {
    // Validates lengths and p the same way the direct statistic does.
    crate::pstable::compute_tn(&x[..x.len().min(1)], &y[..y.len().min(1)], mu_hat, p)?;
    if x.len() != y.len() {
        return Err(Error::input(format!("X has {} values but Y has {}", x.len(), y.len())));
    }
    if cfg.replicates == 0 {
        return Err(Error::param("bootstrap needs at least one replicate"));
    }
    let exponent = cfg.norm_exponent.unwrap_or(1.0 / p);
    let n = x.len();
    let stats: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = src.derive(b as u64).rng();
            let idx: Vec<usize> = (0..n).map(|_| uniform_index(&mut rng, n)).collect();
            bootstrap_statistic(x, y, mu_hat, exponent, cfg.mode, &idx)
        })
        .collect();
    let w = vec![1.0 / cfg.replicates as f64; cfg.replicates];
    WeightedEcdf::from_weighted(&stats, &w, 1.0)
}

/// Interval for the mean from bootstrap quantiles, using the same formula as
/// the p-stable method.
pub fn bootstrap_ci(
    x: &[f64],
    y: &[f64],
    mu_hat: f64,
    p: f64,
    levels: Levels,
    cfg: &BootstrapConfig,
    src: &RandomSource,
) -> Result<ConfidenceInterval> {
    let ecdf = bootstrap_ecdf(x, y, mu_hat, p, cfg, src)?;
    let summary = ProductSummary::from_samples(x, y)?;
    ci_mean(
        &summary,
        ecdf.quantile(levels.lo)?,
        ecdf.quantile(levels.hi)?,
        p,
        levels,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pstable,
    Clt,
    Bootstrap,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pstable => "pstable",
            Method::Clt => "clt",
            Method::Bootstrap => "bootstrap",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "pstable" | "p-stable" => Ok(Method::Pstable),
            "clt" => Ok(Method::Clt),
            "bootstrap" => Ok(Method::Bootstrap),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Everything needed to run one method comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Estimation sample size.
    pub n: usize,
    #[serde(default)]
    pub pilot: PilotScheme,
    /// Law of the stable weights.
    pub weights: StableParams,
    #[serde(default = "default_options")]
    pub pstable: PStableOptions,
    pub levels: Levels,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    /// Size of the independent sample behind the reference mean.
    #[serde(default = "default_reference")]
    pub reference_samples: usize,
}

fn default_options() -> PStableOptions {
    PStableOptions::new(1.7)
}

fn default_reference() -> usize {
    900_000
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub mean: ConfidenceInterval,
    pub alpha: ConfidenceInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub results: Vec<MethodResult>,
    pub sample_mean: f64,
    /// Sample mean of the independent reference sample.
    pub reference_mean: f64,
    /// `1 - 1/reference_mean`.
    pub reference_alpha: f64,
}

impl ComparisonReport {
    pub fn get(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// Reference mean from `count` independent draws.
pub fn reference_mean(spec: &DataSpec, count: usize, src: &RandomSource) -> Result<f64> {
    Ok(crate::numeric::mean(&spec.sample(src, count)?))
}

/// Stream indices used inside one comparison run.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const WEIGHTS: u64 = 1;
    pub const BOOTSTRAP: u64 = 2;
    pub const PERMUTATIONS: u64 = 3;
    pub const REFERENCE: u64 = 4;
}

/// Runs each requested method on one simulated data set.
///
/// `reference` supplies a precomputed reference mean; when `None` it is
/// drawn from `src.derive(streams::REFERENCE)`.
pub fn compare_methods(
    spec: &DataSpec,
    opts: &CompareOptions,
    src: &RandomSource,
    reference: Option<f64>,
) -> Result<ComparisonReport> {
    spec.validate()?;
    if opts.n < 2 {
        return Err(Error::param("comparison needs n >= 2"));
    }
    let sampler = spec.sampler()?;
    let data = sampler.sample(&src.derive(streams::DATA), opts.n + opts.pilot.size);
    let (x, mu_hat) = opts.pilot.split(&data)?;
    let y = sample_stable(&opts.weights, &src.derive(streams::WEIGHTS), x.len())?;
    let reference_mean = match reference {
        Some(r) => r,
        None => reference_mean(spec, opts.reference_samples, &src.derive(streams::REFERENCE))?,
    };

    let mut results = Vec::with_capacity(opts.methods.len());
    for &method in &opts.methods {
        let mean = match method {
            Method::Pstable => {
                permutation_average(
                    x,
                    &y,
                    mu_hat,
                    &opts.pstable,
                    opts.levels,
                    &src.derive(streams::PERMUTATIONS),
                )?
                .interval
            }
            Method::Clt => clt_ci(x, opts.levels)?,
            Method::Bootstrap => bootstrap_ci(
                x,
                &y,
                mu_hat,
                opts.pstable.p,
                opts.levels,
                &opts.bootstrap,
                &src.derive(streams::BOOTSTRAP),
            )?,
        };
        results.push(MethodResult {
            method,
            alpha: ci_alpha(&mean),
            mean,
        });
    }
    Ok(ComparisonReport {
        results,
        sample_mean: crate::numeric::mean(x),
        reference_mean,
        reference_alpha: 1.0 - 1.0 / reference_mean,
    })
}
