//! The p-stable resampling estimator.
//!
//! Each observation `X_i` is multiplied by an independent p-stable weight
//! `Y_i`, and the running statistic
//!
//! ```text
//! t_n = n^(-1/p) * sum_{i<=n} (X_i - mu_hat) Y_i
//! ```
//!
//! is turned into a logarithmic empirical distribution
//! `G_N(t) = (1/C_N) sum_n (1/n) 1{t_n <= t}`, `C_N = sum_n 1/n`.
//! Quantiles `L`, `U` of `G_N` give the interval
//! `[(XY - U/n^(1-1/p)) / Y, (XY - L/n^(1-1/p)) / Y]` for the mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecdf::WeightedEcdf;
use crate::error::{Error, Result};
use crate::numeric::{harmonic_range, CompensatedSum};
use crate::rng::{shuffle, RandomSource};

/// Relative threshold on `|mean(Y)|` against `max |Y_i|` below which the
/// interval denominator is rejected.
pub const Y_BAR_EPSILON: f64 = 1e-8;

/// The running resampled statistic `t_1, ..., t_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TnSequence {
    pub p: f64,
    pub mu_hat: f64,
    pub degree: usize,
    pub values: Vec<f64>,
}

impl TnSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Terminal value `t_N`.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("TnSequence is never empty")
    }
}

fn check_stability(p: f64) -> Result<()> {
    // p = 2 is admitted as the Gaussian boundary case.
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::param(format!("stability order p must lie in (1, 2], got {p}")));
    }
    Ok(())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::input(format!("X has {} values but Y has {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::input("empty sample"));
    }
    Ok(())
}

/// Degree-one statistic with kernel `h(x) = x - mu_hat`, in a single pass.
///
/// The prefix sums are accumulated left to right with Neumaier compensation.
pub fn compute_tn(x: &[f64], y: &[f64], mu_hat: f64, p: f64) -> Result<TnSequence> {
    check_pair(x, y)?;
    check_stability(p)?;
    let inv_p = 1.0 / p;
    let mut acc = CompensatedSum::new();
    let values = x
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (&xi, &yi))| {
            acc.add((xi - mu_hat) * yi);
            acc.value() * ((i + 1) as f64).powf(-inv_p)
        })
        .collect();
    Ok(TnSequence {
        p,
        mu_hat,
        degree: 1,
        values,
    })
}

/// Scaling of the degree-`d` sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `n^(-d/p)`.
    Weak,
    /// `n^(-(d-1+1/p))`, the almost-sure form.
    AlmostSure,
}

impl Normalization {
    fn exponent(self, d: usize, p: f64) -> f64 {
        match self {
            Normalization::Weak => d as f64 / p,
            Normalization::AlmostSure => d as f64 - 1.0 + 1.0 / p,
        }
    }
}

/// Largest sample handled by [`compute_tn_degree_d`].
pub const DEGREE_D_MAX_N: usize = 2000;

/// Resampled U-statistic of degree `d` in {1, 2, 3} by full enumeration of
/// index tuples `i_1 < ... < i_d <= n`, each term weighted by `Y_{i_1}...Y_{i_d}`.
///
/// The sum is updated incrementally: step `n` adds every tuple ending at `n`.
pub fn compute_tn_degree_d<H>(
    x: &[f64],
    y: &[f64],
    kernel: H,
    p: f64,
    d: usize,
    normalization: Normalization,
) -> Result<TnSequence>
where
    H: Fn(&[f64]) -> f64,
{
    check_pair(x, y)?;
    check_stability(p)?;
    if !(1..=3).contains(&d) {
        return Err(Error::Capacity(format!("kernel degree must be 1, 2 or 3, got {d}")));
    }
    if x.len() > DEGREE_D_MAX_N {
        return Err(Error::Capacity(format!(
            "degree-{d} enumeration is limited to N <= {DEGREE_D_MAX_N}, got {}",
            x.len()
        )));
    }
    let exponent = normalization.exponent(d, p);
    let mut acc = CompensatedSum::new();
    let mut args = [0.0; 3];
    let mut values = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        args[d - 1] = x[n];
        match d {
            1 => acc.add(kernel(&args[..1]) * y[n]),
            2 => {
                for i in 0..n {
                    args[0] = x[i];
                    acc.add(kernel(&args[..2]) * y[i] * y[n]);
                }
            }
            _ => {
                for i in 0..n {
                    args[0] = x[i];
                    for j in i + 1..n {
                        args[1] = x[j];
                        acc.add(kernel(&args[..3]) * y[i] * y[j] * y[n]);
                    }
                }
            }
        }
        values.push(acc.value() * ((n + 1) as f64).powf(-exponent));
    }
    Ok(TnSequence {
        p,
        mu_hat: f64::NAN,
        degree: d,
        values,
    })
}

/// Logarithmic ECDF of `t_{burn_in+1}, ..., t_N` with weights `1/n`.
pub fn build_log_ecdf(tn: &TnSequence, burn_in: usize) -> Result<WeightedEcdf> {
    let n = tn.values.len();
    if burn_in >= n {
        return Err(Error::input(format!("burn-in {burn_in} leaves no terms of {n}")));
    }
    let weights: Vec<f64> = (burn_in + 1..=n).map(|k| 1.0 / k as f64).collect();
    WeightedEcdf::from_weighted(&tn.values[burn_in..], &weights, harmonic_range(burn_in + 1, n))
}

/// Generalized inverse of `G_N` at `level`.
pub fn ecdf_quantile(ecdf: &WeightedEcdf, level: f64) -> Result<f64> {
    ecdf.quantile(level)
}

/// What an interval bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Mean,
    Alpha,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Mean => "mean",
            Target::Alpha => "alpha",
        }
    }
}

/// Lower/upper bounds, each possibly undefined, with the quantile levels used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub level_lo: f64,
    pub level_hi: f64,
    pub target: Target,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        matches!((self.lower, self.upper), (Some(l), Some(u)) if l <= value && value <= u)
    }

    pub fn width(&self) -> Option<f64> {
        Some(self.upper? - self.lower?)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!((self.lower, self.upper), (Some(l), Some(u)) if l == u)
    }
}

/// A pair of quantile levels `0 < lo < hi < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub lo: f64,
    pub hi: f64,
}

impl Levels {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::param(format!(
                "levels must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Sample quantities entering the interval for the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductSummary {
    /// `mean(X_i Y_i)`.
    pub xy_bar: f64,
    /// `mean(Y_i)`.
    pub y_bar: f64,
    /// `max |Y_i|`, the scale for the instability threshold.
    pub y_abs_max: f64,
    pub n: usize,
}

impl ProductSummary {
    pub fn from_samples(x: &[f64], y: &[f64]) -> Result<Self> {
        check_pair(x, y)?;
        let mut xy = CompensatedSum::new();
        let mut ys = CompensatedSum::new();
        let mut y_abs_max = 0.0f64;
        for (&xi, &yi) in x.iter().zip(y) {
            xy.add(xi * yi);
            ys.add(yi);
            y_abs_max = y_abs_max.max(yi.abs());
        }
        let n = x.len();
        Ok(Self {
            xy_bar: xy.value() / n as f64,
            y_bar: ys.value() / n as f64,
            y_abs_max,
            n,
        })
    }
}

/// Interval for the mean from quantiles `L <= U` of the limit law.
///
/// When `mean(Y) < 0` the two endpoints are swapped so that `lower <= upper`.
pub fn ci_mean(
    summary: &ProductSummary,
    lower_q: f64,
    upper_q: f64,
    p: f64,
    levels: Levels,
) -> Result<ConfidenceInterval> {
    check_stability(p)?;
    if lower_q > upper_q {
        return Err(Error::input(format!(
            "quantiles out of order: L = {lower_q} > U = {upper_q}"
        )));
    }
    if summary.n == 0 {
        return Err(Error::input("empty sample"));
    }
    if !(summary.y_bar.abs() > Y_BAR_EPSILON * summary.y_abs_max) {
        return Err(Error::Instability(format!(
            "mean of the stable weights {} is too close to zero (max |Y| = {})",
            summary.y_bar, summary.y_abs_max
        )));
    }
    let scale = (summary.n as f64).powf(1.0 - 1.0 / p);
    let a = (summary.xy_bar - upper_q / scale) / summary.y_bar;
    let b = (summary.xy_bar - lower_q / scale) / summary.y_bar;
    Ok(ConfidenceInterval {
        lower: Some(a.min(b)),
        upper: Some(a.max(b)),
        level_lo: levels.lo,
        level_hi: levels.hi,
        target: Target::Mean,
    })
}

/// Maps a mean interval through `mu -> 1 - 1/mu`; a bound is undefined when
/// its mean endpoint is not positive.
pub fn ci_alpha(ci_mu: &ConfidenceInterval) -> ConfidenceInterval {
    let map = |m: Option<f64>| m.filter(|&v| v > 0.0).map(|v| 1.0 - 1.0 / v);
    ConfidenceInterval {
        lower: map(ci_mu.lower),
        upper: map(ci_mu.upper),
        level_lo: ci_mu.level_lo,
        level_hi: ci_mu.level_hi,
        target: Target::Alpha,
    }
}

/// Which coordinates are permuted between repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    /// Permute the stable weights only.
    #[default]
    Weights,
    /// Permute `(X_i, Y_i)` pairs jointly.
    Pairs,
}

/// Options for the full p-stable interval procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PStableOptions {
    pub p: f64,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one_usize")]
    pub permutations: usize,
    #[serde(default)]
    pub permutation_mode: PermutationMode,
}

fn one_usize() -> usize {
    1
}

impl PStableOptions {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            burn_in: 0,
            permutations: 1,
            permutation_mode: PermutationMode::Weights,
        }
    }
}

/// Averaged quantiles and the interval they produce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationEstimate {
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    pub interval: ConfidenceInterval,
}

fn quantiles_for(x: &[f64], y: &[f64], mu_hat: f64, opts: &PStableOptions, levels: Levels) -> Result<(f64, f64)> {
    let tn = compute_tn(x, y, mu_hat, opts.p)?;
    let ecdf = build_log_ecdf(&tn, opts.burn_in)?;
    Ok((ecdf.quantile(levels.lo)?, ecdf.quantile(levels.hi)?))
}

/// Quantiles `(L, U)` averaged over `opts.permutations` orderings, then the
/// interval for the mean built from the unpermuted sample summary.
///
/// Repetition 0 uses the data as given; repetition `k >= 1` applies a uniform
/// random permutation drawn from `src.derive(k)`. Repetitions may run in
/// parallel; averaging is done in repetition order.
pub fn permutation_average(
    x: &[f64],
    y: &[f64],
    mu_hat: f64,
    opts: &PStableOptions,
    levels: Levels,
    src: &RandomSource,
) -> Result<PermutationEstimate> {
    check_pair(x, y)?;
    if opts.permutations == 0 {
        return Err(Error::param("permutation count must be at least 1"));
    }
    let per_rep: Vec<Result<(f64, f64)>> = (0..opts.permutations)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return quantiles_for(x, y, mu_hat, opts, levels);
            }
            let mut order: Vec<usize> = (0..x.len()).collect();
            shuffle(&mut src.derive(k as u64).rng(), &mut order);
            match opts.permutation_mode {
                PermutationMode::Weights => {
                    let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
                    quantiles_for(x, &yp, mu_hat, opts, levels)
                }
                PermutationMode::Pairs => {
                    let xp: Vec<f64> = order.iter().map(|&i| x[i]).collect();
                    let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
                    quantiles_for(&xp, &yp, mu_hat, opts, levels)
                }
            }
        })
        .collect();
    let mut lo = CompensatedSum::new();
    let mut hi = CompensatedSum::new();
    for r in per_rep {
        let (l, u) = r?;
        lo.add(l);
        hi.add(u);
    }
    let k = opts.permutations as f64;
    let (lower_quantile, upper_quantile) = (lo.value() / k, hi.value() / k);
    let summary = ProductSummary::from_samples(x, y)?;
    let interval = ci_mean(&summary, lower_quantile, upper_quantile, opts.p, levels)?;
    Ok(PermutationEstimate {
        lower_quantile,
        upper_quantile,
        interval,
    })
}

/// Where the a-priori mean comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PilotScheme {
    /// Number of extra observations reserved for the pilot estimate.
    #[serde(default)]
    pub size: usize,
    /// If set, the pilot mean uses the estimation segment as well.
    #[serde(default)]
    pub overlap: bool,
}

impl PilotScheme {
    /// Splits `data` (estimation segment first, pilot segment last) and
    /// returns `(estimation, mu_hat)`. With `size == 0` the estimation
    /// segment is its own pilot.
    pub fn split<'a>(&self, data: &'a [f64]) -> Result<(&'a [f64], f64)> {
        if self.size >= data.len() {
            return Err(Error::input(format!(
                "pilot size {} leaves no estimation data out of {}",
                self.size,
                data.len()
            )));
        }
        let n = data.len() - self.size;
        let estimation = &data[..n];
        let mu_hat = if self.size == 0 || self.overlap {
            crate::numeric::mean(data)
        } else {
            crate::numeric::mean(&data[n..])
        };
        Ok((estimation, mu_hat))
    }

    /// Pilot size for a fraction of a sample of length `total`.
    pub fn from_fraction(fraction: f64, total: usize, overlap: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::param(format!(
                "pilot fraction must lie in [0, 1), got {fraction}"
            )));
        }
        Ok(Self {
            size: (fraction * total as f64).round() as usize,
            overlap,
        })
    }
}
