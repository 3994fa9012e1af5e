//! Seeded, stream-splittable sampling for every distribution the toolkit uses.
//!
//! A [`RandomSource`] is a `(seed, stream_id)` pair. The seed keys a ChaCha20
//! generator and the stream id selects its nonce, so each source is an
//! independent counter-mode stream that does not depend on scheduling.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::abelian::AbelianParams;
use crate::error::{Error, Result};

/// Deterministic random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child source for sub-task `index`.
    ///
    /// The child key mixes both parent coordinates, and the child stream is
    /// `index`, so children of one parent never share a stream.
    pub fn derive(&self, index: u64) -> RandomSource {
        let key = splitmix64(self.seed ^ splitmix64(self.stream_id.rotate_left(17) ^ 0xA5A5_5A5A));
        RandomSource {
            seed: key,
            stream_id: index,
        }
    }
}

/// Uniform in `[0, 1)` on the 2^-53 grid.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in the open interval `(0, 1)`, offset half a grid step.
#[inline]
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n` by multiply-shift (Lemire, without rejection;
/// the bias is below 2^-40 for the sizes used here).
#[inline]
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Fisher-Yates shuffle driven by [`uniform_index`].
pub fn shuffle<T, R: RngCore + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Stable law parameters in the `S(p, beta, gamma, delta)` form whose
/// symmetric characteristic function is `exp(i u delta - gamma^p |u|^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub stability: f64,
    #[serde(default)]
    pub skewness: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub location: f64,
}

fn one() -> f64 {
    1.0
}

impl StableParams {
    pub fn new(stability: f64, skewness: f64, scale: f64, location: f64) -> Result<Self> {
        let p = Self {
            stability,
            skewness,
            scale,
            location,
        };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric, unit scale, located at `location`.
    pub fn symmetric(stability: f64, location: f64) -> Result<Self> {
        Self::new(stability, 0.0, 1.0, location)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stability > 0.0 && self.stability <= 2.0) {
            return Err(Error::param(format!(
                "stable stability must lie in (0, 2], got {}",
                self.stability
            )));
        }
        if !(-1.0..=1.0).contains(&self.skewness) {
            return Err(Error::param(format!(
                "stable skewness must lie in [-1, 1], got {}",
                self.skewness
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param(format!(
                "stable scale must be positive, got {}",
                self.scale
            )));
        }
        if !self.location.is_finite() {
            return Err(Error::param("stable location must be finite"));
        }
        Ok(())
    }

    /// One Chambers-Mallows-Stuck draw.
    pub fn sample_one<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (uniform_open(rng) - 0.5);
        let w = -uniform_open(rng).ln();
        let alpha = self.stability;
        let beta = self.skewness;
        if (alpha - 1.0).abs() < 1e-12 {
            let half_pi_bv = FRAC_PI_2 + beta * v;
            let x = (half_pi_bv * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / half_pi_bv).ln()) / FRAC_PI_2;
            self.scale * x + beta * self.scale * self.scale.ln() / FRAC_PI_2 + self.location
        } else {
            let zeta = beta * (PI * alpha / 2.0).tan();
            let shift = zeta.atan() / alpha;
            let factor = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
            let av = alpha * (v + shift);
            let x = factor * av.sin() / v.cos().powf(1.0 / alpha) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha);
            self.scale * x + self.location
        }
    }
}

/// Pareto law, optionally pushed through `x -> x * max(ln|x|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoLikeParams {
    pub tail_exponent: f64,
    pub x_min: f64,
    #[serde(default)]
    pub transform: bool,
}

/// The Pareto-like map `x * max(ln|x|, 1)`.
#[inline]
pub fn pareto_like_transform(x: f64) -> f64 {
    x * x.abs().ln().max(1.0)
}

impl ParetoLikeParams {
    pub fn new(tail_exponent: f64, x_min: f64, transform: bool) -> Result<Self> {
        let p = Self {
            tail_exponent,
            x_min,
            transform,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_exponent > 0.0 && self.tail_exponent.is_finite()) {
            return Err(Error::param(format!(
                "Pareto tail exponent must be positive, got {}",
                self.tail_exponent
            )));
        }
        if !(self.x_min > 0.0 && self.x_min.is_finite()) {
            return Err(Error::param(format!(
                "Pareto location must be positive, got {}",
                self.x_min
            )));
        }
        Ok(())
    }

    /// Inverse CDF at `u` in `[0, 1)`; nondecreasing in `u`, and `quantile(0) == x_min`.
    pub fn quantile(&self, u: f64) -> f64 {
        let x = self.x_min * (1.0 - u).powf(-1.0 / self.tail_exponent);
        if self.transform {
            pareto_like_transform(x)
        } else {
            x
        }
    }

    /// Analytic mean; infinite when the tail exponent is at most one.
    pub fn mean(&self) -> f64 {
        let a = self.tail_exponent;
        let m = self.x_min;
        if a <= 1.0 {
            return f64::INFINITY;
        }
        if !self.transform {
            return a * m / (a - 1.0);
        }
        // E[X ln X] over [max(m, e), inf), plus E[X] over [m, e) when m < e.
        let e = std::f64::consts::E;
        let lower = m.max(e);
        let log_part = a * m.powf(a) * lower.powf(1.0 - a) * (lower.ln() / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
        let linear_part = if m < e {
            a * m.powf(a) * (m.powf(1.0 - a) - e.powf(1.0 - a)) / (a - 1.0)
        } else {
            0.0
        };
        log_part + linear_part
    }
}

/// Discrete power law `P(k) ∝ k^-tau` on `{1, ..., cutoff}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawCutoffParams {
    pub exponent: f64,
    pub cutoff: u64,
}

/// Largest cutoff for which the exact CDF table is built.
pub const MAX_POWER_LAW_CUTOFF: u64 = 10_000_000;

impl PowerLawCutoffParams {
    pub fn new(exponent: f64, cutoff: u64) -> Result<Self> {
        let p = Self { exponent, cutoff };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::param(format!(
                "power-law exponent must be positive, got {}",
                self.exponent
            )));
        }
        if self.cutoff == 0 {
            return Err(Error::param("power-law cutoff must be at least 1"));
        }
        if self.cutoff > MAX_POWER_LAW_CUTOFF {
            return Err(Error::Capacity(format!(
                "power-law cutoff {} exceeds the tabulation limit {}",
                self.cutoff, MAX_POWER_LAW_CUTOFF
            )));
        }
        Ok(())
    }

    /// Exact mean `sum k^(1-tau) / sum k^(-tau)` by direct summation.
    pub fn mean(&self) -> f64 {
        let mut num = crate::numeric::CompensatedSum::new();
        let mut den = crate::numeric::CompensatedSum::new();
        for k in 1..=self.cutoff {
            let w = (k as f64).powf(-self.exponent);
            num.add(w * k as f64);
            den.add(w);
        }
        num.value() / den.value()
    }
}

/// Inverse-CDF sampler over a finite support `{1, ..., len}` given unnormalized
/// cumulative weights.
#[derive(Debug, Clone)]
pub struct DiscreteTable {
    cumulative: Vec<f64>,
}

impl DiscreteTable {
    /// Builds the table from per-value weights for `1, 2, ..., weights.len()`.
    pub fn from_weights(weights: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut acc = crate::numeric::CompensatedSum::new();
        let cumulative: Vec<f64> = weights
            .into_iter()
            .map(|w| {
                acc.add(w);
                acc.value()
            })
            .collect();
        match cumulative.last() {
            Some(&t) if t > 0.0 && t.is_finite() => Ok(Self { cumulative }),
            _ => Err(Error::param("discrete table needs positive finite total weight")),
        }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Smallest value `k` whose cumulative weight exceeds `u * total`.
    pub fn quantile(&self, u: f64) -> u64 {
        let total = *self.cumulative.last().expect("nonempty by construction");
        let target = u * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1) as u64 + 1
    }
}

/// Power-law sampler with a prebuilt CDF table.
#[derive(Debug, Clone)]
pub struct PowerLawCutoff {
    params: PowerLawCutoffParams,
    table: DiscreteTable,
}

impl PowerLawCutoff {
    pub fn new(params: PowerLawCutoffParams) -> Result<Self> {
        params.validate()?;
        let table = DiscreteTable::from_weights((1..=params.cutoff).map(|k| (k as f64).powf(-params.exponent)))?;
        Ok(Self { params, table })
    }

    pub fn params(&self) -> PowerLawCutoffParams {
        self.params
    }

    pub fn quantile(&self, u: f64) -> u64 {
        self.table.quantile(u)
    }

    pub fn sample(&self, src: &RandomSource, count: usize) -> Vec<u64> {
        let mut rng = src.rng();
        (0..count).map(|_| self.table.quantile(uniform(&mut rng))).collect()
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        Err(Error::param("sample count must be positive"))
    } else {
        Ok(())
    }
}

/// Draws `count` i.i.d. stable variates.
pub fn sample_stable(params: &StableParams, src: &RandomSource, count: usize) -> Result<Vec<f64>> {
    params.validate()?;
    check_count(count)?;
    let mut rng = src.rng();
    Ok((0..count).map(|_| params.sample_one(&mut rng)).collect())
}

/// Draws `count` Pareto or Pareto-like variates by inverse CDF.
pub fn sample_pareto_like(params: &ParetoLikeParams, src: &RandomSource, count: usize) -> Result<Vec<f64>> {
    params.validate()?;
    check_count(count)?;
    let mut rng = src.rng();
    Ok((0..count).map(|_| params.quantile(uniform(&mut rng))).collect())
}

/// Draws `count` values from the power law with cutoff.
pub fn sample_power_law_cutoff(params: &PowerLawCutoffParams, src: &RandomSource, count: usize) -> Result<Vec<u64>> {
    check_count(count)?;
    Ok(PowerLawCutoff::new(*params)?.sample(src, count))
}

/// Draws `count` Abelian avalanche sizes by inverse CDF over the tabulated PMF.
pub fn sample_abelian(params: &AbelianParams, src: &RandomSource, count: usize) -> Result<Vec<u64>> {
    check_count(count)?;
    let table = DiscreteTable::from_weights(params.pmf_table())?;
    let mut rng = src.rng();
    Ok((0..count).map(|_| table.quantile(uniform(&mut rng))).collect())
}

/// Data-generating law for experiments and comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    ParetoLike(ParetoLikeParams),
    PowerLawCutoff(PowerLawCutoffParams),
    Abelian { size: u64, alpha: f64 },
    Stable(StableParams),
}

/// A [`DataSpec`] with any tables it needs already built.
#[derive(Debug, Clone)]
pub enum DataSampler {
    ParetoLike(ParetoLikeParams),
    Table(DiscreteTable),
    Stable(StableParams),
}

impl DataSampler {
    pub fn sample(&self, src: &RandomSource, count: usize) -> Vec<f64> {
        let mut rng = src.rng();
        match self {
            DataSampler::ParetoLike(p) => (0..count).map(|_| p.quantile(uniform(&mut rng))).collect(),
            DataSampler::Table(t) => (0..count).map(|_| t.quantile(uniform(&mut rng)) as f64).collect(),
            DataSampler::Stable(p) => (0..count).map(|_| p.sample_one(&mut rng)).collect(),
        }
    }
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DataSpec::ParetoLike(p) => p.validate(),
            DataSpec::PowerLawCutoff(p) => p.validate(),
            DataSpec::Abelian { size, alpha } => AbelianParams::from_alpha(*size, *alpha).map(|_| ()),
            DataSpec::Stable(p) => p.validate(),
        }
    }

    pub fn sampler(&self) -> Result<DataSampler> {
        self.validate()?;
        Ok(match self {
            DataSpec::ParetoLike(p) => DataSampler::ParetoLike(*p),
            DataSpec::PowerLawCutoff(p) => DataSampler::Table(DiscreteTable::from_weights(
                (1..=p.cutoff).map(|k| (k as f64).powf(-p.exponent)),
            )?),
            DataSpec::Abelian { size, alpha } => DataSampler::Table(DiscreteTable::from_weights(
                AbelianParams::from_alpha(*size, *alpha)?.pmf_table(),
            )?),
            DataSpec::Stable(p) => DataSampler::Stable(*p),
        })
    }

    /// Draws `count` values as reals.
    pub fn sample(&self, src: &RandomSource, count: usize) -> Result<Vec<f64>> {
        check_count(count)?;
        Ok(self.sampler()?.sample(src, count))
    }

    /// Exact mean of the law (infinite or undefined where it does not exist).
    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            DataSpec::ParetoLike(p) => p.mean(),
            DataSpec::PowerLawCutoff(p) => p.mean(),
            DataSpec::Abelian { size, alpha } => AbelianParams::from_alpha(*size, *alpha)?.mean(),
            DataSpec::Stable(p) => {
                if p.stability > 1.0 {
                    p.location
                } else {
                    f64::NAN
                }
            }
        })
    }

    /// Parses the compact form used on the command line:
    /// `pareto:A,XMIN[,transform]`, `powerlaw:TAU,XM`, `abelian:N,ALPHA`,
    /// `stable:P[,BETA,GAMMA,DELTA]`.
    pub fn parse_compact(text: &str) -> Result<Self> {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("data spec `{text}` lacks a `kind:` prefix")))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Config(format!("data spec `{text}` is missing argument {}", i + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("data spec `{text}`: {e}")))
        };
        let int = |i: usize| -> Result<u64> {
            let v = num(i)?;
            if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
                return Err(Error::Config(format!(
                    "data spec `{text}`: argument {} must be an integer",
                    i + 1
                )));
            }
            Ok(v as u64)
        };
        let spec = match kind.trim() {
            "pareto" | "pareto_like" => DataSpec::ParetoLike(ParetoLikeParams {
                tail_exponent: num(0)?,
                x_min: num(1)?,
                transform: parts.get(2).is_some_and(|s| *s == "transform"),
            }),
            "powerlaw" | "power_law_cutoff" => DataSpec::PowerLawCutoff(PowerLawCutoffParams {
                exponent: num(0)?,
                cutoff: int(1)?,
            }),
            "abelian" => DataSpec::Abelian {
                size: int(0)?,
                alpha: num(1)?,
            },
            "stable" => DataSpec::Stable(StableParams {
                stability: num(0)?,
                skewness: if parts.len() > 1 { num(1)? } else { 0.0 },
                scale: if parts.len() > 2 { num(2)? } else { 1.0 },
                location: if parts.len() > 3 { num(3)? } else { 0.0 },
            }),
            other => return Err(Error::Config(format!("unknown data kind `{other}`"))),
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}
