use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BootstrapConfig;
use crate::error::{Error, Result};
use crate::pstable::{Levels, PStableOptions, PermutationMode, PilotScheme};
use crate::rng::{DataSpec, StableParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    /// Logarithmic ECDFs of growing prefixes.
    Fig1,
    /// Bootstrap ECDFs of growing prefixes, centred at the true mean.
    Fig2,
    /// Bootstrap ECDFs centred at a pilot mean.
    Fig3,
    /// p-stable against bootstrap intervals for the mean.
    Fig4,
    /// One ordering against averaged permutations.
    Fig5,
    /// p-stable against CLT on power-law data with several cutoffs.
    Fig6,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
        }
    }
}

/// How the a-priori mean is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// The analytic mean of the data law.
    TrueMean,
    /// A pilot sample mean, see [`PilotScheme`].
    #[default]
    Pilot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    /// Estimation sample size.
    pub n: usize,
    #[serde(default)]
    pub centering: Centering,
    /// Pilot observations drawn in addition to `n`.
    #[serde(default)]
    pub pilot: usize,
    #[serde(default)]
    pub pilot_overlap: bool,
    /// Quantile level pairs; empty means the experiment default.
    #[serde(default)]
    pub levels: Vec<Levels>,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub permutations: usize,
    #[serde(default)]
    pub permutation_mode: PermutationMode,
}

fn one() -> usize {
    1
}

fn default_reference_samples() -> usize {
    900_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    pub data: DataSpec,
    /// Law of the stable weights; its stability index is the `p` of the method.
    pub weights: StableParams,
    pub estimation: EstimationConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default = "default_reference_samples")]
    pub reference_samples: usize,
    /// Prefix sizes for fig1 to fig3.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Power-law cutoffs for fig6; each replaces the cutoff in `data`.
    #[serde(default)]
    pub cutoffs: Vec<u64>,
}

#[derive(Deserialize)]
struct ReportEcho {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    /// Reads a TOML config, or the `config` echo of a JSON run report.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let echo: ReportEcho = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line() as u64,
                message: e.to_string(),
            })?;
            return Ok(echo.config);
        }
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(message) => Error::Config(format!("{}: {message}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn p(&self) -> f64 {
        self.weights.stability
    }

    /// Levels after applying the per-experiment defaults.
    pub fn levels(&self) -> Vec<Levels> {
        if !self.estimation.levels.is_empty() {
            return self.estimation.levels.clone();
        }
        let pair = |lo, hi| Levels { lo, hi };
        match self.experiment {
            ExperimentId::Fig4 => vec![pair(0.05, 0.95), pair(0.005, 0.995)],
            ExperimentId::Fig6 => Vec::new(),
            _ => vec![pair(0.05, 0.95)],
        }
    }

    pub fn pilot_scheme(&self) -> PilotScheme {
        PilotScheme {
            size: self.estimation.pilot,
            overlap: self.estimation.pilot_overlap,
        }
    }

    pub fn pstable_options(&self) -> PStableOptions {
        PStableOptions {
            p: self.p(),
            burn_in: self.estimation.burn_in,
            permutations: self.estimation.permutations,
            permutation_mode: self.estimation.permutation_mode,
        }
    }

    /// Data law for the `index`-th cutoff of fig6.
    pub fn data_with_cutoff(&self, cutoff: u64) -> Result<DataSpec> {
        match self.data {
            DataSpec::PowerLawCutoff(mut params) => {
                params.cutoff = cutoff;
                params.validate()?;
                Ok(DataSpec::PowerLawCutoff(params))
            }
            _ => Err(Error::Config("cutoffs require a power_law_cutoff data law".into())),
        }
    }

    /// Checks every parameter before any sampling happens.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        self.data.validate().map_err(as_config)?;
        self.weights.validate().map_err(as_config)?;
        let p = self.p();
        if !(p > 1.0 && p <= 2.0) {
            return cfg(format!("weights.stability must lie in (1, 2], got {p}"));
        }
        if self.replications == 0 {
            return cfg("replications must be at least 1".into());
        }
        if self.estimation.permutations == 0 {
            return cfg("estimation.permutations must be at least 1".into());
        }
        for l in &self.estimation.levels {
            Levels::new(l.lo, l.hi).map_err(as_config)?;
        }
        if self.estimation.centering == Centering::TrueMean {
            self.data.mean().map_err(as_config)?;
        }
        match self.experiment {
            ExperimentId::Fig1 | ExperimentId::Fig2 | ExperimentId::Fig3 => {
                if self.sizes.is_empty() {
                    return cfg(format!("{} needs a non-empty `sizes` list", self.experiment.as_str()));
                }
                if self.sizes.windows(2).any(|w| w[0] >= w[1]) || self.sizes[0] == 0 {
                    return cfg("sizes must be positive and strictly increasing".into());
                }
                if *self.sizes.last().unwrap() > self.estimation.n {
                    return cfg("the largest size may not exceed estimation.n".into());
                }
                if self.estimation.burn_in >= self.sizes[0] {
                    return cfg("burn_in must be smaller than every size".into());
                }
            }
            ExperimentId::Fig4 | ExperimentId::Fig5 | ExperimentId::Fig6 => {
                if self.estimation.n < 2 {
                    return cfg("estimation.n must be at least 2".into());
                }
                if self.estimation.burn_in >= self.estimation.n {
                    return cfg("burn_in must be smaller than estimation.n".into());
                }
            }
        }
        if matches!(
            self.experiment,
            ExperimentId::Fig2 | ExperimentId::Fig3 | ExperimentId::Fig4
        ) && self.bootstrap.replicates == 0
        {
            return cfg("bootstrap.replicates must be at least 1".into());
        }
        if self.experiment == ExperimentId::Fig6 {
            if self.levels().is_empty() {
                return cfg("fig6 has no default levels; pass --level-lo and --level-hi".into());
            }
            if self.cutoffs.is_empty() {
                return cfg("fig6 needs a non-empty `cutoffs` list".into());
            }
            for (k, &c) in self.cutoffs.iter().enumerate() {
                self.data_with_cutoff(c).map_err(as_config)?;
                if self.cutoffs[..k].contains(&c) {
                    return cfg(format!("cutoff {c} is listed twice"));
                }
            }
            if self.reference_samples == 0 {
                return cfg("reference_samples must be positive".into());
            }
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Where a run writes its artifacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputDir(pub PathBuf);

impl OutputDir {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        std::fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self(path))
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}
