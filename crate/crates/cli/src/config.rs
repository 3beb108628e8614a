//! Experiment configuration: JSON schema, defaults and validation.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};
use truncio::{
    Class, ClassParams, FeatureModel, GridAxis, Guessing, InternalNoise, Method, SweepGrid,
    TruncationVector,
};

use crate::error::CliError;

pub const DEFAULT_CELLS: usize = 4096;
pub const DEFAULT_N_PAIRS: usize = 1_000_000;
pub const DEFAULT_THRESHOLDS: usize = 200;

/// A threshold that may be the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold(pub f64);

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Threshold;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Threshold, E> {
                Ok(Threshold(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Threshold, E> {
                Ok(Threshold(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Threshold, E> {
                Ok(Threshold(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Threshold, E> {
                parse_threshold(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

pub fn parse_threshold(s: &str) -> Result<Threshold, String> {
    match s.trim() {
        "-inf" => Ok(Threshold(f64::NEG_INFINITY)),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Threshold)
            .ok_or_else(|| format!("expected a finite number or \"-inf\", got {other:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub negative: ClassConfig,
    pub positive: ClassConfig,
    /// Internal noise standard deviation.
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub lo: f64,
    pub hi: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axes: Vec<AxisConfig>,
    #[serde(default = "yes")]
    pub include_neg_infinity: bool,
    #[serde(default)]
    pub shared: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Quadrature {
        #[serde(default = "default_cells")]
        cells: usize,
    },
    MonteCarlo {
        #[serde(default = "default_samples")]
        n: usize,
    },
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

fn default_samples() -> usize {
    Method::DEFAULT_SAMPLES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessingConfig {
    #[default]
    Expected,
    CoinFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_pairs")]
    pub n_pairs: usize,
    #[serde(default)]
    pub guessing: GuessingConfig,
}

fn default_pairs() -> usize {
    DEFAULT_N_PAIRS
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_pairs: DEFAULT_N_PAIRS,
            guessing: GuessingConfig::Expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocConfig {
    #[serde(default = "default_thresholds")]
    pub n_thresholds: usize,
}

fn default_thresholds() -> usize {
    DEFAULT_THRESHOLDS
}

impl Default for RocConfig {
    fn default() -> Self {
        Self {
            n_thresholds: DEFAULT_THRESHOLDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// The file format. Everything except the class means and standard deviations has a
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub taus: Option<Vec<Threshold>>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub method: Option<MethodConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub roc: RocConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Parses a config, reporting the offending field path, line and column.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        CliError::Config(format!("{path}: {}", err.into_inner()))
    })
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        self.model.negative.means.len()
    }

    /// Fills in defaults that depend on the feature count, so the resolved config is
    /// exactly what runs.
    pub fn resolve(&mut self) {
        let dim = self.dim();
        if self.taus.is_none() {
            self.taus = Some(vec![Threshold(f64::NEG_INFINITY); dim]);
        }
        if self.method.is_none() {
            self.method = Some(if dim == 1 {
                MethodConfig::Quadrature {
                    cells: DEFAULT_CELLS,
                }
            } else {
                MethodConfig::MonteCarlo {
                    n: Method::DEFAULT_SAMPLES,
                }
            });
        }
        if self.grid.is_none() {
            let grid = match dim {
                1 => SweepGrid::default_1d(),
                2 => SweepGrid::default_2d(),
                _ => SweepGrid::shared(SweepGrid::default_1d().axes[0]),
            };
            self.grid = Some(GridConfig {
                axes: grid
                    .axes
                    .iter()
                    .map(|a| AxisConfig {
                        lo: a.lo,
                        hi: a.hi,
                        n_steps: a.n_steps,
                    })
                    .collect(),
                include_neg_infinity: grid.include_neg_infinity,
                shared: grid.shared,
            });
        }
    }

    /// SHA-256 of the resolved config in canonical JSON.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn model(&self) -> Result<FeatureModel, CliError> {
        let m = &self.model;
        let build = || {
            FeatureModel::new(
                ClassParams::new(
                    Class::Negative,
                    m.negative.means.clone(),
                    m.negative.stddevs.clone(),
                )?,
                ClassParams::new(
                    Class::Positive,
                    m.positive.means.clone(),
                    m.positive.stddevs.clone(),
                )?,
                InternalNoise::new(m.sigma)?,
            )
        };
        build().map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn taus(&self) -> Result<TruncationVector, CliError> {
        let taus = self.taus.as_ref().expect("resolved");
        let values: Vec<f64> = taus.iter().map(|t| t.0).collect();
        if values.len() != self.dim() {
            return Err(CliError::Config(format!(
                "taus: expected {} thresholds, got {}",
                self.dim(),
                values.len()
            )));
        }
        TruncationVector::new(values).map_err(|e| CliError::Config(format!("taus: {e}")))
    }

    pub fn grid(&self) -> Result<SweepGrid, CliError> {
        let g = self.grid.as_ref().expect("resolved");
        let axes = g
            .axes
            .iter()
            .map(|a| GridAxis::new(a.lo, a.hi, a.n_steps))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let grid = SweepGrid {
            axes,
            include_neg_infinity: g.include_neg_infinity,
            shared: g.shared,
        };
        grid.points(self.dim())
            .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        Ok(grid)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Config("a seed is required for Monte Carlo runs (--seed)".into())
        })
    }

    pub fn method(&self) -> Result<Method, CliError> {
        match self.method.expect("resolved") {
            MethodConfig::Quadrature { cells } => {
                if self.dim() != 1 {
                    return Err(CliError::Config(format!(
                        "method: quadrature needs one feature, the model has {}",
                        self.dim()
                    )));
                }
                if cells < 64 {
                    return Err(CliError::Config(format!(
                        "method: at least 64 cells, got {cells}"
                    )));
                }
                Ok(Method::Quadrature { cells })
            }
            MethodConfig::MonteCarlo { n } => {
                if n < Method::MIN_SAMPLES {
                    return Err(CliError::Config(format!(
                        "method: at least {} samples per class, got {n}",
                        Method::MIN_SAMPLES
                    )));
                }
                Ok(Method::monte_carlo(n, self.seed()?))
            }
        }
    }

    pub fn guessing(&self) -> Guessing {
        match self.oracle.guessing {
            GuessingConfig::Expected => Guessing::Expected,
            GuessingConfig::CoinFlip => Guessing::CoinFlip,
        }
    }

    /// Seed shown in output headers: only runs that draw random numbers have one.
    pub fn seed_label(&self, stochastic: bool) -> String {
        match (stochastic, self.seed) {
            (true, Some(s)) => s.to_string(),
            _ => "none".into(),
        }
    }
}
