use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::certify::VerifyOptions;
use crate::data::{load_csv, split_normalized, Dataset, Schema, Synth2d, DEFAULT_FREQUENCY};
use crate::milp::SolveBudget;
use crate::model::ArchitectureOptions;
use crate::train::TrainConfig;
use crate::{Error, Result};

/// Everything a `train` run depends on. The resolved copy written to the
/// output directory reproduces the run on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("monocert-out"),
            data: DataConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataConfig {
    Synth {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
        n_train: usize,
        n_test: usize,
    },
    Csv {
        path: PathBuf,
        /// Schema text; takes precedence over `schema_file`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema_file: Option<PathBuf>,
        #[serde(default = "default_val_fraction")]
        val_fraction: f64,
    },
}

fn default_frequency() -> f64 {
    DEFAULT_FREQUENCY
}

fn default_val_fraction() -> f64 {
    0.2
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synth {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            frequency: DEFAULT_FREQUENCY,
            n_train: 1000,
            n_test: 1000,
        }
    }
}

impl DataConfig {
    /// Inlines a schema file so the configuration is self-contained.
    pub fn resolve(&mut self) -> Result<()> {
        if let DataConfig::Csv {
            schema, schema_file, ..
        } = self
        {
            if schema.is_none() {
                let path = schema_file
                    .as_ref()
                    .ok_or_else(|| Error::Config("csv data needs `schema` or `schema_file`".into()))?;
                *schema = Some(std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?);
            }
        }
        Ok(())
    }

    /// `(train, evaluation)` datasets, both normalized to the unit cube
    /// with training-split parameters.
    pub fn load(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        match self {
            DataConfig::Synth {
                a,
                b,
                c,
                frequency,
                n_train,
                n_test,
            } => {
                let mut f = Synth2d::new(*a, *b, *c);
                f.frequency = *frequency;
                Ok((f.sample(*n_train, seed)?, f.sample(*n_test, seed.wrapping_add(1))?))
            }
            DataConfig::Csv {
                path,
                schema,
                schema_file,
                val_fraction,
            } => {
                let schema = match (schema, schema_file) {
                    (Some(text), _) => Schema::parse(text)?,
                    (None, Some(p)) => Schema::load(p)?,
                    (None, None) => return Err(Error::Config("csv data needs a schema".into())),
                };
                let raw = load_csv(path, &schema)?;
                let (train, val, _) = split_normalized(&raw, *val_fraction, seed)?;
                Ok((train, val))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden layer widths; an odd total depth is padded with a frozen
    /// identity layer.
    pub hidden: Vec<usize>,
    pub half_masking: bool,
    pub reduction_threshold: usize,
    pub reduction_dim: usize,
    /// Start from a saved model instead of a random one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_model: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let arch = ArchitectureOptions::default();
        Self {
            hidden: vec![40],
            half_masking: false,
            reduction_threshold: arch.reduction_threshold,
            reduction_dim: arch.reduction_dim,
            init_model: None,
        }
    }
}

impl ModelConfig {
    pub fn architecture(&self) -> ArchitectureOptions {
        ArchitectureOptions {
            half_masking: self.half_masking,
            reduction_threshold: self.reduction_threshold,
            reduction_dim: self.reduction_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub max_nodes: u64,
    pub time_limit_secs: f64,
    pub gap_tolerance: f64,
    pub early_stop: bool,
    pub partition: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let b = SolveBudget::default();
        let o = VerifyOptions::default();
        Self {
            max_nodes: b.max_nodes as u64,
            time_limit_secs: b.max_wall_time.as_secs_f64(),
            gap_tolerance: b.gap_tolerance,
            early_stop: o.early_stop,
            partition: o.partition,
            threads: None,
        }
    }
}

impl VerifyConfig {
    pub fn budget(&self) -> Result<SolveBudget> {
        if !(self.time_limit_secs > 0.0) || !(self.gap_tolerance >= 0.0) {
            return Err(Error::Config("time limit must be positive and gap tolerance non-negative".into()));
        }
        Ok(SolveBudget {
            max_nodes: usize::try_from(self.max_nodes).unwrap_or(usize::MAX),
            max_wall_time: Duration::try_from_secs_f64(self.time_limit_secs)
                .map_err(|e| Error::Config(format!("time limit: {e}")))?,
            gap_tolerance: self.gap_tolerance,
            ..SolveBudget::default()
        })
    }

    pub fn options(&self) -> Result<VerifyOptions> {
        if self.partition == 0 {
            return Err(Error::Config("partition must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(VerifyOptions {
            budget: self.budget()?,
            early_stop: self.early_stop,
            threads: self.threads,
            partition: self.partition,
        })
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("run config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serializing run config: {e}")))
    }
}
