use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anfis::MfType;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::optimize::{GaConfig, PsoConfig};
use crate::synth::{self, DamSpec, SynthConfig};

/// Where the experiment's data comes from. A `path` wins over synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSource {
    /// CSV file with columns flow_m3s, opening_pct, air_velocity_ms.
    pub path: Option<PathBuf>,
    /// Built-in dam preset used for synthesis.
    pub dam: String,
    /// Custom dam envelope; overrides `dam` when present.
    pub dam_spec: Option<DamSpec>,
    pub n: usize,
    pub noise_rel: f64,
    pub seed: u64,
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource {
            path: None,
            dam: "safarood".into(),
            dam_spec: None,
            n: 110,
            noise_rel: 0.0,
            seed: 7,
        }
    }
}

impl DatasetSource {
    pub fn dam_spec(&self) -> Result<DamSpec> {
        match &self.dam_spec {
            Some(spec) => Ok(spec.clone()),
            None => synth::preset_by_name(&self.dam),
        }
    }

    pub fn resolve(&self) -> Result<Dataset> {
        match &self.path {
            Some(path) => Dataset::load_csv(path),
            None => synth::generate(
                &self.dam_spec()?,
                &SynthConfig {
                    n: self.n,
                    noise_rel: self.noise_rel,
                    seed: self.seed,
                },
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub hidden_neurons: Vec<usize>,
    pub pop_sizes: Vec<usize>,
    pub mf_types: Vec<MfType>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            hidden_neurons: vec![8, 12, 16],
            pop_sizes: vec![50, 100, 150],
            mf_types: MfType::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnSettings {
    /// Every network weight and bias is searched in [−weight_bound, weight_bound].
    pub weight_bound: f64,
}

impl Default for AnnSettings {
    fn default() -> Self {
        AnnSettings { weight_bound: 1.0 }
    }
}

/// Everything a `grid` run depends on. `pso.pop_size`, `pso.seed`,
/// `ga.pop_size` and `ga.seed` are replaced per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed from which every cell's optimizer seed is derived.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub dataset: DatasetSource,
    pub split: SplitConfig,
    pub grid: GridConfig,
    pub ann: AnnSettings,
    pub pso: PsoConfig,
    pub ga: GaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            dataset: DatasetSource::default(),
            split: SplitConfig::default(),
            grid: GridConfig::default(),
            ann: AnnSettings::default(),
            pso: PsoConfig::default(),
            ga: GaConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.pop_sizes.is_empty() || (g.hidden_neurons.is_empty() && g.mf_types.is_empty()) {
            return Err(Error::Config("grid is empty".into()));
        }
        if g.hidden_neurons.contains(&0) {
            return Err(Error::Config("hidden_neurons entries must be >= 1".into()));
        }
        if !(self.ann.weight_bound > 0.0 && self.ann.weight_bound.is_finite()) {
            return Err(Error::Config("ann.weight_bound must be positive".into()));
        }
        for &pop in &g.pop_sizes {
            PsoConfig {
                pop_size: pop,
                ..self.pso
            }
            .validate()?;
            GaConfig {
                pop_size: pop,
                ..self.ga
            }
            .validate()?;
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::Config("split.train_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}
