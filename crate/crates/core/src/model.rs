//! Parametric regressors and their on-disk form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anfis::{AnfisConfig, MfType};
use crate::ann::AnnConfig;
use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};

/// A model whose behaviour is fully determined by a flat parameter vector.
pub trait ParamModel: Sync {
    fn param_count(&self) -> usize;

    /// Writes one normalized prediction per normalized input into `out`.
    fn predict_normalized(&self, params: &[f64], inputs: &[[f64; 2]], out: &mut Vec<f64>) -> Result<()>;
}

/// Hybrid model family: network type plus the optimizer that trains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ANN-GA")]
    AnnGa,
    #[serde(rename = "ANN-PSO")]
    AnnPso,
    #[serde(rename = "ANFIS-PSO")]
    AnfisPso,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::AnnGa, Family::AnnPso, Family::AnfisPso];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::AnnGa => "ANN-GA",
            Family::AnnPso => "ANN-PSO",
            Family::AnfisPso => "ANFIS-PSO",
        }
    }

    /// Lowercase form used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Family::AnnGa => "ann-ga",
            Family::AnnPso => "ann-pso",
            Family::AnfisPso => "anfis-pso",
        }
    }

    pub fn optimizer(self) -> Optimizer {
        match self {
            Family::AnnGa => Optimizer::Ga,
            Family::AnnPso | Family::AnfisPso => Optimizer::Pso,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ann-ga" => Ok(Family::AnnGa),
            "ann-pso" => Ok(Family::AnnPso),
            "anfis-pso" => Ok(Family::AnfisPso),
            _ => Err(Error::InvalidArgument(format!(
                "unknown model family `{s}` (ann-ga, ann-pso, anfis-pso)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Ga,
    Pso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    Ann { hidden_neurons: usize },
    Anfis { mf_type: MfType },
}

impl Architecture {
    pub fn param_count(&self) -> usize {
        match *self {
            Architecture::Ann { hidden_neurons } => AnnConfig { hidden_neurons }.param_count(),
            Architecture::Anfis { mf_type } => AnfisConfig::new(mf_type).param_count(),
        }
    }

    /// Hidden neuron count or membership function name, as shown in reports.
    pub fn label(&self) -> String {
        match self {
            Architecture::Ann { hidden_neurons } => hidden_neurons.to_string(),
            Architecture::Anfis { mf_type } => mf_type.to_string(),
        }
    }
}

impl ParamModel for Architecture {
    fn param_count(&self) -> usize {
        Architecture::param_count(self)
    }

    fn predict_normalized(&self, params: &[f64], inputs: &[[f64; 2]], out: &mut Vec<f64>) -> Result<()> {
        match *self {
            Architecture::Ann { hidden_neurons } => {
                AnnConfig::new(hidden_neurons)?.predict_normalized(params, inputs, out)
            }
            Architecture::Anfis { mf_type } => {
                AnfisConfig::new(mf_type).predict_normalized(params, inputs, out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub family: Family,
    pub optimizer: Optimizer,
    pub pop_size: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub initial_best_fitness: f64,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub trace: Vec<f64>,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained model: architecture, parameters, and the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub architecture: Architecture,
    pub params: Vec<f64>,
    pub normalizer: Normalizer,
    pub training: TrainingMeta,
}

impl ModelArtifact {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        let expected = self.architecture.param_count();
        if self.params.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: self.params.len(),
            });
        }
        Ok(())
    }

    /// Predicted air velocity (m/s) for each sample, in order.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>> {
        let inputs: Vec<[f64; 2]> = data
            .samples()
            .iter()
            .map(|s| self.normalizer.features(s))
            .collect();
        self.predict_features(&inputs)
    }

    /// Predicted air velocity for raw (flow m³/s, opening %) pairs.
    pub fn predict_raw(&self, flow_opening: &[[f64; 2]]) -> Result<Vec<f64>> {
        let inputs: Vec<[f64; 2]> = flow_opening
            .iter()
            .map(|&[q, o]| [self.normalizer.flow.apply(q), self.normalizer.opening.apply(o)])
            .collect();
        self.predict_features(&inputs)
    }

    fn predict_features(&self, inputs: &[[f64; 2]]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(inputs.len());
        self.architecture
            .predict_normalized(&self.params, inputs, &mut out)?;
        Ok(out
            .into_iter()
            .map(|y| self.normalizer.air_velocity.invert(y))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: ModelArtifact = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }
}
