//! Hybrid metaheuristic regressors for air demand in dam bottom outlets.
//!
//! Two inputs (water volume rate and gate opening) predict the air velocity
//! behind the service gate. Three model families are trained without
//! gradients: a single-hidden-layer network tuned by a genetic algorithm
//! (ANN-GA) or a particle swarm (ANN-PSO), and a 49-rule first-order
//! Takagi–Sugeno fuzzy system tuned by a particle swarm (ANFIS-PSO).
//!
//! [`synth`] produces physically plausible training data from Kalinske's
//! aeration relation; [`harness`] runs the full hyperparameter grid and
//! writes the result tables and plots.

pub mod anfis;
pub mod ann;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod synth;

pub use error::{Error, Result};
