//! Experiment orchestration: the training grid, champion selection, the
//! test-phase comparison and the report/plot files.

mod config;
pub mod plots;
mod report;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{AnnSettings, DatasetSource, ExperimentConfig, GridConfig, SplitConfig};
pub use plots::emit_plots;
pub use report::{read_manifest, write_outputs, Manifest};

use crate::anfis::AnfisConfig;
use crate::dataset::{Dataset, Normalizer, SplitDataset};
use crate::error::{Error, Result};
use crate::metrics::{EvalPair, MetricRow};
use crate::model::{Architecture, Family, ModelArtifact, TrainingMeta, MODEL_FORMAT_VERSION};
use crate::optimize::{self, fitness_mse, Bounds, GaConfig, OptResult, PsoConfig};

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub family: Family,
    pub architecture: Architecture,
    pub pop_size: usize,
}

impl Cell {
    pub fn label(&self) -> String {
        self.architecture.label()
    }

    /// Independent, reproducible optimizer seed for this cell.
    pub fn seed(&self, master: u64) -> u64 {
        let key = format!("{master}|{}|{}|{}", self.family, self.label(), self.pop_size);
        let digest = Sha256::digest(key.as_bytes());
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }
}

/// Grid cells in report order: ANN-GA and ANN-PSO sweep population size
/// (outer) and hidden neurons (inner), ANFIS-PSO sweeps MF type (outer) and
/// population size (inner).
pub fn grid_cells(grid: &GridConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for family in [Family::AnnGa, Family::AnnPso] {
        for &pop_size in &grid.pop_sizes {
            for &hidden_neurons in &grid.hidden_neurons {
                cells.push(Cell {
                    family,
                    architecture: Architecture::Ann { hidden_neurons },
                    pop_size,
                });
            }
        }
    }
    for &mf_type in &grid.mf_types {
        for &pop_size in &grid.pop_sizes {
            cells.push(Cell {
                family: Family::AnfisPso,
                architecture: Architecture::Anfis { mf_type },
                pop_size,
            });
        }
    }
    cells
}

/// Trains one model on `train` (already the training partition) with the
/// optimizer implied by `cell.family`.
pub fn train_model(
    cell: &Cell,
    train: &Dataset,
    norm: &Normalizer,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(ModelArtifact, OptResult)> {
    let arch = cell.architecture;
    let fitness = fitness_mse(&arch, train, norm);
    let objective = fitness.as_fn();
    let pso_cfg = PsoConfig {
        pop_size: cell.pop_size,
        seed,
        ..cfg.pso
    };
    let (result, max_iters) = match (cell.family, arch) {
        (Family::AnnGa, Architecture::Ann { .. }) => {
            let ga_cfg = GaConfig {
                pop_size: cell.pop_size,
                seed,
                ..cfg.ga
            };
            let bounds = Bounds::uniform(arch.param_count(), -cfg.ann.weight_bound, cfg.ann.weight_bound)?;
            (optimize::ga_run(&objective, &bounds, &ga_cfg)?, ga_cfg.max_iters)
        }
        (Family::AnnPso, Architecture::Ann { .. }) => {
            let bounds = Bounds::uniform(arch.param_count(), -cfg.ann.weight_bound, cfg.ann.weight_bound)?;
            (
                optimize::pso_run(&objective, &bounds, &pso_cfg)?,
                pso_cfg.max_iters,
            )
        }
        (Family::AnfisPso, Architecture::Anfis { mf_type }) => {
            let anfis = AnfisConfig::new(mf_type);
            let r = optimize::pso_run_with_init(&objective, &anfis.bounds(), &anfis.init_bounds(), &pso_cfg)?;
            (r, pso_cfg.max_iters)
        }
        (family, arch) => {
            return Err(Error::InvalidArgument(format!(
                "family {family} cannot train architecture {arch:?}"
            )))
        }
    };

    let params = match arch {
        Architecture::Anfis { mf_type } => AnfisConfig::new(mf_type).decode(&result.best_position)?.encode(),
        Architecture::Ann { .. } => result.best_position.clone(),
    };
    let model = ModelArtifact {
        format_version: MODEL_FORMAT_VERSION,
        architecture: arch,
        params,
        normalizer: *norm,
        training: TrainingMeta {
            family: cell.family,
            optimizer: cell.family.optimizer(),
            pop_size: cell.pop_size,
            max_iters,
            seed,
            initial_best_fitness: result.initial_best_fitness,
            best_fitness: result.best_fitness,
            evaluations: result.evaluations,
            trace: result.trace.clone(),
        },
    };
    Ok((model, result))
}

/// Metrics of a model against a dataset, in physical units.
pub fn evaluate_model(model: &ModelArtifact, data: &Dataset) -> Result<(EvalPair, MetricRow)> {
    let pair = EvalPair::new(data.targets(), model.predict(data)?)?;
    let row = MetricRow::compute(
        model.training.family.as_str(),
        model.architecture.label(),
        Some(model.training.pop_size),
        &pair,
    )?;
    Ok((pair, row))
}

/// A trained grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: Cell,
    pub seed: u64,
    /// Training-partition metrics; absent when the cell failed.
    pub train: Option<MetricRow>,
    pub error: Option<String>,
    /// Best normalized MSE of the initial population.
    pub initial_fitness: Option<f64>,
    pub final_fitness: Option<f64>,
    pub evaluations: Option<usize>,
}

/// A family's champion carried to the test phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChampionRecord {
    pub family: Family,
    /// Index into [`GridReport::cells`].
    pub cell_index: usize,
    pub test: Option<MetricRow>,
    pub error: Option<String>,
    pub observed: Vec<f64>,
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source_tag: String,
    pub n: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub test_target_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub dataset: DatasetInfo,
    pub cells: Vec<CellRecord>,
    pub champions: Vec<ChampionRecord>,
    /// Family whose champion has the best training metrics overall.
    pub overall_champion: Option<Family>,
}

/// Everything produced by [`run_grid`], including the champion models.
#[derive(Debug, Clone)]
pub struct GridRun {
    pub report: GridReport,
    pub models: Vec<(Family, ModelArtifact)>,
    pub results: Vec<Option<OptResult>>,
}

fn compare_rows(a: &MetricRow, b: &MetricRow) -> Ordering {
    a.rmse
        .total_cmp(&b.rmse)
        .then(b.cc.total_cmp(&a.cc))
        .then(a.si.total_cmp(&b.si))
}

/// Index of the row with the lowest RMSE; ties go to higher CC, then lower
/// SI, then the earliest row.
pub fn select_champion(rows: &[MetricRow]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to select a champion from".into()));
    }
    let mut best = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        if compare_rows(row, &rows[best]) == Ordering::Less {
            best = i;
        }
    }
    Ok(best)
}

fn population_std(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Trains every cell, picks a champion per family on training RMSE and
/// evaluates the champions on the test partition.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridRun> {
    cfg.validate()?;
    let data = cfg.dataset.resolve()?;
    let split = data.split(cfg.split.train_fraction, cfg.split.seed)?;
    run_grid_on_split(cfg, &split)
}

type Trained = (ModelArtifact, OptResult, MetricRow);

pub fn run_grid_on_split(cfg: &ExperimentConfig, split: &SplitDataset) -> Result<GridRun> {
    let norm = Normalizer::fit(&split.train)?;
    let cells = grid_cells(&cfg.grid);

    let trained: Vec<(u64, Result<Trained>)> = cells
        .par_iter()
        .map(|cell| {
            let seed = cell.seed(cfg.seed);
            let outcome = train_model(cell, &split.train, &norm, cfg, seed).and_then(|(model, result)| {
                let (_, row) = evaluate_model(&model, &split.train)?;
                Ok((model, result, row))
            });
            (seed, outcome)
        })
        .collect();

    let mut records = Vec::with_capacity(cells.len());
    let mut models = Vec::with_capacity(cells.len());
    let mut results = Vec::with_capacity(cells.len());
    for (cell, (seed, outcome)) in cells.iter().zip(trained) {
        match outcome {
            Ok((model, result, row)) => {
                records.push(CellRecord {
                    cell: *cell,
                    seed,
                    train: Some(row),
                    error: None,
                    initial_fitness: Some(result.initial_best_fitness),
                    final_fitness: Some(result.best_fitness),
                    evaluations: Some(result.evaluations),
                });
                models.push(Some(model));
                results.push(Some(result));
            }
            Err(e) => {
                records.push(CellRecord {
                    cell: *cell,
                    seed,
                    train: None,
                    error: Some(e.to_string()),
                    initial_fitness: None,
                    final_fitness: None,
                    evaluations: None,
                });
                models.push(None);
                results.push(None);
            }
        }
    }

    let mut champions = Vec::new();
    let mut champion_models = Vec::new();
    for family in Family::ALL {
        let candidates: Vec<(usize, &MetricRow)> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.cell.family == family)
            .filter_map(|(i, r)| r.train.as_ref().map(|row| (i, row)))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let rows: Vec<MetricRow> = candidates.iter().map(|(_, r)| (*r).clone()).collect();
        let cell_index = candidates[select_champion(&rows)?].0;
        let model = models[cell_index].clone().expect("successful cell has a model");
        let record = match model.predict(&split.test) {
            Ok(predicted) => {
                let observed = split.test.targets();
                let test = EvalPair::new(observed.clone(), predicted.clone())
                    .and_then(|pair| MetricRow::compute(family.as_str(), "", None, &pair));
                let (test, error) = match test {
                    Ok(row) => (Some(row), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ChampionRecord {
                    family,
                    cell_index,
                    test,
                    error,
                    observed,
                    predicted,
                }
            }
            Err(e) => ChampionRecord {
                family,
                cell_index,
                test: None,
                error: Some(e.to_string()),
                observed: Vec::new(),
                predicted: Vec::new(),
            },
        };
        champions.push(record);
        champion_models.push((family, model));
    }

    let overall_champion = {
        let rows: Vec<MetricRow> = champions
            .iter()
            .map(|c| records[c.cell_index].train.clone().expect("champion trained"))
            .collect();
        select_champion(&rows).ok().map(|i| champions[i].family)
    };

    let report = GridReport {
        dataset: DatasetInfo {
            source_tag: split.train.source_tag().trim_end_matches("#train").to_string(),
            n: split.train.len() + split.test.len(),
            n_train: split.train.len(),
            n_test: split.test.len(),
            train_fraction: split.train_fraction,
            split_seed: split.seed,
            test_target_std: population_std(&split.test.targets()),
        },
        cells: records,
        champions,
        overall_champion,
    };
    Ok(GridRun {
        report,
        models: champion_models,
        results,
    })
}
