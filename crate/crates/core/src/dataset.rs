//! Ingestion, splitting and min-max scaling of (flow, opening) → air velocity
//! records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FLOW_COLUMN: &str = "flow_m3s";
pub const OPENING_COLUMN: &str = "opening_pct";
pub const TARGET_COLUMN: &str = "air_velocity_ms";

/// One measurement: water volume rate (m³/s), gate opening (%), air velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    flow: f64,
    opening: f64,
    air_velocity: f64,
}

impl Sample {
    pub fn new(flow: f64, opening: f64, air_velocity: f64) -> Result<Self> {
        let check = |field, value: f64, ok: bool, bound| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::InvalidSample { field, value, bound })
            }
        };
        check(FLOW_COLUMN, flow, flow > 0.0, "flow > 0")?;
        check(
            OPENING_COLUMN,
            opening,
            opening > 0.0 && opening <= 100.0,
            "0 < opening <= 100",
        )?;
        check(
            TARGET_COLUMN,
            air_velocity,
            air_velocity >= 0.0,
            "air_velocity >= 0",
        )?;
        Ok(Sample {
            flow,
            opening,
            air_velocity,
        })
    }

    pub fn flow(&self) -> f64 {
        self.flow
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    pub fn air_velocity(&self) -> f64 {
        self.air_velocity
    }

    pub fn features(&self) -> [f64; 2] {
        [self.flow, self.opening]
    }
}

/// A non-empty, ordered collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    source_tag: String,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, source_tag: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset {
            samples,
            source_tag: source_tag.into(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::air_velocity).collect()
    }

    /// Reads a CSV file whose header names the three columns (any order,
    /// extra columns ignored). Row numbers in errors are 1-based data rows.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let shown = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);

        let headers = reader.headers().map_err(|e| Error::BadRow {
            path: shown.clone(),
            row: 0,
            message: e.to_string(),
        })?;
        let find = |column: &'static str| {
            headers
                .iter()
                .position(|h| h.trim_start_matches('\u{feff}') == column)
                .ok_or(Error::MissingColumn {
                    path: shown.clone(),
                    column,
                })
        };
        let columns = [find(FLOW_COLUMN)?, find(OPENING_COLUMN)?, find(TARGET_COLUMN)?];
        let names = [FLOW_COLUMN, OPENING_COLUMN, TARGET_COLUMN];

        let mut samples = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let bad = |message: String| Error::BadRow {
                path: shown.clone(),
                row,
                message,
            };
            let record = record.map_err(|e| bad(e.to_string()))?;
            let mut values = [0.0; 3];
            for (slot, (&col, name)) in values.iter_mut().zip(columns.iter().zip(names)) {
                let cell = record
                    .get(col)
                    .ok_or_else(|| bad(format!("missing value for `{name}`")))?;
                *slot = cell
                    .parse::<f64>()
                    .map_err(|_| bad(format!("non-numeric `{name}` value {cell:?}")))?;
            }
            let sample = Sample::new(values[0], values[1], values[2]).map_err(|e| bad(e.to_string()))?;
            samples.push(sample);
        }
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let tag = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| shown.clone());
        Dataset::new(samples, tag)
    }

    /// Writes the canonical CSV form (LF endings, shortest round-trip floats).
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(self.to_csv_string().as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = format!("{FLOW_COLUMN},{OPENING_COLUMN},{TARGET_COLUMN}\n");
        for sample in &self.samples {
            s.push_str(&format!(
                "{},{},{}\n",
                sample.flow, sample.opening, sample.air_velocity
            ));
        }
        s
    }

    /// Seeded shuffle followed by a prefix/suffix cut.
    /// `|train| = round(train_fraction · n)` with halves rounded up.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<SplitDataset> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {train_fraction} outside (0, 1)"
            )));
        }
        let n = self.len();
        let n_train = train_size(n, train_fraction);
        if n_train == 0 || n_train >= n {
            return Err(Error::InvalidArgument(format!(
                "{n} samples cannot be split at fraction {train_fraction} into two non-empty partitions"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (train_idx, test_idx) = order.split_at(n_train);
        let pick = |idx: &[usize], part: &str| {
            Dataset::new(
                idx.iter().map(|&i| self.samples[i]).collect(),
                format!("{}#{part}", self.source_tag),
            )
        };
        Ok(SplitDataset {
            train: pick(train_idx, "train")?,
            test: pick(test_idx, "test")?,
            train_indices: train_idx.to_vec(),
            test_indices: test_idx.to_vec(),
            seed,
            train_fraction,
        })
    }
}

pub(crate) fn train_size(n: usize, fraction: f64) -> usize {
    (fraction * n as f64 + 0.5).floor() as usize
}

/// Train/test partitions plus the original indices each sample came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    fn fit(column: &'static str, values: impl Iterator<Item = f64>) -> Result<Self> {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        ColumnRange::new(column, min, max)
    }

    pub fn new(column: &'static str, min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "column `{column}` has non-finite range ({min}, {max})"
            )));
        }
        if max <= min {
            return Err(Error::ZeroRange(column));
        }
        Ok(ColumnRange { min, max })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn invert(&self, x: f64) -> f64 {
        x * (self.max - self.min) + self.min
    }
}

/// Per-column min-max scaling to [0, 1], fitted on training data only.
/// Values outside the fitted range extrapolate linearly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub flow: ColumnRange,
    pub opening: ColumnRange,
    pub air_velocity: ColumnRange,
}

/// A sample in normalized units. Carries no physical bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedSample {
    pub flow: f64,
    pub opening: f64,
    pub air_velocity: f64,
}

impl NormalizedSample {
    pub fn features(&self) -> [f64; 2] {
        [self.flow, self.opening]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDataset {
    pub samples: Vec<NormalizedSample>,
    pub source_tag: String,
}

impl Normalizer {
    pub fn fit(d: &Dataset) -> Result<Self> {
        Ok(Normalizer {
            flow: ColumnRange::fit(FLOW_COLUMN, d.samples.iter().map(Sample::flow))?,
            opening: ColumnRange::fit(OPENING_COLUMN, d.samples.iter().map(Sample::opening))?,
            air_velocity: ColumnRange::fit(TARGET_COLUMN, d.samples.iter().map(Sample::air_velocity))?,
        })
    }

    pub fn features(&self, s: &Sample) -> [f64; 2] {
        [self.flow.apply(s.flow), self.opening.apply(s.opening)]
    }

    pub fn apply_sample(&self, s: &Sample) -> NormalizedSample {
        NormalizedSample {
            flow: self.flow.apply(s.flow),
            opening: self.opening.apply(s.opening),
            air_velocity: self.air_velocity.apply(s.air_velocity),
        }
    }

    pub fn apply(&self, d: &Dataset) -> NormalizedDataset {
        NormalizedDataset {
            samples: d.samples.iter().map(|s| self.apply_sample(s)).collect(),
            source_tag: d.source_tag.clone(),
        }
    }

    /// Maps normalized samples back to physical units. Fails if the result
    /// violates the sample bounds.
    pub fn invert(&self, d: &NormalizedDataset) -> Result<Dataset> {
        let samples = d
            .samples
            .iter()
            .map(|s| {
                Sample::new(
                    self.flow.invert(s.flow),
                    self.opening.invert(s.opening),
                    self.air_velocity.invert(s.air_velocity),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples, d.source_tag.clone())
    }
}
