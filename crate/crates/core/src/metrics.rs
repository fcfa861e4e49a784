//! Performance factors between an observed series `O` and a predicted series `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired observed/predicted series of equal, non-zero length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    observed: Vec<f64>,
    predicted: Vec<f64>,
}

impl EvalPair {
    pub fn new(observed: Vec<f64>, predicted: Vec<f64>) -> Result<Self> {
        if observed.len() != predicted.len() {
            return Err(Error::InvalidArgument(format!(
                "observed has {} values, predicted has {}",
                observed.len(),
                predicted.len()
            )));
        }
        if observed.is_empty() {
            return Err(Error::InvalidArgument("empty series".into()));
        }
        if observed.iter().chain(&predicted).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series contain non-finite values".into()));
        }
        Ok(EvalPair { observed, predicted })
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divide by n), two-pass.
fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn mse(e: &EvalPair) -> f64 {
    e.observed
        .iter()
        .zip(&e.predicted)
        .map(|(o, p)| (o - p) * (o - p))
        .sum::<f64>()
        / e.len() as f64
}

pub fn rmse(e: &EvalPair) -> f64 {
    mse(e).sqrt()
}

/// Pearson correlation coefficient.
pub fn cc(e: &EvalPair) -> Result<f64> {
    let (mo, mp) = (mean(&e.observed), mean(&e.predicted));
    let (mut cov, mut vo, mut vp) = (0.0, 0.0, 0.0);
    for (o, p) in e.observed.iter().zip(&e.predicted) {
        let (a, b) = (o - mo, p - mp);
        cov += a * b;
        vo += a * a;
        vp += b * b;
    }
    if vo == 0.0 || vp == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((cov / (vo * vp).sqrt()).clamp(-1.0, 1.0))
}

/// RMSE divided by the observed mean (scatter index).
pub fn si(e: &EvalPair) -> Result<f64> {
    let mo = mean(&e.observed);
    if mo == 0.0 {
        return Err(Error::ZeroObservedMean);
    }
    Ok(rmse(e) / mo)
}

/// Coordinates of a model on a Taylor diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorStats {
    pub std_observed: f64,
    pub std_predicted: f64,
    pub cc: f64,
}

impl TaylorStats {
    /// Cartesian position: radius `std_predicted` at angle `acos(cc)`.
    pub fn point(&self) -> (f64, f64) {
        let theta = self.cc.acos();
        (self.std_predicted * theta.cos(), self.std_predicted * theta.sin())
    }

    /// Centered RMS difference implied by the diagram geometry.
    pub fn centered_rms(&self) -> f64 {
        let (so, sp) = (self.std_observed, self.std_predicted);
        (so * so + sp * sp - 2.0 * so * sp * self.cc).max(0.0).sqrt()
    }
}

pub fn taylor_stats(e: &EvalPair) -> Result<TaylorStats> {
    Ok(TaylorStats {
        std_observed: variance(&e.observed).sqrt(),
        std_predicted: variance(&e.predicted).sqrt(),
        cc: cc(e)?,
    })
}

/// `(i, Pᵢ − Oᵢ)` in input order.
pub fn deviation_series(e: &EvalPair) -> Vec<(usize, f64)> {
    e.observed
        .iter()
        .zip(&e.predicted)
        .map(|(o, p)| p - o)
        .enumerate()
        .collect()
}

/// One row of a training or testing results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub family: String,
    /// Hidden neuron count or membership function type; empty for test rows.
    pub neurons_or_mftype: String,
    pub pop_size: Option<usize>,
    pub rmse: f64,
    pub mse: f64,
    pub cc: f64,
    pub si: f64,
}

impl MetricRow {
    pub fn compute(
        family: impl Into<String>,
        neurons_or_mftype: impl Into<String>,
        pop_size: Option<usize>,
        e: &EvalPair,
    ) -> Result<Self> {
        let mse = mse(e);
        Ok(MetricRow {
            family: family.into(),
            neurons_or_mftype: neurons_or_mftype.into(),
            pop_size,
            rmse: mse.sqrt(),
            mse,
            cc: cc(e)?,
            si: si(e)?,
        })
    }
}
