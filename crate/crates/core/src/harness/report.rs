use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{plots, ExperimentConfig, GridReport, GridRun};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAIN_REPORT_FILE: &str = "report_train.csv";
pub const TEST_REPORT_FILE: &str = "report_test.csv";

/// The JSON manifest: the config that produced the run plus the full report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub report: GridReport,
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn train_csv(report: &GridReport) -> String {
    let mut s = String::from("family,neurons_or_mftype,pop_size,rmse,cc,si\n");
    for rec in &report.cells {
        let c = &rec.cell;
        match &rec.train {
            Some(m) => s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.family,
                c.label(),
                c.pop_size,
                m.rmse,
                m.cc,
                m.si
            )),
            None => s.push_str(&format!("{},{},{},,,\n", c.family, c.label(), c.pop_size)),
        }
    }
    s
}

pub fn test_csv(report: &GridReport) -> String {
    let mut s = String::from("family,rmse,cc,si\n");
    for champ in &report.champions {
        match &champ.test {
            Some(m) => s.push_str(&format!("{},{},{},{}\n", champ.family, m.rmse, m.cc, m.si)),
            None => s.push_str(&format!("{},,,\n", champ.family)),
        }
    }
    s
}

/// Writes reports, manifest, champion models, convergence traces and plots
/// into `dir`. Returns the paths written, in order.
pub fn write_outputs(run: &GridRun, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    put(TRAIN_REPORT_FILE.into(), train_csv(&run.report))?;
    put(TEST_REPORT_FILE.into(), test_csv(&run.report))?;
    let manifest = Manifest {
        config: cfg.clone(),
        report: run.report.clone(),
    };
    put(
        MANIFEST_FILE.into(),
        format!("{}\n", serde_json::to_string_pretty(&manifest)?),
    )?;

    for (family, model) in &run.models {
        put(format!("models/{}.json", family.slug()), model.to_json()?)?;
    }
    for (rec, result) in run.report.cells.iter().zip(&run.results) {
        if let Some(result) = result {
            let c = &rec.cell;
            put(
                format!("traces/{}_{}_pop{}.csv", c.family.slug(), c.label(), c.pop_size),
                result.trace_csv(),
            )?;
        }
    }
    written.extend(plots::emit_plots(&run.report, dir)?);
    Ok(written)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let path = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}
