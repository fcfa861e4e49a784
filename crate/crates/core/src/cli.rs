//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::anfis::MfType;
use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::harness::{self, Cell, ExperimentConfig};
use crate::metrics::MetricRow;
use crate::model::{Architecture, Family, ModelArtifact};
use crate::synth::{self, DamSpec, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "airdemand",
    version,
    about = "Air-demand regression for dam bottom outlets with GA/PSO-trained ANN and ANFIS models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a dam preset or a custom dam spec.
    Synth(SynthArgs),
    /// Train a single model on the training partition and save it as JSON.
    Train(TrainArgs),
    /// Run the full training grid, select champions and evaluate them on the test partition.
    Grid(GridArgs),
    /// Evaluate a stored model against a dataset.
    Eval(EvalArgs),
    /// Re-emit plot files from a stored grid report.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Dam preset: safarood, balarood, sardasht, silve, talvar or kucheri.
    #[arg(long, default_value = "safarood")]
    dam: String,
    /// TOML file with a custom dam spec (overrides --dam).
    #[arg(long)]
    dam_config: Option<PathBuf>,
    #[arg(long, default_value_t = 110)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Relative standard deviation of multiplicative target noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Flags shared by commands that read an experiment config.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Experiment config (TOML). Defaults apply for anything not set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV; replaces the config's dataset source.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Master seed for per-cell optimizer seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration/generation budget for both optimizers.
    #[arg(long)]
    iters: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.data {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "dataset {} does not exist",
                    path.display()
                )));
            }
            cfg.dataset.path = Some(path.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(iters) = self.iters {
            cfg.pso.max_iters = iters;
            cfg.ga.max_iters = iters;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// ann-ga, ann-pso or anfis-pso.
    #[arg(long)]
    family: String,
    /// Hidden neurons (ANN families).
    #[arg(long, default_value_t = 12)]
    hidden: usize,
    /// Membership function type (ANFIS-PSO): triangular, gbell or gaussian.
    #[arg(long, default_value = "triangular")]
    mf: String,
    #[arg(long, default_value_t = 50)]
    pop: usize,
    /// Where to write the model JSON.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Print the effective config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Grid output directory or its manifest.json.
    #[arg(long)]
    report: PathBuf,
    /// Where to write plot files; defaults to the report directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn command() -> clap::Command {
    let defaults = ExperimentConfig::default().to_toml_string();
    Cli::command().mut_subcommand("grid", |c| {
        c.after_long_help(format!("Default configuration:\n\n{defaults}"))
    })
}

/// Parses `argv` and runs the selected subcommand. Returns the process exit
/// status: 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let cli = match <Cli as clap::FromArgMatches>::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(a) => synth_cmd(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Grid(a) => grid_cmd(a, out),
        Command::Eval(a) => eval_cmd(a, out),
        Command::Plot(a) => plot_cmd(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn synth_cmd(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec: DamSpec = match &a.dam_config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => synth::preset_by_name(&a.dam)?,
    };
    let data = synth::generate(
        &spec,
        &SynthConfig {
            n: a.n,
            noise_rel: a.noise,
            seed: a.seed,
        },
    )?;
    match &a.out {
        Some(path) => {
            data.save_csv(path)?;
            emit(
                out,
                &format!("wrote {} samples to {}\n", data.len(), path.display()),
            )
        }
        None => emit(out, &data.to_csv_string()),
    }
}

fn metrics_csv(rows: &[(&str, &MetricRow)]) -> String {
    let mut s = String::from("partition,rmse,mse,cc,si\n");
    for (name, m) in rows {
        s.push_str(&format!("{name},{},{},{},{}\n", m.rmse, m.mse, m.cc, m.si));
    }
    s
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.common.resolve()?;
    let family: Family = a.family.parse()?;
    let architecture = match family {
        Family::AnnGa | Family::AnnPso => {
            if a.hidden == 0 {
                return Err(Error::InvalidArgument("--hidden must be >= 1".into()));
            }
            Architecture::Ann {
                hidden_neurons: a.hidden,
            }
        }
        Family::AnfisPso => Architecture::Anfis {
            mf_type: a.mf.parse::<MfType>()?,
        },
    };
    let cell = Cell {
        family,
        architecture,
        pop_size: a.pop,
    };
    let data = cfg.dataset.resolve()?;
    let split = data.split(cfg.split.train_fraction, cfg.split.seed)?;
    let norm = Normalizer::fit(&split.train)?;
    let (model, _) = harness::train_model(&cell, &split.train, &norm, &cfg, cell.seed(cfg.seed))?;
    let (_, train_row) = harness::evaluate_model(&model, &split.train)?;
    let (_, test_row) = harness::evaluate_model(&model, &split.test)?;
    model.save(&a.out)?;
    emit(out, &metrics_csv(&[("train", &train_row), ("test", &test_row)]))
}

fn grid_cmd(a: GridArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = a.common.resolve()?;
    if let Some(dir) = a.out {
        cfg.output_dir = dir;
    }
    if a.print_config {
        return emit(out, &cfg.to_toml_string());
    }
    let run = harness::run_grid(&cfg)?;
    let dir = cfg.output_dir.clone();
    harness::write_outputs(&run, &cfg, &dir)?;
    let mut summary = String::new();
    for failed in run.report.cells.iter().filter(|c| c.error.is_some()) {
        summary.push_str(&format!(
            "cell {} {} pop {} failed: {}\n",
            failed.cell.family,
            failed.cell.label(),
            failed.cell.pop_size,
            failed.error.as_deref().unwrap_or_default()
        ));
    }
    summary.push_str(&format!("wrote report to {}\n", dir.display()));
    emit(out, &summary)
}

fn eval_cmd(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = ModelArtifact::load(&a.model)?;
    let data = Dataset::load_csv(&a.data)?;
    let (_, row) = harness::evaluate_model(&model, &data)?;
    emit(out, &metrics_csv(&[(data.source_tag(), &row)]))
}

fn plot_cmd(a: PlotArgs, out: &mut dyn Write) -> Result<()> {
    let manifest = harness::read_manifest(&a.report)?;
    let dir = match a.out {
        Some(dir) => dir,
        None if a.report.is_dir() => a.report.clone(),
        None => a.report.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let written = harness::emit_plots(&manifest.report, &dir)?;
    emit(
        out,
        &format!("wrote {} plot files to {}\n", written.len(), dir.display()),
    )
}
