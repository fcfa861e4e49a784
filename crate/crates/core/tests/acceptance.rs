//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use airdemand::anfis::{AnfisConfig, AnfisParams, MfParams, MfType, MFS_PER_INPUT, RULE_COUNT};
use airdemand::dataset::{Dataset, Normalizer, Sample};
use airdemand::harness::{self, Manifest};
use airdemand::metrics::{self, EvalPair};
use airdemand::model::{Family, ModelArtifact};
use airdemand::optimize::{ga_run, pso_run, Bounds, GaConfig, PsoConfig};
use airdemand::synth::{self, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_airdemand")
}

fn run_cli(cwd: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(bin())
        .current_dir(cwd)
        .args(args)
        .output()
        .map_err(|e| format!("spawn {}: {e}", bin()))?;
    if !out.status.success() {
        return Err(format!(
            "`airdemand {}` exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                acc.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

/// Two default grid runs in separate working directories with the same
/// relative output path, so the configs are identical.
struct GridRuns {
    dirs: [tempfile::TempDir; 2],
    first_runtime: Duration,
}

impl GridRuns {
    fn out(&self, i: usize) -> PathBuf {
        self.dirs[i].path().join("out")
    }
}

fn run_default_grids() -> Result<GridRuns, String> {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let start = Instant::now();
    run_cli(dirs[0].path(), &["grid", "--out", "out"])?;
    let first_runtime = start.elapsed();
    run_cli(dirs[1].path(), &["grid", "--out", "out"])?;
    Ok(GridRuns { dirs, first_runtime })
}

fn structural(runs: &GridRuns) -> Outcome {
    let out = runs.out(0);
    let train = std::fs::read_to_string(out.join("report_train.csv")).map_err(|e| e.to_string())?;
    let test = std::fs::read_to_string(out.join("report_test.csv")).map_err(|e| e.to_string())?;
    let train_lines: Vec<&str> = train.lines().collect();
    let test_lines: Vec<&str> = test.lines().collect();
    ensure(
        train_lines[0] == "family,neurons_or_mftype,pop_size,rmse,cc,si",
        || format!("train header {:?}", train_lines[0]),
    )?;
    ensure(test_lines[0] == "family,rmse,cc,si", || {
        format!("test header {:?}", test_lines[0])
    })?;
    let mut counts = BTreeMap::new();
    for row in &train_lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        ensure(fields.len() == 6, || format!("train row {row:?}"))?;
        for f in &fields[3..] {
            f.parse::<f64>()
                .map_err(|_| format!("train row has non-numeric metric: {row:?}"))?;
        }
        *counts.entry(fields[0].to_string()).or_insert(0) += 1;
    }
    for fam in Family::ALL {
        ensure(counts.get(fam.as_str()) == Some(&9), || {
            format!("{fam} has {:?} train rows", counts.get(fam.as_str()))
        })?;
    }
    ensure(train_lines.len() == 28, || {
        format!("{} train rows", train_lines.len() - 1)
    })?;
    let fams: Vec<&str> = test_lines[1..]
        .iter()
        .map(|r| r.split(',').next().unwrap())
        .collect();
    ensure(fams == ["ANN-GA", "ANN-PSO", "ANFIS-PSO"], || {
        format!("test rows {fams:?}")
    })?;
    ensure(runs.first_runtime < Duration::from_secs(600), || {
        format!("runtime {:.1}s", runs.first_runtime.as_secs_f64())
    })?;
    Ok(format!(
        "27 train rows (9/9/9), 3 test rows, default grid in {:.1}s",
        runs.first_runtime.as_secs_f64()
    ))
}

fn naive_metrics(o: &[f64], p: &[f64]) -> (f64, f64, f64, f64) {
    let n = o.len() as f64;
    let mut sq = 0.0;
    let (mut so, mut sp) = (0.0, 0.0);
    for i in 0..o.len() {
        sq += (o[i] - p[i]).powi(2);
        so += o[i];
        sp += p[i];
    }
    let mse = sq / n;
    let (mo, mp) = (so / n, sp / n);
    let (mut num, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for i in 0..o.len() {
        num += (o[i] - mo) * (p[i] - mp);
        d1 += (o[i] - mo).powi(2);
        d2 += (p[i] - mp).powi(2);
    }
    let rmse = mse.sqrt();
    (mse, rmse, num / (d1.sqrt() * d2.sqrt()), rmse / mo)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..10_000 {
        let n = rng.random_range(2..60);
        let o: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..100.0)).collect();
        let p: Vec<f64> = o.iter().map(|x| x + rng.random_range(-20.0..20.0)).collect();
        let (mse, rmse, cc, si) = naive_metrics(&o, &p);
        let e = EvalPair::new(o, p).map_err(|e| e.to_string())?;
        let got = [
            metrics::mse(&e),
            metrics::rmse(&e),
            metrics::cc(&e).map_err(|e| e.to_string())?,
            metrics::si(&e).map_err(|e| e.to_string())?,
        ];
        for (g, w) in got.iter().zip([mse, rmse, cc, si]) {
            let err = (g - w).abs() / w.abs().max(1.0);
            worst = worst.max(err);
            ensure(err <= 1e-12, || format!("trial {trial}: {g} vs oracle {w}"))?;
        }
    }
    let e = EvalPair::new(vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 2.0]).unwrap();
    let r6 = |x: f64| (x * 1e6).round() / 1e6;
    ensure(r6(metrics::mse(&e)) == r6(2.0 / 3.0), || "mse example".into())?;
    ensure(r6(metrics::rmse(&e)) == 0.816497, || "rmse example".into())?;
    ensure(r6(metrics::si(&e).unwrap()) == 0.408248, || "si example".into())?;
    let e = EvalPair::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0]).unwrap();
    ensure(r6(metrics::cc(&e).unwrap()) == 0.981981, || "cc example".into())?;
    Ok(format!(
        "10000 random pairs, worst relative error {worst:.1e}; hand examples match"
    ))
}

fn kalinske() -> Outcome {
    let b = |fr: f64| synth::kalinske_beta(fr).map_err(|e| e.to_string());
    ensure(b(1.0)? == 0.0, || "beta(1) != 0".into())?;
    ensure(b(2.0)? == 0.0066, || format!("beta(2) = {}", b(2.0).unwrap()))?;
    let v = b(11.0)?;
    ensure((v - 0.165_784_504_479_632_25).abs() < 1e-6, || {
        format!("beta(11) = {v}")
    })?;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..1000 {
        let fr = i as f64 * 20.0 / 999.0;
        let v = b(fr)?;
        ensure(v >= prev, || format!("decrease at Fr={fr}"))?;
        prev = v;
    }
    Ok(format!(
        "beta(1)=0, beta(2)=0.0066, beta(11)={v:.9}, monotone on 1000 points"
    ))
}

fn oracle_degree(mf: &MfParams, x: f64) -> f64 {
    match *mf {
        MfParams::Triangular { a, b, c } => {
            if x == b {
                1.0
            } else {
                ((x - a) / (b - a)).min((c - x) / (c - b)).max(0.0)
            }
        }
        MfParams::GBell { a, b, c } => 1.0 / (1.0 + (((x - c) / a).powi(2)).powf(b)),
        MfParams::Gaussian { sigma, c } => (-0.5 * ((x - c) / sigma).powi(2)).exp(),
    }
}

/// Straight 49-rule sum over the decoded parameters.
fn oracle_forward(p: &AnfisParams, x: [f64; 2]) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut plain = 0.0;
    for i in 0..MFS_PER_INPUT {
        for j in 0..MFS_PER_INPUT {
            let w = oracle_degree(&p.premise[0][i], x[0]) * oracle_degree(&p.premise[1][j], x[1]);
            let [a, b, c] = p.consequents[i * MFS_PER_INPUT + j];
            let f = a * x[0] + b * x[1] + c;
            num += w * f;
            den += w;
            plain += f;
        }
    }
    if den > 0.0 {
        (num / den, den)
    } else {
        (plain / RULE_COUNT as f64, den)
    }
}

fn anfis() -> Outcome {
    let counts: Vec<usize> = MfType::ALL
        .iter()
        .map(|&t| AnfisConfig::new(t).param_count())
        .collect();
    ensure(counts == [189, 189, 175], || format!("param counts {counts:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for probe in 0..10_000 {
        let cfg = AnfisConfig::new(MfType::ALL[probe % 3]);
        let b = cfg.bounds();
        let flat: Vec<f64> = (0..b.len())
            .map(|k| rng.random_range(b.lower()[k]..=b.upper()[k]))
            .collect();
        let p = cfg.decode(&flat).map_err(|e| e.to_string())?;
        let x = [rng.random_range(-0.3..1.3), rng.random_range(-0.3..1.3)];
        let (want, den) = oracle_forward(&p, x);
        let got = p.forward(x);
        let err = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("probe {probe}: {got} vs oracle {want}"))?;
        let sum: f64 = p.firing_strengths(x).iter().sum();
        ensure((sum - 1.0).abs() <= 1e-12, || {
            format!("probe {probe}: strengths sum {sum}")
        })?;
        if den == 0.0 {
            degenerate += 1;
        }
    }

    // Narrow triangles far from the probe: nothing fires.
    let mut p = AnfisConfig::new(MfType::Triangular).grid_init();
    for row in p.premise.iter_mut() {
        for (k, mf) in row.iter_mut().enumerate() {
            let c = 0.01 * k as f64;
            *mf = MfParams::Triangular {
                a: c,
                b: c + 0.001,
                c: c + 0.002,
            };
        }
    }
    for (k, c) in p.consequents.iter_mut().enumerate() {
        *c = [0.0, 0.0, k as f64];
    }
    let x = [0.9, 0.9];
    let w = p.firing_strengths(x);
    let sum: f64 = w.iter().sum();
    ensure((sum - 1.0).abs() <= 1e-12, || format!("degenerate sum {sum}"))?;
    ensure(w.iter().all(|&v| v == 1.0 / 49.0), || {
        "degenerate weights not uniform".into()
    })?;
    ensure((p.forward(x) - oracle_forward(&p, x).0).abs() < 1e-10, || {
        "degenerate forward".into()
    })?;
    Ok(format!(
        "10000 probes ({degenerate} with no firing rule), worst relative error {worst:.1e}; counts 189/189/175"
    ))
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn optimizers() -> Outcome {
    let b = Bounds::uniform(5, -5.0, 5.0).unwrap();
    let (mut pso_ok, mut ga_ok) = (0, 0);
    for seed in 0..100 {
        let p = pso_run(
            sphere,
            &b,
            &PsoConfig {
                pop_size: 50,
                max_iters: 200,
                seed,
                ..PsoConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let g = ga_run(
            sphere,
            &b,
            &GaConfig {
                pop_size: 50,
                max_iters: 200,
                seed,
                ..GaConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        for (name, r) in [("PSO", &p), ("GA", &g)] {
            let mut prev = r.initial_best_fitness;
            for (i, &f) in r.trace.iter().enumerate() {
                ensure(f <= prev, || {
                    format!("{name} seed {seed}: trace increases at {i}")
                })?;
                prev = f;
            }
        }
        pso_ok += (p.best_fitness < 1e-3) as usize;
        ga_ok += (g.best_fitness < 1e-2) as usize;
    }
    ensure(pso_ok >= 95 && ga_ok >= 95, || {
        format!("PSO {pso_ok}/100, GA {ga_ok}/100")
    })?;
    Ok(format!(
        "PSO < 1e-3 in {pso_ok}/100, GA < 1e-2 in {ga_ok}/100, traces non-increasing"
    ))
}

fn learning_signal(runs: &GridRuns) -> Outcome {
    let Manifest { config, report } = harness::read_manifest(runs.out(0)).map_err(|e| e.to_string())?;
    ensure(
        config.dataset.path.is_none() && config.dataset.noise_rel == 0.0 && config.dataset.n == 110,
        || "default grid is not the noiseless 110-sample synthetic dataset".into(),
    )?;
    ensure(
        report
            .dataset
            .source_tag
            .to_lowercase()
            .starts_with("synth:safarood"),
        || report.dataset.source_tag.clone(),
    )?;
    let mut worst = 0.0f64;
    for rec in &report.cells {
        let (init, fin) = (rec.initial_fitness, rec.final_fitness);
        let (Some(init), Some(fin)) = (init, fin) else {
            return Err(format!(
                "cell {} {} failed: {:?}",
                rec.cell.family,
                rec.cell.label(),
                rec.error
            ));
        };
        worst = worst.max(fin / init);
        ensure(fin <= 0.25 * init, || {
            format!(
                "{} {} pop {}: final {fin} vs initial {init}",
                rec.cell.family,
                rec.cell.label(),
                rec.cell.pop_size
            )
        })?;
    }
    let overall = report.overall_champion.ok_or("no overall champion")?;
    let champ = report
        .champions
        .iter()
        .find(|c| c.family == overall)
        .ok_or("champion missing")?;
    let rmse = champ.test.as_ref().ok_or("champion has no test metrics")?.rmse;
    let std = report.dataset.test_target_std;
    ensure(rmse < std, || {
        format!("{overall} test RMSE {rmse} >= target std {std}")
    })?;
    Ok(format!(
        "worst final/initial MSE ratio {worst:.3}; {overall} test RMSE {rmse:.3} < target std {std:.3}"
    ))
}

fn determinism(runs: &GridRuns) -> Outcome {
    let a = read_tree(&runs.out(0));
    let b = read_tree(&runs.out(1));
    ensure(a.keys().eq(b.keys()), || {
        "grid runs wrote different file sets".into()
    })?;
    for (path, bytes) in &a {
        ensure(&b[path] == bytes, || {
            format!("grid output {} differs", path.display())
        })?;
    }
    let svgs = a
        .keys()
        .filter(|p| p.extension().is_some_and(|e| e == "svg"))
        .count();

    let mut files = 0;
    let model = runs.out(0).join("models").join("anfis-pso.json");
    let model = model.to_str().unwrap();
    let manifest = runs.out(0).join("manifest.json");
    let manifest = manifest.to_str().unwrap();
    let scripts: [&[&str]; 5] = [
        &[
            "synth", "--dam", "safarood", "--n", "110", "--seed", "7", "--noise", "0.05", "--out", "d.csv",
        ],
        &["synth", "--dam", "kucheri", "--n", "40", "--seed", "3"],
        &[
            "train", "--family", "ann-ga", "--hidden", "8", "--pop", "20", "--iters", "40", "--out", "m.json",
        ],
        &["eval", "--model", model, "--data", "d.csv"],
        &["plot", "--report", manifest, "--out", "plots"],
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut stdout = [Vec::new(), Vec::new()];
    for (dir, log) in dirs.iter().zip(stdout.iter_mut()) {
        for args in scripts {
            log.push(run_cli(dir.path(), args)?);
        }
    }
    ensure(stdout[0] == stdout[1], || {
        "subcommand stdout differs between runs".into()
    })?;
    let (ta, tb) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    ensure(ta == tb, || "subcommand outputs differ between runs".into())?;
    files += ta.len();

    // Re-emitting plots from the stored report reproduces the grid's files.
    for (path, bytes) in &ta {
        if let Ok(rel) = path.strip_prefix("plots") {
            ensure(a.get(rel) == Some(bytes), || {
                format!("plot {} differs from grid output", rel.display())
            })?;
        }
    }
    Ok(format!(
        "{} grid files ({svgs} SVG) and {files} synth/train/eval/plot files byte-identical across runs",
        a.len()
    ))
}

fn roundtrips(runs: &GridRuns) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dir = tempfile::tempdir().unwrap();
    for trial in 0..200 {
        let n = rng.random_range(2..80);
        let samples: Vec<Sample> = (0..n)
            .map(|_| {
                Sample::new(
                    rng.random_range(0.01..500.0),
                    rng.random_range(0.5..100.0),
                    rng.random_range(0.0..300.0),
                )
                .unwrap()
            })
            .collect();
        let d = Dataset::new(samples, "random").unwrap();
        let Ok(norm) = Normalizer::fit(&d) else { continue };
        let back = norm.invert(&norm.apply(&d)).map_err(|e| e.to_string())?;
        for (s, t) in d.samples().iter().zip(back.samples()) {
            let ok = close(s.flow(), t.flow(), 1e-12)
                && close(s.opening(), t.opening(), 1e-12)
                && close(s.air_velocity(), t.air_velocity(), 1e-12);
            ensure(ok, || format!("normalizer trial {trial}: {s:?} -> {t:?}"))?;
        }
        let path = dir.path().join("d.csv");
        d.save_csv(&path).map_err(|e| e.to_string())?;
        let loaded = Dataset::load_csv(&path).map_err(|e| e.to_string())?;
        ensure(loaded.samples() == d.samples(), || {
            format!("CSV trial {trial} changed samples")
        })?;
    }

    for t in MfType::ALL {
        let cfg = AnfisConfig::new(t);
        let b = cfg.bounds();
        for _ in 0..200 {
            let flat: Vec<f64> = (0..b.len())
                .map(|k| rng.random_range(b.lower()[k]..=b.upper()[k]))
                .collect();
            let p = cfg.decode(&flat).map_err(|e| e.to_string())?;
            let again = cfg.decode(&p.encode()).map_err(|e| e.to_string())?;
            ensure(again == p, || format!("{t} decode(encode(p)) != p"))?;
        }
    }

    let data = synth::generate(
        &synth::preset_by_name("safarood").unwrap(),
        &SynthConfig {
            n: 50,
            noise_rel: 0.0,
            seed: 9,
        },
    )
    .map_err(|e| e.to_string())?;
    for fam in Family::ALL {
        let path = runs.out(0).join("models").join(format!("{}.json", fam.slug()));
        let m = ModelArtifact::load(&path).map_err(|e| e.to_string())?;
        let copy = dir.path().join("m.json");
        m.save(&copy).map_err(|e| e.to_string())?;
        let m2 = ModelArtifact::load(&copy).map_err(|e| e.to_string())?;
        ensure(m2 == m, || format!("{fam} artifact changed on save/load"))?;
        let (p1, p2) = (m.predict(&data).unwrap(), m2.predict(&data).unwrap());
        ensure(p1 == p2, || format!("{fam} predictions changed on save/load"))?;
    }
    Ok("normalizer within 1e-12, dataset CSV exact, ANFIS encode/decode lossless, model JSON exact".into())
}

fn main() -> ExitCode {
    let runs = run_default_grids();
    let with_runs = |f: fn(&GridRuns) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(format!("default grid run failed: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("structural reproduction", with_runs(structural)),
        ("metric oracle equivalence", metric_oracle()),
        ("kalinske oracle", kalinske()),
        ("anfis correctness", anfis()),
        ("optimizer sanity", optimizers()),
        ("learning signal", with_runs(learning_signal)),
        ("determinism", with_runs(determinism)),
        ("roundtrips", with_runs(roundtrips)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!(
        "{}/{} acceptance criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
