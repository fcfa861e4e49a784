//! Global-best particle swarm and real-coded genetic algorithm over a
//! bounded box.
//!
//! Both optimizers draw all random numbers from one ChaCha stream in a fixed
//! order and evaluate each population in parallel, so results depend only on
//! the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::model::ParamModel;

/// Per-dimension box with `lower < upper` everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "bounds have {} lower and {} upper entries",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("bounds are empty".into()));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "dimension {d}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(dims: usize, lower: f64, upper: f64) -> Result<Self> {
        Bounds::new(vec![lower; dims], vec![upper; dims])
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    fn contains_box(&self, inner: &Bounds) -> bool {
        inner.len() == self.len()
            && inner
                .lower
                .iter()
                .zip(&inner.upper)
                .zip(self.lower.iter().zip(&self.upper))
                .all(|((ilo, ihi), (lo, hi))| lo <= ilo && ihi <= hi)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| rng.random_range(lo..hi))
            .collect()
    }

    #[inline]
    fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub pop_size: usize,
    pub max_iters: usize,
    /// Inertia weight.
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed per dimension, as a fraction of that dimension's range.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            pop_size: 50,
            max_iters: 300,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp: 0.5,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("pso: {m}")));
        if self.pop_size < 2 {
            return bad("pop_size must be >= 2");
        }
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return bad("inertia must lie in [0, 1]");
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0)
            || !self.cognitive.is_finite()
            || !self.social.is_finite()
        {
            return bad("cognitive and social coefficients must be finite and >= 0");
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp.is_finite()) {
            return bad("velocity_clamp must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub pop_size: usize,
    /// Number of generations.
    pub max_iters: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / dims`.
    pub mutation_rate: Option<f64>,
    /// Mutation standard deviation as a fraction of each dimension's range.
    pub mutation_scale: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    /// BLX-α extension factor.
    pub blx_alpha: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 50,
            max_iters: 300,
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_scale: 0.1,
            tournament_size: 3,
            elitism_count: 2,
            blx_alpha: 0.5,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("ga: {m}")));
        if self.pop_size < 2 {
            return bad("pop_size must be >= 2");
        }
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1");
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.crossover_rate) || !self.mutation_rate.is_none_or(rate_ok) {
            return bad("rates must lie in [0, 1]");
        }
        if !(self.mutation_scale >= 0.0 && self.mutation_scale.is_finite()) {
            return bad("mutation_scale must be finite and >= 0");
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be >= 1");
        }
        // elitism_count == pop_size is the frozen-population edge case
        if self.elitism_count < 1 || self.elitism_count > self.pop_size {
            return bad("elitism_count must lie in [1, pop_size]");
        }
        if !(self.blx_alpha >= 0.0 && self.blx_alpha.is_finite()) {
            return bad("blx_alpha must be finite and >= 0");
        }
        Ok(())
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness of the initial population, before any update.
    pub initial_best_fitness: f64,
    /// Best-so-far fitness after each iteration; non-increasing.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub seed: u64,
}

impl OptResult {
    /// `iteration,best_fitness`; iteration 0 is the initial population.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,best_fitness\n");
        s.push_str(&format!("0,{}\n", self.initial_best_fitness));
        for (i, f) in self.trace.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, f));
        }
        s
    }
}

fn evaluate<F>(fitness: &F, population: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = population.par_iter().map(|x| fitness(x)).collect();
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteFitness {
            value: values[i],
            position: population[i].clone(),
        }),
        None => Ok(values),
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn check_init(bounds: &Bounds, init: &Bounds) -> Result<()> {
    if !bounds.contains_box(init) {
        return Err(Error::InvalidArgument(
            "initialization box must lie inside the search bounds".into(),
        ));
    }
    Ok(())
}

/// Particle swarm with particles initialized uniformly over `bounds`.
pub fn pso_run<F>(fitness: F, bounds: &Bounds, cfg: &PsoConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pso_run_with_init(fitness, bounds, bounds, cfg)
}

/// Particle swarm whose initial positions are drawn from `init ⊆ bounds`.
///
/// Synchronous global-best update: all particles move using the global best
/// of the previous iteration, then the swarm is evaluated and personal and
/// global bests are updated in index order. Positions leaving the box are
/// clamped and the offending velocity component zeroed.
pub fn pso_run_with_init<F>(fitness: F, bounds: &Bounds, init: &Bounds, cfg: &PsoConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    check_init(bounds, init)?;
    let dims = bounds.len();
    let vmax: Vec<f64> = (0..dims).map(|d| cfg.velocity_clamp * bounds.range(d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut positions: Vec<Vec<f64>> = (0..cfg.pop_size).map(|_| init.sample(&mut rng)).collect();
    let mut velocities: Vec<Vec<f64>> = (0..cfg.pop_size)
        .map(|_| vmax.iter().map(|&m| rng.random_range(-m..m)).collect())
        .collect();

    let values = evaluate(&fitness, &positions)?;
    let mut evaluations = cfg.pop_size;
    let mut personal = positions.clone();
    let mut personal_f = values;
    let g = argmin(&personal_f);
    let mut global = personal[g].clone();
    let mut global_f = personal_f[g];
    let initial_best_fitness = global_f;
    let mut trace = Vec::with_capacity(cfg.max_iters);

    for _ in 0..cfg.max_iters {
        for i in 0..cfg.pop_size {
            let (x, v) = (&mut positions[i], &mut velocities[i]);
            for d in 0..dims {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let mut speed = cfg.inertia * v[d]
                    + cfg.cognitive * r1 * (personal[i][d] - x[d])
                    + cfg.social * r2 * (global[d] - x[d]);
                speed = speed.clamp(-vmax[d], vmax[d]);
                let mut next = x[d] + speed;
                if next < bounds.lower[d] {
                    next = bounds.lower[d];
                    speed = 0.0;
                } else if next > bounds.upper[d] {
                    next = bounds.upper[d];
                    speed = 0.0;
                }
                x[d] = next;
                v[d] = speed;
            }
        }
        let values = evaluate(&fitness, &positions)?;
        evaluations += cfg.pop_size;
        for (i, f) in values.into_iter().enumerate() {
            if f < personal_f[i] {
                personal_f[i] = f;
                personal[i].clone_from(&positions[i]);
                if f < global_f {
                    global_f = f;
                    global.clone_from(&positions[i]);
                }
            }
        }
        trace.push(global_f);
    }

    Ok(OptResult {
        best_position: global,
        best_fitness: global_f,
        initial_best_fitness,
        trace,
        evaluations,
        seed: cfg.seed,
    })
}

/// Genetic algorithm with individuals initialized uniformly over `bounds`.
pub fn ga_run<F>(fitness: F, bounds: &Bounds, cfg: &GaConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    ga_run_with_init(fitness, bounds, bounds, cfg)
}

/// Generational GA: elitism, k-tournament selection, BLX-α crossover and
/// per-gene Gaussian mutation, all clamped to `bounds`. Every generation
/// evaluates the full population, elites included.
pub fn ga_run_with_init<F>(fitness: F, bounds: &Bounds, init: &Bounds, cfg: &GaConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    check_init(bounds, init)?;
    let dims = bounds.len();
    let mutation_rate = cfg.mutation_rate.unwrap_or(1.0 / dims as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut population: Vec<Vec<f64>> = (0..cfg.pop_size).map(|_| init.sample(&mut rng)).collect();
    let mut values = evaluate(&fitness, &population)?;
    let mut evaluations = cfg.pop_size;
    let b = argmin(&values);
    let mut best = population[b].clone();
    let mut best_f = values[b];
    let initial_best_fitness = best_f;
    let mut trace = Vec::with_capacity(cfg.max_iters);

    let clamp = |d: usize, v: f64| v.clamp(bounds.lower[d], bounds.upper[d]);

    for _ in 0..cfg.max_iters {
        let mut ranked: Vec<usize> = (0..cfg.pop_size).collect();
        ranked.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        let mut next: Vec<Vec<f64>> = ranked[..cfg.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();

        while next.len() < cfg.pop_size {
            let p1 = tournament(&values, cfg.tournament_size, &mut rng);
            let p2 = tournament(&values, cfg.tournament_size, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < cfg.crossover_rate {
                let mut blend = || -> Vec<f64> {
                    (0..dims)
                        .map(|d| {
                            let (a, b) = (population[p1][d], population[p2][d]);
                            let (lo, hi) = (a.min(b), a.max(b));
                            let spread = cfg.blx_alpha * (hi - lo);
                            if hi - lo > 0.0 {
                                clamp(d, rng.random_range(lo - spread..=hi + spread))
                            } else {
                                lo
                            }
                        })
                        .collect()
                };
                let first = blend();
                (first, blend())
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            for child in [&mut c1, &mut c2] {
                for (d, gene) in child.iter_mut().enumerate() {
                    if rng.random::<f64>() < mutation_rate {
                        let z: f64 = rng.sample(StandardNormal);
                        *gene = clamp(d, *gene + z * cfg.mutation_scale * bounds.range(d));
                    }
                }
            }
            next.push(c1);
            if next.len() < cfg.pop_size {
                next.push(c2);
            }
        }

        population = next;
        values = evaluate(&fitness, &population)?;
        evaluations += cfg.pop_size;
        let g = argmin(&values);
        if values[g] < best_f {
            best_f = values[g];
            best.clone_from(&population[g]);
        }
        trace.push(best_f);
    }

    Ok(OptResult {
        best_position: best,
        best_fitness: best_f,
        initial_best_fitness,
        trace,
        evaluations,
        seed: cfg.seed,
    })
}

fn tournament(values: &[f64], k: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..values.len());
    for _ in 1..k {
        let c = rng.random_range(0..values.len());
        if values[c] < values[winner] {
            winner = c;
        }
    }
    winner
}

/// Mean squared error, in normalized units, of a parametric model over a
/// training set.
pub struct MseFitness<'a, M> {
    model: &'a M,
    inputs: Vec<[f64; 2]>,
    targets: Vec<f64>,
}

/// Builds the training-set MSE objective for `model`.
pub fn fitness_mse<'a, M: ParamModel>(model: &'a M, train: &Dataset, norm: &Normalizer) -> MseFitness<'a, M> {
    let normalized = norm.apply(train);
    MseFitness {
        model,
        inputs: normalized.samples.iter().map(|s| s.features()).collect(),
        targets: normalized.samples.iter().map(|s| s.air_velocity).collect(),
    }
}

impl<M: ParamModel> MseFitness<'_, M> {
    pub fn evaluate(&self, params: &[f64]) -> Result<f64> {
        let mut out = Vec::with_capacity(self.inputs.len());
        self.model.predict_normalized(params, &self.inputs, &mut out)?;
        let sum: f64 = out
            .iter()
            .zip(&self.targets)
            .map(|(p, t)| (t - p) * (t - p))
            .sum();
        Ok(sum / self.targets.len() as f64)
    }

    /// The objective as a plain function; model errors surface as NaN and
    /// are reported by the optimizer as a non-finite fitness.
    pub fn as_fn(&self) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |p| self.evaluate(p).unwrap_or(f64::NAN)
    }
}
