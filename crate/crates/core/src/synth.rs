//! Synthetic air-demand data from Kalinske's aeration ratio
//! `β = Q_air / Q_water = 0.0066 (Fr − 1)^1.4`, sampled over a dam's
//! operating envelope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};

/// Nominal vent area used to turn an air volume rate into an air velocity.
pub const VENT_AREA_M2: f64 = 0.25;

pub const STANDARD_GRAVITY: f64 = 9.81;

const KALINSKE_COEFFICIENT: f64 = 0.0066;
const KALINSKE_EXPONENT: f64 = 1.4;

/// An inclusive (min, max) pair in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Span { min, max }
    }
}

fn default_g() -> f64 {
    STANDARD_GRAVITY
}

/// Operating envelope and gate geometry of one dam's bottom outlet.
///
/// Heads and air flows are optional because the source table leaves some
/// cells blank. The generator only needs the water flow and opening ranges
/// plus the gate section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamSpec {
    pub name: String,
    /// Water volume rate bounds, m³/s.
    pub q_min: f64,
    pub q_max: f64,
    /// Air volume rate bounds, m³/s (reference only).
    #[serde(default)]
    pub air_q_min: Option<f64>,
    #[serde(default)]
    pub air_q_max: Option<f64>,
    #[serde(default)]
    pub head_min: Option<f64>,
    #[serde(default)]
    pub head_normal: Option<f64>,
    #[serde(default)]
    pub head_max: Option<f64>,
    /// Gate section height H, m.
    pub gate_height: f64,
    /// Gate section width W, m.
    pub gate_width: f64,
    /// Downstream conduit length L, m.
    pub downstream_length: Span,
    /// Gate opening bounds, percent.
    pub opening_min: f64,
    pub opening_max: f64,
    #[serde(default = "default_g")]
    pub g: f64,
}

impl DamSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("dam `{}`: {msg}", self.name)));
        let finite = [
            self.q_min,
            self.q_max,
            self.gate_height,
            self.gate_width,
            self.opening_min,
            self.opening_max,
            self.g,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite field".into());
        }
        if !(self.q_max > self.q_min && self.q_min > 0.0) {
            return bad(format!(
                "need q_max > q_min > 0, got ({}, {})",
                self.q_min, self.q_max
            ));
        }
        if !(self.gate_height > 0.0 && self.gate_width > 0.0) {
            return bad("gate dimensions must be positive".into());
        }
        if !(self.opening_min > 0.0 && self.opening_min <= self.opening_max && self.opening_max <= 100.0) {
            return bad(format!(
                "need 0 < opening_min <= opening_max <= 100, got ({}, {})",
                self.opening_min, self.opening_max
            ));
        }
        if self.g <= 0.0 {
            return bad("g must be positive".into());
        }
        Ok(())
    }

    /// Full-opening exit cross-section A₀ = H·W, m².
    pub fn full_area(&self) -> f64 {
        self.gate_height * self.gate_width
    }

    /// Exit cross-section A at a given opening, m².
    pub fn area_at(&self, opening_pct: f64) -> f64 {
        self.full_area() * opening_pct / 100.0
    }
}

#[allow(clippy::too_many_arguments)]
fn preset(
    name: &str,
    water: (f64, f64),
    air: (f64, f64),
    head: (Option<f64>, Option<f64>, Option<f64>),
    length: Span,
    opening: (f64, f64),
    gate: (f64, f64),
) -> DamSpec {
    DamSpec {
        name: name.to_string(),
        q_min: water.0,
        q_max: water.1,
        air_q_min: Some(air.0),
        air_q_max: Some(air.1),
        head_min: head.0,
        head_normal: head.1,
        head_max: head.2,
        gate_height: gate.0,
        gate_width: gate.1,
        downstream_length: length,
        opening_min: opening.0,
        opening_max: opening.1,
        g: STANDARD_GRAVITY,
    }
}

/// The six studied dams.
pub fn presets() -> Vec<DamSpec> {
    vec![
        preset(
            "safarood",
            (8.7, 48.2),
            (6.8, 18.9),
            (None, None, Some(59.4)),
            Span::new(12.0, 60.0),
            (20.0, 100.0),
            (1.47, 1.19),
        ),
        preset(
            "balarood",
            (2.2, 44.8),
            (5.2, 18.0),
            (None, Some(58.0), Some(69.0)),
            Span::new(40.0, 40.0),
            (10.0, 100.0),
            (1.39, 1.17),
        ),
        preset(
            "sardasht",
            (14.1, 225.0),
            (15.7, 54.0),
            (Some(42.3), Some(87.2), Some(95.2)),
            Span::new(60.0, 60.0),
            (10.0, 100.0),
            (2.80, 2.23),
        ),
        preset(
            "silve",
            (4.6, 96.3),
            (40.0, 210.3),
            (Some(27.6), None, Some(56.4)),
            Span::new(40.0, 40.0),
            (10.0, 100.0),
            (2.00, 1.89),
        ),
        preset(
            "talvar",
            (15.1, 179.4),
            (88.0, 152.7),
            (None, Some(56.5), None),
            Span::new(60.0, 60.0),
            (10.0, 100.0),
            (3.12, 2.14),
        ),
        preset(
            "kucheri",
            (27.7, 243.2),
            (27.2, 71.7),
            (None, Some(64.0), None),
            Span::new(30.0, 30.0),
            (10.0, 100.0),
            (2.79, 2.29),
        ),
    ]
}

pub fn preset_by_name(name: &str) -> Result<DamSpec> {
    let key = name.trim().to_ascii_lowercase();
    presets()
        .into_iter()
        .find(|d| d.name == key)
        .ok_or_else(|| Error::UnknownDam(name.to_string()))
}

/// Air/water volume ratio from the Froude number. Zero at or below Fr = 1.
pub fn kalinske_beta(fr: f64) -> Result<f64> {
    if !fr.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Froude number {fr} is not finite"
        )));
    }
    if fr <= 1.0 {
        return Ok(0.0);
    }
    Ok(KALINSKE_COEFFICIENT * (fr - 1.0).powf(KALINSKE_EXPONENT))
}

/// Froude number of the jet leaving the gate, using the opened gate height
/// as the hydraulic depth.
pub fn froude_at_gate(q: f64, spec: &DamSpec, opening_pct: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidArgument(format!("flow {q} must be positive")));
    }
    if !(opening_pct >= spec.opening_min && opening_pct <= spec.opening_max) {
        return Err(Error::InvalidArgument(format!(
            "opening {opening_pct}% outside [{}, {}] for dam `{}`",
            spec.opening_min, spec.opening_max, spec.name
        )));
    }
    let depth = spec.gate_height * opening_pct / 100.0;
    let velocity = q / (spec.gate_width * depth);
    Ok(velocity / (spec.g * depth).sqrt())
}

/// Noise-free air velocity (m/s) through the nominal vent.
pub fn air_velocity(q: f64, spec: &DamSpec, opening_pct: f64) -> Result<f64> {
    let beta = kalinske_beta(froude_at_gate(q, spec, opening_pct)?)?;
    Ok(beta * q / VENT_AREA_M2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    /// Relative standard deviation of multiplicative Gaussian noise on the target.
    pub noise_rel: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if !(self.noise_rel.is_finite() && self.noise_rel >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise_rel {} must be finite and >= 0",
                self.noise_rel
            )));
        }
        Ok(())
    }
}

/// Draws `cfg.n` samples uniformly over the dam's (flow, opening) rectangle.
pub fn generate(spec: &DamSpec, cfg: &SynthConfig) -> Result<Dataset> {
    spec.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_rel).map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let mut samples = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let q = rng.random_range(spec.q_min..=spec.q_max);
        let opening = rng.random_range(spec.opening_min..=spec.opening_max);
        let eps = noise.sample(&mut rng);
        let clean = air_velocity(q, spec, opening)?;
        let target = (clean * (1.0 + eps)).max(0.0);
        samples.push(Sample::new(q, opening, target)?);
    }
    Dataset::new(
        samples,
        format!(
            "synth:{};n={};noise_rel={};seed={};vent_area_m2={}",
            spec.name, cfg.n, cfg.noise_rel, cfg.seed, VENT_AREA_M2
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_gate() -> DamSpec {
        DamSpec {
            name: "test".into(),
            q_min: 1.0,
            q_max: 20.0,
            air_q_min: None,
            air_q_max: None,
            head_min: None,
            head_normal: None,
            head_max: None,
            gate_height: 2.0,
            gate_width: 2.0,
            downstream_length: Span::new(10.0, 10.0),
            opening_min: 10.0,
            opening_max: 100.0,
            g: STANDARD_GRAVITY,
        }
    }

    #[test]
    fn beta_reference_points() {
        assert_eq!(kalinske_beta(1.0).unwrap(), 0.0);
        assert_eq!(kalinske_beta(2.0).unwrap(), 0.0066);
        // 0.0066 * 10^1.4 evaluated independently.
        assert!((kalinske_beta(11.0).unwrap() - 0.165_784_504_479_632_25).abs() < 1e-12);
        assert_eq!(kalinske_beta(0.3).unwrap(), 0.0);
        assert_eq!(kalinske_beta(-4.0).unwrap(), 0.0);
        assert!(kalinske_beta(f64::NAN).is_err());
        assert!(kalinske_beta(f64::INFINITY).is_err());
    }

    #[test]
    fn froude_examples() {
        let spec = square_gate();
        let fr = froude_at_gate(6.264, &spec, 50.0).unwrap();
        assert!((fr - 0.999_970_641_770_882).abs() < 1e-12);

        // q chosen so that V = sqrt(g y) exactly
        let y = 1.0;
        let q = (STANDARD_GRAVITY * y).sqrt() * spec.gate_width * y;
        assert!((froude_at_gate(q, &spec, 50.0).unwrap() - 1.0).abs() < 1e-15);

        let a = froude_at_gate(3.0, &spec, 40.0).unwrap();
        let b = froude_at_gate(6.0, &spec, 40.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn froude_preconditions() {
        let spec = square_gate();
        assert!(froude_at_gate(0.0, &spec, 50.0).is_err());
        assert!(froude_at_gate(1.0, &spec, 5.0).is_err());
        assert!(froude_at_gate(1.0, &spec, 101.0).is_err());
    }

    #[test]
    fn presets_are_valid() {
        let all = presets();
        assert_eq!(all.len(), 6);
        for d in &all {
            d.validate().unwrap();
        }
        let s = preset_by_name("Safarood").unwrap();
        assert_eq!((s.q_min, s.q_max), (8.7, 48.2));
        assert_eq!((s.opening_min, s.opening_max), (20.0, 100.0));
        assert_eq!((s.gate_height, s.gate_width), (1.47, 1.19));
        assert_eq!(s.head_max, Some(59.4));
        assert_eq!(s.head_normal, None);
        assert!(preset_by_name("hoover").is_err());
    }

    #[test]
    fn noiseless_targets_match_closed_form() {
        let spec = preset_by_name("safarood").unwrap();
        let d = generate(
            &spec,
            &SynthConfig {
                n: 50,
                noise_rel: 0.0,
                seed: 3,
            },
        )
        .unwrap();
        for s in d.samples() {
            let fr = s.flow()
                / (spec.gate_width * spec.gate_height * s.opening() / 100.0)
                / (STANDARD_GRAVITY * spec.gate_height * s.opening() / 100.0).sqrt();
            let expected = if fr > 1.0 {
                0.0066 * (fr - 1.0).powf(1.4) * s.flow() / 0.25
            } else {
                0.0
            };
            assert!((s.air_velocity() - expected).abs() <= 1e-12 * expected.max(1.0));
        }
        assert!(d.source_tag().contains("vent_area_m2=0.25"));
    }

    #[test]
    fn safarood_envelope() {
        let spec = preset_by_name("safarood").unwrap();
        let d = generate(
            &spec,
            &SynthConfig {
                n: 110,
                noise_rel: 0.1,
                seed: 7,
            },
        )
        .unwrap();
        assert_eq!(d.len(), 110);
        for s in d.samples() {
            assert!((8.7..=48.2).contains(&s.flow()));
            assert!((20.0..=100.0).contains(&s.opening()));
            assert!(s.air_velocity() >= 0.0);
        }
        let again = generate(
            &spec,
            &SynthConfig {
                n: 110,
                noise_rel: 0.1,
                seed: 7,
            },
        )
        .unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn rejects_bad_configs() {
        let spec = square_gate();
        assert!(generate(
            &spec,
            &SynthConfig {
                n: 0,
                noise_rel: 0.0,
                seed: 1
            }
        )
        .is_err());
        assert!(generate(
            &spec,
            &SynthConfig {
                n: 5,
                noise_rel: -0.1,
                seed: 1
            }
        )
        .is_err());
        let mut bad = spec.clone();
        bad.q_min = bad.q_max;
        assert!(generate(
            &bad,
            &SynthConfig {
                n: 5,
                noise_rel: 0.0,
                seed: 1
            }
        )
        .is_err());
    }
}
