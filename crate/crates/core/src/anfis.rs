//! First-order Takagi–Sugeno fuzzy inference on a 7×7 grid partition of the
//! two normalized inputs.
//!
//! The flat parameter vector is the premise block (input 1 MFs 0..7, then
//! input 2 MFs 0..7, each MF contributing its parameters in declaration
//! order) followed by 49 consequent triples `(p, q, r)` in row-major rule
//! order: rule `k = 7·i + j` pairs MF `i` of input 1 with MF `j` of input 2
//! and outputs `p·x₁ + q·x₂ + r`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParamModel;
use crate::optimize::Bounds;

pub const MFS_PER_INPUT: usize = 7;
pub const INPUTS: usize = 2;
pub const RULE_COUNT: usize = MFS_PER_INPUT * MFS_PER_INPUT;
pub const CONSEQUENT_ARITY: usize = 3;

/// Smallest width/shape accepted after repair.
pub const MIN_WIDTH: f64 = 1e-3;

const CENTER_BOUNDS: (f64, f64) = (-0.2, 1.2);
const WIDTH_BOUNDS: (f64, f64) = (MIN_WIDTH, 1.0);
const GBELL_SHAPE_BOUNDS: (f64, f64) = (0.5, 5.0);
const CONSEQUENT_BOUNDS: (f64, f64) = (-5.0, 5.0);
/// Half-width of the premise jitter around the grid partition when seeding a population.
const PREMISE_JITTER: f64 = 0.04;
const CONSEQUENT_INIT: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfType {
    Triangular,
    GBell,
    Gaussian,
}

impl MfType {
    pub const ALL: [MfType; 3] = [MfType::Triangular, MfType::GBell, MfType::Gaussian];

    pub fn arity(self) -> usize {
        match self {
            MfType::Triangular | MfType::GBell => 3,
            MfType::Gaussian => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MfType::Triangular => "triangular",
            MfType::GBell => "gbell",
            MfType::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for MfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MfType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace([' ', '.', '_', '-'], "")
            .as_str()
        {
            "triangular" | "trimf" => Ok(MfType::Triangular),
            "gbell" | "gbellmf" | "bell" => Ok(MfType::GBell),
            "gaussian" | "gaussmf" => Ok(MfType::Gaussian),
            _ => Err(Error::InvalidArgument(format!(
                "unknown membership function type `{s}` (triangular, gbell, gaussian)"
            ))),
        }
    }
}

/// Parameters of one membership function, in normalized input units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MfParams {
    /// Feet `a`, `c` and peak `b`, with `a ≤ b ≤ c`.
    Triangular { a: f64, b: f64, c: f64 },
    /// `1 / (1 + |(x − c)/a|^(2b))`, `a, b > 0`.
    GBell { a: f64, b: f64, c: f64 },
    /// `exp(−(x − c)² / (2σ²))`, `σ > 0`.
    Gaussian { sigma: f64, c: f64 },
}

impl MfParams {
    pub fn mf_type(&self) -> MfType {
        match self {
            MfParams::Triangular { .. } => MfType::Triangular,
            MfParams::GBell { .. } => MfType::GBell,
            MfParams::Gaussian { .. } => MfType::Gaussian,
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            MfParams::Triangular { b, .. } => b,
            MfParams::GBell { c, .. } | MfParams::Gaussian { c, .. } => c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MfParams::Triangular { a, b, c } => [a, b, c].iter().all(|v| v.is_finite()) && a <= b && b <= c,
            MfParams::GBell { a, b, c } => [a, b, c].iter().all(|v| v.is_finite()) && a > 0.0 && b > 0.0,
            MfParams::Gaussian { sigma, c } => sigma.is_finite() && c.is_finite() && sigma > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMembership(format!("{self:?}")))
        }
    }

    /// Membership degree; assumes valid parameters.
    #[inline]
    fn degree(&self, x: f64) -> f64 {
        match *self {
            MfParams::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            MfParams::GBell { a, b, c } => 1.0 / (1.0 + ((x - c) / a).abs().powf(2.0 * b)),
            MfParams::Gaussian { sigma, c } => {
                let d = x - c;
                (-(d * d) / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    fn write_to(&self, out: &mut Vec<f64>) {
        match *self {
            MfParams::Triangular { a, b, c } | MfParams::GBell { a, b, c } => {
                out.extend_from_slice(&[a, b, c])
            }
            MfParams::Gaussian { sigma, c } => out.extend_from_slice(&[sigma, c]),
        }
    }

    fn read(t: MfType, v: &[f64]) -> Self {
        match t {
            MfType::Triangular => MfParams::Triangular {
                a: v[0],
                b: v[1],
                c: v[2],
            },
            MfType::GBell => MfParams::GBell {
                a: v[0],
                b: v[1],
                c: v[2],
            },
            MfType::Gaussian => MfParams::Gaussian { sigma: v[0], c: v[1] },
        }
    }

    /// Brings swarm-proposed values back into the valid region.
    fn repaired(self) -> Self {
        match self {
            MfParams::Triangular { a, b, c } => {
                let mut v = [a, b, c];
                v.sort_by(f64::total_cmp);
                MfParams::Triangular {
                    a: v[0],
                    b: v[1],
                    c: v[2],
                }
            }
            MfParams::GBell { a, b, c } => MfParams::GBell {
                a: a.max(MIN_WIDTH),
                b: b.max(MIN_WIDTH),
                c,
            },
            MfParams::Gaussian { sigma, c } => MfParams::Gaussian {
                sigma: sigma.max(MIN_WIDTH),
                c,
            },
        }
    }
}

/// Membership degree of `x`, in `[0, 1]`.
pub fn mf_eval(p: &MfParams, x: f64) -> Result<f64> {
    p.validate()?;
    Ok(p.degree(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnfisConfig {
    pub mf_type: MfType,
}

impl AnfisConfig {
    pub fn new(mf_type: MfType) -> Self {
        AnfisConfig { mf_type }
    }

    pub fn premise_len(&self) -> usize {
        INPUTS * MFS_PER_INPUT * self.mf_type.arity()
    }

    pub fn param_count(&self) -> usize {
        self.premise_len() + RULE_COUNT * CONSEQUENT_ARITY
    }

    /// Even partition of [0, 1] with zero consequents.
    pub fn grid_init(&self) -> AnfisParams {
        let step = 1.0 / (MFS_PER_INPUT - 1) as f64;
        let mf = |k: usize| {
            let c = k as f64 * step;
            match self.mf_type {
                MfType::Triangular => MfParams::Triangular {
                    a: c - step,
                    b: c,
                    c: c + step,
                },
                MfType::GBell => MfParams::GBell {
                    a: step / 2.0,
                    b: 2.0,
                    c,
                },
                MfType::Gaussian => MfParams::Gaussian {
                    sigma: step / (2.0 * 2f64.ln()).sqrt(),
                    c,
                },
            }
        };
        let row: [MfParams; MFS_PER_INPUT] = std::array::from_fn(mf);
        AnfisParams {
            premise: [row; INPUTS],
            consequents: vec![[0.0; CONSEQUENT_ARITY]; RULE_COUNT],
        }
    }

    /// Decodes a flat vector, repairing invalid premise parameters and sorting
    /// each input's MFs by center. Rule consequents follow their MFs through
    /// the sort, so the repaired system computes the same rules.
    pub fn decode(&self, flat: &[f64]) -> Result<AnfisParams> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: flat.len(),
            });
        }
        if let Some(bad) = flat.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMembership(format!("non-finite parameter {bad}")));
        }
        let arity = self.mf_type.arity();
        let (premise_flat, consequent_flat) = flat.split_at(self.premise_len());

        let mut order = [[0usize; MFS_PER_INPUT]; INPUTS];
        let mut premise = [[MfParams::Gaussian { sigma: 1.0, c: 0.0 }; MFS_PER_INPUT]; INPUTS];
        for input in 0..INPUTS {
            let raw: [MfParams; MFS_PER_INPUT] = std::array::from_fn(|k| {
                let at = (input * MFS_PER_INPUT + k) * arity;
                MfParams::read(self.mf_type, &premise_flat[at..at + arity]).repaired()
            });
            let mut idx: [usize; MFS_PER_INPUT] = std::array::from_fn(|k| k);
            idx.sort_by(|&i, &j| raw[i].center().total_cmp(&raw[j].center()));
            for (slot, &k) in idx.iter().enumerate() {
                premise[input][slot] = raw[k];
            }
            order[input] = idx;
        }

        let mut consequents = Vec::with_capacity(RULE_COUNT);
        for i in 0..MFS_PER_INPUT {
            for j in 0..MFS_PER_INPUT {
                let k = order[0][i] * MFS_PER_INPUT + order[1][j];
                let c = &consequent_flat[k * CONSEQUENT_ARITY..(k + 1) * CONSEQUENT_ARITY];
                consequents.push([c[0], c[1], c[2]]);
            }
        }
        Ok(AnfisParams { premise, consequents })
    }

    /// Convenience: decode then evaluate one input.
    pub fn forward(&self, flat: &[f64], x: [f64; 2]) -> Result<f64> {
        Ok(self.decode(flat)?.forward(x))
    }

    /// Search box: centers and triangle feet in [−0.2, 1.2], widths in
    /// [1e-3, 1], bell shape in [0.5, 5], consequents in [−5, 5].
    pub fn bounds(&self) -> Bounds {
        let mut lower = Vec::with_capacity(self.param_count());
        let mut upper = Vec::with_capacity(self.param_count());
        for _ in 0..INPUTS * MFS_PER_INPUT {
            let spans: &[(f64, f64)] = match self.mf_type {
                MfType::Triangular => &[CENTER_BOUNDS; 3],
                MfType::GBell => &[WIDTH_BOUNDS, GBELL_SHAPE_BOUNDS, CENTER_BOUNDS],
                MfType::Gaussian => &[WIDTH_BOUNDS, CENTER_BOUNDS],
            };
            for &(lo, hi) in spans {
                lower.push(lo);
                upper.push(hi);
            }
        }
        for _ in 0..RULE_COUNT * CONSEQUENT_ARITY {
            lower.push(CONSEQUENT_BOUNDS.0);
            upper.push(CONSEQUENT_BOUNDS.1);
        }
        Bounds::new(lower, upper).expect("static ANFIS bounds are well ordered")
    }

    /// Initialization box: premises jittered around [`grid_init`](Self::grid_init),
    /// consequents in [−1, 1]; clipped to [`bounds`](Self::bounds).
    pub fn init_bounds(&self) -> Bounds {
        let outer = self.bounds();
        let center = self.grid_init().encode();
        let premise_len = self.premise_len();
        let (mut lower, mut upper) = (Vec::new(), Vec::new());
        for (k, &c) in center.iter().enumerate() {
            let (lo, hi) = if k < premise_len {
                (c - PREMISE_JITTER, c + PREMISE_JITTER)
            } else {
                CONSEQUENT_INIT
            };
            lower.push(lo.max(outer.lower()[k]));
            upper.push(hi.min(outer.upper()[k]));
        }
        Bounds::new(lower, upper).expect("jitter box is non-degenerate")
    }
}

/// Decoded fuzzy system.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisParams {
    pub premise: [[MfParams; MFS_PER_INPUT]; INPUTS],
    pub consequents: Vec<[f64; CONSEQUENT_ARITY]>,
}

impl AnfisParams {
    pub fn mf_type(&self) -> MfType {
        self.premise[0][0].mf_type()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.mf_type();
        for mf in self.premise.iter().flatten() {
            if mf.mf_type() != t {
                return Err(Error::InvalidMembership("mixed membership function types".into()));
            }
            mf.validate()?;
        }
        if self.consequents.len() != RULE_COUNT {
            return Err(Error::LengthMismatch {
                expected: RULE_COUNT,
                actual: self.consequents.len(),
            });
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for mf in self.premise.iter().flatten() {
            mf.write_to(&mut out);
        }
        for c in &self.consequents {
            out.extend_from_slice(c);
        }
        out
    }

    /// Normalized product firing strengths in row-major rule order. When no
    /// rule fires at all the weights are uniform.
    pub fn firing_strengths(&self, x: [f64; 2]) -> [f64; RULE_COUNT] {
        let mu1: [f64; MFS_PER_INPUT] = std::array::from_fn(|k| self.premise[0][k].degree(x[0]));
        let mu2: [f64; MFS_PER_INPUT] = std::array::from_fn(|k| self.premise[1][k].degree(x[1]));
        let mut w = [0.0; RULE_COUNT];
        let mut total = 0.0;
        for i in 0..MFS_PER_INPUT {
            for j in 0..MFS_PER_INPUT {
                let v = mu1[i] * mu2[j];
                w[i * MFS_PER_INPUT + j] = v;
                total += v;
            }
        }
        if total > 0.0 {
            for v in &mut w {
                *v /= total;
            }
        } else {
            w = [1.0 / RULE_COUNT as f64; RULE_COUNT];
        }
        w
    }

    pub fn forward(&self, x: [f64; 2]) -> f64 {
        let w = self.firing_strengths(x);
        w.iter()
            .zip(&self.consequents)
            .map(|(wk, [p, q, r])| wk * (p * x[0] + q * x[1] + r))
            .sum()
    }
}

impl ParamModel for AnfisConfig {
    fn param_count(&self) -> usize {
        AnfisConfig::param_count(self)
    }

    fn predict_normalized(&self, params: &[f64], inputs: &[[f64; 2]], out: &mut Vec<f64>) -> Result<()> {
        let system = self.decode(params)?;
        out.clear();
        out.extend(inputs.iter().map(|&x| system.forward(x)));
        Ok(())
    }
}
