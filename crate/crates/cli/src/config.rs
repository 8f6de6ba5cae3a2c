//! TOML scenario files.
//!
//! Complex numbers are `[re, im]` pairs; matrices are lists of rows of such
//! pairs. Every section except `[time]` is optional and only read by the
//! subcommands that need it.

use serde::Deserialize;

use oneparticle::linalg::{c, ComplexMatrix, ComplexVector};

use crate::error::CliError;

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Simulate,
    Moments,
    Info,
    BellCurve,
    Verify,
    Bench,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Simulate => "simulate",
            ScenarioKind::Moments => "moments",
            ScenarioKind::Info => "info",
            ScenarioKind::BellCurve => "bell-curve",
            ScenarioKind::Verify => "verify",
            ScenarioKind::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticsKind {
    #[default]
    Boson,
    Fermion,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub statistics: StatisticsKind,
    pub time: Option<TimeGrid>,
    pub model: Option<ModelSpec>,
    pub initial: Option<InitialSpec>,
    pub moments_initial: Option<MomentsSpec>,
    pub partition: Option<PartitionSpec>,
    pub bell: Option<BellSpec>,
    pub verify: Option<VerifySpec>,
    pub bench: Option<BenchSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.samples < 2 {
            return Err(CliError::Validation(format!(
                "time grid needs at least 2 samples, got {}",
                self.samples
            )));
        }
        if !(self.start >= 0.0 && self.end > self.start && self.end.is_finite()) {
            return Err(CliError::Validation(format!(
                "time grid [{}, {}] must satisfy 0 <= start < end",
                self.start, self.end
            )));
        }
        let step = (self.end - self.start) / (self.samples - 1) as f64;
        Ok((0..self.samples)
            .map(|k| {
                if k + 1 == self.samples {
                    self.end
                } else {
                    self.start + step * k as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Constant,
    Homogeneous,
    Piecewise,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaPreset {
    Constant,
    Sinusoidal,
}

/// `gamma(t) = base + amplitude * sin(frequency * t + phase)`; the constant
/// preset ignores everything but `base`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSpec {
    pub preset: GammaPreset,
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: f64,
    pub hamiltonian: Option<Vec<Vec<Pair>>>,
    #[serde(default)]
    pub decay: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Missing means `H = 0`.
    pub hamiltonian: Option<Vec<Vec<Pair>>>,
    #[serde(default)]
    pub decay: Vec<Vec<Pair>>,
    pub gamma: Option<GammaSpec>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
    pub decay_count: Option<usize>,
    pub h_scale: Option<f64>,
    pub f_scale: Option<f64>,
    #[serde(default)]
    pub modulated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Vacuum,
    Excited,
    Pure,
    Density,
    Strict,
    Random,
    RandomStrict,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub mode: Option<usize>,
    pub vector: Option<Vec<Pair>>,
    pub rho00: Option<f64>,
    pub psi: Option<Vec<Pair>>,
    pub r: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSpec {
    pub m: Option<Vec<Pair>>,
    pub y: Option<Vec<Vec<Pair>>>,
    pub z: Option<Vec<Vec<Pair>>>,
    #[serde(default)]
    pub method: MethodKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    #[default]
    Propagator,
    Ode,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellSpec {
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub models: Option<usize>,
    pub fermion_modes: Option<usize>,
    pub boson_modes: Option<usize>,
    pub boson_cutoff: Option<usize>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub sizes: Option<Vec<usize>>,
    pub t: Option<f64>,
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
    pub svg_x: Option<String>,
    pub svg_y: Option<String>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))
    }
}

pub fn vector(pairs: &[Pair], what: &str, len: usize) -> Result<ComplexVector, CliError> {
    if pairs.len() != len {
        return Err(CliError::Validation(format!(
            "{what} has {} entries, expected {len}",
            pairs.len()
        )));
    }
    Ok(ComplexVector::from_iterator(
        len,
        pairs.iter().map(|p| c(p[0], p[1])),
    ))
}

pub fn matrix(rows: &[Vec<Pair>], what: &str, n: usize) -> Result<ComplexMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Validation(format!("{what} must be {n}x{n}")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ScenarioConfig::parse(
            r#"
            n = 2
            [time]
            end = 1.0
            samples = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.n, Some(2));
        assert_eq!(cfg.time.unwrap().points().unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        assert!(matches!(
            ScenarioConfig::parse("n = 2\nbogus = 1\n"),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse("n = [1"),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn grid_validation() {
        let bad = TimeGrid {
            start: 1.0,
            end: 0.5,
            samples: 10,
        };
        assert!(matches!(bad.points(), Err(CliError::Validation(_))));
        let short = TimeGrid {
            start: 0.0,
            end: 1.0,
            samples: 1,
        };
        assert!(short.points().is_err());
    }

    #[test]
    fn matrices_and_vectors() {
        let m = matrix(
            &[vec![[1.0, 0.0], [0.0, 1.0]], vec![[0.0, -1.0], [2.0, 0.0]]],
            "H",
            2,
        )
        .unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 1.0));
        assert!(matrix(&[vec![[1.0, 0.0]]], "H", 2).is_err());
        assert!(vector(&[[1.0, 0.0]], "psi", 2).is_err());
    }
}
