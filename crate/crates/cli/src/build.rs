//! Turns a parsed config into library objects.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oneparticle::dynamics::GKSLModel;
use oneparticle::linalg::{ComplexMatrix, ComplexVector};
use oneparticle::moments::{MomentMethod, MomentState, Statistics};
use oneparticle::random;
use oneparticle::reduction::IndexSet;
use oneparticle::{OneParticlePureState, OneParticleState};

use crate::config::{
    matrix, vector, GammaPreset, GammaSpec, InitialKind, InitialSpec, MethodKind, ModelKind,
    ModelSpec, ScenarioConfig, StatisticsKind,
};
use crate::error::CliError;

/// Samples of `A(t)` checked on the integration window before a run.
pub const WINDOW_SAMPLES: usize = 65;

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn mode_count(cfg: &ScenarioConfig) -> Result<usize, CliError> {
    match cfg.n {
        Some(n) if n >= 1 => Ok(n),
        Some(n) => Err(validation(format!("n must be positive, got {n}"))),
        None => Err(validation("missing mode count n")),
    }
}

/// Seed from the command line, else from the config.
pub fn seed(cfg: &ScenarioConfig, flag: Option<u64>) -> Option<u64> {
    flag.or(cfg.seed)
}

pub fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| validation(format!("{what} is randomized and needs a seed")))
}

pub fn gamma_fn(spec: &GammaSpec) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>, CliError> {
    let GammaSpec {
        preset,
        base,
        amplitude,
        frequency,
        phase,
    } = *spec;
    if ![base, amplitude, frequency, phase]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(validation("gamma parameters must be finite"));
    }
    match preset {
        GammaPreset::Constant => {
            if base < 0.0 {
                return Err(validation(format!("constant gamma {base} is negative")));
            }
            Ok(Arc::new(move |_| base))
        }
        GammaPreset::Sinusoidal => {
            if base < amplitude.abs() {
                return Err(validation(format!(
                    "sinusoidal gamma {base} + {amplitude} sin(...) goes negative"
                )));
            }
            Ok(Arc::new(move |t: f64| {
                base + amplitude * (frequency * t + phase).sin()
            }))
        }
    }
}

fn hamiltonian(rows: &Option<Vec<Vec<[f64; 2]>>>, n: usize) -> Result<ComplexMatrix, CliError> {
    match rows {
        Some(rows) => matrix(rows, "hamiltonian", n),
        None => Ok(ComplexMatrix::zeros(n, n)),
    }
}

fn decay(vectors: &[Vec<[f64; 2]>], n: usize) -> Result<Vec<ComplexVector>, CliError> {
    vectors
        .iter()
        .map(|v| vector(v, "decay vector", n))
        .collect()
}

pub fn model(
    spec: &ModelSpec,
    n: usize,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<GKSLModel, CliError> {
    let built = match spec.kind {
        ModelKind::Constant => {
            GKSLModel::constant(hamiltonian(&spec.hamiltonian, n)?, decay(&spec.decay, n)?)?
        }
        ModelKind::Homogeneous => {
            let g = spec
                .gamma
                .as_ref()
                .ok_or_else(|| validation("homogeneous model needs [model.gamma]"))?;
            let g = gamma_fn(g)?;
            GKSLModel::homogeneous(hamiltonian(&spec.hamiltonian, n)?, move |t| g(t))?
        }
        ModelKind::Piecewise => {
            if spec.segments.is_empty() {
                return Err(validation("piecewise model needs [[model.segments]]"));
            }
            let starts = spec.segments.iter().map(|s| s.start).collect();
            let segments = spec
                .segments
                .iter()
                .map(|s| Ok((hamiltonian(&s.hamiltonian, n)?, decay(&s.decay, n)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            GKSLModel::piecewise(starts, segments)?
        }
        ModelKind::Random => {
            let rng = rng.ok_or_else(|| validation("random model needs a seed"))?;
            let k = spec.decay_count.unwrap_or(n);
            let h_scale = spec.h_scale.unwrap_or(1.0);
            let f_scale = spec.f_scale.unwrap_or(1.0);
            if !(h_scale >= 0.0 && f_scale >= 0.0 && h_scale.is_finite() && f_scale.is_finite()) {
                return Err(validation(
                    "random model scales must be finite and nonnegative",
                ));
            }
            if spec.modulated {
                random::modulated_model(n, k, h_scale, f_scale, rng)
            } else {
                random::constant_model(n, k, h_scale, f_scale, rng)
            }
        }
    };
    Ok(built)
}

pub fn model_is_random(cfg: &ScenarioConfig) -> bool {
    cfg.model
        .as_ref()
        .is_some_and(|m| m.kind == ModelKind::Random)
}

pub fn initial_is_random(cfg: &ScenarioConfig) -> bool {
    cfg.initial
        .as_ref()
        .is_some_and(|i| matches!(i.kind, InitialKind::Random | InitialKind::RandomStrict))
}

pub fn initial_state(
    spec: &InitialSpec,
    n: usize,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<OneParticleState, CliError> {
    let state = match spec.kind {
        InitialKind::Vacuum => OneParticleState::vacuum(n),
        InitialKind::Excited => OneParticleState::excited(
            n,
            spec.mode
                .ok_or_else(|| validation("excited start needs mode"))?,
        )?,
        InitialKind::Pure => {
            let v = spec
                .vector
                .as_ref()
                .ok_or_else(|| validation("pure start needs vector"))?;
            let v = vector(v, "vector", n + 1)?;
            OneParticleState::from_pure(&OneParticlePureState::from_vector(&v)?)
        }
        InitialKind::Density => {
            let r = spec
                .r
                .as_ref()
                .ok_or_else(|| validation("density start needs r"))?;
            let r = matrix(r, "r", n)?;
            let psi = match &spec.psi {
                Some(p) => vector(p, "psi", n)?,
                None => ComplexVector::zeros(n),
            };
            let rho00 = spec
                .rho00
                .unwrap_or_else(|| 1.0 - oneparticle::linalg::trace(&r).re);
            OneParticleState::new(rho00, psi, r)?
        }
        InitialKind::Strict => {
            let r = spec
                .r
                .as_ref()
                .ok_or_else(|| validation("strict start needs r"))?;
            OneParticleState::strictly(matrix(r, "r", n)?)?
        }
        InitialKind::Random => random::state(
            n,
            rng.ok_or_else(|| validation("random start needs a seed"))?,
        ),
        InitialKind::RandomStrict => random::strict_state(
            n,
            rng.ok_or_else(|| validation("random start needs a seed"))?,
        ),
    };
    Ok(state)
}

pub fn statistics(cfg: &ScenarioConfig) -> Statistics {
    match cfg.statistics {
        StatisticsKind::Boson => Statistics::Boson,
        StatisticsKind::Fermion => Statistics::Fermion,
    }
}

pub fn moments(cfg: &ScenarioConfig, n: usize) -> Result<(MomentState, MomentMethod), CliError> {
    let stats = statistics(cfg);
    let Some(spec) = &cfg.moments_initial else {
        return Ok((MomentState::vacuum(stats, n), MomentMethod::Propagator));
    };
    let m = match &spec.m {
        Some(m) => vector(m, "m", n)?,
        None => ComplexVector::zeros(n),
    };
    let y = match &spec.y {
        Some(y) => matrix(y, "y", n)?,
        None => ComplexMatrix::zeros(n, n),
    };
    let z = match &spec.z {
        Some(z) => matrix(z, "z", n)?,
        None => ComplexMatrix::zeros(n, n),
    };
    let method = match spec.method {
        MethodKind::Propagator => MomentMethod::Propagator,
        MethodKind::Ode => MomentMethod::Ode,
    };
    Ok((MomentState::new(stats, m, y, z)?, method))
}

/// Partition from the config, else `{1..n/2}` against the rest.
pub fn partition(cfg: &ScenarioConfig, n: usize) -> Result<(IndexSet, IndexSet), CliError> {
    if n < 2 {
        return Err(validation("a partition needs at least 2 modes"));
    }
    match &cfg.partition {
        Some(p) => {
            let first = IndexSet::new(p.first.clone())?;
            let second = IndexSet::new(p.second.clone())?;
            first.check(n)?;
            second.check(n)?;
            if first.is_empty() || second.is_empty() || !first.is_disjoint(&second) {
                return Err(validation(
                    "partition needs two nonempty disjoint index sets",
                ));
            }
            Ok((first, second))
        }
        None => {
            let first = IndexSet::new((1..=n / 2).collect())?;
            let second = first.complement(n);
            Ok((first, second))
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
