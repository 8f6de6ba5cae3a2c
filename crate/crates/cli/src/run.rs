//! Scenario execution.

use std::fmt::Write as _;
use std::time::Instant;

use sha2::{Digest, Sha256};

use oneparticle::dynamics::{evolve_state, evolve_state_grid, integrate_direct};
use oneparticle::information::{markov_decay_curve, mutual_information};
use oneparticle::integrate::StepPolicy;
use oneparticle::linalg::{min_eigenvalue, trace};
use oneparticle::moments::evolve_moments_grid;
use oneparticle::random;
use oneparticle::verify::{verify, VerifySizes};

use crate::build;
use crate::config::{ScenarioConfig, ScenarioKind, TimeGrid};
use crate::error::CliError;
use crate::svg;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const TRACE_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-8;
const CONTRACTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub svg: bool,
}

/// Numeric table behind a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_number(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub scenario: ScenarioKind,
    pub csv: String,
    pub svg: Option<String>,
    /// Set for `verify` when some check failed; the files are still written.
    pub failure: Option<CliError>,
}

/// `# config_hash=<sha256> version=<v> seed=<seed>`.
pub fn header(config_text: &str, seed: Option<u64>) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    let digest = h.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("# config_hash={hex} version={VERSION} seed={seed}\n")
}

fn grid(cfg: &ScenarioConfig, default: Option<TimeGrid>) -> Result<Vec<f64>, CliError> {
    cfg.time
        .or(default)
        .ok_or_else(|| CliError::Validation("missing [time] grid".into()))?
        .points()
}

pub fn run(
    kind: ScenarioKind,
    cfg: &ScenarioConfig,
    config_text: &str,
    opts: &RunOptions,
) -> Result<Artifacts, CliError> {
    if let Some(declared) = cfg.scenario {
        if declared != kind {
            return Err(CliError::Validation(format!(
                "config declares scenario {} but {} was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    let seed = build::seed(cfg, opts.seed);
    let policy = StepPolicy::default();
    let (table, default_axes, text, failure) = match kind {
        ScenarioKind::Simulate => (
            Some(simulate(cfg, seed, &policy)?),
            ("t", "rho00"),
            None,
            None,
        ),
        ScenarioKind::Moments => {
            let t = moments(cfg, seed, &policy)?;
            (Some(t), ("t", "y_1_1_re"), None, None)
        }
        ScenarioKind::Info => (Some(info(cfg, seed, &policy)?), ("t", "total"), None, None),
        ScenarioKind::BellCurve => (
            Some(bell_curve(cfg)?),
            ("t", "mutual_information"),
            None,
            None,
        ),
        ScenarioKind::Verify => {
            let (text, failure) = run_verify(cfg, seed)?;
            (None, ("", ""), Some(text), failure)
        }
        ScenarioKind::Bench => (None, ("", ""), Some(bench(cfg, seed)?), None),
    };
    let body = match (&table, text) {
        (Some(t), _) => t.body(),
        (None, Some(text)) => text,
        (None, None) => unreachable!("every scenario yields output"),
    };
    let csv = header(config_text, seed) + &body;
    let svg = match (&table, opts.svg || cfg.output.svg) {
        (Some(t), true) => {
            let x = cfg.output.svg_x.as_deref().unwrap_or(default_axes.0);
            let y = cfg.output.svg_y.as_deref().unwrap_or(default_axes.1);
            Some(svg::line_chart(t, x, y)?)
        }
        (None, true) => {
            return Err(CliError::Validation(format!(
                "{} output cannot be plotted",
                kind.name()
            )))
        }
        _ => None,
    };
    Ok(Artifacts {
        scenario: kind,
        csv,
        svg,
        failure,
    })
}

fn state_and_model(
    cfg: &ScenarioConfig,
    seed: Option<u64>,
) -> Result<
    (
        oneparticle::OneParticleState,
        oneparticle::dynamics::GKSLModel,
    ),
    CliError,
> {
    let n = build::mode_count(cfg)?;
    let needs_seed = build::model_is_random(cfg) || build::initial_is_random(cfg);
    let mut rng = if needs_seed {
        Some(build::rng(build::require_seed(seed, "scenario")?))
    } else {
        None
    };
    let spec = cfg
        .model
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing [model]".into()))?;
    let model = build::model(spec, n, rng.as_mut())?;
    let s0 = match &cfg.initial {
        Some(spec) => build::initial_state(spec, n, rng.as_mut())?,
        None => oneparticle::OneParticleState::excited(n, 1)?,
    };
    Ok((s0, model))
}

fn simulate(
    cfg: &ScenarioConfig,
    seed: Option<u64>,
    policy: &StepPolicy,
) -> Result<Table, CliError> {
    let times = grid(cfg, None)?;
    let (s0, model) = state_and_model(cfg, seed)?;
    model.validate_window(*times.last().unwrap(), build::WINDOW_SAMPLES)?;
    let mut table = Table::new(
        [
            "t",
            "rho00",
            "trace_r",
            "psi_norm",
            "min_eigenvalue",
            "v_norm",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (&t, (v, s)) in times
        .iter()
        .zip(evolve_state_grid(&s0, &model, &times, policy)?)
    {
        let rho = s.assemble();
        let trace_err = (trace(&rho).re - 1.0).abs();
        let min_ev = min_eigenvalue(&rho)?;
        let v_norm = v.norm();
        if trace_err > TRACE_TOL {
            return Err(CliError::Numerical(format!(
                "trace drifted by {trace_err:e} at t={t}"
            )));
        }
        if min_ev < -POSITIVITY_TOL {
            return Err(CliError::Numerical(format!(
                "negative eigenvalue {min_ev:e} at t={t}"
            )));
        }
        if v_norm > 1.0 + CONTRACTION_TOL {
            return Err(CliError::Numerical(format!(
                "propagator norm {v_norm} at t={t}"
            )));
        }
        table.rows.push(vec![
            t,
            s.rho00(),
            trace(s.r()).re,
            s.psi().norm(),
            min_ev,
            v_norm,
        ]);
    }
    Ok(table)
}

fn moments(
    cfg: &ScenarioConfig,
    seed: Option<u64>,
    policy: &StepPolicy,
) -> Result<Table, CliError> {
    let times = grid(cfg, None)?;
    let n = build::mode_count(cfg)?;
    let mut rng = if build::model_is_random(cfg) {
        Some(build::rng(build::require_seed(seed, "model")?))
    } else {
        None
    };
    let spec = cfg
        .model
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing [model]".into()))?;
    let model = build::model(spec, n, rng.as_mut())?;
    model.validate_window(*times.last().unwrap(), build::WINDOW_SAMPLES)?;
    let (ms0, method) = build::moments(cfg, n)?;

    let mut columns = vec!["t".to_string()];
    for j in 1..=n {
        columns.push(format!("m_{j}_re"));
        columns.push(format!("m_{j}_im"));
    }
    for name in ["y", "z"] {
        for i in 1..=n {
            for j in 1..=n {
                columns.push(format!("{name}_{i}_{j}_re"));
                columns.push(format!("{name}_{i}_{j}_im"));
            }
        }
    }
    let mut table = Table::new(columns);
    for (&t, ms) in times
        .iter()
        .zip(evolve_moments_grid(&ms0, &model, &times, method, policy)?)
    {
        let mut row = vec![t];
        for z in ms.m().iter() {
            row.extend([z.re, z.im]);
        }
        for m in [ms.y(), ms.z()] {
            for i in 0..n {
                for j in 0..n {
                    row.extend([m[(i, j)].re, m[(i, j)].im]);
                }
            }
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn info(cfg: &ScenarioConfig, seed: Option<u64>, policy: &StepPolicy) -> Result<Table, CliError> {
    let times = grid(cfg, None)?;
    let (s0, model) = state_and_model(cfg, seed)?;
    model.validate_window(*times.last().unwrap(), build::WINDOW_SAMPLES)?;
    let (first, second) = build::partition(cfg, s0.n())?;
    let mut table = Table::new(
        [
            "t",
            "total",
            "quantum_term",
            "classical_term",
            "p0",
            "p1",
            "p2",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (&t, (_, s)) in times
        .iter()
        .zip(evolve_state_grid(&s0, &model, &times, policy)?)
    {
        let report = mutual_information(&s, &first, &second)?;
        let p = report.pi.probabilities();
        table.rows.push(vec![
            t,
            report.total,
            report.quantum_term,
            report.classical_term,
            p[0],
            p[1],
            p[2],
        ]);
    }
    Ok(table)
}

/// Default grid: 200 samples on `[0, 6]`.
pub const BELL_DEFAULT_GRID: TimeGrid = TimeGrid {
    start: 0.0,
    end: 6.0,
    samples: 200,
};

fn bell_curve(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let times = grid(cfg, Some(BELL_DEFAULT_GRID))?;
    let gamma = cfg.bell.map_or(1.0, |b| b.gamma);
    let mut table = Table::new(vec!["t".into(), "mutual_information".into()]);
    for (t, i) in markov_decay_curve(gamma, &times)? {
        table.rows.push(vec![t, i]);
    }
    Ok(table)
}

fn run_verify(
    cfg: &ScenarioConfig,
    seed: Option<u64>,
) -> Result<(String, Option<CliError>), CliError> {
    let seed = build::require_seed(seed, "verify")?;
    let n = cfg.n.unwrap_or(4);
    let mut sizes = VerifySizes::new(n);
    if let Some(v) = cfg.verify {
        sizes.models = v.models.unwrap_or(sizes.models);
        sizes.fermion_modes = v.fermion_modes.unwrap_or(sizes.fermion_modes);
        sizes.boson_modes = v.boson_modes.unwrap_or(sizes.boson_modes);
        sizes.boson_cutoff = v.boson_cutoff.unwrap_or(sizes.boson_cutoff);
        sizes.t_max = v.t_max.unwrap_or(sizes.t_max);
    }
    sizes.check()?;
    let extra = match &cfg.model {
        Some(spec) => {
            let mut rng = build::rng(seed ^ 0x5eed);
            Some(build::model(spec, n, Some(&mut rng))?)
        }
        None => None,
    };
    let report = verify(seed, &sizes, extra.as_ref())?;
    let failure = if report.all_passed() {
        None
    } else {
        let names: Vec<String> = report
            .failures()
            .map(|c| format!("{}/{}", c.stage, c.name))
            .collect();
        Some(CliError::ChecksFailed(format!(
            "failed checks: {}",
            names.join(" ")
        )))
    };
    Ok((report.to_csv(), failure))
}

/// Default sizes for `bench`.
pub const BENCH_SIZES: [usize; 4] = [2, 4, 6, 8];

fn bench(cfg: &ScenarioConfig, seed: Option<u64>) -> Result<String, CliError> {
    let seed = build::require_seed(seed, "bench")?;
    let spec = cfg.bench.clone().unwrap_or_default();
    let sizes = spec.sizes.unwrap_or_else(|| BENCH_SIZES.to_vec());
    let t = spec.t.unwrap_or(1.0);
    let repeats = spec.repeats.unwrap_or(1).max(1);
    if sizes.contains(&0) || t.is_nan() || t <= 0.0 {
        return Err(CliError::Validation(
            "bench sizes must be positive and t > 0".into(),
        ));
    }
    let policy = StepPolicy::default();
    let mut rng = build::rng(seed);
    let mut out = String::from("n,method,wall_time\n");
    for &n in &sizes {
        let model = random::constant_model(n, n, 1.0, 1.0, &mut rng);
        let s0 = random::state(n, &mut rng);
        let timed = |f: &mut dyn FnMut() -> Result<(), CliError>| -> Result<f64, CliError> {
            let start = Instant::now();
            for _ in 0..repeats {
                f()?;
            }
            Ok(start.elapsed().as_secs_f64() / repeats as f64)
        };
        let prop = timed(&mut || {
            evolve_state(&s0, &model, t, &policy)?;
            Ok(())
        })?;
        let direct = timed(&mut || {
            integrate_direct(&s0, &model, t, &policy)?;
            Ok(())
        })?;
        let _ = writeln!(out, "{n},propagator,{}", format_number(prop));
        let _ = writeln!(out, "{n},liouvillian,{}", format_number(direct));
    }
    Ok(out)
}
