//! Seeded cross-check suite comparing every closed form against its oracle.
//!
//! Each check records the largest residual seen over all random samples and
//! the tolerance it is held to. The CSV rendering is deterministic for a
//! given seed and sizes.

use std::f64::consts::LN_2;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    evolve_state_grid, homogeneous_ground_population, integrate_direct_grid, propagate,
    propagate_ode, pure_state_evolution, GKSLModel,
};
use crate::error::{Error, Result};
use crate::information::{
    markov_decay_curve, mutual_information, mutual_information_from_reductions, von_neumann_entropy,
};
use crate::integrate::StepPolicy;
use crate::linalg::{
    c, max_abs, max_abs_diff, max_abs_diff_vec, min_eigenvalue, real, trace, ComplexMatrix,
    ComplexVector,
};
use crate::moments::{evolve_moments, MomentMethod, MomentState};
use crate::oracle::{
    build_operators, closed_form_partial_trace, coherent_state, embed_density, embed_pure,
    excitation_number, fock_state, full_dimension, full_partial_trace,
    integrate_second_quantized_grid, moments_from_full, one_particle_block, schmidt, FullState,
    ModeKind,
};
use crate::random;
use crate::reduction::{pure_state_entangled, schmidt_coefficients, trace_out, IndexSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySizes {
    /// Modes in the one-particle, dynamics and qubit-oracle stages.
    pub n: usize,
    /// Random models (and states) per stage.
    pub models: usize,
    pub fermion_modes: usize,
    pub boson_modes: usize,
    pub boson_cutoff: usize,
    /// Latest sample time of the dynamical checks.
    pub t_max: f64,
}

impl VerifySizes {
    pub fn new(n: usize) -> Self {
        VerifySizes {
            n,
            models: 10,
            fermion_modes: n.min(3),
            boson_modes: n.min(2),
            boson_cutoff: crate::oracle::DEFAULT_BOSON_CUTOFF,
            t_max: 2.0,
        }
    }

    /// Runs the dimension guard for every stage before anything is computed.
    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Dimension(
                "verification needs at least 2 modes".into(),
            ));
        }
        if self.models == 0 {
            return Err(Error::Dimension(
                "verification needs at least one model".into(),
            ));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::NegativeTime(self.t_max));
        }
        if self.fermion_modes == 0 || self.boson_modes == 0 {
            return Err(Error::Dimension(
                "moment stages need at least one mode".into(),
            ));
        }
        full_dimension(ModeKind::Qubit, self.n)?;
        full_dimension(ModeKind::Fermion, self.fermion_modes)?;
        full_dimension(
            ModeKind::Boson {
                cutoff: self.boson_cutoff,
            },
            self.boson_modes,
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub stage: &'static str,
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub sizes: VerifySizes,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// `stage,check,samples,residual,tolerance,status` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,check,samples,residual,tolerance,status\n");
        for ch in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{}",
                ch.stage,
                ch.name,
                ch.samples,
                ch.residual,
                ch.tolerance,
                if ch.passed() { "pass" } else { "fail" }
            );
        }
        out
    }
}

struct Recorder {
    checks: Vec<CheckResult>,
}

impl Recorder {
    fn check(&mut self, stage: &'static str, name: &'static str, tolerance: f64) -> usize {
        self.checks.push(CheckResult {
            stage,
            name,
            residual: 0.0,
            tolerance,
            samples: 0,
        });
        self.checks.len() - 1
    }

    fn record(&mut self, id: usize, residual: f64) {
        let ch = &mut self.checks[id];
        ch.samples += 1;
        // NaN must stick
        if residual.is_nan() || residual > ch.residual {
            ch.residual = residual;
        }
    }
}

fn time_grid(t_max: f64) -> Vec<f64> {
    vec![0.25 * t_max, 0.5 * t_max, t_max]
}

fn model_for(k: usize, n: usize, rng: &mut ChaCha8Rng) -> GKSLModel {
    let decays = rng.random_range(1..=3);
    if k.is_multiple_of(2) {
        random::constant_model(n, decays, 1.0, 1.0, rng)
    } else {
        random::modulated_model(n, decays, 1.0, 1.0, rng)
    }
}

/// Runs every cross-check with the given seed. `extra_model`, when given,
/// joins the dynamics stage alongside the random models.
pub fn verify(
    seed: u64,
    sizes: &VerifySizes,
    extra_model: Option<&GKSLModel>,
) -> Result<VerifyReport> {
    sizes.check()?;
    if let Some(m) = extra_model {
        if m.n() != sizes.n {
            return Err(Error::Dimension(format!(
                "model has {} modes, verification runs on {}",
                m.n(),
                sizes.n
            )));
        }
        m.validate_window(sizes.t_max, 33)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder { checks: Vec::new() };
    let policy = StepPolicy::default();

    structure_stage(&mut rec, sizes, &mut rng)?;
    information_stage(&mut rec, sizes, &mut rng)?;
    dynamics_stage(&mut rec, sizes, &mut rng, extra_model, &policy)?;
    qubit_oracle_stage(&mut rec, sizes, &mut rng, &policy)?;
    moment_stage(&mut rec, sizes, &mut rng, &policy)?;

    Ok(VerifyReport {
        seed,
        sizes: *sizes,
        checks: rec.checks,
    })
}

fn structure_stage(rec: &mut Recorder, sizes: &VerifySizes, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = sizes.n;
    let trace_id = rec.check("reduction", "trace_out_vs_partial_trace", 1e-12);
    let closed_id = rec.check("reduction", "closed_form_vs_partial_trace", 1e-12);
    let embed_id = rec.check("oracle", "embedding_isometry", 1e-12);
    let rank_id = rec.check("reduction", "schmidt_rank_at_most_two", 1e-10);
    let coef_id = rec.check("reduction", "schmidt_closed_form_vs_svd", 1e-10);
    let pred_id = rec.check("reduction", "entanglement_predicate_vs_rank", 0.0);

    for _ in 0..sizes.models {
        let s = random::state(n, rng);
        let full = embed_density(&s)?;
        let mut sets: Vec<IndexSet> = (1..=n)
            .map(|l| IndexSet::new(vec![l]))
            .collect::<Result<_>>()?;
        sets.push(random::index_set(n, rng));
        for set in &sets {
            let brute = full_partial_trace(&full, set)?;
            let closed = closed_form_partial_trace(&s, set)?;
            rec.record(closed_id, max_abs_diff(brute.rho(), closed.rho()));
            if set.len() < n {
                let reduced = trace_out(&s, set)?.state;
                let embedded = embed_density(&reduced)?;
                rec.record(trace_id, max_abs_diff(brute.rho(), embedded.rho()));
            }
        }

        let a = random::sparse_pure_state(n, rng);
        let b = random::pure_state(n, rng);
        let (ea, eb) = (embed_pure(&a)?, embed_pure(&b)?);
        rec.record(
            embed_id,
            (ea.dotc(&eb) - a.to_vector().dotc(&b.to_vector())).norm(),
        );
        let dims = vec![2; n];
        for mask in 1..(1usize << n) - 1 {
            let set = IndexSet::new((1..=n).filter(|l| mask >> (l - 1) & 1 == 1).collect())?;
            let sv = schmidt(&ea, &dims, &set)?;
            rec.record(rank_id, sv.get(2).copied().unwrap_or(0.0));
            let closed = schmidt_coefficients(&a, &set)?;
            let coef_residual = sv
                .iter()
                .enumerate()
                .map(|(k, &x)| (x - closed.get(k).copied().unwrap_or(0.0)).abs())
                .fold(0.0, f64::max);
            rec.record(coef_id, coef_residual);
            let rank = sv.iter().filter(|&&x| x > 1e-10).count();
            let entangled = pure_state_entangled(&a, &set)?;
            rec.record(pred_id, if entangled == (rank == 2) { 0.0 } else { 1.0 });
        }
    }
    Ok(())
}

fn information_stage(rec: &mut Recorder, sizes: &VerifySizes, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = sizes.n;
    let lemma_id = rec.check("information", "block_formula_vs_reductions", 1e-10);
    let add_id = rec.check("information", "total_vs_quantum_plus_classical", 1e-10);
    let oracle_id = rec.check("information", "mutual_information_vs_full_space", 1e-9);
    for _ in 0..sizes.models {
        let s = random::state_without_coherence(n, rng);
        let (first, second) = random::partition(n, rng);
        let report = mutual_information(&s, &first, &second)?;
        let lhs = mutual_information_from_reductions(&s, &first, &second)?;
        rec.record(lemma_id, (lhs - report.total).abs());
        rec.record(
            add_id,
            (report.total - report.quantum_term - report.classical_term).abs(),
        );
        let full = embed_density(&s)?;
        let oracle = von_neumann_entropy(full_partial_trace(&full, &first)?.rho())?
            + von_neumann_entropy(full_partial_trace(&full, &second)?.rho())?
            - von_neumann_entropy(full.rho())?;
        rec.record(oracle_id, (oracle - report.total).abs());
    }

    let peak_id = rec.check("information", "decay_curve_peak_value", 1e-12);
    let gamma = 1.0;
    let pts = markov_decay_curve(gamma, &[LN_2 / gamma])?;
    rec.record(peak_id, (pts[0].1 - LN_2).abs());
    Ok(())
}

fn dynamics_stage(
    rec: &mut Recorder,
    sizes: &VerifySizes,
    rng: &mut ChaCha8Rng,
    extra_model: Option<&GKSLModel>,
    policy: &StepPolicy,
) -> Result<()> {
    let n = sizes.n;
    let times = time_grid(sizes.t_max);
    let equiv_id = rec.check("dynamics", "propagator_vs_direct", 1e-8);
    let trace_id = rec.check("dynamics", "trace_preservation", 1e-9);
    let pos_id = rec.check("dynamics", "positivity", 1e-8);
    let contr_id = rec.check("dynamics", "contraction", 1e-9);
    let exp_id = rec.check("dynamics", "exponential_vs_ode", 1e-9);
    let semi_id = rec.check("dynamics", "semigroup", 1e-8);
    let homog_id = rec.check("dynamics", "homogeneous_ground_population", 1e-7);

    let mut models: Vec<GKSLModel> = (0..sizes.models).map(|k| model_for(k, n, rng)).collect();
    if let Some(m) = extra_model {
        models.push(m.clone());
    }
    for (k, model) in models.iter().enumerate() {
        let s0 = random::state(n, rng);
        let via_v = evolve_state_grid(&s0, model, &times, policy)?;
        let direct = integrate_direct_grid(&s0, model, &times, policy)?;
        for ((v, a), b) in via_v.iter().zip(&direct) {
            rec.record(equiv_id, max_abs_diff(&a.assemble(), &b.assemble()));
            for s in [a, b] {
                let rho = s.assemble();
                rec.record(trace_id, (trace(&rho).re - 1.0).abs());
                rec.record(pos_id, (-min_eigenvalue(&rho)?).max(0.0));
            }
            rec.record(contr_id, (v.norm() - 1.0).max(0.0));
        }
        if model.is_time_independent() && k < sizes.models {
            let t = sizes.t_max;
            let fast = propagate(model, t, policy)?;
            let slow = propagate_ode(model, t, policy)?;
            rec.record(exp_id, max_abs_diff(&fast.v, &slow.v));
            let (t1, t2) = (0.4 * t, 0.6 * t);
            let product = propagate(model, t1, policy)?.v * propagate(model, t2, policy)?.v;
            rec.record(semi_id, max_abs_diff(&fast.v, &product));
        }
    }

    for _ in 0..sizes.models.min(3) {
        let base: f64 = rng.random_range(0.5..1.5);
        let amp: f64 = rng.random_range(0.0..0.5) * base;
        let gamma = move |t: f64| base + amp * t.sin();
        let model = GKSLModel::homogeneous(random::hermitian(n, rng), gamma)?;
        let s0 = random::strict_state(n, rng);
        let states = evolve_state_grid(&s0, &model, &times, policy)?;
        for (&t, (_, s)) in times.iter().zip(&states) {
            let closed = homogeneous_ground_population(gamma, 0.0, t)?;
            rec.record(homog_id, (s.rho00() - closed).abs());
        }
    }
    Ok(())
}

fn qubit_oracle_stage(
    rec: &mut Recorder,
    sizes: &VerifySizes,
    rng: &mut ChaCha8Rng,
    policy: &StepPolicy,
) -> Result<()> {
    let n = sizes.n;
    let times = time_grid(sizes.t_max);
    let round_id = rec.check("oracle", "second_quantized_vs_one_particle", 1e-8);
    let trace_id = rec.check("oracle", "second_quantized_trace", 1e-9);
    let pos_id = rec.check("oracle", "second_quantized_positivity", 1e-8);
    let ops = build_operators(ModeKind::Qubit, n)?;
    for k in 0..sizes.models {
        let model = model_for(k, n, rng);
        let s0 = random::state(n, rng);
        let runs =
            integrate_second_quantized_grid(&embed_density(&s0)?, &model, &ops, &times, policy)?;
        let direct = evolve_state_grid(&s0, &model, &times, policy)?;
        for (run, (_, s)) in runs.iter().zip(&direct) {
            let block = one_particle_block(&run.state);
            rec.record(round_id, max_abs_diff(&block.assemble(), &s.assemble()));
            rec.record(trace_id, (run.state.trace() - 1.0).abs());
            rec.record(pos_id, (-min_eigenvalue(run.state.rho())?).max(0.0));
        }
    }
    Ok(())
}

/// Random density matrix commuting with fermion parity.
fn parity_even_density(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let d = 1usize << n;
    let g = random::density_matrix(d, rng);
    ComplexMatrix::from_fn(d, d, |i, j| {
        if (i.count_ones() + j.count_ones()) % 2 == 0 {
            g[(i, j)]
        } else {
            real(0.0)
        }
    })
}

/// Random density matrix supported on at most two excitations, so the top
/// level of any cutoff above 3 is never populated.
fn low_excitation_density(dims: &[usize], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let d: usize = dims.iter().product();
    let support: Vec<usize> = (0..d)
        .filter(|&i| excitation_number(i, dims) <= 2)
        .collect();
    let g = random::ginibre_rect(support.len(), 2, rng);
    let w = &g * g.adjoint();
    let w = w.unscale(trace(&w).re);
    let mut rho = ComplexMatrix::zeros(d, d);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            rho[(i, j)] = w[(a, b)];
        }
    }
    rho
}

fn moment_stage(
    rec: &mut Recorder,
    sizes: &VerifySizes,
    rng: &mut ChaCha8Rng,
    policy: &StepPolicy,
) -> Result<()> {
    let times = time_grid(sizes.t_max);
    let fermion_id = rec.check("moments", "fermion_vs_full_space", 1e-8);
    let boson_id = rec.check("moments", "boson_vs_truncated_full_space", 1e-6);
    let leak_id = rec.check("moments", "boson_truncation_leakage", 1e-8);
    let methods_id = rec.check("moments", "ode_vs_propagator", 1e-8);
    let coherent_id = rec.check("moments", "coherent_state_stays_coherent", 1e-6);
    let means_id = rec.check("moments", "means_vs_pure_state_evolution", 1e-10);

    let nf = sizes.fermion_modes;
    let fops = build_operators(ModeKind::Fermion, nf)?;
    for k in 0..sizes.models {
        let model = model_for(k, nf, rng);
        let rho0 = FullState::new(vec![2; nf], parity_even_density(nf, rng))?;
        let ms0 = moments_from_full(&rho0, &fops)?;
        let runs = integrate_second_quantized_grid(&rho0, &model, &fops, &times, policy)?;
        for (run, &t) in runs.iter().zip(&times) {
            let oracle = moments_from_full(&run.state, &fops)?;
            let ode = evolve_moments(&ms0, &model, t, MomentMethod::Ode, policy)?;
            let prop = evolve_moments(&ms0, &model, t, MomentMethod::Propagator, policy)?;
            rec.record(fermion_id, oracle.max_abs_diff(&prop));
            rec.record(methods_id, ode.max_abs_diff(&prop));
        }
    }

    let nb = sizes.boson_modes;
    let cutoff = sizes.boson_cutoff;
    let kind = ModeKind::Boson { cutoff };
    let bops = build_operators(kind, nb)?;
    let dims = vec![cutoff; nb];
    for k in 0..sizes.models {
        let model = model_for(k, nb, rng);
        let mut occupation = vec![0; nb];
        occupation[k % nb] = 1;
        let alpha: Vec<_> = (0..nb)
            .map(|_| c(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15)))
            .collect();
        let starts = [
            FullState::pure(dims.clone(), &fock_state(&occupation, &dims)?)?,
            FullState::pure(dims.clone(), &coherent_state(&alpha, cutoff)?)?,
            FullState::new(dims.clone(), low_excitation_density(&dims, rng))?,
        ];
        for (which, rho0) in starts.iter().enumerate() {
            let ms0 = moments_from_full(rho0, &bops)?;
            let runs = integrate_second_quantized_grid(rho0, &model, &bops, &times, policy)?;
            for (run, &t) in runs.iter().zip(&times) {
                let oracle = moments_from_full(&run.state, &bops)?;
                let ode = evolve_moments(&ms0, &model, t, MomentMethod::Ode, policy)?;
                let prop = evolve_moments(&ms0, &model, t, MomentMethod::Propagator, policy)?;
                rec.record(boson_id, oracle.max_abs_diff(&prop));
                rec.record(leak_id, run.leakage);
                rec.record(methods_id, ode.max_abs_diff(&prop));
                if which == 1 {
                    let alpha_v = ComplexVector::from_vec(alpha.clone());
                    let coherent = evolve_moments(
                        &MomentState::coherent(alpha_v.clone()),
                        &model,
                        t,
                        MomentMethod::Ode,
                        policy,
                    )?;
                    let psi = pure_state_evolution(&alpha_v, &model, t, policy)?;
                    rec.record(means_id, max_abs_diff_vec(coherent.m(), &psi));
                    let stays = max_abs(oracle.y())
                        .max(max_abs(oracle.z()))
                        .max(max_abs_diff_vec(oracle.m(), &psi));
                    rec.record(coherent_id, stays);
                }
            }
        }
    }
    Ok(())
}
