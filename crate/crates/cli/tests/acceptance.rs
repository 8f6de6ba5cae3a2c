//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::LN_2;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oneparticle::dynamics::{evolve_state_grid, integrate_direct_grid, propagate, GKSLModel};
use oneparticle::information::{
    mutual_information, mutual_information_from_reductions, von_neumann_entropy,
};
use oneparticle::integrate::StepPolicy;
use oneparticle::linalg::{c, max_abs_diff, min_eigenvalue, trace};
use oneparticle::moments::{evolve_moments_grid, MomentMethod};
use oneparticle::oracle::{
    build_operators, closed_form_partial_trace, coherent_state, embed_density, embed_pure,
    fock_state, full_partial_trace, integrate_second_quantized_grid, moments_from_full,
    one_particle_block, schmidt, FullState, ModeKind,
};
use oneparticle::random;
use oneparticle::reduction::{pure_state_entangled, trace_out, IndexSet};
use oneparticle::OneParticleState;
use oneparticle_cli::{run, RunOptions, ScenarioConfig, ScenarioKind};

/// Trace, positivity and contraction extremes over every dynamical run.
#[derive(Default)]
struct Invariants {
    trace_err: f64,
    min_eig: f64,
    max_norm: f64,
    semigroup: f64,
    states: usize,
}

impl Invariants {
    fn state(&mut self, s: &OneParticleState) {
        let rho = s.assemble();
        self.full(&rho);
    }

    fn full(&mut self, rho: &oneparticle::linalg::ComplexMatrix) {
        self.trace_err = self.trace_err.max((trace(rho).re - 1.0).abs());
        self.min_eig = self.min_eig.min(min_eigenvalue(rho).unwrap());
        self.states += 1;
    }

    fn norm(&mut self, v: f64) {
        self.max_norm = self.max_norm.max(v);
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: usize, name: &str, elapsed: Duration, outcome: &Outcome) {
    println!(
        "{} criterion {id} {name}: {} [{:.2}s]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64()
    );
}

fn grid(start: f64, end: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| start + (end - start) * k as f64 / (samples - 1) as f64)
        .collect()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn bell_curve() -> Outcome {
    let text = "[time]\nend = 6.0\nsamples = 200\n[bell]\ngamma = 1.0\n";
    let cfg = ScenarioConfig::parse(text).unwrap();
    let art = run(ScenarioKind::BellCurve, &cfg, text, &RunOptions::default()).unwrap();
    let (header, rows) = parse_csv(&art.csv);
    assert_eq!(header, ["t", "mutual_information"]);
    let first = rows[0][1];
    let last = rows[rows.len() - 1][1];
    let step = rows[1][0] - rows[0][0];
    let peak = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    let passed = first < 1e-2
        && last < 1e-2
        && (peak[0] - LN_2).abs() <= step
        && (peak[1] - LN_2).abs() <= 1e-6;
    Outcome {
        passed,
        detail: format!(
            "I(0)={first:.3e} I(6)={last:.5e} peak at t={:.5} (step {step:.4}) value {:.10} |peak-ln2|={:.2e}",
            peak[0],
            peak[1],
            (peak[1] - LN_2).abs()
        ),
    }
}

fn homogeneous(inv: &mut Invariants) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 3;
    let model =
        GKSLModel::homogeneous(random::hermitian(n, &mut rng), |t: f64| 1.0 + t.sin()).unwrap();
    let s0 = random::strict_state(n, &mut rng);
    let times = grid(0.0, 10.0, 100);
    let states = evolve_state_grid(&s0, &model, &times, &StepPolicy::default()).unwrap();
    let mut worst = 0.0_f64;
    for (&t, (v, s)) in times.iter().zip(&states) {
        let closed = 1.0 - (-(t + 1.0 - t.cos())).exp();
        worst = worst.max((s.rho00() - closed).abs());
        inv.state(s);
        inv.norm(v.norm());
    }
    Outcome {
        passed: worst <= 1e-7,
        detail: format!("max |rho00 - (1 - exp(-int gamma))| = {worst:.3e} over 100 points"),
    }
}

fn equivalence(inv: &mut Invariants) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, k) = (4, 3);
    let times = grid(0.0, 3.0, 13);
    let policy = StepPolicy::default();
    let mut worst = 0.0_f64;
    for m in 0..20 {
        let model = if m % 2 == 0 {
            random::constant_model(n, k, 1.0, 1.0, &mut rng)
        } else {
            random::modulated_model(n, k, 1.0, 1.0, &mut rng)
        };
        let s0 = random::state(n, &mut rng);
        let via_v = evolve_state_grid(&s0, &model, &times, &policy).unwrap();
        let direct = integrate_direct_grid(&s0, &model, &times, &policy).unwrap();
        for ((v, a), b) in via_v.iter().zip(&direct) {
            worst = worst.max(max_abs_diff(&a.assemble(), &b.assemble()));
            inv.state(a);
            inv.state(b);
            inv.norm(v.norm());
        }
        if model.is_time_independent() {
            let (t1, t2) = (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
            let whole = propagate(&model, t1 + t2, &policy).unwrap().v;
            let product = propagate(&model, t1, &policy).unwrap().v
                * propagate(&model, t2, &policy).unwrap().v;
            inv.semigroup = inv.semigroup.max(max_abs_diff(&whole, &product));
        }
    }
    Outcome {
        passed: worst <= 1e-8,
        detail: format!("max entrywise residual {worst:.3e} over 20 models x 13 samples"),
    }
}

fn qubit_round_trip(inv: &mut Invariants) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 5;
    let times = [0.5, 1.0, 2.0];
    let policy = StepPolicy::default();
    let ops = build_operators(ModeKind::Qubit, n).unwrap();
    let mut worst = 0.0_f64;
    for m in 0..10 {
        let decays = rng.random_range(1..=3);
        let model = if m % 2 == 0 {
            random::constant_model(n, decays, 1.0, 1.0, &mut rng)
        } else {
            random::modulated_model(n, decays, 1.0, 1.0, &mut rng)
        };
        let s0 = random::state(n, &mut rng);
        let full0 = embed_density(&s0).unwrap();
        let runs = integrate_second_quantized_grid(&full0, &model, &ops, &times, &policy).unwrap();
        let direct = evolve_state_grid(&s0, &model, &times, &policy).unwrap();
        for (run, (v, s)) in runs.iter().zip(&direct) {
            let block = one_particle_block(&run.state);
            worst = worst.max(max_abs_diff(&block.assemble(), &s.assemble()));
            inv.full(run.state.rho());
            inv.state(s);
            inv.norm(v.norm());
        }
    }
    Outcome {
        passed: worst <= 1e-8,
        detail: format!("max block residual {worst:.3e} over 10 models on 2^5 qubits"),
    }
}

fn partial_traces() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let mut sets_checked = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=7);
        let s = random::state(n, &mut rng);
        let full = embed_density(&s).unwrap();
        let mut sets: Vec<IndexSet> = (1..=n).map(|l| IndexSet::new(vec![l]).unwrap()).collect();
        sets.push(random::index_set(n, &mut rng));
        for set in &sets {
            let brute = full_partial_trace(&full, set).unwrap();
            let closed = closed_form_partial_trace(&s, set).unwrap();
            worst = worst.max(max_abs_diff(brute.rho(), closed.rho()));
            if set.len() < n {
                let reduced = trace_out(&s, set).unwrap().state;
                let embedded = embed_density(&reduced).unwrap();
                worst = worst.max(max_abs_diff(brute.rho(), embedded.rho()));
            }
            sets_checked += 1;
        }
    }
    Outcome {
        passed: worst <= 1e-12,
        detail: format!("max residual {worst:.3e} over {sets_checked} index sets"),
    }
}

fn information() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut lemma, mut additivity, mut oracle) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let s = random::state_without_coherence(n, &mut rng);
        let (first, second) = random::partition(n, &mut rng);
        let rep = mutual_information(&s, &first, &second).unwrap();
        let lhs = mutual_information_from_reductions(&s, &first, &second).unwrap();
        lemma = lemma.max((lhs - rep.total).abs());
        additivity = additivity.max((rep.total - rep.quantum_term - rep.classical_term).abs());
        let full = embed_density(&s).unwrap();
        let brute = von_neumann_entropy(full_partial_trace(&full, &first).unwrap().rho()).unwrap()
            + von_neumann_entropy(full_partial_trace(&full, &second).unwrap().rho()).unwrap()
            - von_neumann_entropy(full.rho()).unwrap();
        oracle = oracle.max((brute - rep.total).abs());
    }
    Outcome {
        passed: lemma <= 1e-10 && additivity <= 1e-10 && oracle <= 1e-9,
        detail: format!(
            "identity {lemma:.3e}, additivity {additivity:.3e}, full-space {oracle:.3e}"
        ),
    }
}

fn schmidt_rank() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut over_two, mut disagreements, mut cases, mut third) = (0, 0, 0, 0.0_f64);
    for k in 0..100 {
        let n = rng.random_range(2..=7);
        let phi = if k % 2 == 0 {
            random::pure_state(n, &mut rng)
        } else {
            random::sparse_pure_state(n, &mut rng)
        };
        let v = embed_pure(&phi).unwrap();
        let dims = vec![2; n];
        for mask in 1..(1usize << n) - 1 {
            let set =
                IndexSet::new((1..=n).filter(|l| mask >> (l - 1) & 1 == 1).collect()).unwrap();
            let sv = schmidt(&v, &dims, &set).unwrap();
            let rank = sv.iter().filter(|&&x| x > 1e-10).count();
            third = third.max(sv.get(2).copied().unwrap_or(0.0));
            if rank > 2 {
                over_two += 1;
            }
            if pure_state_entangled(&phi, &set).unwrap() != (rank == 2) {
                disagreements += 1;
            }
            cases += 1;
        }
    }
    Outcome {
        passed: over_two == 0 && disagreements == 0,
        detail: format!(
            "{cases} bipartitions, rank > 2: {over_two}, predicate mismatches: {disagreements}, largest third coefficient {third:.2e}"
        ),
    }
}

fn moments(inv: &mut Invariants) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let policy = StepPolicy::default();
    let times = [0.0, 0.5, 1.0, 2.0];
    let (mut fermion, mut boson, mut leakage, mut methods) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);

    let fops = build_operators(ModeKind::Fermion, 3).unwrap();
    for _ in 0..10 {
        let model = random::constant_model(3, 2, 1.0, 1.0, &mut rng);
        // parity-even mixture of the vacuum and one-particle sector
        let s = random::state_without_coherence(3, &mut rng);
        let rho0 = embed_density(&s).unwrap();
        let ms0 = moments_from_full(&rho0, &fops).unwrap();
        let runs = integrate_second_quantized_grid(&rho0, &model, &fops, &times, &policy).unwrap();
        let prop =
            evolve_moments_grid(&ms0, &model, &times, MomentMethod::Propagator, &policy).unwrap();
        let ode = evolve_moments_grid(&ms0, &model, &times, MomentMethod::Ode, &policy).unwrap();
        for ((run, p), o) in runs.iter().zip(&prop).zip(&ode) {
            fermion = fermion.max(
                moments_from_full(&run.state, &fops)
                    .unwrap()
                    .max_abs_diff(p),
            );
            methods = methods.max(o.max_abs_diff(p));
            inv.full(run.state.rho());
        }
    }

    let cutoff = 6;
    let kind = ModeKind::Boson { cutoff };
    let bops = build_operators(kind, 2).unwrap();
    let dims = vec![cutoff; 2];
    for seed in 0..5 {
        let model = random::constant_model(2, 2, 1.0, 1.0, &mut rng);
        let mut occupation = vec![0; 2];
        occupation[seed % 2] = 1;
        let alpha: Vec<_> = (0..2)
            .map(|_| c(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)))
            .collect();
        let starts = [
            FullState::pure(dims.clone(), &fock_state(&occupation, &dims).unwrap()).unwrap(),
            FullState::pure(dims.clone(), &coherent_state(&alpha, cutoff).unwrap()).unwrap(),
        ];
        for rho0 in &starts {
            let ms0 = moments_from_full(rho0, &bops).unwrap();
            let runs =
                integrate_second_quantized_grid(rho0, &model, &bops, &times, &policy).unwrap();
            let prop = evolve_moments_grid(&ms0, &model, &times, MomentMethod::Propagator, &policy)
                .unwrap();
            let ode =
                evolve_moments_grid(&ms0, &model, &times, MomentMethod::Ode, &policy).unwrap();
            for ((run, p), o) in runs.iter().zip(&prop).zip(&ode) {
                boson = boson.max(
                    moments_from_full(&run.state, &bops)
                        .unwrap()
                        .max_abs_diff(p),
                );
                leakage = leakage.max(run.leakage);
                methods = methods.max(o.max_abs_diff(p));
                inv.full(run.state.rho());
            }
        }
    }
    Outcome {
        passed: fermion <= 1e-8 && boson <= 1e-6 && leakage < 1e-8 && methods <= 1e-8,
        detail: format!(
            "fermion {fermion:.3e}, boson {boson:.3e}, leakage {leakage:.3e}, ode vs propagator {methods:.3e}"
        ),
    }
}

fn contraction(inv: &Invariants) -> Outcome {
    Outcome {
        passed: inv.trace_err <= 1e-9
            && inv.min_eig >= -1e-8
            && inv.max_norm <= 1.0 + 1e-9
            && inv.semigroup <= 1e-8,
        detail: format!(
            "{} states: trace error {:.3e}, min eigenvalue {:.3e}, max |V| {:.12}, semigroup {:.3e}",
            inv.states, inv.trace_err, inv.min_eig, inv.max_norm, inv.semigroup
        ),
    }
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_oneparticle");
    let base = std::env::temp_dir().join(format!("oneparticle-acceptance-{}", std::process::id()));
    let mut reports = Vec::new();
    let mut statuses = Vec::new();
    for k in 0..2 {
        let dir = base.join(k.to_string());
        let status = Command::new(exe)
            .args(["verify", "--seed", "42", "--out"])
            .arg(&dir)
            .output()
            .unwrap()
            .status;
        statuses.push(status.code());
        reports.push(std::fs::read(dir.join("verify.csv")).unwrap_or_default());
    }
    let _ = std::fs::remove_dir_all(&base);
    let identical = !reports[0].is_empty() && reports[0] == reports[1];
    Outcome {
        passed: identical && statuses.iter().all(|s| *s == Some(0)),
        detail: format!(
            "two runs, {} bytes each, identical: {identical}, exit codes {statuses:?}",
            reports[0].len()
        ),
    }
}

fn main() -> ExitCode {
    let mut inv = Invariants::default();
    let mut all = true;
    let mut timed = |id: usize, name: &str, limit: Option<f64>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed.as_secs_f64() >= limit {
                outcome.passed = false;
                outcome
                    .detail
                    .push_str(&format!(", runtime limit {limit}s exceeded"));
            }
        }
        report(id, name, elapsed, &outcome);
        all &= outcome.passed;
    };
    timed(1, "decay curve", Some(1.0), &mut bell_curve);
    timed(2, "homogeneous ground population", Some(5.0), &mut || {
        homogeneous(&mut inv)
    });
    timed(3, "propagator vs master equation", Some(30.0), &mut || {
        equivalence(&mut inv)
    });
    timed(4, "qubit round trip", Some(120.0), &mut || {
        qubit_round_trip(&mut inv)
    });
    timed(5, "partial traces", None, &mut partial_traces);
    timed(6, "mutual information", None, &mut information);
    timed(7, "schmidt rank", None, &mut schmidt_rank);
    timed(8, "moments", Some(120.0), &mut || moments(&mut inv));
    timed(9, "trace, positivity, contraction", None, &mut || {
        contraction(&inv)
    });
    timed(10, "verify determinism", None, &mut determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
