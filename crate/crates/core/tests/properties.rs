use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oneparticle::dynamics::{evolve_state, integrate_direct, propagate, GKSLModel};
use oneparticle::information::{mutual_information, mutual_information_from_reductions};
use oneparticle::integrate::StepPolicy;
use oneparticle::linalg::{
    max_abs_diff, min_eigenvalue, real, trace, ComplexMatrix, ComplexVector,
};
use oneparticle::moments::{evolve_moments, MomentMethod, MomentState, Statistics};
use oneparticle::oracle::{embed_density, full_partial_trace, one_particle_block};
use oneparticle::random;
use oneparticle::reduction::{separability_check, trace_out, Separability};
use oneparticle::OneParticleState;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assemble_disassemble_round_trip(seed in any::<u64>(), n in 1usize..6) {
        let s = random::state(n, &mut rng(seed));
        let back = OneParticleState::disassemble(&s.assemble()).unwrap();
        prop_assert!(max_abs_diff(&back.assemble(), &s.assemble()) < 1e-14);
    }

    #[test]
    fn reduction_matches_brute_force(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let s = random::state(n, &mut r);
        let (traced, _) = random::partition(n, &mut r);
        let reduced = trace_out(&s, &traced).unwrap().state;
        let brute = full_partial_trace(&embed_density(&s).unwrap(), &traced).unwrap();
        prop_assert!(max_abs_diff(embed_density(&reduced).unwrap().rho(), brute.rho()) < 1e-12);
        prop_assert!((reduced.rho00() + trace(reduced.r()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_is_nonnegative_and_decomposes(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let s = random::state_without_coherence(n, &mut r);
        let (a, b) = random::partition(n, &mut r);
        let rep = mutual_information(&s, &a, &b).unwrap();
        prop_assert!(rep.total >= -1e-12);
        prop_assert!(rep.quantum_term >= -1e-12);
        prop_assert!(rep.classical_term >= -1e-12);
        prop_assert!((rep.total - rep.quantum_term - rep.classical_term).abs() < 1e-10);
        let lhs = mutual_information_from_reductions(&s, &a, &b).unwrap();
        prop_assert!((lhs - rep.total).abs() < 1e-10);
    }

    #[test]
    fn product_states_are_separable(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let s = random::strict_state(n, &mut r);
        let (a, _) = random::partition(n, &mut r);
        // zeroing the off-diagonal blocks leaves a separable state
        let mut m = s.r().clone();
        for i in 0..n {
            for j in 0..n {
                if a.contains(i + 1) != a.contains(j + 1) {
                    m[(i, j)] = real(0.0);
                }
            }
        }
        let block = OneParticleState::new(s.rho00(), s.psi().clone(), m).unwrap();
        prop_assert!(matches!(separability_check(&block, &a).unwrap(), Separability::SeparableStrict));
    }

    #[test]
    fn evolution_is_a_contraction(seed in any::<u64>(), n in 1usize..5, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let model = random::constant_model(n, 2, 1.0, 1.0, &mut r);
        let s0 = random::state(n, &mut r);
        let policy = StepPolicy::default();
        let v = propagate(&model, t, &policy).unwrap();
        prop_assert!(v.norm() <= 1.0 + 1e-9);
        let s = evolve_state(&s0, &model, t, &policy).unwrap();
        let rho = s.assemble();
        prop_assert!((trace(&rho).re - 1.0).abs() < 1e-9);
        prop_assert!(min_eigenvalue(&rho).unwrap() >= -1e-8);
        prop_assert!(s.rho00() >= s0.rho00() - 1e-10);
        let direct = integrate_direct(&s0, &model, t, &policy).unwrap();
        prop_assert!(max_abs_diff(&direct.assemble(), &rho) < 1e-8);
    }

    #[test]
    fn semigroup_property(seed in any::<u64>(), t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
        let model = random::constant_model(3, 2, 1.0, 1.0, &mut rng(seed));
        let policy = StepPolicy::default();
        let whole = propagate(&model, t1 + t2, &policy).unwrap().v;
        let split = propagate(&model, t1, &policy).unwrap().v * propagate(&model, t2, &policy).unwrap().v;
        prop_assert!(max_abs_diff(&whole, &split) < 1e-8);
    }

    #[test]
    fn moment_methods_agree(seed in any::<u64>(), n in 1usize..4, t in 0.0f64..2.0) {
        let mut r = rng(seed);
        let model = random::modulated_model(n, 2, 1.0, 1.0, &mut r);
        let alpha = random::vector(n, &mut r);
        let ms0 = MomentState::coherent(alpha);
        let policy = StepPolicy::default();
        let a = evolve_moments(&ms0, &model, t, MomentMethod::Ode, &policy).unwrap();
        let b = evolve_moments(&ms0, &model, t, MomentMethod::Propagator, &policy).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn qubit_block_survives_the_embedding(seed in any::<u64>(), n in 1usize..5) {
        let s = random::state(n, &mut rng(seed));
        let back = one_particle_block(&embed_density(&s).unwrap());
        prop_assert!(max_abs_diff(&back.assemble(), &s.assemble()) < 1e-14);
    }
}

#[test]
fn fermion_occupations_decay_without_hamiltonian() {
    let model = GKSLModel::constant(
        ComplexMatrix::zeros(2, 2),
        vec![ComplexVector::from_vec(vec![
            real(2.0f64.sqrt()),
            real(0.0),
        ])],
    )
    .unwrap();
    let mut y = ComplexMatrix::zeros(2, 2);
    y[(0, 0)] = real(1.0);
    y[(1, 1)] = real(0.5);
    let ms0 = MomentState::new(
        Statistics::Fermion,
        ComplexVector::zeros(2),
        y,
        ComplexMatrix::zeros(2, 2),
    )
    .unwrap();
    let out = evolve_moments(
        &ms0,
        &model,
        1.5,
        MomentMethod::Propagator,
        &StepPolicy::default(),
    )
    .unwrap();
    assert!((out.y()[(0, 0)].re - (-3.0f64).exp()).abs() < 1e-12);
    assert!((out.y()[(1, 1)].re - 0.5).abs() < 1e-12);
}
