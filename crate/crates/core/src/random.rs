//! Seeded random matrices, states and models for cross-checks.
//!
//! All generators take the RNG explicitly so a seed fully determines the
//! output. Callers that need reproducibility across platforms should use
//! `rand_chacha::ChaCha8Rng`.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::GKSLModel;
use crate::linalg::{c, real, trace, ComplexMatrix, ComplexVector, C64};
use crate::one_particle::{OneParticlePureState, OneParticleState};
use crate::reduction::IndexSet;

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn ginibre_rect<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// `(G + G^dag) / 2` for a Ginibre `G`.
pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rng);
    (&g + g.adjoint()).scale(0.5)
}

pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(n, rng).qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    let v = vector(n, rng);
    let norm = v.norm();
    v.unscale(norm)
}

/// Random full-rank density matrix `G G^dag / Tr(G G^dag)`.
pub fn density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rng);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    w.unscale(tr)
}

/// Random one-particle state on `n` modes with all blocks populated.
pub fn state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OneParticleState {
    let rho = density_matrix(n + 1, rng);
    OneParticleState::disassemble(&rho).expect("random density matrix is valid")
}

/// Random state with `psi = 0` and a random ground population.
pub fn state_without_coherence<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OneParticleState {
    let rho00: f64 = rng.random_range(0.0..0.6);
    let r = density_matrix(n, rng).scale(1.0 - rho00);
    OneParticleState::new(rho00, ComplexVector::zeros(n), r).expect("valid by construction")
}

pub fn strict_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OneParticleState {
    OneParticleState::strictly(density_matrix(n, rng)).expect("valid by construction")
}

pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OneParticlePureState {
    let v = unit_vector(n + 1, rng);
    OneParticlePureState::from_vector(&v).expect("unit vector")
}

/// Random pure state whose support is a random subset of `0..=n`, so that
/// product and entangled cases both show up.
pub fn sparse_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OneParticlePureState {
    loop {
        let mut v = vector(n + 1, rng);
        for k in 0..=n {
            if rng.random_bool(0.4) {
                v[k] = Complex::new(0.0, 0.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            return OneParticlePureState::from_vector(&v.unscale(norm)).expect("unit vector");
        }
    }
}

/// Random subset of `1..=n` (possibly empty, possibly everything).
pub fn index_set<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IndexSet {
    let members: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.5)).collect();
    IndexSet::new(members).expect("distinct indices")
}

/// Random nonempty proper subset of `1..=n` and its complement (`n >= 2`).
pub fn partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (IndexSet, IndexSet) {
    assert!(n >= 2, "partition needs at least two modes");
    loop {
        let first = index_set(n, rng);
        if !first.is_empty() && first.len() < n {
            let second = first.complement(n);
            return (first, second);
        }
    }
}

/// Time-independent model: Ginibre Hamiltonian scaled to `h_scale`, `k`
/// decay vectors with norms drawn from `(0, f_scale]`.
pub fn constant_model<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    h_scale: f64,
    f_scale: f64,
    rng: &mut R,
) -> GKSLModel {
    let h = hermitian(n, rng).scale(h_scale / (n as f64).sqrt());
    let decay = (0..k)
        .map(|_| {
            let norm: f64 = rng.random_range(0.2..=1.0) * f_scale;
            unit_vector(n, rng).scale(norm)
        })
        .collect();
    GKSLModel::constant(h, decay).expect("valid by construction")
}

/// Smoothly time-dependent model:
/// `H(t) = H0 + sin(w1 t) H1`, `f_l(t) = (1 + a_l cos(w2 t)) f_l0`.
pub fn modulated_model<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    h_scale: f64,
    f_scale: f64,
    rng: &mut R,
) -> GKSLModel {
    let s = h_scale / (n as f64).sqrt();
    let h0 = hermitian(n, rng).scale(s);
    let h1 = hermitian(n, rng).scale(0.5 * s);
    let w1: f64 = rng.random_range(0.5..2.0);
    let w2: f64 = rng.random_range(0.5..2.0);
    let base: Vec<(ComplexVector, f64)> = (0..k)
        .map(|_| {
            let norm: f64 = rng.random_range(0.2..=1.0) * f_scale;
            (unit_vector(n, rng).scale(norm), rng.random_range(0.0..0.5))
        })
        .collect();
    GKSLModel::from_fn(
        n,
        move |t| &h0 + h1.scale((w1 * t).sin()),
        move |t| {
            base.iter()
                .map(|(f, a)| f.scale(1.0 + a * (w2 * t).cos()))
                .collect()
        },
    )
}
