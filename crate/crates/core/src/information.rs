//! Entropies and the mutual information between two groups of modes.
//!
//! For a state with no coherence block (`psi = 0`) and a partition
//! `I1 ⊔ I2 = {1..n}`, the mutual information of the second-quantized state
//! splits into a decoherence term and a classical term,
//!
//! ```text
//! I = [S(Φ(R)) - S(R)] + [S_cl(π1) + S_cl(π2) - S_cl(π)],
//! ```
//!
//! with `Φ = P_I1 . P_I1 + P_I2 . P_I2`, `π = (rho00, Tr P_I1 R, Tr P_I2 R)`,
//! `π1 = (p0 + p2, p1)` and `π2 = (p0 + p1, p2)`. All entropies are in nats.

use crate::error::{Error, Result};
use crate::linalg::{trace, trace_function, ComplexMatrix, Domain};
use crate::one_particle::{OneParticleState, STRICT_TOL};
use crate::reduction::{block, trace_out, IndexSet, QuantumOperation};

/// Probabilities may undershoot 0 or overshoot 1 by this much.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Allowed deviation of `Σ K^dag K` from the identity for an instrument.
pub const INSTRUMENT_TOL: f64 = 1e-10;

fn f_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// `f(x) = -x ln x` with `f(0) = 0`.
pub fn entropy_scalar(x: f64) -> Result<f64> {
    if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&x) {
        return Err(Error::Domain {
            function: "-x ln x",
            value: x,
        });
    }
    Ok(f_unchecked(x.clamp(0.0, 1.0)))
}

/// `S(M) = Tr f(M)`, taken literally for sub-normalized blocks.
pub fn von_neumann_entropy(m: &ComplexMatrix) -> Result<f64> {
    trace_function(m, f_unchecked, Domain::UnitInterval, "-x ln x")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probabilities: Vec<f64>,
}

impl ClassicalDistribution {
    /// Negative entries within tolerance are clipped to 0.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let mut p = probabilities;
        for x in &mut p {
            if !x.is_finite() || *x < -PROBABILITY_TOL || *x > 1.0 + PROBABILITY_TOL {
                return Err(Error::Domain {
                    function: "probability",
                    value: *x,
                });
            }
            *x = x.max(0.0);
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain {
                function: "probability total",
                value: total,
            });
        }
        Ok(ClassicalDistribution { probabilities: p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// `S_cl(π) = Σ f(p_i)`.
pub fn shannon_entropy(pi: &ClassicalDistribution) -> f64 {
    pi.probabilities.iter().map(|&p| f_unchecked(p)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutualInfoReport {
    pub total: f64,
    /// `ΔS_Φ(R) = S(Φ(R)) - S(R)`.
    pub quantum_term: f64,
    /// `I_cl(π)`.
    pub classical_term: f64,
    /// `(p0, p1, p2)`.
    pub pi: ClassicalDistribution,
}

fn require_no_coherence(s: &OneParticleState) -> Result<()> {
    let norm = s.psi().norm();
    if norm > STRICT_TOL {
        return Err(Error::NonzeroCoherence { norm });
    }
    Ok(())
}

fn check_partition(n: usize, first: &IndexSet, second: &IndexSet) -> Result<()> {
    first.check(n)?;
    second.check(n)?;
    if !first.is_disjoint(second) || first.len() + second.len() != n {
        return Err(Error::NotAPartition { n });
    }
    Ok(())
}

/// `I_cl(π) = S_cl(π1) + S_cl(π2) - S_cl(π)` with the marginals formed as
/// in the module docs.
pub fn classical_information(p0: f64, p1: f64, p2: f64) -> Result<(f64, ClassicalDistribution)> {
    let pi = ClassicalDistribution::new(vec![p0, p1, p2])?;
    let pi1 = ClassicalDistribution::new(vec![p0 + p2, p1])?;
    let pi2 = ClassicalDistribution::new(vec![p0 + p1, p2])?;
    Ok((
        shannon_entropy(&pi1) + shannon_entropy(&pi2) - shannon_entropy(&pi),
        pi,
    ))
}

/// Mutual information between the modes in `I1` and `I2` for a state with
/// `psi = 0`.
///
/// `total` is evaluated from the block expression
/// `S(R11) + S(R22) - S(R) + f(p0 + p1) + f(p0 + p2) - f(p0)`; the two
/// decomposition terms are evaluated separately.
pub fn mutual_information(
    s: &OneParticleState,
    first: &IndexSet,
    second: &IndexSet,
) -> Result<MutualInfoReport> {
    let n = s.n();
    check_partition(n, first, second)?;
    require_no_coherence(s)?;

    let r11 = block(s.r(), first, first);
    let r22 = block(s.r(), second, second);
    let p0 = s.rho00();
    let p1 = trace(&r11).re;
    let p2 = trace(&r22).re;
    let s11 = von_neumann_entropy(&r11)?;
    let s22 = von_neumann_entropy(&r22)?;
    let s_r = von_neumann_entropy(s.r())?;

    let total =
        s11 + s22 - s_r + entropy_scalar(p0 + p1)? + entropy_scalar(p0 + p2)? - entropy_scalar(p0)?;
    let quantum_term = s11 + s22 - s_r;
    let (classical_term, pi) = classical_information(p0, p1, p2)?;
    Ok(MutualInfoReport {
        total,
        quantum_term,
        classical_term,
        pi,
    })
}

/// `S(Tr_I1 ρ) + S(Tr_I2 ρ) - S(ρ)` computed from the reduced states.
///
/// Valid for any one-particle state, including `psi != 0`.
pub fn mutual_information_from_reductions(
    s: &OneParticleState,
    first: &IndexSet,
    second: &IndexSet,
) -> Result<f64> {
    check_partition(s.n(), first, second)?;
    let a = trace_out(s, first)?.state.assemble();
    let b = trace_out(s, second)?.state.assemble();
    Ok(von_neumann_entropy(&a)? + von_neumann_entropy(&b)? - von_neumann_entropy(&s.assemble())?)
}

/// Mutual information generalized to a binary instrument `{Φ1, Φ2}`.
///
/// `Φ1 + Φ2` must be trace preserving on `C^{n x n}`; both operations must
/// share an output space so that `Φ(R) = Φ1(R) + Φ2(R)` is defined.
pub fn mutual_information_instrument(
    s: &OneParticleState,
    phi1: &QuantumOperation,
    phi2: &QuantumOperation,
) -> Result<MutualInfoReport> {
    let n = s.n();
    require_no_coherence(s)?;
    for op in [phi1, phi2] {
        if op.in_dim() != n {
            return Err(Error::Dimension(format!(
                "instrument acts on C^{}, state has {n} modes",
                op.in_dim()
            )));
        }
    }
    if phi1.out_dim() != phi2.out_dim() {
        return Err(Error::Dimension(format!(
            "instrument outputs differ: {} vs {}",
            phi1.out_dim(),
            phi2.out_dim()
        )));
    }
    let effect = phi1.effect() + phi2.effect();
    let defect = (effect - ComplexMatrix::identity(n, n))
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if defect > INSTRUMENT_TOL {
        return Err(Error::NotTracePreserving { defect });
    }

    let out1 = phi1.apply(s.r())?;
    let out2 = phi2.apply(s.r())?;
    let p0 = s.rho00();
    let p1 = trace(&out1).re;
    let p2 = trace(&out2).re;
    let quantum_term = von_neumann_entropy(&(out1 + out2))? - von_neumann_entropy(s.r())?;
    let (classical_term, pi) = classical_information(p0, p1, p2)?;
    Ok(MutualInfoReport {
        total: quantum_term + classical_term,
        quantum_term,
        classical_term,
        pi,
    })
}

/// `I(t) = f(e^{-γt}) + f(1 - e^{-γt})` on the given grid: the mutual
/// information of a particle decaying from one subsystem into the other.
pub fn markov_decay_curve(gamma: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::NonPositiveRate(gamma));
    }
    grid.iter()
        .map(|&t| {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::NegativeTime(t));
            }
            let p1 = (-gamma * t).exp();
            let p2 = -(-gamma * t).exp_m1();
            Ok((t, f_unchecked(p1) + f_unchecked(p2)))
        })
        .collect()
}
