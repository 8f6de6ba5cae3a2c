//! Traces over sets of mode indices and the entanglement structure they
//! expose.
//!
//! For a one-particle state, tracing out the modes in `I` keeps the block on
//! the remaining modes and moves the traced populations into the vacuum:
//!
//! ```text
//! Tr_I rho = ( 1 - Tr R_kk   <psi_k| )
//!            ( |psi_k>        R_kk   )      k = {1..n} \ I
//! ```
//!
//! No tensor-product space is ever built here; `oracle` does that to check
//! these formulas.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite, ensure_square, hermitian_eigenvalues, trace, ComplexMatrix, ComplexVector, C64,
};
use crate::one_particle::{OneParticlePureState, OneParticleState};

/// Single threshold for every "is this block zero" decision in this module.
pub const ZERO_BLOCK_TOL: f64 = 1e-10;
/// Norm threshold for the pure-state entanglement predicate.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Allowed excess of `Σ K^dag K` over the identity.
pub const KRAUS_TOL: f64 = 1e-10;

/// Sorted set of mode labels, each in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    /// Rejects label 0 (the vacuum is not a mode) and repeated labels.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        if members.first() == Some(&0) {
            return Err(Error::Dimension("mode labels start at 1".into()));
        }
        Ok(IndexSet { members })
    }

    pub fn empty() -> Self {
        IndexSet::default()
    }

    pub fn all(n: usize) -> Self {
        IndexSet {
            members: (1..=n).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, l: usize) -> bool {
        self.members.binary_search(&l).is_ok()
    }

    /// Errors unless every member is at most `n`.
    pub fn check(&self, n: usize) -> Result<()> {
        match self.members.last() {
            Some(&last) if last > n => Err(Error::IndexOutOfRange { index: last, n }),
            _ => Ok(()),
        }
    }

    /// `{1..n} \ self`.
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet {
            members: (1..=n).filter(|l| !self.contains(*l)).collect(),
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut members: Vec<usize> = self.members.iter().chain(&other.members).copied().collect();
        members.sort_unstable();
        members.dedup();
        IndexSet { members }
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|l| !other.contains(*l))
    }

    /// Zero-based positions into `C^n` (label `l` sits at `l - 1`).
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|l| l - 1)
    }
}

/// `P_I R P_J` restricted to rows `I` and columns `J`.
pub fn block(r: &ComplexMatrix, rows: &IndexSet, cols: &IndexSet) -> ComplexMatrix {
    let rp: Vec<usize> = rows.positions().collect();
    let cp: Vec<usize> = cols.positions().collect();
    ComplexMatrix::from_fn(rp.len(), cp.len(), |i, j| r[(rp[i], cp[j])])
}

/// `P_I |v>` restricted to `I`.
pub fn sub_vector(v: &ComplexVector, rows: &IndexSet) -> ComplexVector {
    let rp: Vec<usize> = rows.positions().collect();
    ComplexVector::from_fn(rp.len(), |i, _| v[rp[i]])
}

/// `n x n` orthogonal projector onto `span{|l> : l in I}`.
pub fn projector(n: usize, set: &IndexSet) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    for k in set.positions() {
        p[(k, k)] = C64::new(1.0, 0.0);
    }
    p
}

/// `|I| x n` isometry adjoint mapping `C^n` onto the coordinates in `I`.
pub fn compressed_projector(n: usize, set: &IndexSet) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(set.len(), n);
    for (row, k) in set.positions().enumerate() {
        p[(row, k)] = C64::new(1.0, 0.0);
    }
    p
}

/// A state on the retained modes together with their original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub state: OneParticleState,
    pub retained: IndexSet,
}

impl ReducedState {
    /// Re-expands to the original `n` labels, with zero rows and columns on
    /// the traced modes.
    pub fn expand(&self, n: usize) -> OneParticleState {
        let pos: Vec<usize> = self.retained.positions().collect();
        let mut psi = ComplexVector::zeros(n);
        let mut r = ComplexMatrix::zeros(n, n);
        for (a, &i) in pos.iter().enumerate() {
            psi[i] = self.state.psi()[a];
            for (b, &j) in pos.iter().enumerate() {
                r[(i, j)] = self.state.r()[(a, b)];
            }
        }
        OneParticleState::from_blocks(self.state.rho00(), psi, r)
    }

    /// Translates original labels inside `retained` to labels of the
    /// compressed state.
    pub fn relabel(&self, original: &IndexSet) -> Result<IndexSet> {
        let mut out = Vec::with_capacity(original.len());
        for &l in original.members() {
            match self.retained.members().binary_search(&l) {
                Ok(pos) => out.push(pos + 1),
                Err(_) => {
                    return Err(Error::IndexOutOfRange {
                        index: l,
                        n: self.state.n(),
                    })
                }
            }
        }
        IndexSet::new(out)
    }
}

/// Trace over the modes in `traced`.
pub fn trace_out(s: &OneParticleState, traced: &IndexSet) -> Result<ReducedState> {
    let n = s.n();
    traced.check(n)?;
    let retained = traced.complement(n);
    let r = block(s.r(), &retained, &retained);
    let psi = sub_vector(s.psi(), &retained);
    let rho00 = 1.0 - trace(&r).re;
    Ok(ReducedState {
        state: OneParticleState::from_blocks(rho00, psi, r),
        retained,
    })
}

/// Completely positive trace non-increasing map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperation {
    kraus: Vec<ComplexMatrix>,
}

impl QuantumOperation {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Dimension("quantum operation needs a Kraus operator".into()))?;
        let shape = first.shape();
        for k in &kraus {
            if k.shape() != shape {
                return Err(Error::Dimension(format!(
                    "Kraus operators have shapes {:?} and {:?}",
                    shape,
                    k.shape()
                )));
            }
            ensure_finite(k, "Kraus operator")?;
        }
        let op = QuantumOperation { kraus };
        let max_eigenvalue = hermitian_eigenvalues(&op.effect())?
            .last()
            .copied()
            .unwrap_or(0.0);
        if max_eigenvalue > 1.0 + KRAUS_TOL {
            return Err(Error::TraceIncreasing { max_eigenvalue });
        }
        Ok(op)
    }

    /// `P_I . P_I` with the output embedded back in `C^n`.
    pub fn projection(n: usize, set: &IndexSet) -> Result<Self> {
        set.check(n)?;
        Self::new(vec![projector(n, set)])
    }

    /// `P_I . P_I` with output on `C^{|I|}`.
    pub fn compressed_projection(n: usize, set: &IndexSet) -> Result<Self> {
        set.check(n)?;
        if set.is_empty() {
            return Err(Error::Dimension(
                "projection onto an empty index set".into(),
            ));
        }
        Self::new(vec![compressed_projector(n, set)])
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// `Σ K^dag K`.
    pub fn effect(&self) -> ComplexMatrix {
        let d = self.in_dim();
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k)
    }

    pub fn apply(&self, r: &ComplexMatrix) -> Result<ComplexMatrix> {
        if r.nrows() != self.in_dim() || r.ncols() != self.in_dim() {
            return Err(Error::Dimension(format!(
                "operation acts on {0}x{0} matrices, got {1}x{2}",
                self.in_dim(),
                r.nrows(),
                r.ncols()
            )));
        }
        let d = self.out_dim();
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| {
                acc + k * r * k.adjoint()
            }))
    }
}

/// `(1 - Tr Φ(R)) ⊕ Φ(R)` for a strictly one-particle block `R`.
pub fn generalized_reduce(r: &ComplexMatrix, phi: &QuantumOperation) -> Result<OneParticleState> {
    let n = ensure_square(r, "R")?;
    if phi.in_dim() != n {
        return Err(Error::Dimension(format!(
            "Kraus operators take C^{}, R lives on C^{n}",
            phi.in_dim()
        )));
    }
    let strict = OneParticleState::strictly(r.clone())?;
    let image = phi.apply(strict.r())?;
    let rho00 = 1.0 - trace(&image).re;
    OneParticleState::new(rho00, ComplexVector::zeros(phi.out_dim()), image)
}

fn split_weights(phi: &OneParticlePureState, traced: &IndexSet) -> (f64, f64) {
    let v = phi.varphi();
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (k, z) in v.iter().enumerate() {
        if traced.contains(k + 1) {
            inside += z.norm_sqr();
        } else {
            outside += z.norm_sqr();
        }
    }
    (inside, outside)
}

/// Schmidt coefficients of the second-quantized pure state across the cut
/// `I | {1..n} \ I`, from the two-level closed form.
///
/// The reduced state on either side has rank at most two with eigenvalues
/// `(1 ± sqrt(1 - 4 w b))/2`, where `w = |P_I φ|^2` and `b` is the excited
/// weight outside `I`. Returns one coefficient when `w b = 0`.
pub fn schmidt_coefficients(phi: &OneParticlePureState, set: &IndexSet) -> Result<Vec<f64>> {
    set.check(phi.n())?;
    let norm_sqr = phi.phi0().norm_sqr() + phi.varphi().norm_squared();
    if (norm_sqr - 1.0).abs() > crate::one_particle::NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let (w, b) = split_weights(phi, set);
    let prod = w * b;
    if prod == 0.0 {
        return Ok(vec![1.0]);
    }
    let root = (1.0 - 4.0 * prod).max(0.0).sqrt();
    let large = (1.0 + root) / 2.0;
    // avoids cancellation in (1 - root) / 2
    let small = 2.0 * prod / (1.0 + root);
    Ok(vec![large.sqrt(), small.sqrt()])
}

/// True iff the state has excited support both inside and outside `I`.
pub fn pure_state_entangled(phi: &OneParticlePureState, set: &IndexSet) -> Result<bool> {
    set.check(phi.n())?;
    let (w, b) = split_weights(phi, set);
    Ok(w.sqrt() > SUPPORT_TOL && b.sqrt() > SUPPORT_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separability {
    /// `P_I R P_J != 0`: the necessary condition fails, so the state is
    /// entangled.
    ViolatesNecessary,
    /// Strictly one-particle with a block-diagonal `R`: separable.
    SeparableStrict,
    /// Necessary condition holds but the state has vacuum weight or
    /// coherences, where it is not known to be sufficient.
    Inconclusive,
}

fn off_diagonal_max(s: &OneParticleState, set: &IndexSet) -> f64 {
    let rest = set.complement(s.n());
    block(s.r(), set, &rest)
        .iter()
        .fold(0.0, |acc, z: &C64| acc.max(z.norm()))
}

pub fn separability_check(s: &OneParticleState, set: &IndexSet) -> Result<Separability> {
    set.check(s.n())?;
    Ok(if off_diagonal_max(s, set) > ZERO_BLOCK_TOL {
        Separability::ViolatesNecessary
    } else if s.is_strictly_one_particle() {
        Separability::SeparableStrict
    } else {
        Separability::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The modes in `I`.
    First,
    /// The complement of `I`.
    Second,
}

/// `R = p1 R1 ⊕ p2 R2` with `R1`, `R2` density matrices on the blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparableDecomposition {
    Mixture {
        p1: f64,
        r1: ComplexMatrix,
        p2: f64,
        r2: ComplexMatrix,
    },
    /// One of the weights vanishes and the state is a product state; `r` is
    /// the surviving normalized block.
    Product { side: Side, r: ComplexMatrix },
}

impl SeparableDecomposition {
    /// Rebuilds the `n x n` block `R` on the original labels.
    pub fn reassemble(&self, n: usize, set: &IndexSet) -> ComplexMatrix {
        let rest = set.complement(n);
        let mut out = ComplexMatrix::zeros(n, n);
        let mut place = |labels: &IndexSet, m: &ComplexMatrix, w: f64| {
            let pos: Vec<usize> = labels.positions().collect();
            for (a, &i) in pos.iter().enumerate() {
                for (b, &j) in pos.iter().enumerate() {
                    out[(i, j)] += m[(a, b)] * w;
                }
            }
        };
        match self {
            SeparableDecomposition::Mixture { p1, r1, p2, r2 } => {
                place(set, r1, *p1);
                place(&rest, r2, *p2);
            }
            SeparableDecomposition::Product { side, r } => match side {
                Side::First => place(set, r, 1.0),
                Side::Second => place(&rest, r, 1.0),
            },
        }
        out
    }
}

pub fn separable_decomposition(
    s: &OneParticleState,
    set: &IndexSet,
) -> Result<SeparableDecomposition> {
    set.check(s.n())?;
    if !s.is_strictly_one_particle() {
        return Err(Error::NotStrictlyOneParticle);
    }
    let max_entry = off_diagonal_max(s, set);
    if max_entry > ZERO_BLOCK_TOL {
        return Err(Error::OffDiagonalBlock { max_entry });
    }
    let rest = set.complement(s.n());
    let b1 = block(s.r(), set, set);
    let b2 = block(s.r(), &rest, &rest);
    let p1 = trace(&b1).re;
    let p2 = trace(&b2).re;
    Ok(if p1 <= ZERO_BLOCK_TOL {
        SeparableDecomposition::Product {
            side: Side::Second,
            r: b2.unscale(p2),
        }
    } else if p2 <= ZERO_BLOCK_TOL {
        SeparableDecomposition::Product {
            side: Side::First,
            r: b1.unscale(p1),
        }
    } else {
        SeparableDecomposition::Mixture {
            p1,
            r1: b1.unscale(p1),
            p2,
            r2: b2.unscale(p2),
        }
    })
}
