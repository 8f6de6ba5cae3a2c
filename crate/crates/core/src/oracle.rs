//! Brute-force ground truth on the full tensor-product space.
//!
//! Modes `1..n` are laid out left to right and the basis index is row-major
//! over the occupation tuple, so mode 1 varies slowest: for qubits the
//! single-excitation string `|l̂>` sits at index `2^(n-l)`. Fermions use a
//! Jordan–Wigner representation with sign strings over lower-index modes.
//! Bosons are truncated at a per-mode cutoff; the population of any mode's
//! top level is reported as leakage.

use crate::dynamics::GKSLModel;
use crate::error::{Error, Result};
use crate::integrate::{integrate_grid, StepPolicy};
use crate::linalg::{hermitian_part, real, trace, ComplexMatrix, ComplexVector, C64, ZERO};
use crate::moments::{MomentState, Statistics};
use crate::one_particle::{OneParticlePureState, OneParticleState};
use crate::reduction::IndexSet;

/// Largest full-space dimension the oracle accepts.
pub const DIMENSION_LIMIT: usize = 1 << 14;
pub const DEFAULT_BOSON_CUTOFF: usize = 6;
/// Leakage above this is reported as a warning.
pub const LEAKAGE_WARN: f64 = 1e-8;
/// Leakage above this aborts the run.
pub const LEAKAGE_ERROR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Qubit,
    Boson { cutoff: usize },
    Fermion,
}

impl ModeKind {
    pub fn boson() -> Self {
        ModeKind::Boson {
            cutoff: DEFAULT_BOSON_CUTOFF,
        }
    }

    pub fn mode_dim(&self) -> usize {
        match self {
            ModeKind::Qubit | ModeKind::Fermion => 2,
            ModeKind::Boson { cutoff } => *cutoff,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModeKind::Qubit => "qubit",
            ModeKind::Boson { .. } => "boson",
            ModeKind::Fermion => "fermion",
        }
    }
}

/// Full-space dimension of `n` modes of `kind`, refused above
/// [`DIMENSION_LIMIT`].
pub fn full_dimension(kind: ModeKind, n: usize) -> Result<usize> {
    if let ModeKind::Boson { cutoff } = kind {
        if cutoff < 2 {
            return Err(Error::InvalidCutoff(cutoff));
        }
    }
    let d = kind.mode_dim();
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(d);
        if dim > DIMENSION_LIMIT {
            return Err(Error::DimensionGuard {
                stage: kind.name().to_string(),
                dim: d.checked_pow(n as u32).unwrap_or(usize::MAX),
                limit: DIMENSION_LIMIT,
            });
        }
    }
    Ok(dim)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut d = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        d[i] = index % dims[i];
        index /= dims[i];
    }
    d
}

/// Sparse operator stored as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn adjoint(&self) -> SparseOperator {
        SparseOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (c, r, v.conj()))
                .collect(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &SparseOperator) -> SparseOperator {
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut entries = Vec::new();
        for &(r1, c1, v1) in &self.entries {
            for &(c2, v2) in &by_row[c1] {
                entries.push((r1, c2, v1 * v2));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        SparseOperator {
            dim: self.dim,
            entries: merged,
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        self.add_scaled_to(&mut m, real(1.0));
        m
    }

    pub fn add_scaled_to(&self, target: &mut ComplexMatrix, coef: C64) {
        for &(r, c, v) in &self.entries {
            target[(r, c)] += coef * v;
        }
    }

    /// `self * m`.
    pub fn mul_left(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, m.ncols());
        for &(r, c, v) in &self.entries {
            for j in 0..m.ncols() {
                out[(r, j)] += v * m[(c, j)];
            }
        }
        out
    }

    /// `m * self`.
    pub fn mul_right(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(m.nrows(), self.dim);
        for &(r, c, v) in &self.entries {
            for i in 0..m.nrows() {
                out[(i, c)] += m[(i, r)] * v;
            }
        }
        out
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
        out
    }

    /// `Tr(self * rho)`.
    pub fn expectation(&self, rho: &ComplexMatrix) -> C64 {
        self.entries
            .iter()
            .fold(ZERO, |acc, &(r, c, v)| acc + v * rho[(c, r)])
    }
}

/// Lowering operators `a_1..a_n` on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperatorSet {
    kind: ModeKind,
    dims: Vec<usize>,
    lowering: Vec<SparseOperator>,
}

impl ModeOperatorSet {
    pub fn kind(&self) -> ModeKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.lowering.len()
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }
    /// `a_l` for `l` in `1..=n`.
    pub fn lowering(&self, l: usize) -> &SparseOperator {
        &self.lowering[l - 1]
    }
    pub fn dense(&self, l: usize) -> ComplexMatrix {
        self.lowering(l).to_dense()
    }
    /// Basis index of the single-excitation string `|l̂>`.
    pub fn excitation_index(&self, l: usize) -> usize {
        strides(&self.dims)[l - 1]
    }
}

pub fn build_operators(kind: ModeKind, n: usize) -> Result<ModeOperatorSet> {
    if n == 0 {
        return Err(Error::Dimension("at least one mode is required".into()));
    }
    let dim = full_dimension(kind, n)?;
    let dims = vec![kind.mode_dim(); n];
    let st = strides(&dims);
    let lowering = (0..n)
        .map(|l| {
            let entries = (0..dim)
                .filter_map(|col| {
                    let occ = digits(col, &dims);
                    let k = occ[l];
                    if k == 0 {
                        return None;
                    }
                    let mut v = (k as f64).sqrt();
                    if kind == ModeKind::Fermion && occ[..l].iter().sum::<usize>() % 2 == 1 {
                        v = -v;
                    }
                    Some((col - st[l], col, real(v)))
                })
                .collect();
            SparseOperator { dim, entries }
        })
        .collect();
    Ok(ModeOperatorSet {
        kind,
        dims,
        lowering,
    })
}

/// Density matrix on the full space together with its per-mode dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    mode_dims: Vec<usize>,
    rho: ComplexMatrix,
}

impl FullState {
    pub fn new(mode_dims: Vec<usize>, rho: ComplexMatrix) -> Result<Self> {
        let d: usize = mode_dims.iter().product();
        if rho.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "mode dimensions {:?} need a {d}x{d} matrix, got {}x{}",
                mode_dims,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(FullState { mode_dims, rho })
    }

    pub fn pure(mode_dims: Vec<usize>, v: &ComplexVector) -> Result<Self> {
        FullState::new(mode_dims, v * v.adjoint())
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }
    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }
    pub fn trace(&self) -> f64 {
        trace(&self.rho).re
    }

    /// Total population of basis strings with some mode in its top level.
    pub fn top_level_population(&self) -> f64 {
        (0..self.rho.nrows())
            .filter(|&i| {
                digits(i, &self.mode_dims)
                    .iter()
                    .zip(&self.mode_dims)
                    .any(|(&k, &d)| k == d - 1)
            })
            .map(|i| self.rho[(i, i)].re)
            .sum()
    }
}

fn qubit_dims(n: usize) -> Result<Vec<usize>> {
    full_dimension(ModeKind::Qubit, n)?;
    Ok(vec![2; n])
}

/// `|φ̂> = φ0 |0̂> + Σ φ_l |l̂>` on `mode_dims`.
pub fn embed_pure_in(phi: &OneParticlePureState, mode_dims: &[usize]) -> Result<ComplexVector> {
    let n = phi.n();
    if mode_dims.len() != n || mode_dims.iter().any(|&d| d < 2) {
        return Err(Error::Dimension(format!(
            "{n} modes cannot be embedded in {:?}",
            mode_dims
        )));
    }
    let st = strides(mode_dims);
    let mut v = ComplexVector::zeros(mode_dims.iter().product());
    v[0] = phi.phi0();
    for l in 0..n {
        v[st[l]] = phi.varphi()[l];
    }
    Ok(v)
}

pub fn embed_pure(phi: &OneParticlePureState) -> Result<ComplexVector> {
    embed_pure_in(phi, &qubit_dims(phi.n())?)
}

/// `ρ̂ = Σ <l|ρ|k> |l̂><k̂|` on `mode_dims`.
pub fn embed_density_in(s: &OneParticleState, mode_dims: &[usize]) -> Result<FullState> {
    let n = s.n();
    if mode_dims.len() != n || mode_dims.iter().any(|&d| d < 2) {
        return Err(Error::Dimension(format!(
            "{n} modes cannot be embedded in {:?}",
            mode_dims
        )));
    }
    let st = strides(mode_dims);
    let mut index = vec![0];
    index.extend(st.iter().copied());
    let rho = s.assemble();
    let d: usize = mode_dims.iter().product();
    let mut out = ComplexMatrix::zeros(d, d);
    for (a, &ia) in index.iter().enumerate() {
        for (b, &ib) in index.iter().enumerate() {
            out[(ia, ib)] = rho[(a, b)];
        }
    }
    FullState::new(mode_dims.to_vec(), out)
}

pub fn embed_density(s: &OneParticleState) -> Result<FullState> {
    embed_density_in(s, &qubit_dims(s.n())?)
}

/// Reads `(rho00, psi, R)` off the vacuum and single-excitation strings.
pub fn one_particle_block(full: &FullState) -> OneParticleState {
    let st = strides(&full.mode_dims);
    let n = st.len();
    let mut index = vec![0];
    index.extend(st.iter().copied());
    let rho = ComplexMatrix::from_fn(n + 1, n + 1, |a, b| full.rho[(index[a], index[b])]);
    OneParticleState::from_blocks(
        rho[(0, 0)].re,
        rho.view((1, 0), (n, 1)).column(0).into_owned(),
        rho.view((1, 1), (n, n)).into_owned(),
    )
}

/// Brute-force partial trace over the modes in `traced`.
pub fn full_partial_trace(full: &FullState, traced: &IndexSet) -> Result<FullState> {
    let n = full.mode_dims.len();
    traced.check(n)?;
    let keep: Vec<usize> = (0..n).filter(|&i| !traced.contains(i + 1)).collect();
    let gone: Vec<usize> = (0..n).filter(|&i| traced.contains(i + 1)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| full.mode_dims[i]).collect();
    let kd: usize = keep_dims.iter().product();
    let mut out = ComplexMatrix::zeros(kd, kd);
    let d = full.rho.nrows();
    let all_digits: Vec<Vec<usize>> = (0..d).map(|i| digits(i, &full.mode_dims)).collect();
    let flat = |occ: &[usize], modes: &[usize]| {
        modes
            .iter()
            .fold(0usize, |acc, &i| acc * full.mode_dims[i] + occ[i])
    };
    let reduced: Vec<(usize, usize)> = all_digits
        .iter()
        .map(|occ| (flat(occ, &keep), flat(occ, &gone)))
        .collect();
    for i in 0..d {
        for j in 0..d {
            if reduced[i].1 == reduced[j].1 {
                out[(reduced[i].0, reduced[j].0)] += full.rho[(i, j)];
            }
        }
    }
    FullState::new(keep_dims, out)
}

/// Qubit embedding of the reduced state, built directly from the blocks:
/// the complement block of `ρ` plus the traced populations on the vacuum.
pub fn closed_form_partial_trace(s: &OneParticleState, traced: &IndexSet) -> Result<FullState> {
    let n = s.n();
    traced.check(n)?;
    let keep: Vec<usize> = (1..=n).filter(|&l| !traced.contains(l)).collect();
    let m = keep.len();
    let dims = vec![2; m];
    let d = 1usize << m;
    let slot = |pos: usize| 1usize << (m - 1 - pos);
    let mut out = ComplexMatrix::zeros(d, d);
    let moved: f64 = traced
        .members()
        .iter()
        .map(|&l| s.r()[(l - 1, l - 1)].re)
        .sum();
    out[(0, 0)] = real(s.rho00() + moved);
    for (a, &la) in keep.iter().enumerate() {
        out[(slot(a), 0)] = s.psi()[la - 1];
        out[(0, slot(a))] = s.psi()[la - 1].conj();
        for (b, &lb) in keep.iter().enumerate() {
            out[(slot(a), slot(b))] = s.r()[(la - 1, lb - 1)];
        }
    }
    FullState::new(dims, out)
}

/// Schmidt coefficients of `v` across `set | complement`, descending.
pub fn schmidt(v: &ComplexVector, mode_dims: &[usize], set: &IndexSet) -> Result<Vec<f64>> {
    let n = mode_dims.len();
    set.check(n)?;
    let d: usize = mode_dims.iter().product();
    if v.len() != d {
        return Err(Error::Dimension(format!(
            "vector of length {} on a space of dimension {d}",
            v.len()
        )));
    }
    let left: Vec<usize> = (0..n).filter(|&i| set.contains(i + 1)).collect();
    let right: Vec<usize> = (0..n).filter(|&i| !set.contains(i + 1)).collect();
    let ld: usize = left.iter().map(|&i| mode_dims[i]).product();
    let rd: usize = right.iter().map(|&i| mode_dims[i]).product();
    let flat = |occ: &[usize], modes: &[usize]| {
        modes
            .iter()
            .fold(0usize, |acc, &i| acc * mode_dims[i] + occ[i])
    };
    let mut m = ComplexMatrix::zeros(ld, rd);
    for i in 0..d {
        let occ = digits(i, mode_dims);
        m[(flat(&occ, &left), flat(&occ, &right))] = v[i];
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Moments `m_j = Tr a_j ρ̂`, `Y_ij = Tr a_i^dag a_j ρ̂`, `Z_ij = Tr a_i a_j ρ̂`.
/// Bosonic `Y` and `Z` are returned as central moments.
pub fn moments_from_full(full: &FullState, ops: &ModeOperatorSet) -> Result<MomentState> {
    let statistics = match ops.kind {
        ModeKind::Boson { .. } => Statistics::Boson,
        ModeKind::Fermion => Statistics::Fermion,
        ModeKind::Qubit => {
            return Err(Error::Symmetry(
                "moments need bosonic or fermionic modes".into(),
            ))
        }
    };
    check_operators(full, ops)?;
    let n = ops.n();
    let rho = &full.rho;
    let m = match statistics {
        Statistics::Boson => ComplexVector::from_fn(n, |j, _| ops.lowering[j].expectation(rho)),
        Statistics::Fermion => ComplexVector::zeros(n),
    };
    let mut y = ComplexMatrix::zeros(n, n);
    let mut z = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let ai = &ops.lowering[i];
        let adi = ai.adjoint();
        for j in 0..n {
            let aj = &ops.lowering[j];
            y[(i, j)] = adi.compose(aj).expectation(rho) - m[i].conj() * m[j];
            z[(i, j)] = ai.compose(aj).expectation(rho) - m[i] * m[j];
        }
    }
    Ok(MomentState::from_parts(
        statistics,
        m,
        hermitian_part(&y),
        z,
    ))
}

fn check_operators(full: &FullState, ops: &ModeOperatorSet) -> Result<()> {
    if full.mode_dims != ops.dims {
        return Err(Error::Dimension(format!(
            "state on {:?} but operators on {:?}",
            full.mode_dims, ops.dims
        )));
    }
    Ok(())
}

/// Result of an oracle integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub t: f64,
    pub state: FullState,
    /// Top-level population; zero for qubits and fermions.
    pub leakage: f64,
}

impl OracleRun {
    pub fn leakage_warning(&self) -> bool {
        self.leakage > LEAKAGE_WARN
    }
}

struct Generator<'a> {
    ops: &'a ModeOperatorSet,
    adjoints: Vec<SparseOperator>,
    /// `a_l^dag a_k`, indexed `[l][k]`.
    bilinears: Vec<Vec<SparseOperator>>,
}

impl<'a> Generator<'a> {
    fn new(ops: &'a ModeOperatorSet) -> Self {
        let adjoints: Vec<SparseOperator> = ops.lowering.iter().map(|a| a.adjoint()).collect();
        let bilinears = adjoints
            .iter()
            .map(|ad| ops.lowering.iter().map(|a| ad.compose(a)).collect())
            .collect();
        Generator {
            ops,
            adjoints,
            bilinears,
        }
    }

    /// `-i[Ĥ, ρ̂] + Σ Γ_kl a_l ρ̂ a_k^dag - ½ Σ Γ_lk {a_l^dag a_k, ρ̂}`.
    fn rhs(&self, model: &GKSLModel, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.ops.n();
        let d = rho.nrows();
        let h = model.hamiltonian(t)?;
        let gamma = model.gamma_matrix(t)?;
        // K = Σ (H - iΓ/2)_lk a_l^dag a_k, so that -i(Kρ - ρK^dag) carries
        // the commutator and the anticommutator
        let mut k_op = SparseOperator {
            dim: d,
            entries: Vec::new(),
        };
        for l in 0..n {
            for k in 0..n {
                let coef = h[(l, k)] - gamma[(l, k)] * C64::new(0.0, 0.5);
                if coef != ZERO {
                    k_op.entries.extend(
                        self.bilinears[l][k]
                            .entries
                            .iter()
                            .map(|&(r, c, v)| (r, c, coef * v)),
                    );
                }
            }
        }
        let i = C64::new(0.0, 1.0);
        let k_rho = k_op.mul_left(rho);
        let mut out = (&k_rho - k_rho.adjoint()) * (-i);
        let x: Vec<ComplexMatrix> = self.ops.lowering.iter().map(|a| a.mul_left(rho)).collect();
        for k in 0..n {
            let mut w = ComplexMatrix::zeros(d, d);
            for l in 0..n {
                let g = gamma[(k, l)];
                if g != ZERO {
                    w += &x[l] * g;
                }
            }
            out += self.adjoints[k].mul_right(&w);
        }
        Ok(out)
    }
}

/// Integrates the second-quantized master equation and returns the state at
/// every time in `times`.
pub fn integrate_second_quantized_grid(
    rho0: &FullState,
    model: &GKSLModel,
    ops: &ModeOperatorSet,
    times: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<OracleRun>> {
    check_operators(rho0, ops)?;
    if ops.n() != model.n() {
        return Err(Error::Dimension(format!(
            "operators for {} modes, model has {}",
            ops.n(),
            model.n()
        )));
    }
    let generator = Generator::new(ops);
    let rhos = integrate_grid(
        |t, rho| generator.rhs(model, t, rho),
        rho0.rho.clone(),
        0.0,
        times,
        &model.breakpoints(),
        policy,
    )?;
    times
        .iter()
        .zip(rhos)
        .map(|(&t, rho)| {
            let state = FullState::new(rho0.mode_dims.clone(), hermitian_part(&rho))?;
            let leakage = match ops.kind {
                ModeKind::Boson { .. } => state.top_level_population(),
                _ => 0.0,
            };
            if leakage > LEAKAGE_ERROR {
                return Err(Error::TruncationLeakage { leaked: leakage });
            }
            Ok(OracleRun { t, state, leakage })
        })
        .collect()
}

pub fn integrate_second_quantized(
    rho0: &FullState,
    model: &GKSLModel,
    ops: &ModeOperatorSet,
    t: f64,
    policy: &StepPolicy,
) -> Result<OracleRun> {
    Ok(integrate_second_quantized_grid(rho0, model, ops, &[t], policy)?.remove(0))
}

/// Product of truncated coherent states, renormalized after truncation.
pub fn coherent_state(alpha: &[C64], cutoff: usize) -> Result<ComplexVector> {
    if cutoff < 2 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    let dims = vec![cutoff; alpha.len()];
    let d = full_dimension(ModeKind::Boson { cutoff }, alpha.len())?;
    let per_mode: Vec<Vec<C64>> = alpha
        .iter()
        .map(|&a| {
            let mut c = vec![real(1.0)];
            for k in 1..cutoff {
                c.push(c[k - 1] * a / (k as f64).sqrt());
            }
            c
        })
        .collect();
    let mut v = ComplexVector::from_fn(d, |i, _| {
        digits(i, &dims)
            .iter()
            .zip(&per_mode)
            .fold(real(1.0), |acc, (&k, c)| acc * c[k])
    });
    let norm = v.norm();
    v.unscale_mut(norm);
    Ok(v)
}

/// Basis vector with the given occupation numbers.
pub fn fock_state(occupations: &[usize], mode_dims: &[usize]) -> Result<ComplexVector> {
    if occupations.len() != mode_dims.len()
        || occupations.iter().zip(mode_dims).any(|(&k, &d)| k >= d)
    {
        return Err(Error::Dimension(format!(
            "occupations {:?} do not fit {:?}",
            occupations, mode_dims
        )));
    }
    let d: usize = mode_dims.iter().product();
    let index = occupations
        .iter()
        .zip(mode_dims)
        .fold(0usize, |acc, (&k, &dim)| acc * dim + k);
    let mut v = ComplexVector::zeros(d);
    v[index] = real(1.0);
    Ok(v)
}

/// Total occupation of a basis index.
pub fn excitation_number(index: usize, mode_dims: &[usize]) -> usize {
    digits(index, mode_dims).iter().sum()
}
