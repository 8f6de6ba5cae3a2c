//! First and second moments under quadratic zero-temperature generators.
//!
//! For mode operators `a_j` with `m_j = <a_j>`, `Y_ij = <a_i^dag a_j>` and
//! `Z_ij = <a_i a_j>`, the generator built from `H` and `Γ = Σ |f_l><f_l|`
//! gives closed linear equations
//!
//! ```text
//! m' = -A m,   Y' = -conj(A) Y - Y A^T,   Z' = -A Z - Z A^T
//! ```
//!
//! solved either by integration or by `m = V m0`, `Y = conj(V) Y0 V^T`,
//! `Z = V Z0 V^T`. For bosons `Y` and `Z` are stored as central moments.
//! Fermionic means vanish by superselection and are not evolved.

use crate::dynamics::{accretive_matrix, propagate_grid, GKSLModel, Propagator};
use crate::error::{Error, Result};
use crate::integrate::{integrate_grid, StepPolicy};
use crate::linalg::{
    ensure_finite, hermitian_eigenvalues, hermitian_part, hermiticity_defect, max_abs,
    ComplexMatrix, ComplexVector,
};

pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    Ode,
    Propagator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    statistics: Statistics,
    m: ComplexVector,
    y: ComplexMatrix,
    z: ComplexMatrix,
}

impl MomentState {
    pub fn new(
        statistics: Statistics,
        m: ComplexVector,
        y: ComplexMatrix,
        z: ComplexMatrix,
    ) -> Result<Self> {
        let n = m.len();
        if y.shape() != (n, n) || z.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "moments of {n} modes need {n}x{n} Y and Z, got {:?} and {:?}",
                y.shape(),
                z.shape()
            )));
        }
        if m.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::NonFinite("m"));
        }
        ensure_finite(&y, "Y")?;
        ensure_finite(&z, "Z")?;
        let defect = hermiticity_defect(&y);
        if defect > MOMENT_TOL {
            return Err(Error::NotHermitian { what: "Y", defect });
        }
        let y = hermitian_part(&y);
        let ev = hermitian_eigenvalues(&y)?;
        if let Some(&min) = ev.first() {
            if min < -MOMENT_TOL {
                return Err(Error::NotPositive {
                    what: "Y",
                    min_eigenvalue: min,
                });
            }
        }
        let sign = match statistics {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        };
        let asym = max_abs(&(&z - z.transpose().scale(sign)));
        if asym > MOMENT_TOL {
            return Err(Error::Symmetry(format!(
                "Z violates its exchange symmetry by {asym:e}"
            )));
        }
        if statistics == Statistics::Fermion {
            if let Some(&max) = ev.last() {
                if max > 1.0 + MOMENT_TOL {
                    return Err(Error::AboveUnity {
                        what: "fermionic Y",
                        max_eigenvalue: max,
                    });
                }
            }
            if m.iter().any(|x| x.re != 0.0 || x.im != 0.0) {
                return Err(Error::Symmetry("fermionic means must vanish".into()));
            }
        }
        Ok(MomentState {
            statistics,
            m,
            y,
            z,
        })
    }

    pub fn vacuum(statistics: Statistics, n: usize) -> Self {
        MomentState {
            statistics,
            m: ComplexVector::zeros(n),
            y: ComplexMatrix::zeros(n, n),
            z: ComplexMatrix::zeros(n, n),
        }
    }

    /// Coherent state with amplitudes `alpha` (bosons only).
    pub fn coherent(alpha: ComplexVector) -> Self {
        let n = alpha.len();
        MomentState {
            statistics: Statistics::Boson,
            m: alpha,
            y: ComplexMatrix::zeros(n, n),
            z: ComplexMatrix::zeros(n, n),
        }
    }

    pub(crate) fn from_parts(
        statistics: Statistics,
        m: ComplexVector,
        y: ComplexMatrix,
        z: ComplexMatrix,
    ) -> Self {
        MomentState {
            statistics,
            m,
            y,
            z,
        }
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
    pub fn n(&self) -> usize {
        self.m.len()
    }
    pub fn m(&self) -> &ComplexVector {
        &self.m
    }
    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }
    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    /// Largest entrywise difference across `m`, `Y` and `Z`.
    pub fn max_abs_diff(&self, other: &MomentState) -> f64 {
        let dm = (&self.m - &other.m)
            .iter()
            .fold(0.0f64, |a, x| a.max(x.norm()));
        dm.max(max_abs(&(&self.y - &other.y)))
            .max(max_abs(&(&self.z - &other.z)))
    }
}

/// Applies `m -> V m`, `Y -> conj(V) Y V^T`, `Z -> V Z V^T`.
pub fn propagator_closed_form(ms0: &MomentState, v: &Propagator) -> Result<MomentState> {
    let n = ms0.n();
    if v.v.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "propagator is {}x{}, moments have {n} modes",
            v.v.nrows(),
            v.v.ncols()
        )));
    }
    let vt = v.v.transpose();
    let m = match ms0.statistics {
        Statistics::Boson => &v.v * &ms0.m,
        Statistics::Fermion => ComplexVector::zeros(n),
    };
    let y = hermitian_part(&(v.v.conjugate() * &ms0.y * &vt));
    let z = &v.v * &ms0.z * &vt;
    Ok(MomentState::from_parts(ms0.statistics, m, y, z))
}

fn pack(ms: &MomentState) -> ComplexMatrix {
    let n = ms.n();
    let mut p = ComplexMatrix::zeros(n, 2 * n + 1);
    p.column_mut(0).copy_from(&ms.m);
    p.view_mut((0, 1), (n, n)).copy_from(&ms.y);
    p.view_mut((0, n + 1), (n, n)).copy_from(&ms.z);
    p
}

fn unpack(statistics: Statistics, p: &ComplexMatrix) -> MomentState {
    let n = p.nrows();
    let m = match statistics {
        Statistics::Boson => p.column(0).into_owned(),
        Statistics::Fermion => ComplexVector::zeros(n),
    };
    MomentState::from_parts(
        statistics,
        m,
        hermitian_part(&p.view((0, 1), (n, n)).into_owned()),
        p.view((0, n + 1), (n, n)).into_owned(),
    )
}

fn moment_rhs(a: &ComplexMatrix, p: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let at = a.transpose();
    let m = p.column(0);
    let y = p.view((0, 1), (n, n));
    let z = p.view((0, n + 1), (n, n));
    let mut out = ComplexMatrix::zeros(n, 2 * n + 1);
    out.column_mut(0).copy_from(&(-(a * m)));
    out.view_mut((0, 1), (n, n))
        .copy_from(&(-(a.conjugate() * y) - y * &at));
    out.view_mut((0, n + 1), (n, n))
        .copy_from(&(-(a * z) - z * &at));
    out
}

pub fn evolve_moments(
    ms0: &MomentState,
    model: &GKSLModel,
    t: f64,
    method: MomentMethod,
    policy: &StepPolicy,
) -> Result<MomentState> {
    Ok(evolve_moments_grid(ms0, model, &[t], method, policy)?.remove(0))
}

/// Moments at every time of a sorted grid.
pub fn evolve_moments_grid(
    ms0: &MomentState,
    model: &GKSLModel,
    times: &[f64],
    method: MomentMethod,
    policy: &StepPolicy,
) -> Result<Vec<MomentState>> {
    if ms0.n() != model.n() {
        return Err(Error::Dimension(format!(
            "moments have {} modes, model has {}",
            ms0.n(),
            model.n()
        )));
    }
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    match method {
        MomentMethod::Propagator => propagate_grid(model, times, policy)?
            .iter()
            .map(|v| propagator_closed_form(ms0, v))
            .collect(),
        MomentMethod::Ode => Ok(integrate_grid(
            |s, p| Ok(moment_rhs(&accretive_matrix(model, s)?, p)),
            pack(ms0),
            0.0,
            times,
            &model.breakpoints(),
            policy,
        )?
        .iter()
        .map(|p| unpack(ms0.statistics, p))
        .collect()),
    }
}
