//! One-particle density matrices on `C ⊕ C^n`.
//!
//! A state is stored in block form
//!
//! ```text
//!     ( rho00  <psi| )
//!     ( |psi>   R    )
//! ```
//!
//! with the distinguished vacuum index 0 and excited modes `1..=n`.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite, ensure_square, hermitian_part, hermiticity_defect, min_eigenvalue, real, trace,
    ComplexMatrix, ComplexVector, C64,
};

/// Tolerance on Hermiticity and trace for user-supplied blocks.
pub const INPUT_TOL: f64 = 1e-8;
/// Zero threshold for the strictly-one-particle predicate.
pub const STRICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleState {
    rho00: f64,
    psi: ComplexVector,
    r: ComplexMatrix,
}

impl OneParticleState {
    /// Validating constructor.
    ///
    /// `R` is symmetrized after the Hermiticity check passes, so internal
    /// blocks are Hermitian to machine precision.
    pub fn new(rho00: f64, psi: ComplexVector, r: ComplexMatrix) -> Result<Self> {
        let n = ensure_square(&r, "R")?;
        if psi.len() != n {
            return Err(Error::Dimension(format!(
                "psi has length {} but R is {n}x{n}",
                psi.len()
            )));
        }
        if !rho00.is_finite() {
            return Err(Error::NonFinite("rho00"));
        }
        if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("psi"));
        }
        ensure_finite(&r, "R")?;

        let defect = hermiticity_defect(&r);
        if defect > INPUT_TOL {
            return Err(Error::NotHermitian { what: "R", defect });
        }
        let r = hermitian_part(&r);
        let expected = 1.0 - trace(&r).re;
        if (rho00 - expected).abs() > INPUT_TOL {
            return Err(Error::TraceMismatch { rho00, expected });
        }
        let state = OneParticleState { rho00, psi, r };
        let min = min_eigenvalue(&state.assemble())?;
        if min < -INPUT_TOL {
            return Err(Error::NotPositive {
                what: "one-particle density matrix",
                min_eigenvalue: min,
            });
        }
        Ok(state)
    }

    /// Builds a state from blocks that the caller guarantees are consistent,
    /// e.g. the output of a trace-preserving map. `R` must be Hermitian.
    pub(crate) fn from_blocks(rho00: f64, psi: ComplexVector, r: ComplexMatrix) -> Self {
        debug_assert_eq!(psi.len(), r.nrows());
        OneParticleState { rho00, psi, r }
    }

    /// `|0><0|` on `n` modes.
    pub fn vacuum(n: usize) -> Self {
        OneParticleState {
            rho00: 1.0,
            psi: ComplexVector::zeros(n),
            r: ComplexMatrix::zeros(n, n),
        }
    }

    /// `0 ⊕ R` for a density matrix `R`.
    pub fn strictly(r: ComplexMatrix) -> Result<Self> {
        let n = ensure_square(&r, "R")?;
        let rho00 = 1.0 - trace(&r).re;
        if rho00.abs() > INPUT_TOL {
            return Err(Error::TraceMismatch {
                rho00: 0.0,
                expected: rho00,
            });
        }
        Self::new(0.0, ComplexVector::zeros(n), r)
    }

    /// `|l><l|` for an excited mode `l` in `1..=n`.
    pub fn excited(n: usize, l: usize) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::IndexOutOfRange { index: l, n });
        }
        let mut r = ComplexMatrix::zeros(n, n);
        r[(l - 1, l - 1)] = real(1.0);
        Ok(OneParticleState {
            rho00: 0.0,
            psi: ComplexVector::zeros(n),
            r,
        })
    }

    pub fn from_pure(phi: &OneParticlePureState) -> Self {
        let rho = phi.density();
        Self::split(&rho)
    }

    /// Inverse of [`assemble`](Self::assemble); validates the result.
    pub fn disassemble(m: &ComplexMatrix) -> Result<Self> {
        let d = ensure_square(m, "density matrix")?;
        if d == 0 {
            return Err(Error::Dimension("density matrix is empty".into()));
        }
        let s = Self::split(m);
        Self::new(s.rho00, s.psi, s.r)
    }

    fn split(m: &ComplexMatrix) -> Self {
        let n = m.nrows() - 1;
        OneParticleState {
            rho00: m[(0, 0)].re,
            psi: m.view((1, 0), (n, 1)).column(0).into_owned(),
            r: m.view((1, 1), (n, n)).into_owned(),
        }
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    pub fn rho00(&self) -> f64 {
        self.rho00
    }

    pub fn psi(&self) -> &ComplexVector {
        &self.psi
    }

    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn into_blocks(self) -> (f64, ComplexVector, ComplexMatrix) {
        (self.rho00, self.psi, self.r)
    }

    /// The full `(n+1) x (n+1)` matrix, index 0 first.
    pub fn assemble(&self) -> ComplexMatrix {
        let n = self.n();
        let mut m = ComplexMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = real(self.rho00);
        for l in 0..n {
            m[(l + 1, 0)] = self.psi[l];
            m[(0, l + 1)] = self.psi[l].conj();
        }
        m.view_mut((1, 1), (n, n)).copy_from(&self.r);
        m
    }

    /// `rho00 = 0` and `psi = 0`, i.e. the state is `0 ⊕ R`.
    pub fn is_strictly_one_particle(&self) -> bool {
        self.psi.norm() <= STRICT_TOL && self.rho00.abs() <= STRICT_TOL
    }
}

/// Pure state `phi0 |0> + |varphi>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticlePureState {
    phi0: C64,
    varphi: ComplexVector,
}

pub const NORM_TOL: f64 = 1e-10;

impl OneParticlePureState {
    pub fn new(phi0: C64, varphi: ComplexVector) -> Result<Self> {
        if !(phi0.re.is_finite() && phi0.im.is_finite())
            || varphi
                .iter()
                .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("pure state"));
        }
        let norm_sqr = phi0.norm_sqr() + varphi.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(OneParticlePureState { phi0, varphi })
    }

    /// From the `(n+1)`-vector `(phi0, varphi_1, ..., varphi_n)`.
    pub fn from_vector(v: &ComplexVector) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Dimension("pure state vector is empty".into()));
        }
        Self::new(v[0], v.rows(1, v.len() - 1).into_owned())
    }

    pub fn n(&self) -> usize {
        self.varphi.len()
    }

    pub fn phi0(&self) -> C64 {
        self.phi0
    }

    pub fn varphi(&self) -> &ComplexVector {
        &self.varphi
    }

    pub fn to_vector(&self) -> ComplexVector {
        let n = self.n();
        ComplexVector::from_fn(n + 1, |k, _| {
            if k == 0 {
                self.phi0
            } else {
                self.varphi[k - 1]
            }
        })
    }

    pub fn density(&self) -> ComplexMatrix {
        let v = self.to_vector();
        &v * v.adjoint()
    }
}
