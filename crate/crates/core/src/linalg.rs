//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Matrices are `nalgebra` dense matrices over `Complex<f64>`. This module
//! adds the pieces the physics code needs on top: Hermitian
//! eigendecomposition with ascending eigenvalues, spectral matrix functions
//! with explicit domains, the matrix exponential and the spectral norm.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Inputs to [`hermitian_eigs`] may deviate from Hermitian by this much.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;
/// Eigenvalues in `[-SPECTRAL_CLIP, 0)` are treated as round-off zeros.
pub const SPECTRAL_CLIP: f64 = 1e-10;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `max |M - M^dag|` over all entries.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut defect = if m.nrows() == m.ncols() {
        0.0
    } else {
        f64::INFINITY
    };
    for i in 0..n {
        for j in i..n {
            defect = f64::max(defect, (m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// `(M + M^dag) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn max_abs_diff_vec(a: &ComplexVector, b: &ComplexVector) -> f64 {
    assert_eq!(a.len(), b.len(), "max_abs_diff_vec length mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition `M = U diag(λ) U^dag` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// `U diag(f(λ)) U^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fk = f(lambda);
            scaled.column_mut(k).scale_mut(fk);
        }
        scaled * u.adjoint()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized to `(M + M^dag)/2` before decomposing; anything
/// further than [`HERMITIAN_INPUT_TOL`] from Hermitian is rejected.
pub fn hermitian_eigs(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    let n = ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_INPUT_TOL * f64::max(1.0, max_abs(m)) {
        return Err(Error::NotHermitian {
            what: "matrix",
            defect,
        });
    }
    if n == 0 {
        return Ok(HermitianEigenSystem {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(m);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or(Error::NoConvergence {
            iterations: EIGEN_MAX_ITERATIONS,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigs(m)?.eigenvalues)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

/// Where a scalar function used in [`matrix_function`] is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Real,
    /// `[0, inf)`; eigenvalues in `[-SPECTRAL_CLIP, 0)` are clipped to 0.
    NonNegative,
    /// `[0, 1]` with clipping at both ends.
    UnitInterval,
}

impl Domain {
    /// Clip `x` into the domain or report it as outside.
    pub fn clip(self, x: f64, function: &'static str) -> Result<f64> {
        let out = |value| Error::Domain { function, value };
        match self {
            Domain::Real => Ok(x),
            Domain::NonNegative => {
                if x >= 0.0 {
                    Ok(x)
                } else if x >= -SPECTRAL_CLIP {
                    Ok(0.0)
                } else {
                    Err(out(x))
                }
            }
            Domain::UnitInterval => {
                if (0.0..=1.0).contains(&x) {
                    Ok(x)
                } else if (-SPECTRAL_CLIP..0.0).contains(&x) {
                    Ok(0.0)
                } else if x > 1.0 && x <= 1.0 + SPECTRAL_CLIP {
                    Ok(1.0)
                } else {
                    Err(out(x))
                }
            }
        }
    }
}

/// `f(M) = U diag(f(λ)) U^dag` for Hermitian `M`.
pub fn matrix_function(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    domain: Domain,
    name: &'static str,
) -> Result<ComplexMatrix> {
    let eig = hermitian_eigs(m)?;
    let clipped = eig
        .eigenvalues
        .iter()
        .map(|&x| domain.clip(x, name))
        .collect::<Result<Vec<_>>>()?;
    let sys = HermitianEigenSystem {
        eigenvalues: clipped,
        eigenvectors: eig.eigenvectors,
    };
    Ok(sys.map_spectrum(f))
}

/// `Tr f(M) = Σ f(λ_i)`, without forming `f(M)`.
pub fn trace_function(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    domain: Domain,
    name: &'static str,
) -> Result<f64> {
    hermitian_eigenvalues(m)?
        .into_iter()
        .map(|x| domain.clip(x, name).map(&f))
        .sum()
}

/// `exp(M)` by scaling and squaring with a degree-13 Padé approximant.
pub fn matrix_exponential(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    Ok(m.clone().exp())
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// `|u><v|`.
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&x| real(x)),
        ))
    }

    fn entropy_f(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            -x * x.ln()
        }
    }

    #[test]
    fn eigs_of_diagonal_are_sorted() {
        let eig = hermitian_eigs(&diag(&[1.0, 0.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0, 1.0]);
        // permutation matrix up to phases
        for i in 0..2 {
            let col_weight: f64 = eig
                .eigenvectors
                .column(i)
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            assert!((col_weight - 1.0).abs() < 1e-14);
        }
        assert!(eig.eigenvectors[(1, 0)].norm() > 0.999);
        assert!(eig.eigenvectors[(0, 1)].norm() > 0.999);
    }

    #[test]
    fn eigs_of_rank_one_projector() {
        let m = ComplexMatrix::from_element(2, 2, real(0.5));
        let eig = hermitian_eigs(&m).unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigs_reconstruct_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random::hermitian(6, &mut rng);
            let eig = hermitian_eigs(&m).unwrap();
            let residual = max_abs_diff(&eig.reconstruct(), &m);
            assert!(residual <= 1e-10 * f64::max(1.0, max_abs(&m)), "{residual}");
            let u = &eig.eigenvectors;
            let gram = u.adjoint() * u;
            assert!(max_abs_diff(&gram, &ComplexMatrix::identity(6, 6)) < 1e-10);
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigs_reject_non_square_and_non_hermitian() {
        assert!(matches!(
            hermitian_eigs(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = real(1.0);
        assert!(matches!(
            hermitian_eigs(&m),
            Err(Error::NotHermitian { .. })
        ));
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(hermitian_eigs(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn identity_function_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random::hermitian(5, &mut rng);
        let fm = matrix_function(&m, |x| x, Domain::Real, "id").unwrap();
        assert!(max_abs_diff(&fm, &m) <= 1e-10);
    }

    #[test]
    fn entropy_function_on_maximally_mixed_qubit() {
        let m = diag(&[0.5, 0.5]);
        let fm = matrix_function(&m, entropy_f, Domain::UnitInterval, "entropy").unwrap();
        let half_ln2 = std::f64::consts::LN_2 / 2.0;
        assert!((fm[(0, 0)].re - half_ln2).abs() < 1e-15);
        assert!((fm[(1, 1)].re - half_ln2).abs() < 1e-15);
        assert!((trace(&fm).re - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn entropy_trace_matches_eigenvalue_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rho = random::density_matrix(4, &mut rng);
            let eig = hermitian_eigs(&rho).unwrap();
            let oracle: f64 = eig.eigenvalues.iter().map(|&x| entropy_f(x.max(0.0))).sum();
            let fm = matrix_function(&rho, entropy_f, Domain::UnitInterval, "entropy").unwrap();
            assert!((trace(&fm).re - oracle).abs() <= 1e-10);
            assert!(is_hermitian(&fm, 1e-12));
            // commutes with the argument
            let comm = &fm * &rho - &rho * &fm;
            assert!(max_abs(&comm) <= 1e-9);
        }
    }

    #[test]
    fn clipping_rules() {
        let m = diag(&[-5e-11, 1.0]);
        let v = trace_function(&m, entropy_f, Domain::UnitInterval, "entropy").unwrap();
        assert_eq!(v, 0.0);
        let bad = diag(&[-1e-6, 1.0]);
        match trace_function(&bad, entropy_f, Domain::UnitInterval, "entropy") {
            Err(Error::Domain { value, .. }) => assert!((value + 1e-6).abs() < 1e-15),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn exponential_of_zero_and_diagonal() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(
            matrix_exponential(&z).unwrap(),
            ComplexMatrix::identity(3, 3)
        );
        let e = matrix_exponential(&diag(&[-1.0, -2.0])).unwrap();
        assert!((e[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)].re - (-2.0f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn exponential_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let mut m = random::ginibre(5, &mut rng);
            let scale = 10.0 / operator_norm(&m);
            m.scale_mut(scale);
            let prod = matrix_exponential(&m).unwrap() * matrix_exponential(&(-m)).unwrap();
            assert!(max_abs_diff(&prod, &ComplexMatrix::identity(5, 5)) <= 1e-9);
        }
    }

    /// Classical RK4 with a tiny fixed step, used only as an oracle here.
    fn exp_by_ode(m: &ComplexMatrix) -> ComplexMatrix {
        let steps = 20_000;
        let h = 1.0 / steps as f64;
        let mut x = ComplexMatrix::identity(m.nrows(), m.ncols());
        for _ in 0..steps {
            let k1 = m * &x;
            let k2 = m * (&x + &k1 * real(h / 2.0));
            let k3 = m * (&x + &k2 * real(h / 2.0));
            let k4 = m * (&x + &k3 * real(h));
            x += (k1 + k2 * real(2.0) + k3 * real(2.0) + k4) * real(h / 6.0);
        }
        x
    }

    #[test]
    fn exponential_matches_ode_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut m = random::ginibre(5, &mut rng);
        let scale = 2.0 / operator_norm(&m);
        m.scale_mut(scale);
        let residual = max_abs_diff(&matrix_exponential(&m).unwrap(), &exp_by_ode(&m));
        assert!(residual <= 1e-8, "{residual}");
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(4, 4)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&diag(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let m = random::ginibre(4, &mut rng);
        let gram = m.adjoint() * &m;
        let top = *hermitian_eigenvalues(&gram).unwrap().last().unwrap();
        assert!((operator_norm(&m) - top.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn operator_norm_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = random::ginibre(4, &mut rng);
        let u = random::unitary(4, &mut rng);
        let rotated = &u * &m * u.adjoint();
        assert!((operator_norm(&rotated) - operator_norm(&m)).abs() <= 1e-9);
    }
}
