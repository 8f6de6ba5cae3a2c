//! Zero-temperature GKSL dynamics of one-particle states.
//!
//! With jump operators `L_l(t) = |0><f_l(t)|` and a Hamiltonian `0 ⊕ H(t)`,
//! the master equation on `C ⊕ C^n` closes on the blocks of the state:
//!
//! ```text
//! d/dt psi = -A psi,   d/dt R = -A R - R A^dag,   A = ½ Σ |f_l><f_l| + i H
//! ```
//!
//! so everything follows from the propagator `V' = -A V`, `V(0) = I`:
//! `psi(t) = V psi(0)`, `R(t) = V R(0) V^dag`, `rho00 = 1 - Tr R`.
//!
//! [`integrate_direct`] integrates the full `(n+1) x (n+1)` master equation
//! instead and serves as the cross-check.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_grid, quadrature, StepPolicy};
use crate::linalg::{
    ensure_finite, ensure_square, hermitian_part, hermiticity_defect, matrix_exponential,
    min_eigenvalue, operator_norm, outer, real, trace, ComplexMatrix, ComplexVector, I,
};
use crate::one_particle::OneParticleState;

/// Tolerance on the Hermiticity of `H(t)`.
pub const HAMILTONIAN_TOL: f64 = 1e-10;
/// Tolerance on the spectrum of `A + A^dag`.
pub const ACCRETIVE_TOL: f64 = 1e-10;
/// `|V(t)|` may exceed 1 by this much.
pub const CONTRACTION_TOL: f64 = 1e-9;

type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;
type VectorsFn = Arc<dyn Fn(f64) -> Vec<ComplexVector> + Send + Sync>;
type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Constant {
        h: ComplexMatrix,
        decay: Vec<ComplexVector>,
    },
    /// `f_l(t) = sqrt(gamma(t)) |l>` for every mode.
    Homogeneous {
        h: ComplexMatrix,
        gamma: RateFn,
    },
    Piecewise {
        starts: Vec<f64>,
        segments: Vec<(ComplexMatrix, Vec<ComplexVector>)>,
    },
    Function {
        h: MatrixFn,
        decay: VectorsFn,
    },
}

/// Hamiltonian `H(t)` and decay vectors `f_l(t)` of a zero-temperature GKSL
/// generator on `n` modes.
#[derive(Clone)]
pub struct GKSLModel {
    n: usize,
    source: Source,
}

impl fmt::Debug for GKSLModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Constant { .. } => "constant",
            Source::Homogeneous { .. } => "homogeneous",
            Source::Piecewise { .. } => "piecewise",
            Source::Function { .. } => "function",
        };
        f.debug_struct("GKSLModel")
            .field("n", &self.n)
            .field("kind", &kind)
            .finish()
    }
}

fn check_hamiltonian(h: &ComplexMatrix, n: usize) -> Result<()> {
    if h.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "H must be {n}x{n}, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    ensure_finite(h, "H")?;
    let defect = hermiticity_defect(h);
    if defect > HAMILTONIAN_TOL {
        return Err(Error::NotHermitian { what: "H", defect });
    }
    Ok(())
}

fn check_decay(decay: &[ComplexVector], n: usize) -> Result<()> {
    for f in decay {
        if f.len() != n {
            return Err(Error::Dimension(format!(
                "decay vector has length {}, expected {n}",
                f.len()
            )));
        }
        if f.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("decay vector"));
        }
    }
    Ok(())
}

impl GKSLModel {
    pub fn constant(h: ComplexMatrix, decay: Vec<ComplexVector>) -> Result<Self> {
        let n = ensure_square(&h, "H")?;
        check_hamiltonian(&h, n)?;
        check_decay(&decay, n)?;
        Ok(GKSLModel {
            n,
            source: Source::Constant { h, decay },
        })
    }

    /// Homogeneous reservoir: `f_l(t) = sqrt(gamma(t)) |l>`, `l = 1..n`, with a
    /// constant Hamiltonian.
    pub fn homogeneous(
        h: ComplexMatrix,
        gamma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = ensure_square(&h, "H")?;
        check_hamiltonian(&h, n)?;
        Ok(GKSLModel {
            n,
            source: Source::Homogeneous {
                h,
                gamma: Arc::new(gamma),
            },
        })
    }

    /// Piecewise-constant coefficients; segment `k` applies on
    /// `[starts[k], starts[k+1])`. The first segment also covers `t < starts[0]`.
    pub fn piecewise(
        starts: Vec<f64>,
        segments: Vec<(ComplexMatrix, Vec<ComplexVector>)>,
    ) -> Result<Self> {
        if starts.is_empty() || starts.len() != segments.len() {
            return Err(Error::Dimension(format!(
                "{} segment starts for {} segments",
                starts.len(),
                segments.len()
            )));
        }
        for (i, w) in starts.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::UnsortedGrid(i + 1));
            }
        }
        let n = ensure_square(&segments[0].0, "H")?;
        for (h, decay) in &segments {
            check_hamiltonian(h, n)?;
            check_decay(decay, n)?;
        }
        Ok(GKSLModel {
            n,
            source: Source::Piecewise { starts, segments },
        })
    }

    /// Arbitrary coefficient functions; checked whenever they are sampled.
    pub fn from_fn(
        n: usize,
        h: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        decay: impl Fn(f64) -> Vec<ComplexVector> + Send + Sync + 'static,
    ) -> Self {
        GKSLModel {
            n,
            source: Source::Function {
                h: Arc::new(h),
                decay: Arc::new(decay),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_time_independent(&self) -> bool {
        match &self.source {
            Source::Constant { .. } => true,
            Source::Piecewise { segments, .. } => segments.len() == 1,
            _ => false,
        }
    }

    /// Times where the coefficients may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.source {
            Source::Piecewise { starts, .. } => starts[1..].to_vec(),
            _ => Vec::new(),
        }
    }

    fn segment(starts: &[f64], t: f64) -> usize {
        starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn hamiltonian(&self, t: f64) -> Result<ComplexMatrix> {
        let h = match &self.source {
            Source::Constant { h, .. } | Source::Homogeneous { h, .. } => return Ok(h.clone()),
            Source::Piecewise { starts, segments } => {
                return Ok(segments[Self::segment(starts, t)].0.clone())
            }
            Source::Function { h, .. } => h(t),
        };
        check_hamiltonian(&h, self.n)?;
        Ok(h)
    }

    pub fn decay_vectors(&self, t: f64) -> Result<Vec<ComplexVector>> {
        match &self.source {
            Source::Constant { decay, .. } => Ok(decay.clone()),
            Source::Homogeneous { gamma, .. } => {
                let g = gamma(t);
                if !(g >= 0.0) {
                    return Err(Error::NegativeRate { t, value: g });
                }
                let amp = g.sqrt();
                Ok((0..self.n)
                    .map(|l| {
                        let mut v = ComplexVector::zeros(self.n);
                        v[l] = real(amp);
                        v
                    })
                    .collect())
            }
            Source::Piecewise { starts, segments } => {
                Ok(segments[Self::segment(starts, t)].1.clone())
            }
            Source::Function { decay, .. } => {
                let d = decay(t);
                check_decay(&d, self.n)?;
                Ok(d)
            }
        }
    }

    /// `Γ(t) = Σ_l |f_l(t)><f_l(t)|`.
    pub fn gamma_matrix(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.n;
        Ok(self
            .decay_vectors(t)?
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, f| acc + outer(f, f)))
    }

    /// Samples `H` and `A` on `[0, t_final]` and reports the first problem.
    pub fn validate_window(&self, t_final: f64, samples: usize) -> Result<()> {
        let samples = samples.max(2);
        for k in 0..samples {
            let t = t_final * k as f64 / (samples - 1) as f64;
            accretive_matrix(self, t)?;
        }
        Ok(())
    }
}

/// `A(t) = ½ Γ(t) + i H(t)`, with accretivity verified spectrally.
pub fn accretive_matrix(model: &GKSLModel, t: f64) -> Result<ComplexMatrix> {
    let h = model.hamiltonian(t)?;
    let gamma = model.gamma_matrix(t)?;
    let a = gamma.scale(0.5) + h * I;
    let min = min_eigenvalue(&(&a + a.adjoint()))?;
    if min < -ACCRETIVE_TOL {
        return Err(Error::NotPositive {
            what: "A + A^dag",
            min_eigenvalue: min,
        });
    }
    Ok(a)
}

/// `V(t)` solving `V' = -A(t) V`, `V(0) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub t: f64,
    pub v: ComplexMatrix,
}

impl Propagator {
    pub fn identity(n: usize) -> Self {
        Propagator {
            t: 0.0,
            v: ComplexMatrix::identity(n, n),
        }
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.v)
    }

    /// `psi -> V psi`, `R -> V R V^dag`, `rho00 = 1 - Tr R`.
    pub fn apply(&self, s: &OneParticleState) -> Result<OneParticleState> {
        if s.n() != self.v.nrows() {
            return Err(Error::Dimension(format!(
                "propagator is {0}x{0}, state has {1} modes",
                self.v.nrows(),
                s.n()
            )));
        }
        let psi = &self.v * s.psi();
        let r = hermitian_part(&(&self.v * s.r() * self.v.adjoint()));
        let rho00 = 1.0 - trace(&r).re;
        Ok(OneParticleState::from_blocks(rho00, psi, r))
    }

    fn checked(self) -> Result<Self> {
        let norm = self.norm();
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::ContractionViolated { t: self.t, norm });
        }
        Ok(self)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        if i > 0 && t < times[i - 1] {
            return Err(Error::UnsortedGrid(i));
        }
    }
    Ok(())
}

/// Propagator at `t_final`; time-independent models use `exp(-A t)`.
pub fn propagate(model: &GKSLModel, t_final: f64, policy: &StepPolicy) -> Result<Propagator> {
    Ok(propagate_grid(model, &[t_final], policy)?.remove(0))
}

/// Propagator at `t_final` by ODE integration regardless of time dependence.
pub fn propagate_ode(model: &GKSLModel, t_final: f64, policy: &StepPolicy) -> Result<Propagator> {
    check_times(&[t_final])?;
    let n = model.n();
    let v = integrate(
        |t, v| Ok(-(accretive_matrix(model, t)? * v)),
        ComplexMatrix::identity(n, n),
        0.0,
        t_final,
        &model.breakpoints(),
        policy,
    )?;
    Propagator { t: t_final, v }.checked()
}

/// Propagators at every time of a sorted grid.
pub fn propagate_grid(
    model: &GKSLModel,
    times: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<Propagator>> {
    check_times(times)?;
    let n = model.n();
    if model.is_time_independent() {
        let a = accretive_matrix(model, 0.0)?;
        return times
            .iter()
            .map(|&t| {
                let v = matrix_exponential(&(-&a * real(t)))?;
                Propagator { t, v }.checked()
            })
            .collect();
    }
    let vs = integrate_grid(
        |t, v| Ok(-(accretive_matrix(model, t)? * v)),
        ComplexMatrix::identity(n, n),
        0.0,
        times,
        &model.breakpoints(),
        policy,
    )?;
    times
        .iter()
        .zip(vs)
        .map(|(&t, v)| Propagator { t, v }.checked())
        .collect()
}

fn check_state_model(s: &OneParticleState, model: &GKSLModel) -> Result<()> {
    if s.n() != model.n() {
        return Err(Error::Dimension(format!(
            "state has {} modes, model has {}",
            s.n(),
            model.n()
        )));
    }
    Ok(())
}

/// State at time `t` through the propagator.
pub fn evolve_state(
    s0: &OneParticleState,
    model: &GKSLModel,
    t: f64,
    policy: &StepPolicy,
) -> Result<OneParticleState> {
    check_state_model(s0, model)?;
    propagate(model, t, policy)?.apply(s0)
}

pub fn evolve_state_grid(
    s0: &OneParticleState,
    model: &GKSLModel,
    times: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<(Propagator, OneParticleState)>> {
    check_state_model(s0, model)?;
    propagate_grid(model, times, policy)?
        .into_iter()
        .map(|v| {
            let s = v.apply(s0)?;
            Ok((v, s))
        })
        .collect()
}

/// Right-hand side of the master equation on `C ⊕ C^n`, written out term by
/// term with `L_l = |0><f_l|`.
pub fn master_equation_rhs(
    model: &GKSLModel,
    t: f64,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = model.n();
    let h = model.hamiltonian(t)?;
    let mut big_h = ComplexMatrix::zeros(n + 1, n + 1);
    big_h.view_mut((1, 1), (n, n)).copy_from(&h);
    let mut out = (&big_h * rho - rho * &big_h) * (-I);
    for f in model.decay_vectors(t)? {
        let mut l = ComplexMatrix::zeros(n + 1, n + 1);
        for k in 0..n {
            l[(0, k + 1)] = f[k].conj();
        }
        let ld = l.adjoint();
        let ldl = &ld * &l;
        out += &l * rho * &ld - (&ldl * rho + rho * &ldl).scale(0.5);
    }
    Ok(out)
}

/// State at time `t` by integrating the full master equation.
pub fn integrate_direct(
    s0: &OneParticleState,
    model: &GKSLModel,
    t: f64,
    policy: &StepPolicy,
) -> Result<OneParticleState> {
    Ok(integrate_direct_grid(s0, model, &[t], policy)?.remove(0))
}

pub fn integrate_direct_grid(
    s0: &OneParticleState,
    model: &GKSLModel,
    times: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<OneParticleState>> {
    check_state_model(s0, model)?;
    check_times(times)?;
    let rhos = integrate_grid(
        |t, rho| master_equation_rhs(model, t, rho),
        s0.assemble(),
        0.0,
        times,
        &model.breakpoints(),
        policy,
    )?;
    Ok(rhos
        .into_iter()
        .map(|rho| {
            let n = model.n();
            let rho = hermitian_part(&rho);
            OneParticleState::from_blocks(
                rho[(0, 0)].re,
                rho.view((1, 0), (n, 1)).column(0).into_owned(),
                rho.view((1, 1), (n, n)).into_owned(),
            )
        })
        .collect())
}

/// `V(t) psi0`, the solution of `psi' = -A psi`.
pub fn pure_state_evolution(
    psi0: &ComplexVector,
    model: &GKSLModel,
    t: f64,
    policy: &StepPolicy,
) -> Result<ComplexVector> {
    if psi0.len() != model.n() {
        return Err(Error::Dimension(format!(
            "vector has length {}, model has {} modes",
            psi0.len(),
            model.n()
        )));
    }
    Ok(propagate(model, t, policy)?.v * psi0)
}

/// Ground population for a homogeneous reservoir,
/// `rho00(t) = 1 - exp(-∫_0^t γ) (1 - rho00(0))`.
pub fn homogeneous_ground_population(
    gamma: impl Fn(f64) -> f64,
    rho00_0: f64,
    t: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho00_0) {
        return Err(Error::Domain {
            function: "initial ground population",
            value: rho00_0,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let integral = quadrature(
        |s| {
            let g = gamma(s);
            if g >= 0.0 {
                Ok(g)
            } else {
                Err(Error::NegativeRate { t: s, value: g })
            }
        },
        0.0,
        t,
        1e-12,
    )?;
    Ok(1.0 - (-integral).exp() * (1.0 - rho00_0))
}
