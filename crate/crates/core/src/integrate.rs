//! Classical fourth-order Runge–Kutta on matrix-valued ODEs with
//! step-doubling error control.
//!
//! Every step is taken once with `h` and twice with `h/2`. If the two results
//! differ by more than the tolerance the step is halved and retried;
//! otherwise the half-step result, corrected by Richardson extrapolation, is
//! accepted. The step never exceeds the base step `1 / steps_per_unit`, and
//! never straddles a breakpoint or an output time.

use crate::error::{Error, Result};
use crate::linalg::{real, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    /// Base step is `1 / steps_per_unit`.
    pub steps_per_unit: f64,
    /// Absolute tolerance on the max-entry step-doubling difference.
    pub tolerance: f64,
    /// Smallest step tried before giving up.
    pub min_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            steps_per_unit: 1000.0,
            tolerance: 1e-10,
            min_step: 1e-12,
        }
    }
}

impl StepPolicy {
    pub fn base_step(&self) -> f64 {
        1.0 / self.steps_per_unit
    }
}

/// One RK4 step. Stage times at or beyond `segment_end` are pulled just
/// below it so piecewise coefficients are read from the current segment.
fn rk4_step<F>(
    rhs: &mut F,
    t: f64,
    y: &ComplexMatrix,
    h: f64,
    segment_end: f64,
) -> Result<ComplexMatrix>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    let at = |s: f64| {
        if s >= segment_end {
            segment_end.next_down()
        } else {
            s
        }
    };
    let k1 = rhs(at(t), y)?;
    let k2 = rhs(at(t + h / 2.0), &(y + &k1 * real(h / 2.0)))?;
    let k3 = rhs(at(t + h / 2.0), &(y + &k2 * real(h / 2.0)))?;
    let k4 = rhs(at(t + h), &(y + &k3 * real(h)))?;
    Ok(y + (k1 + (k2 + k3) * real(2.0) + k4) * real(h / 6.0))
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` and returns `y` at each time in
/// `outputs` (sorted, all `>= t0`).
pub fn integrate_grid<F>(
    mut rhs: F,
    y0: ComplexMatrix,
    t0: f64,
    outputs: &[f64],
    breakpoints: &[f64],
    policy: &StepPolicy,
) -> Result<Vec<ComplexMatrix>>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    for (i, w) in outputs.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(Error::UnsortedGrid(i + 1));
        }
    }
    if let Some(&first) = outputs.first() {
        if first < t0 {
            return Err(Error::NegativeTime(first - t0));
        }
    }

    let h_base = policy.base_step();
    let mut stops: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0)
        .chain(outputs.iter().copied())
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut out = Vec::with_capacity(outputs.len());
    let mut next_output = 0;
    let mut y = y0;
    let mut t = t0;
    let mut h = h_base;

    let emit = |t: f64, y: &ComplexMatrix, out: &mut Vec<ComplexMatrix>, next: &mut usize| {
        while *next < outputs.len() && outputs[*next] <= t {
            out.push(y.clone());
            *next += 1;
        }
    };
    emit(t, &y, &mut out, &mut next_output);

    for &stop in &stops {
        let segment_end = breakpoints
            .iter()
            .copied()
            .filter(|&b| b >= stop)
            .fold(f64::INFINITY, f64::min);
        while t < stop {
            let remaining = stop - t;
            // land exactly on the stop instead of leaving a sliver
            let (step, lands) = if h >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (h, false)
            };
            let full = rk4_step(&mut rhs, t, &y, step, segment_end)?;
            let half = rk4_step(&mut rhs, t, &y, step / 2.0, segment_end)?;
            let two_halves = rk4_step(&mut rhs, t + step / 2.0, &half, step / 2.0, segment_end)?;
            let err = max_diff(&full, &two_halves);
            if err > policy.tolerance {
                h = step / 2.0;
                if h < policy.min_step {
                    return Err(Error::StepUnderflow { t, step: h });
                }
                continue;
            }
            y = &two_halves + (&two_halves - &full) * real(1.0 / 15.0);
            t = if lands { stop } else { t + step };
            if err < policy.tolerance / 64.0 && h < h_base {
                h = (2.0 * h).min(h_base);
            }
        }
        emit(t, &y, &mut out, &mut next_output);
    }
    Ok(out)
}

/// Integrates from `t0` to `t1` and returns `y(t1)`.
pub fn integrate<F>(
    rhs: F,
    y0: ComplexMatrix,
    t0: f64,
    t1: f64,
    breakpoints: &[f64],
    policy: &StepPolicy,
) -> Result<ComplexMatrix>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    let mut out = integrate_grid(rhs, y0, t0, &[t1], breakpoints, policy)?;
    Ok(out.pop().expect("one output requested"))
}

/// Adaptive Simpson quadrature of a real function on `[a, b]`.
pub fn quadrature<F>(f: F, a: f64, b: f64, tolerance: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    struct Ctx<F> {
        f: F,
        max_depth: u32,
    }
    #[allow(clippy::too_many_arguments)]
    fn simpson<F: FnMut(f64) -> Result<f64>>(
        ctx: &mut Ctx<F>,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (ctx.f)(lm)?;
        let frm = (ctx.f)(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= ctx.max_depth {
            return Err(Error::Quadrature { a, b });
        }
        Ok(simpson(ctx, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?
            + simpson(ctx, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?)
    }

    if a == b {
        return Ok(0.0);
    }
    let mut ctx = Ctx { f, max_depth: 40 };
    let fa = (ctx.f)(a)?;
    let fb = (ctx.f)(b)?;
    let m = 0.5 * (a + b);
    let fm = (ctx.f)(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&mut ctx, a, b, fa, fm, fb, whole, tolerance, 0)
}
