//! Explicit Runge–Kutta integration on flat state vectors.
//!
//! [`Dopri5`] is the Dormand–Prince 5(4) pair with a PI step-size controller
//! and Hairer's starting-step heuristic. [`integrate_rk4`] is a fixed-step
//! classic RK4 kept for cross-checks. Both report the state at every time of
//! a caller-supplied output grid; adaptive steps are shortened to land on
//! grid points exactly.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element type of an ODE state vector.
pub trait OdeElement:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl OdeElement for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl OdeElement for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Right-hand side `dy/dt = f(t, y)`.
pub trait OdeSystem<T: OdeElement> {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[T], dy: &mut [T]);
}

impl<T: OdeElement, F: Fn(f64, &[T], &mut [T])> OdeSystem<T> for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, t: f64, y: &[T], dy: &mut [T]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub min_step: f64,
    pub max_step: f64,
}

/// Validates an output grid: at least one point, finite, strictly increasing.
fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Validation("output grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(
            "output grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform grid `0, dt, 2dt, …, t_end` (the last point is `t_end` exactly).
pub fn uniform_grid(t_end: f64, dt_out: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Validation(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt_out > 0.0 && dt_out <= t_end) {
        return Err(Error::Validation(format!(
            "dt_out must lie in (0, t_end], got {dt_out}"
        )));
    }
    let steps = (t_end / dt_out - 1e-9).ceil() as usize;
    let mut grid: Vec<f64> = (0..steps).map(|k| k as f64 * dt_out).collect();
    grid.push(t_end);
    Ok(grid)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension (Hairer, Nørsett & Wanner, DOPRI5 `contd5`)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive Dormand–Prince 5(4) integrator.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Optional cap on the step size.
    pub max_step: Option<f64>,
    /// Report interior grid points from the 4th-order continuous extension
    /// instead of shortening steps to land on them. Only the final time is
    /// hit exactly.
    pub dense_output: bool,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_steps: 50_000_000,
            max_step: None,
            dense_output: false,
        }
    }

    pub fn with_dense_output(mut self, on: bool) -> Self {
        self.dense_output = on;
        self
    }

    fn error_norm<T: OdeElement>(&self, y: &[T], y_new: &[T], err: &[T]) -> f64 {
        let mut acc = 0.0;
        for ((a, b), e) in y.iter().zip(y_new).zip(err) {
            let sc = self.tol.atol + self.tol.rtol * a.magnitude().max(b.magnitude());
            let r = e.magnitude() / sc;
            acc += r * r;
        }
        (acc / y.len().max(1) as f64).sqrt()
    }

    fn initial_step<T: OdeElement, S: OdeSystem<T>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[T],
        f0: &[T],
        scratch: &mut [T],
        f1: &mut [T],
    ) -> f64 {
        let n = y0.len().max(1) as f64;
        let scale = |v: &T| self.tol.atol + self.tol.rtol * v.magnitude();
        let d0 = (y0.iter().map(|v| (v.magnitude() / scale(v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y0
            .iter()
            .zip(f0)
            .map(|(v, f)| (f.magnitude() / scale(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        if let Some(m) = self.max_step {
            h0 = h0.min(m);
        }
        for ((s, y), f) in scratch.iter_mut().zip(y0).zip(f0) {
            *s = *y + *f * h0;
        }
        sys.rhs(t0 + h0, scratch, f1);
        let d2 = (y0
            .iter()
            .zip(f0)
            .zip(f1.iter())
            .map(|((v, a), b)| ((*b - *a).magnitude() / scale(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        let mut h = (100.0 * h0).min(h1);
        if let Some(m) = self.max_step {
            h = h.min(m);
        }
        h
    }

    /// Integrates from `grid[0]` with initial state `y`, calling
    /// `observe(t, y)` at every grid time (including the first).
    pub fn integrate<T, S, O>(
        &self,
        sys: &S,
        mut y: Vec<T>,
        grid: &[f64],
        mut observe: O,
    ) -> Result<(Vec<T>, IntegratorStats)>
    where
        T: OdeElement,
        S: OdeSystem<T>,
        O: FnMut(f64, &[T]) -> Result<()>,
    {
        check_grid(grid)?;
        let n = sys.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        let mut stats = IntegratorStats {
            min_step: f64::INFINITY,
            ..Default::default()
        };
        let mut t = grid[0];
        observe(t, &y)?;
        if grid.len() == 1 {
            stats.min_step = 0.0;
            return Ok((y, stats));
        }

        let zero = T::default();
        let mut k1 = vec![zero; n];
        let mut k2 = vec![zero; n];
        let mut k3 = vec![zero; n];
        let mut k4 = vec![zero; n];
        let mut k5 = vec![zero; n];
        let mut k6 = vec![zero; n];
        let mut k7 = vec![zero; n];
        let mut tmp = vec![zero; n];
        let mut y_new = vec![zero; n];
        let mut err = vec![zero; n];

        sys.rhs(t, &y, &mut k1);
        stats.rhs_evals += 1;
        let mut h = self.initial_step(sys, t, &y, &k1, &mut tmp, &mut k2);
        stats.rhs_evals += 1;
        let mut err_prev: f64 = 1e-4;
        let mut next_out = 1;

        let t_final = grid[grid.len() - 1];
        while next_out < grid.len() {
            let target = if self.dense_output { t_final } else { grid[next_out] };
            let remaining = target - t;
            let hits_target = h >= remaining * (1.0 - 1e-12);
            let h_step = if hits_target { remaining } else { h };
            if h_step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    time: t,
                    reason: format!("step size underflow (h = {h_step:.3e})"),
                });
            }
            if stats.accepted_steps + stats.rejected_steps >= self.max_steps {
                return Err(Error::Integration {
                    time: t,
                    reason: format!("exceeded {} steps", self.max_steps),
                });
            }

            let hs = h_step;
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * (hs * A21);
            }
            sys.rhs(t + C2 * hs, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * hs;
            }
            sys.rhs(t + C3 * hs, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * hs;
            }
            sys.rhs(t + C4 * hs, &tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * hs;
            }
            sys.rhs(t + C5 * hs, &tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i]
                    + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * hs;
            }
            sys.rhs(t + hs, &tmp, &mut k6);
            for i in 0..n {
                y_new[i] = y[i]
                    + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * hs;
            }
            sys.rhs(t + hs, &y_new, &mut k7);
            stats.rhs_evals += 6;
            for i in 0..n {
                err[i] = (k1[i] * E1
                    + k3[i] * E3
                    + k4[i] * E4
                    + k5[i] * E5
                    + k6[i] * E6
                    + k7[i] * E7)
                    * hs;
            }
            let e = self.error_norm(&y, &y_new, &err);
            if !e.is_finite() || y_new.iter().any(|v| !v.is_finite_value()) {
                stats.rejected_steps += 1;
                h = hs * 0.1;
                continue;
            }

            if e <= 1.0 {
                stats.accepted_steps += 1;
                stats.min_step = stats.min_step.min(hs);
                stats.max_step = stats.max_step.max(hs);
                let t_new = if hits_target { target } else { t + hs };
                if self.dense_output {
                    while next_out < grid.len() && grid[next_out] < t_new {
                        let th = (grid[next_out] - t) / hs;
                        let th1 = 1.0 - th;
                        for i in 0..n {
                            let dy = y_new[i] - y[i];
                            let bspl = k1[i] * hs - dy;
                            let r4 = dy - k7[i] * hs - bspl;
                            let r5 = (k1[i] * D1
                                + k3[i] * D3
                                + k4[i] * D4
                                + k5[i] * D5
                                + k6[i] * D6
                                + k7[i] * D7)
                                * hs;
                            tmp[i] = y[i] + (dy + (bspl + (r4 + r5 * th1) * th) * th1) * th;
                        }
                        observe(grid[next_out], &tmp)?;
                        next_out += 1;
                    }
                }
                t = t_new;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // PI controller (Hairer's DOPRI5 constants)
                let fac = 0.9 * e.max(1e-10).powf(-0.17) * err_prev.powf(0.04);
                let proposal = hs * fac.clamp(0.2, 10.0);
                // a step shortened to hit the grid should not shrink the next one
                h = if hits_target { proposal.max(h) } else { proposal };
                err_prev = e.max(1e-4);
                if hits_target {
                    observe(t, &y)?;
                    next_out += 1;
                }
            } else {
                stats.rejected_steps += 1;
                let fac = (0.9 * e.powf(-0.2)).max(0.2);
                h = hs * fac;
            }
            if let Some(m) = self.max_step {
                h = h.min(m);
            }
        }
        if stats.min_step.is_infinite() {
            stats.min_step = 0.0;
        }
        Ok((y, stats))
    }
}

/// Classic fixed-step RK4; each output interval is split into equal
/// sub-steps no longer than `max_step`.
pub fn integrate_rk4<T, S, O>(
    sys: &S,
    mut y: Vec<T>,
    grid: &[f64],
    max_step: f64,
    mut observe: O,
) -> Result<(Vec<T>, IntegratorStats)>
where
    T: OdeElement,
    S: OdeSystem<T>,
    O: FnMut(f64, &[T]) -> Result<()>,
{
    check_grid(grid)?;
    if !(max_step > 0.0) {
        return Err(Error::Validation("RK4 step must be positive".into()));
    }
    let n = sys.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    let zero = T::default();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stats = IntegratorStats {
        min_step: f64::INFINITY,
        ..Default::default()
    };
    observe(grid[0], &y)?;
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let m = (span / max_step).ceil().max(1.0) as usize;
        let h = span / m as f64;
        stats.min_step = stats.min_step.min(h);
        stats.max_step = stats.max_step.max(h);
        for s in 0..m {
            let t = w[0] + s as f64 * h;
            sys.rhs(t, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * (0.5 * h);
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + k2[i] * (0.5 * h);
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + k3[i] * h;
            }
            sys.rhs(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
            stats.rhs_evals += 4;
            stats.accepted_steps += 1;
        }
        if y.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::Integration {
                time: w[1],
                reason: "non-finite state".into(),
            });
        }
        observe(w[1], &y)?;
    }
    if stats.min_step.is_infinite() {
        stats.min_step = 0.0;
    }
    Ok((y, stats))
}
