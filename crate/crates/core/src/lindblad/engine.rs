use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::kernel::{single_excitation_block, Liouvillian, PackedLayout};
use super::state::DensityMatrix;
use crate::coupling::{compute_hoppings, decompose_couplings, CouplingMatrices, HoppingAmplitudes, C64};
use crate::error::{Error, Result};
use crate::integrator::{integrate_rk4, uniform_grid, Dopri5, IntegratorStats, Tolerances};

/// Eigenvalues below this raise the positivity warning.
pub const POSITIVITY_WARN: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Dopri5,
    /// Fixed-step RK4 with the given step (in `1/γ₀`).
    Rk4 { step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt_out: f64,
    pub tol: Tolerances,
    pub method: Method,
    /// Number of evenly spaced output samples at which the minimum eigenvalue
    /// of `ρ` is computed.
    pub positivity_checks: usize,
    /// Sample the output grid from the integrator's continuous extension
    /// rather than forcing a step boundary at every output time.
    pub dense_output: bool,
}

impl EvolveOptions {
    pub fn new(t_end: f64, dt_out: f64) -> Self {
        Self {
            t_end,
            dt_out,
            tol: Tolerances::default(),
            method: Method::Dopri5,
            positivity_checks: 20,
            dense_output: true,
        }
    }
}

/// Observables sampled on the output grid. Times and rates are in units of
/// `1/γ₀` and `γ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTrajectory {
    pub n: usize,
    pub times: Vec<f64>,
    /// `rates[α][k]`: emission rate of qubit `α` at `times[k]`.
    pub rates: Vec<Vec<f64>>,
    pub r_tot: Vec<f64>,
    pub delta_1n: Vec<f64>,
    /// `populations[α][k] = ⟨σ_α⁺σ_α⁻⟩`.
    pub populations: Vec<Vec<f64>>,
    /// Row-major `N×N` matrix `⟨σ_a⁺σ_b⁻⟩` per sample.
    pub correlators: Vec<Vec<C64>>,
    /// Row-major `N×N` single-excitation block `⟨α|ρ|β⟩` per sample.
    pub single_excitation: Vec<Vec<C64>>,
    /// Time integral of `R_tot` from 0, integrated alongside `ρ`.
    pub emitted: Vec<f64>,
    /// Couplings the run used, in units of `γ₀`.
    pub couplings: CouplingMatrices,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionDiagnostics {
    pub integrator: IntegratorStats,
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub positivity_warning: bool,
    /// `|∫R_tot + Σ⟨σ⁺σ⁻⟩(τ_end) − Σ⟨σ⁺σ⁻⟩(0)|`.
    pub excitation_closure: f64,
    pub packed_len: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub trajectory: EmissionTrajectory,
    pub final_state: DensityMatrix,
    pub diagnostics: EvolutionDiagnostics,
}

/// Per-qubit emission rates from correlators (row-major `N×N`,
/// `c[a*n+b] = ⟨σ_a⁺σ_b⁻⟩`).
pub fn rates_from_correlators(c: &[C64], hop: &HoppingAmplitudes, gamma0: f64) -> Vec<f64> {
    let n = hop.n();
    (0..n)
        .map(|a| {
            let mut r = gamma0 * c[a * n + a].re;
            for b in 0..n {
                let g = match b.cmp(&a) {
                    std::cmp::Ordering::Greater => hop.left(a, b),
                    std::cmp::Ordering::Less => hop.right(b, a),
                    std::cmp::Ordering::Equal => continue,
                };
                // i·γ·c + c.c.
                r += -2.0 * (g * c[a * n + b]).im;
            }
            r
        })
        .collect()
}

/// Emission rate of every qubit in state `rho`, in the units of `m`.
pub fn emission_rates(rho: &DensityMatrix, m: &CouplingMatrices) -> Result<Vec<f64>> {
    let n = m.n();
    if rho.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.n_qubits(),
        });
    }
    let hop = compute_hoppings(&decompose_couplings(m)?);
    let mut c = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            c[a * n + b] = rho.correlator(a, b);
        }
    }
    Ok(rates_from_correlators(&c, &hop, m.gamma0()))
}

fn check_options(o: &EvolveOptions) -> Result<()> {
    if !(o.t_end > 0.0 && o.t_end.is_finite()) {
        return Err(Error::config("t_end", format!("must be positive, got {}", o.t_end)));
    }
    if !(o.dt_out > 0.0 && o.dt_out.is_finite()) {
        return Err(Error::config("dt_out", format!("must be positive, got {}", o.dt_out)));
    }
    if !(o.tol.rtol > 0.0 && o.tol.atol > 0.0) {
        return Err(Error::config("rtol", "tolerances must be positive"));
    }
    if let Method::Rk4 { step } = o.method {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config("method.step", "must be positive"));
        }
    }
    Ok(())
}

/// Integrates the master equation from `rho0` and samples emission
/// observables. Couplings are rescaled to `γ₀ = 1` first.
pub fn evolve(rho0: &DensityMatrix, m: &CouplingMatrices, opts: &EvolveOptions) -> Result<Evolution> {
    evolve_observed(rho0, m, opts, |_, _, _| Ok(()))
}

/// [`evolve`] with an extra callback that sees the packed state at every
/// output time.
pub fn evolve_observed<F>(
    rho0: &DensityMatrix,
    m: &CouplingMatrices,
    opts: &EvolveOptions,
    mut extra: F,
) -> Result<Evolution>
where
    F: FnMut(f64, &PackedLayout, &[C64]) -> Result<()>,
{
    let start = Instant::now();
    check_options(opts)?;
    let n = m.n();
    if rho0.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.n_qubits(),
        });
    }
    let tr = rho0.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Validation(format!("initial state has trace {tr}")));
    }
    let herm0 = rho0.hermiticity_residual();
    if herm0 > 1e-10 {
        return Err(Error::Validation(format!(
            "initial state is not Hermitian (residual {herm0:.3e})"
        )));
    }

    let mn = m.normalized();
    let hop = compute_hoppings(&decompose_couplings(&mn)?);
    let layout = PackedLayout::for_state(rho0)?;
    let liou = Liouvillian::new(&mn)?;
    let len = layout.len();
    let hermitian_path = layout.is_number_diagonal();

    let mut y = layout.pack(rho0)?;
    y.push(C64::new(0.0, 0.0));
    let grid = uniform_grid(opts.t_end, opts.dt_out)?;
    let check_every = (grid.len() / opts.positivity_checks.max(1)).max(1);

    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let (rho, d) = (&y[..len], &mut dy[..len]);
        if hermitian_path {
            liou.apply_hermitian(&layout, rho, d)
        } else {
            liou.apply(&layout, rho, d)
        }
        .expect("layout sized at construction");
        dy[len] = C64::new(liou.total_emission(&layout, rho), 0.0);
    };
    let sys = (len + 1, rhs);

    let mut traj = EmissionTrajectory {
        n,
        times: Vec::with_capacity(grid.len()),
        rates: vec![Vec::with_capacity(grid.len()); n],
        r_tot: Vec::with_capacity(grid.len()),
        delta_1n: Vec::with_capacity(grid.len()),
        populations: vec![Vec::with_capacity(grid.len()); n],
        correlators: Vec::with_capacity(grid.len()),
        single_excitation: Vec::with_capacity(grid.len()),
        emitted: Vec::with_capacity(grid.len()),
        couplings: mn.clone(),
    };
    let mut diag = EvolutionDiagnostics {
        min_eigenvalue: f64::INFINITY,
        packed_len: len,
        ..Default::default()
    };

    let observe = |t: f64, y: &[C64]| -> Result<()> {
        let rho = &y[..len];
        let k = traj.times.len();
        traj.times.push(t);
        let c = liou.correlators(&layout, rho);
        let rates = rates_from_correlators(&c, &hop, 1.0);
        for a in 0..n {
            traj.rates[a].push(rates[a]);
            traj.populations[a].push(c[a * n + a].re);
        }
        traj.r_tot.push(liou.total_emission(&layout, rho));
        traj.delta_1n.push(rates[0] - rates[n - 1]);
        traj.correlators.push(c);
        traj.single_excitation.push(single_excitation_block(&layout, rho));
        traj.emitted.push(y[len].re);
        extra(t, &layout, rho)?;

        diag.max_trace_drift = diag
            .max_trace_drift
            .max((layout.trace(rho) - C64::new(1.0, 0.0)).norm());
        diag.max_hermiticity_residual = diag
            .max_hermiticity_residual
            .max(layout.hermiticity_residual(rho));
        if k.is_multiple_of(check_every) || k + 1 == grid.len() {
            diag.min_eigenvalue = diag.min_eigenvalue.min(layout.min_eigenvalue(rho)?);
        }
        Ok(())
    };

    let (y, stats) = match opts.method {
        Method::Dopri5 => Dopri5::new(opts.tol)
            .with_dense_output(opts.dense_output)
            .integrate(&sys, y, &grid, observe)?,
        Method::Rk4 { step } => integrate_rk4(&sys, y, &grid, step, observe)?,
    };
    diag.integrator = stats;
    diag.positivity_warning = diag.min_eigenvalue < POSITIVITY_WARN;
    if diag.positivity_warning {
        log::warn!("density matrix eigenvalue {:.3e} below {POSITIVITY_WARN:e}", diag.min_eigenvalue);
    }
    let initial: f64 = traj.populations.iter().map(|p| p[0]).sum();
    let last = traj.times.len() - 1;
    let residual: f64 = traj.populations.iter().map(|p| p[last]).sum();
    diag.excitation_closure = (traj.emitted[last] + residual - initial).abs();
    let final_state = layout.unpack(&y[..len])?;
    diag.wall_seconds = start.elapsed().as_secs_f64();
    Ok(Evolution {
        trajectory: traj,
        final_state,
        diagnostics: diag,
    })
}

/// Exact `dR_tot/dτ` of state `rho`, in units of `γ₀²`.
pub fn total_emission_slope(rho: &DensityMatrix, m: &CouplingMatrices) -> Result<f64> {
    if rho.n_qubits() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: rho.n_qubits(),
        });
    }
    let mn = m.normalized();
    let layout = PackedLayout::for_state(rho)?;
    let l = Liouvillian::new(&mn)?;
    let packed = layout.pack(rho)?;
    let mut d = vec![C64::new(0.0, 0.0); layout.len()];
    l.apply(&layout, &packed, &mut d)?;
    Ok(l.total_emission(&layout, &d))
}

/// Convenience wrapper: evolution from `|e…e⟩`.
pub fn evolve_fully_excited(m: &CouplingMatrices, opts: &EvolveOptions) -> Result<Evolution> {
    evolve(&DensityMatrix::fully_excited(m.n())?, m, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonreciprocityMetrics {
    /// Pairs `(α, β)` with `α < β`, in the order of `delta_r`.
    pub pairs: Vec<(usize, usize)>,
    /// `delta_r[p][k] = R_αβ − R_βα` for pair `p` at sample `k`.
    pub delta_r: Vec<Vec<f64>>,
    pub delta_1n: Vec<f64>,
    pub peak_abs_delta_1n: f64,
    pub peak_time: f64,
}

pub fn nonreciprocity_metrics(traj: &EmissionTrajectory) -> Result<NonreciprocityMetrics> {
    let n = traj.n;
    let d = decompose_couplings(&traj.couplings)?;
    let mut pairs = Vec::new();
    let mut delta_r = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (js, ja) = (d.js[(a, b)], d.ja[(a, b)]);
            pairs.push((a, b));
            delta_r.push(
                traj.correlators
                    .iter()
                    .map(|c| {
                        let x = c[a * n + b];
                        -2.0 * js * x.im - 2.0 * ja * x.re
                    })
                    .collect(),
            );
        }
    }
    let (mut peak, mut at) = (0.0, traj.times.first().copied().unwrap_or(0.0));
    for (t, v) in traj.times.iter().zip(&traj.delta_1n) {
        if v.abs() > peak {
            peak = v.abs();
            at = *t;
        }
    }
    Ok(NonreciprocityMetrics {
        pairs,
        delta_r,
        delta_1n: traj.delta_1n.clone(),
        peak_abs_delta_1n: peak,
        peak_time: at,
    })
}

/// Fixed-width scientific notation with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

impl EmissionTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["tau".to_string()];
        h.extend((1..=self.n).map(|a| format!("R_{a}")));
        h.push("R_tot".into());
        h.push("delta_1N".into());
        h.extend((1..=self.n).map(|a| format!("pop_{a}")));
        h
    }

    pub fn csv_row(&self, k: usize) -> Vec<String> {
        let mut row = vec![fmt_num(self.times[k])];
        row.extend(self.rates.iter().map(|r| fmt_num(r[k])));
        row.push(fmt_num(self.r_tot[k]));
        row.push(fmt_num(self.delta_1n[k]));
        row.extend(self.populations.iter().map(|p| fmt_num(p[k])));
        row
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.csv_header().join(","))?;
        for k in 0..self.len() {
            writeln!(w, "{}", self.csv_row(k).join(","))?;
        }
        Ok(())
    }

    /// Largest `R_tot` and the time at which it occurs.
    pub fn peak_total_rate(&self) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (t, r) in self.times.iter().zip(&self.r_tot) {
            if *r > best.0 {
                best = (*r, *t);
            }
        }
        best
    }
}
