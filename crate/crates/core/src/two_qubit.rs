//! Closed reduced model for two qubits in the collective basis
//! `{|E⟩, |𝟙⟩, |𝟚⟩, |G⟩}`, with `|𝟙⟩ = (|ge⟩ − |eg⟩)/√2` decaying at
//! `γ₀ − γˢ` and `|𝟚⟩ = (|ge⟩ + |eg⟩)/√2` at `γ₀ + γˢ`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingDecomposition, CouplingMatrices};
use crate::error::{Error, Result};
use crate::integrator::{integrate_rk4, uniform_grid, Dopri5, IntegratorStats};
use crate::lindblad::{fmt_num, EvolveOptions, Method};

const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitParams {
    pub gamma0: f64,
    pub gs: f64,
    #[serde(rename = "Ja")]
    pub ja: f64,
    #[serde(rename = "Js", default)]
    pub js: f64,
}

impl TwoQubitParams {
    pub fn new(gamma0: f64, gs: f64, ja: f64) -> Self {
        Self {
            gamma0,
            gs,
            ja,
            js: 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::Validation(format!("gamma0 must be positive, got {}", self.gamma0)));
        }
        if ![self.gs, self.ja, self.js].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("two-qubit couplings must be finite".into()));
        }
        if self.gs.abs() > self.gamma0 {
            return Err(Error::Validation(format!(
                "|gs| = {} exceeds gamma0 = {}: decoherence matrix not positive",
                self.gs.abs(),
                self.gamma0
            )));
        }
        Ok(())
    }

    /// `(Γ_𝟙, Γ_𝟚) = (γ₀ − γˢ, γ₀ + γˢ)`.
    pub fn mode_rates(&self) -> (f64, f64) {
        (self.gamma0 - self.gs, self.gamma0 + self.gs)
    }

    /// Full coupling matrices for the same pair (no antisymmetric dissipation).
    pub fn coupling_matrices(&self) -> Result<CouplingMatrices> {
        self.check()?;
        let mut d = CouplingDecomposition::zeros(2);
        d.set_pair(0, 1, self.js, self.ja, self.gs, 0.0);
        CouplingMatrices::from_decomposition(&d, self.gamma0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitState {
    pub rho_ee: f64,
    pub rho_11: f64,
    pub rho_22: f64,
    pub rho_gg: f64,
    pub re_rho_21: f64,
}

impl TwoQubitState {
    pub fn fully_excited() -> Self {
        Self {
            rho_ee: 1.0,
            rho_11: 0.0,
            rho_22: 0.0,
            rho_gg: 0.0,
            re_rho_21: 0.0,
        }
    }

    fn to_array(self) -> [f64; 5] {
        [self.rho_ee, self.rho_11, self.rho_22, self.rho_gg, self.re_rho_21]
    }

    fn from_array(y: &[f64]) -> Self {
        Self {
            rho_ee: y[0],
            rho_11: y[1],
            rho_22: y[2],
            rho_gg: y[3],
            re_rho_21: y[4],
        }
    }

    /// Describes the first broken invariant, if any.
    pub fn violation(&self) -> Option<String> {
        let p = [self.rho_ee, self.rho_11, self.rho_22, self.rho_gg];
        if let Some(v) = p.iter().find(|v| !(-PROB_TOL..=1.0 + PROB_TOL).contains(*v)) {
            return Some(format!("probability {v} outside [0, 1]"));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Some(format!("probabilities sum to {sum}"));
        }
        let bound = (self.rho_11.max(0.0) * self.rho_22.max(0.0)).sqrt() + PROB_TOL;
        if self.re_rho_21.abs() > bound {
            return Some(format!("|Re rho_21| = {} exceeds {bound}", self.re_rho_21.abs()));
        }
        None
    }

    /// `⟨σ_1⁺σ_1⁻⟩` and `⟨σ_2⁺σ_2⁻⟩`.
    pub fn populations(&self) -> (f64, f64) {
        let mid = 0.5 * (self.rho_11 + self.rho_22);
        (self.rho_ee + mid - self.re_rho_21, self.rho_ee + mid + self.re_rho_21)
    }
}

/// Time derivative of the reduced state. `Js` does not enter.
pub fn reduced_rhs(s: &TwoQubitState, p: &TwoQubitParams) -> TwoQubitState {
    let (g1, g2) = p.mode_rates();
    let ja = p.ja;
    let re21 = s.re_rho_21;
    TwoQubitState {
        rho_ee: -(g1 + g2) * s.rho_ee,
        rho_11: -g1 * s.rho_11 + g1 * s.rho_ee - ja * re21,
        rho_22: -g2 * s.rho_22 + g2 * s.rho_ee + ja * re21,
        rho_gg: g2 * s.rho_22 + g1 * s.rho_11,
        re_rho_21: 0.5 * (-ja * (s.rho_22 - s.rho_11) - (g1 + g2) * re21),
    }
}

/// `(R_1, R_2)` from the state and its derivative.
pub fn emission_rates(d: &TwoQubitState) -> (f64, f64) {
    let common = d.rho_ee - d.rho_gg;
    (
        0.5 * (2.0 * d.re_rho_21 - common),
        0.5 * (-2.0 * d.re_rho_21 - common),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitTrajectory {
    pub params: TwoQubitParams,
    pub times: Vec<f64>,
    pub states: Vec<TwoQubitState>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// `ΔR₁₂ = 2 Re ρ̇_𝟚𝟙`.
    pub delta_r12: Vec<f64>,
    pub stats: IntegratorStats,
}

/// Reduced evolution from `|E⟩`.
pub fn solve_two_qubit(p: &TwoQubitParams, opts: &EvolveOptions) -> Result<TwoQubitTrajectory> {
    solve_two_qubit_from(p, TwoQubitState::fully_excited(), opts)
}

/// Reduced evolution from an arbitrary state in the model's span. Times are
/// in units of `1/γ₀` and rates in units of `γ₀`.
pub fn solve_two_qubit_from(
    p: &TwoQubitParams,
    s0: TwoQubitState,
    opts: &EvolveOptions,
) -> Result<TwoQubitTrajectory> {
    p.check()?;
    if p.js != 0.0 && p.ja != 0.0 {
        // the mode splitting then rotates Re ρ_𝟚𝟙 into Im ρ_𝟚𝟙
        return Err(Error::Validation(
            "reduced two-qubit model is closed only for Js = 0 or Ja = 0".into(),
        ));
    }
    if let Some(v) = s0.violation() {
        return Err(Error::Validation(format!("initial state: {v}")));
    }
    let scaled = TwoQubitParams {
        gamma0: 1.0,
        gs: p.gs / p.gamma0,
        ja: p.ja / p.gamma0,
        js: p.js / p.gamma0,
    };
    let grid = uniform_grid(opts.t_end, opts.dt_out)?;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let d = reduced_rhs(&TwoQubitState::from_array(y), &scaled).to_array();
        dy.copy_from_slice(&d);
    };
    let sys = (5usize, rhs);
    let mut traj = TwoQubitTrajectory {
        params: *p,
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        r1: Vec::with_capacity(grid.len()),
        r2: Vec::with_capacity(grid.len()),
        delta_r12: Vec::with_capacity(grid.len()),
        stats: IntegratorStats::default(),
    };
    let observe = |t: f64, y: &[f64]| -> Result<()> {
        let s = TwoQubitState::from_array(y);
        if let Some(v) = s.violation() {
            return Err(Error::Integration { time: t, reason: v });
        }
        let d = reduced_rhs(&s, &scaled);
        let (r1, r2) = emission_rates(&d);
        traj.times.push(t);
        traj.states.push(s);
        traj.r1.push(r1);
        traj.r2.push(r2);
        traj.delta_r12.push(2.0 * d.re_rho_21);
        Ok(())
    };
    let y0 = s0.to_array().to_vec();
    let (_, stats) = match opts.method {
        Method::Dopri5 => Dopri5::new(opts.tol)
            .with_dense_output(opts.dense_output)
            .integrate(&sys, y0, &grid, observe)?,
        Method::Rk4 { step } => integrate_rk4(&sys, y0, &grid, step, observe)?,
    };
    traj.stats = stats;
    Ok(traj)
}

impl TwoQubitTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Full-engine columns for `N = 2` followed by the reduced state.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "tau,R_1,R_2,R_tot,delta_1N,pop_1,pop_2,rho_EE,rho_11,rho_22,rho_GG,re_rho_21"
        )?;
        for k in 0..self.len() {
            let s = &self.states[k];
            let (n1, n2) = s.populations();
            let row = [
                self.times[k],
                self.r1[k],
                self.r2[k],
                self.r1[k] + self.r2[k],
                self.r1[k] - self.r2[k],
                n1,
                n2,
                s.rho_ee,
                s.rho_11,
                s.rho_22,
                s.rho_gg,
                s.re_rho_21,
            ];
            let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conservation_of_probability() {
        let p = TwoQubitParams::new(1.0, 0.3, 1.2);
        let s = TwoQubitState {
            rho_ee: 0.2,
            rho_11: 0.3,
            rho_22: 0.4,
            rho_gg: 0.1,
            re_rho_21: 0.05,
        };
        let d = reduced_rhs(&s, &p);
        assert!((d.rho_ee + d.rho_11 + d.rho_22 + d.rho_gg).abs() < 1e-15);
    }

    #[test]
    fn excited_population_is_exponential() {
        let p = TwoQubitParams::new(1.0, 0.3, 0.3);
        let t = solve_two_qubit(&p, &EvolveOptions::new(5.0, 0.1)).unwrap();
        for (tau, s) in t.times.iter().zip(&t.states) {
            assert!((s.rho_ee - (-2.0 * tau).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn reciprocal_coherence_stays_zero() {
        let p = TwoQubitParams::new(1.0, 0.5, 0.0);
        let t = solve_two_qubit(&p, &EvolveOptions::new(10.0, 0.1)).unwrap();
        assert!(t.states.iter().all(|s| s.re_rho_21 == 0.0));
        assert!(t.delta_r12.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_unclosed_parameters() {
        let mut p = TwoQubitParams::new(1.0, 0.3, 0.3);
        p.js = 0.1;
        assert!(solve_two_qubit(&p, &EvolveOptions::new(1.0, 0.1)).is_err());
        assert!(TwoQubitParams::new(1.0, 1.5, 0.0).check().is_err());
    }
}
