//! JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingFile, CouplingMatrices};
use crate::error::{Error, Result};
use crate::ferro::MaterialFile;
use crate::integrator::Tolerances;
use crate::lindblad::{EvolveOptions, Method, MAX_QUBITS};
use crate::two_qubit::TwoQubitParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Couplings,
    Evolve,
    TwoQubit,
    Modes,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Couplings => "couplings",
            Mode::Evolve => "evolve",
            Mode::TwoQubit => "two-qubit",
            Mode::Modes => "modes",
            Mode::Sweep => "sweep",
        }
    }
}

/// Source of the coupling matrices. Exactly one variant may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BathConfig {
    Explicit(CouplingFile),
    Ferromagnet(MaterialFile),
}

/// Array geometry overrides for the ferromagnet bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_q_nm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt_out")]
    pub dt_out: f64,
    #[serde(default = "default_true")]
    pub dense_output: bool,
    /// Fixed RK4 step; the adaptive integrator is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk4_step: Option<f64>,
}

fn default_rtol() -> f64 {
    1e-9
}
fn default_atol() -> f64 {
    1e-12
}
fn default_t_end() -> f64 {
    30.0
}
fn default_dt_out() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
            t_end: default_t_end(),
            dt_out: default_dt_out(),
            dense_output: true,
            rk4_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn options(&self) -> EvolveOptions {
        let mut o = EvolveOptions::new(self.t_end, self.dt_out);
        o.tol = Tolerances {
            rtol: self.rtol,
            atol: self.atol,
        };
        o.dense_output = self.dense_output;
        if let Some(step) = self.rk4_step {
            o.method = Method::Rk4 { step };
        }
        o
    }

    fn check(&self) -> Result<()> {
        let positive = |field: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("integrator.{field}"), format!("must be positive, got {v}")))
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("t_end", self.t_end)?;
        positive("dt_out", self.dt_out)?;
        if self.dt_out > self.t_end {
            return Err(Error::config("integrator.dt_out", "must not exceed t_end"));
        }
        if self.t_end / self.dt_out > 1e7 {
            return Err(Error::config("integrator.dt_out", "more than 1e7 output samples"));
        }
        if let Some(h) = self.rk4_step {
            positive("rk4_step", h)?;
            if self.t_end / h > 1e9 {
                return Err(Error::config("integrator.rk4_step", "more than 1e9 steps"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "k0")]
    K0,
    #[serde(rename = "N")]
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<ArrayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_qubit: Option<TwoQubitParams>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Worker threads for sweeps; defaults to the available cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            bath: None,
            array: None,
            two_qubit: None,
            integrator: IntegratorConfig::default(),
            sweep: None,
            output: default_output(),
            workers: None,
        }
    }
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| Error::config("mode", "no mode given"))
    }

    /// Ferromagnet material with the array overrides applied.
    pub fn material(&self) -> Result<MaterialFile> {
        match &self.bath {
            Some(BathConfig::Ferromagnet(m)) => {
                let mut m = m.clone();
                if let Some(a) = self.array {
                    m.n = a.n;
                    if let Some(aq) = a.a_q_nm {
                        m.a_q_nm = aq;
                    }
                }
                Ok(m)
            }
            _ => Err(Error::config("bath", "a ferromagnet bath is required")),
        }
    }

    /// Coupling matrices for the configured bath.
    pub fn couplings(&self) -> Result<CouplingMatrices> {
        match &self.bath {
            Some(BathConfig::Explicit(f)) => {
                CouplingMatrices::from_file(f).map_err(|e| Error::config("bath.explicit", e.to_string()))
            }
            Some(BathConfig::Ferromagnet(_)) => {
                let (p, arr) = self
                    .material()?
                    .resolve()
                    .map_err(|e| Error::config("bath.ferromagnet", e.to_string()))?;
                crate::ferro::coupling_matrices(&arr, &p)
            }
            None => Err(Error::config("bath", "no bath given")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.check()?;
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::config("workers", "must be at least 1"));
            }
        }
        if let Some(a) = self.array {
            if a.n == 0 || a.n > MAX_QUBITS {
                return Err(Error::config("array.N", format!("must lie in 1..={MAX_QUBITS}, got {}", a.n)));
            }
            if let Some(aq) = a.a_q_nm {
                if !(aq > 0.0 && aq.is_finite()) {
                    return Err(Error::config("array.a_q_nm", "must be positive"));
                }
            }
        }
        match &self.bath {
            Some(BathConfig::Explicit(f)) => {
                if let Some(a) = self.array {
                    if a.n != f.n {
                        return Err(Error::config(
                            "array.N",
                            format!("explicit couplings have n = {}, array says {}", f.n, a.n),
                        ));
                    }
                }
                CouplingMatrices::from_file(f).map_err(|e| Error::config("bath.explicit", e.to_string()))?;
            }
            Some(BathConfig::Ferromagnet(_)) => {
                let m = self.material()?;
                if m.n == 0 || m.n > MAX_QUBITS {
                    return Err(Error::config(
                        "bath.ferromagnet.N",
                        format!("must lie in 1..={MAX_QUBITS}, got {}", m.n),
                    ));
                }
                m.resolve().map_err(|e| Error::config("bath.ferromagnet", e.to_string()))?;
            }
            None => {}
        }
        if let Some(p) = &self.two_qubit {
            p.check().map_err(|e| Error::config("two_qubit", e.to_string()))?;
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "must not be empty"));
            }
            for v in &s.values {
                let ok = match s.variable {
                    SweepVariable::K0 => v.is_finite(),
                    SweepVariable::N => v.fract() == 0.0 && *v >= 1.0 && *v <= MAX_QUBITS as f64,
                };
                if !ok {
                    return Err(Error::config("sweep.values", format!("invalid value {v}")));
                }
            }
        }
        let Some(mode) = self.mode else {
            return Ok(());
        };
        match mode {
            Mode::Couplings | Mode::Evolve | Mode::Modes => {
                if self.bath.is_none() {
                    return Err(Error::config("bath", format!("required for mode {}", mode.name())));
                }
            }
            Mode::TwoQubit => {
                if self.two_qubit.is_none() {
                    return Err(Error::config("two_qubit", "required for mode two-qubit"));
                }
            }
            Mode::Sweep => {
                if self.sweep.is_none() {
                    return Err(Error::config("sweep", "required for mode sweep"));
                }
                if !matches!(self.bath, Some(BathConfig::Ferromagnet(_))) {
                    return Err(Error::config("bath", "sweeps need a ferromagnet bath"));
                }
            }
        }
        Ok(())
    }
}
