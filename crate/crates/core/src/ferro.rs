//! Qubit array above a thin non-centrosymmetric ferromagnetic film.
//!
//! The film's spin waves follow `ω(k) = J k² − 2 D k_x + Δ`. A qubit at
//! frequency `ω_qi` inside the magnon band sees an on-shell ring
//! `|k − k₀x̂| = k₁` with `k₀ = D/J` and `k₁² = k₀² + (ω_qi − Δ)/J`, which
//! yields closed-form Bessel kernels for the couplings in the limit where the
//! qubit–film distance is negligible against `λ₁ = a/k₁`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::coupling::{CouplingMatrices, QubitArray, C64};
use crate::error::{Error, Result};

/// Planck constant in erg·s, used only for the absolute `γ₀` label.
const PLANCK_ERG_S: f64 = 6.626_070_15e-27;

/// NV-centre zero-field splitting (GHz).
pub const NV_ZERO_FIELD_SPLITTING_GHZ: f64 = 2.87;
/// Electron gyromagnetic ratio (MHz/G); default for both the qubit and the film.
pub const ELECTRON_GYROMAGNETIC_MHZ_PER_G: f64 = 2.8;

/// Material and geometry parameters of the ferromagnetic reservoir.
///
/// Frequencies are stored in Hz, lengths in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerroBathParams {
    /// Symmetric exchange `J` (Hz).
    pub exchange_hz: f64,
    /// Dzyaloshinskii–Moriya strength `D` (Hz).
    pub dmi_hz: f64,
    /// Magnon gap `Δ` at the operating field (Hz).
    pub gap_hz: f64,
    /// Film lattice constant (nm).
    pub a_nm: f64,
    /// Spin density (G²·cm·s).
    pub spin_density: f64,
    /// Spin stiffness (Hz·m²).
    pub rho_s: f64,
    /// Film thickness (nm).
    pub thickness_nm: f64,
    /// Qubit gyromagnetic ratio (MHz/G).
    pub gtilde_mhz_per_g: f64,
    /// Film gyromagnetic ratio (MHz/G).
    pub gfilm_mhz_per_g: f64,
    /// External field (G).
    pub b0_g: f64,
}

impl FerroBathParams {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("exchange_hz", self.exchange_hz),
            ("a_nm", self.a_nm),
            ("thickness_nm", self.thickness_nm),
            ("spin_density", self.spin_density),
            ("rho_s", self.rho_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("dmi_hz", self.dmi_hz),
            ("gap_hz", self.gap_hz),
            ("gtilde_mhz_per_g", self.gtilde_mhz_per_g),
            ("gfilm_mhz_per_g", self.gfilm_mhz_per_g),
            ("b0_g", self.b0_g),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// `k₀ = D/J`. Negative values describe the mirror-image film.
    pub fn k0(&self) -> f64 {
        self.dmi_hz / self.exchange_hz
    }
}

/// Gap at field `B₀` under the linear-Zeeman model `Δ(B₀) = Δ(0) + γ_film·B₀`.
///
/// This is a modeling choice; pass `gap_hz` directly when a measured gap is known.
pub fn zeeman_gap_hz(gap0_hz: f64, gfilm_mhz_per_g: f64, b0_g: f64) -> f64 {
    gap0_hz + gfilm_mhz_per_g * 1e6 * b0_g
}

/// NV transition `ω_qi = Δ₀ − γ̃·B₀` (Hz).
pub fn nv_transition_hz(delta0_hz: f64, gtilde_mhz_per_g: f64, b0_g: f64) -> f64 {
    delta0_hz - gtilde_mhz_per_g * 1e6 * b0_g
}

pub fn dispersion(kx: f64, ky: f64, p: &FerroBathParams) -> f64 {
    p.exchange_hz * (kx * kx + ky * ky) - 2.0 * p.dmi_hz * kx + p.gap_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicScales {
    pub k0: f64,
    pub k1: f64,
    /// `a/|k₀|`; `+∞` when `k₀ = 0`.
    pub lambda0_nm: f64,
    pub lambda1_nm: f64,
    /// Absolute local rate from the closed-form prefactor. Only a label: the
    /// prefactor mixes unit conventions, dynamics run in units of `γ₀`.
    pub gamma0: f64,
}

impl CharacteristicScales {
    /// `2λ₀λ₁/(λ₀² + λ₁²)`, written as `2k₀k₁/(k₀² + k₁²)` so that it stays
    /// finite at `k₀ = 0`. Carries the sign of `k₀`.
    pub fn odd_weight(&self) -> f64 {
        2.0 * self.k0 * self.k1 / (self.k0 * self.k0 + self.k1 * self.k1)
    }

    /// `λ₀²/(λ₀² + λ₁²) = k₁²/(k₀² + k₁²)`.
    pub fn range_ratio(&self) -> f64 {
        self.k1 * self.k1 / (self.k0 * self.k0 + self.k1 * self.k1)
    }
}

pub fn characteristic_scales(p: &FerroBathParams, omega_qi_hz: f64) -> Result<CharacteristicScales> {
    p.check()?;
    let k0 = p.k0();
    let k1_sq = k0 * k0 + (omega_qi_hz - p.gap_hz) / p.exchange_hz;
    if !(k1_sq > 0.0) {
        return Err(Error::Domain(format!(
            "qubit below magnon band edge: k1^2 = {k1_sq:.6e} <= 0"
        )));
    }
    let k1 = k1_sq.sqrt();
    let lambda0_nm = if k0 == 0.0 { f64::INFINITY } else { p.a_nm / k0.abs() };
    let lambda1_nm = p.a_nm / k1;

    let mut scales = CharacteristicScales {
        k0,
        k1,
        lambda0_nm,
        lambda1_nm,
        gamma0: 0.0,
    };
    // CGS-flavoured evaluation: gyromagnetic ratios in Hz/G, lengths in cm.
    let gg = p.gtilde_mhz_per_g * 1e6 * p.gfilm_mhz_per_g * 1e6;
    let t_f_cm = p.thickness_nm * 1e-7;
    let rho_s_cm2 = p.rho_s * 1e4;
    let lambda1_cm = lambda1_nm * 1e-7;
    scales.gamma0 = 2.0 * std::f64::consts::PI.powi(2) * PLANCK_ERG_S.powi(2) * gg * gg * t_f_cm
        * p.spin_density
        * scales.range_ratio()
        / (rho_s_cm2 * lambda1_cm * lambda1_cm);
    Ok(scales)
}

/// Evaluates the pair kernel `e^{iφ}[Z₀(u) + i·c·sgn(x)·Z₁(u)]` for
/// separation `x` (nm), where `Z` is `J` (dissipative) or `Y` (coherent).
fn pair_kernel(x_nm: f64, a_nm: f64, s: &CharacteristicScales) -> (C64, C64) {
    let u = x_nm.abs() * s.k1 / a_nm;
    let phase = C64::from_polar(1.0, x_nm * s.k0 / a_nm);
    let odd = s.odd_weight() * x_nm.signum();
    let gamma = phase * C64::new(bessel::j0(u), odd * bessel::j1(u));
    let coherent = phase * C64::new(bessel::y0(u), odd * bessel::y1(u));
    (coherent, gamma)
}

/// Coupling matrices of the array in units of `γ₀` (the returned
/// `gamma0()` is 1). Every entry is evaluated independently; hermiticity
/// follows from the parity of the kernels under `x → −x`.
pub fn coupling_matrices(arr: &QubitArray, p: &FerroBathParams) -> Result<CouplingMatrices> {
    let scales = characteristic_scales(p, arr.omega_qi_ghz() * 1e9)?;
    coupling_matrices_with_scales(arr, p.a_nm, &scales)
}

pub fn coupling_matrices_with_scales(
    arr: &QubitArray,
    a_nm: f64,
    scales: &CharacteristicScales,
) -> Result<CouplingMatrices> {
    let x = arr.positions();
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        g[(a, a)] = C64::new(1.0, 0.0);
        for b in 0..n {
            if a == b {
                continue;
            }
            let dx = x[a] - x[b];
            if dx == 0.0 {
                return Err(Error::Validation(format!("qubits {a} and {b} coincide")));
            }
            let (coh, dis) = pair_kernel(dx, a_nm, scales);
            j[(a, b)] = coh;
            g[(a, b)] = dis;
        }
    }
    CouplingMatrices::new(j, g, 1.0)
}

fn default_gyro() -> f64 {
    ELECTRON_GYROMAGNETIC_MHZ_PER_G
}

/// On-disk material/geometry description. Defaults mirror a YIG-like film
/// under a 400 G field with a nine-qubit NV array at 20 nm spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialFile {
    pub rho_s: f64,
    pub a_nm: f64,
    #[serde(rename = "t_F_nm")]
    pub t_f_nm: f64,
    pub s: f64,
    #[serde(rename = "Delta0_GHz")]
    pub delta0_ghz: f64,
    #[serde(rename = "gap0_GHz")]
    pub gap0_ghz: f64,
    #[serde(rename = "B0_G")]
    pub b0_g: f64,
    pub k0: f64,
    pub a_q_nm: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "gtilde_MHz_per_G", default = "default_gyro")]
    pub gtilde_mhz_per_g: f64,
    #[serde(rename = "gfilm_MHz_per_G", default = "default_gyro")]
    pub gfilm_mhz_per_g: f64,
}

impl Default for MaterialFile {
    fn default() -> Self {
        Self {
            rho_s: 7.7e-6,
            a_nm: 1.2,
            t_f_nm: 20.0,
            s: 1.2e-10,
            delta0_ghz: NV_ZERO_FIELD_SPLITTING_GHZ,
            gap0_ghz: 0.55,
            b0_g: 400.0,
            k0: 0.3,
            a_q_nm: 20.0,
            n: 9,
            gtilde_mhz_per_g: ELECTRON_GYROMAGNETIC_MHZ_PER_G,
            gfilm_mhz_per_g: ELECTRON_GYROMAGNETIC_MHZ_PER_G,
        }
    }
}

impl MaterialFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: MaterialFile = serde_json::from_str(text)?;
        m.resolve()?;
        Ok(m)
    }

    pub fn with_k0(mut self, k0: f64) -> Self {
        self.k0 = k0;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Bath parameters and qubit array implied by this file.
    pub fn resolve(&self) -> Result<(FerroBathParams, QubitArray)> {
        if !self.k0.is_finite() {
            return Err(Error::Validation("k0 must be finite".into()));
        }
        for (name, v) in [("a_nm", self.a_nm), ("rho_s", self.rho_s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        let a_m = self.a_nm * 1e-9;
        let exchange_hz = self.rho_s / (a_m * a_m);
        let params = FerroBathParams {
            exchange_hz,
            dmi_hz: self.k0 * exchange_hz,
            gap_hz: zeeman_gap_hz(self.gap0_ghz * 1e9, self.gfilm_mhz_per_g, self.b0_g),
            a_nm: self.a_nm,
            spin_density: self.s,
            rho_s: self.rho_s,
            thickness_nm: self.t_f_nm,
            gtilde_mhz_per_g: self.gtilde_mhz_per_g,
            gfilm_mhz_per_g: self.gfilm_mhz_per_g,
            b0_g: self.b0_g,
        };
        params.check()?;
        let omega = nv_transition_hz(self.delta0_ghz * 1e9, self.gtilde_mhz_per_g, self.b0_g);
        let arr = QubitArray::new(self.n, self.a_q_nm, omega * 1e-9)?;
        Ok((params, arr))
    }
}
