//! Coupling matrices of the qubit array and the quantities derived from them.
//!
//! Coherent couplings `J` and dissipative couplings `Γ` are Hermitian `N×N`
//! matrices. Their real parts are symmetric and their imaginary parts
//! anti-symmetric, which gives the `(Js, Ja, gs, ga)` decomposition used
//! throughout the crate. All indices in this module are zero-based.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative hermiticity tolerance (scaled by the largest entry).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Allowed negative slack on the smallest eigenvalue of `Γ`, in units of `γ₀`.
pub const PSD_TOL: f64 = 1e-10;

/// Geometry of an equally spaced one-dimensional qubit chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitArray {
    n_qubits: usize,
    spacing_nm: f64,
    omega_qi_ghz: f64,
}

impl QubitArray {
    pub fn new(n_qubits: usize, spacing_nm: f64, omega_qi_ghz: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Validation("qubit array needs at least one qubit".into()));
        }
        if !(spacing_nm > 0.0 && spacing_nm.is_finite()) {
            return Err(Error::Validation(format!(
                "qubit spacing must be positive and finite, got {spacing_nm}"
            )));
        }
        if !omega_qi_ghz.is_finite() {
            return Err(Error::Validation("qubit frequency must be finite".into()));
        }
        Ok(Self {
            n_qubits,
            spacing_nm,
            omega_qi_ghz,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn spacing_nm(&self) -> f64 {
        self.spacing_nm
    }

    pub fn omega_qi_ghz(&self) -> f64 {
        self.omega_qi_ghz
    }

    /// Positions `x_α = α·a_q` (nm), first qubit at the origin.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_qubits)
            .map(|k| k as f64 * self.spacing_nm)
            .collect()
    }
}

/// Hermitian coherent and dissipative coupling matrices plus the local rate `γ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    j: DMatrix<C64>,
    gamma: DMatrix<C64>,
    gamma0: f64,
}

impl CouplingMatrices {
    /// Checks hermiticity, `diag(J) = 0` and `diag(Γ) = γ₀`. Positive
    /// semidefiniteness of `Γ` is reported by [`validate`], not enforced here.
    pub fn new(j: DMatrix<C64>, gamma: DMatrix<C64>, gamma0: f64) -> Result<Self> {
        let n = j.nrows();
        if n == 0 {
            return Err(Error::Validation("coupling matrices are empty".into()));
        }
        for (name, m) in [("J", &j), ("Gamma", &gamma)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Validation(format!(
                    "{name} has shape {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Validation(format!("{name} has non-finite entries")));
            }
        }
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::Validation(format!(
                "gamma0 must be positive and finite, got {gamma0}"
            )));
        }
        check_hermitian("J", &j)?;
        check_hermitian("Gamma", &gamma)?;

        let tol = HERMITICITY_TOL * gamma0.max(max_abs(&j)).max(max_abs(&gamma));
        for a in 0..n {
            if j[(a, a)].norm() > tol {
                return Err(Error::Validation(format!(
                    "J[{a},{a}] = {} but on-site coherent terms must vanish",
                    j[(a, a)]
                )));
            }
            if (gamma[(a, a)] - C64::new(gamma0, 0.0)).norm() > tol {
                return Err(Error::Validation(format!(
                    "Gamma[{a},{a}] = {} differs from gamma0 = {gamma0}",
                    gamma[(a, a)]
                )));
            }
        }
        Ok(Self { j, gamma, gamma0 })
    }

    /// Uncorrelated qubits: `J = 0`, `Γ = γ₀·1`.
    pub fn independent(n: usize, gamma0: f64) -> Result<Self> {
        let gamma = DMatrix::from_diagonal_element(n, n, C64::new(gamma0, 0.0));
        Self::new(DMatrix::zeros(n, n), gamma, gamma0)
    }

    /// Assembles `J = Js + i·Ja` and `Γ = gs + i·ga`. The diagonal of `gs`
    /// is overwritten with `γ₀`.
    pub fn from_decomposition(d: &CouplingDecomposition, gamma0: f64) -> Result<Self> {
        let (j, mut gamma) = d.reassemble();
        for a in 0..gamma.nrows() {
            gamma[(a, a)] = C64::new(gamma0, 0.0);
        }
        Self::new(j, gamma, gamma0)
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn j(&self) -> &DMatrix<C64> {
        &self.j
    }

    pub fn gamma(&self) -> &DMatrix<C64> {
        &self.gamma
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Same couplings expressed in units of `γ₀` (so `γ₀ = 1`).
    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.gamma0;
        Self {
            j: self.j.map(|z| z * s),
            gamma: self.gamma.map(|z| z * s),
            gamma0: 1.0,
        }
    }

    /// Relabels qubits `α → N−1−α`.
    pub fn mirrored(&self) -> Self {
        let n = self.n();
        let flip = |m: &DMatrix<C64>| DMatrix::from_fn(n, n, |a, b| m[(n - 1 - a, n - 1 - b)]);
        Self {
            j: flip(&self.j),
            gamma: flip(&self.gamma),
            gamma0: self.gamma0,
        }
    }

    pub fn to_file(&self) -> CouplingFile {
        let rows = |m: &DMatrix<C64>, f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        CouplingFile {
            n: self.n(),
            gamma0: self.gamma0,
            j_re: rows(&self.j, |z| z.re),
            j_im: rows(&self.j, |z| z.im),
            g_re: rows(&self.gamma, |z| z.re),
            g_im: rows(&self.gamma, |z| z.im),
        }
    }

    pub fn from_file(f: &CouplingFile) -> Result<Self> {
        let n = f.n;
        if n == 0 {
            return Err(Error::Validation("n must be at least 1".into()));
        }
        let mat = |re: &[Vec<f64>], im: &[Vec<f64>], re_name: &str, im_name: &str| {
            for (name, rows) in [(re_name, re), (im_name, im)] {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Validation(format!("{name} must be a {n}x{n} array")));
                }
            }
            Ok(DMatrix::from_fn(n, n, |r, c| C64::new(re[r][c], im[r][c])))
        };
        let j = mat(&f.j_re, &f.j_im, "J_re", "J_im")?;
        let gamma = mat(&f.g_re, &f.g_im, "G_re", "G_im")?;
        Self::new(j, gamma, f.gamma0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CouplingFile = serde_json::from_str(text)?;
        Self::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("coupling file serializes")
    }
}

/// Row-major JSON layout of a [`CouplingMatrices`] value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub n: usize,
    pub gamma0: f64,
    #[serde(rename = "J_re")]
    pub j_re: Vec<Vec<f64>>,
    #[serde(rename = "J_im")]
    pub j_im: Vec<Vec<f64>>,
    #[serde(rename = "G_re")]
    pub g_re: Vec<Vec<f64>>,
    #[serde(rename = "G_im")]
    pub g_im: Vec<Vec<f64>>,
}

/// Symmetric (`Js`, `gs`) and anti-symmetric (`Ja`, `ga`) parts of the couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDecomposition {
    pub js: DMatrix<f64>,
    pub ja: DMatrix<f64>,
    pub gs: DMatrix<f64>,
    pub ga: DMatrix<f64>,
}

impl CouplingDecomposition {
    pub fn zeros(n: usize) -> Self {
        Self {
            js: DMatrix::zeros(n, n),
            ja: DMatrix::zeros(n, n),
            gs: DMatrix::zeros(n, n),
            ga: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.js.nrows()
    }

    /// Sets the pair `(a, b)` and its mirror `(b, a)` consistently.
    pub fn set_pair(&mut self, a: usize, b: usize, js: f64, ja: f64, gs: f64, ga: f64) {
        self.js[(a, b)] = js;
        self.js[(b, a)] = js;
        self.gs[(a, b)] = gs;
        self.gs[(b, a)] = gs;
        self.ja[(a, b)] = ja;
        self.ja[(b, a)] = -ja;
        self.ga[(a, b)] = ga;
        self.ga[(b, a)] = -ga;
    }

    /// `(J, Γ)` with `J = Js + i·Ja`, `Γ = gs + i·ga`.
    pub fn reassemble(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.n();
        let j = DMatrix::from_fn(n, n, |a, b| C64::new(self.js[(a, b)], self.ja[(a, b)]));
        let g = DMatrix::from_fn(n, n, |a, b| C64::new(self.gs[(a, b)], self.ga[(a, b)]));
        (j, g)
    }
}

/// Left/right hopping amplitudes of the effective Hamiltonian, stored for
/// ordered pairs `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingAmplitudes {
    n: usize,
    left: Vec<C64>,
    right: Vec<C64>,
}

impl HoppingAmplitudes {
    fn slot(&self, a: usize, b: usize) -> usize {
        assert!(a < b && b < self.n, "hopping pair ({a}, {b}) must satisfy a < b < n");
        // row-major packing of the strict upper triangle
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `γᴸ_ab`, amplitude of `σ_a⁺σ_b⁻` (excitation moves from `b` to `a`).
    pub fn left(&self, a: usize, b: usize) -> C64 {
        self.left[self.slot(a, b)]
    }

    /// `γᴿ_ab`, amplitude of `σ_b⁺σ_a⁻` (excitation moves from `a` to `b`).
    pub fn right(&self, a: usize, b: usize) -> C64 {
        self.right[self.slot(a, b)]
    }

    pub fn is_reciprocal(&self, tol: f64) -> bool {
        self.left
            .iter()
            .zip(&self.right)
            .all(|(l, r)| (l.norm() - r.norm()).abs() <= tol)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest `|M − M†|` entry and its location.
fn hermiticity_residual(m: &DMatrix<C64>) -> (f64, usize, usize) {
    let n = m.nrows();
    let mut worst = (0.0, 0, 0);
    for a in 0..n {
        for b in a..n {
            let r = (m[(a, b)] - m[(b, a)].conj()).norm();
            if r > worst.0 {
                worst = (r, a, b);
            }
        }
    }
    worst
}

fn check_hermitian(name: &str, m: &DMatrix<C64>) -> Result<()> {
    let (res, a, b) = hermiticity_residual(m);
    let scale = max_abs(m);
    if res > HERMITICITY_TOL * scale {
        return Err(Error::Validation(format!(
            "{name} is not Hermitian: |{name}[{a},{b}] - conj({name}[{b},{a}])| = {res:.3e} \
             exceeds {HERMITICITY_TOL:.0e} x max|entry| = {scale:.3e}"
        )));
    }
    Ok(())
}

/// Splits `J` and `Γ` into symmetric real and anti-symmetric imaginary parts.
pub fn decompose_couplings(m: &CouplingMatrices) -> Result<CouplingDecomposition> {
    check_hermitian("J", &m.j)?;
    check_hermitian("Gamma", &m.gamma)?;
    let n = m.n();
    let sym = |x: &DMatrix<C64>, a: usize, b: usize| 0.5 * (x[(a, b)].re + x[(b, a)].re);
    let anti = |x: &DMatrix<C64>, a: usize, b: usize| 0.5 * (x[(a, b)].im - x[(b, a)].im);
    Ok(CouplingDecomposition {
        js: DMatrix::from_fn(n, n, |a, b| sym(&m.j, a, b)),
        ja: DMatrix::from_fn(n, n, |a, b| anti(&m.j, a, b)),
        gs: DMatrix::from_fn(n, n, |a, b| sym(&m.gamma, a, b)),
        ga: DMatrix::from_fn(n, n, |a, b| anti(&m.gamma, a, b)),
    })
}

pub fn compute_hoppings(d: &CouplingDecomposition) -> HoppingAmplitudes {
    let n = d.n();
    let mut left = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut right = Vec::with_capacity(left.capacity());
    for a in 0..n {
        for b in a + 1..n {
            let (js, ja, gs, ga) = (d.js[(a, b)], d.ja[(a, b)], d.gs[(a, b)], d.ga[(a, b)]);
            left.push(0.5 * C64::new(js + ga, ja - gs));
            right.push(0.5 * C64::new(js - ga, -(ja + gs)));
        }
    }
    HoppingAmplitudes { n, left, right }
}

/// Single-excitation matrix of the non-Hermitian effective Hamiltonian:
/// `γᴸ_ab` above the diagonal, `γᴿ_ab` at the mirrored position below it,
/// and `−iγ₀/2` on the diagonal.
pub fn build_effective_hamiltonian(d: &CouplingDecomposition, gamma0: f64) -> DMatrix<C64> {
    let hop = compute_hoppings(d);
    let n = d.n();
    let mut h = DMatrix::from_diagonal_element(n, n, C64::new(0.0, -0.5 * gamma0));
    for a in 0..n {
        for b in a + 1..n {
            h[(a, b)] = hop.left(a, b);
            h[(b, a)] = hop.right(a, b);
        }
    }
    h
}

/// Diagnostics of a coupling set against the physical invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_j: f64,
    pub hermiticity_gamma: f64,
    pub min_eigenvalue_gamma: f64,
    /// Largest deviation of `Γ_aa` from `γ₀`.
    pub diag_uniformity: f64,
    pub max_onsite_j: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn validate(m: &CouplingMatrices) -> ValidationReport {
    let (herm_j, ..) = hermiticity_residual(&m.j);
    let (herm_g, ..) = hermiticity_residual(&m.gamma);
    let n = m.n();
    let diag_uniformity = (0..n)
        .map(|a| (m.gamma[(a, a)] - C64::new(m.gamma0, 0.0)).norm())
        .fold(0.0, f64::max);
    let max_onsite_j = (0..n).map(|a| m.j[(a, a)].norm()).fold(0.0, f64::max);
    let min_eig = m
        .gamma
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    let scale_j = max_abs(&m.j);
    let scale_g = max_abs(&m.gamma);
    let mut failures = Vec::new();
    if herm_j > HERMITICITY_TOL * scale_j {
        failures.push(format!("J hermiticity residual {herm_j:.3e}"));
    }
    if herm_g > HERMITICITY_TOL * scale_g {
        failures.push(format!("Gamma hermiticity residual {herm_g:.3e}"));
    }
    if min_eig < -PSD_TOL * m.gamma0 {
        failures.push(format!(
            "Gamma is not positive semidefinite: min eigenvalue {min_eig:.6e}"
        ));
    }
    let diag_tol = HERMITICITY_TOL * m.gamma0.max(scale_g);
    if diag_uniformity > diag_tol {
        failures.push(format!("Gamma diagonal deviates from gamma0 by {diag_uniformity:.3e}"));
    }
    if max_onsite_j > HERMITICITY_TOL * m.gamma0.max(scale_j) {
        failures.push(format!("on-site J term {max_onsite_j:.3e}"));
    }
    ValidationReport {
        hermiticity_j: herm_j,
        hermiticity_gamma: herm_g,
        min_eigenvalue_gamma: min_eig,
        diag_uniformity,
        max_onsite_j,
        passed: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_qubit(j12: C64, g12: C64) -> CouplingMatrices {
        let j = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), j12, j12.conj(), c(0.0, 0.0)]);
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), g12, g12.conj(), c(1.0, 0.0)]);
        CouplingMatrices::new(j, g, 1.0).unwrap()
    }

    #[test]
    fn decompose_splits_real_and_imaginary() {
        let m = two_qubit(c(1.0, 0.5), c(0.0, 0.0));
        let d = decompose_couplings(&m).unwrap();
        assert_eq!(d.js[(0, 1)], 1.0);
        assert_eq!(d.ja[(0, 1)], 0.5);
        assert_eq!(d.ja[(1, 0)], -0.5);
        let (j, g) = d.reassemble();
        assert!((&j - m.j()).camax() < 1e-14);
        assert!((&g - m.gamma()).camax() < 1e-14);
    }

    #[test]
    fn identity_gamma_has_no_antisymmetric_part() {
        let m = CouplingMatrices::independent(3, 2.0).unwrap();
        let d = decompose_couplings(&m).unwrap();
        assert_eq!(d.ga.amax(), 0.0);
        assert_eq!(d.gs, DMatrix::from_diagonal_element(3, 3, 2.0));
    }

    #[test]
    fn non_hermitian_input_names_worst_entry() {
        let j = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let g = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
        let err = CouplingMatrices::new(j, g, 1.0).unwrap_err().to_string();
        assert!(err.contains("J[0,1]"), "{err}");
    }

    #[test]
    fn onsite_coherent_term_rejected() {
        let j = DMatrix::from_diagonal_element(2, 2, c(0.3, 0.0));
        let g = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
        assert!(CouplingMatrices::new(j, g, 1.0).is_err());
    }

    #[test]
    fn unidirectional_pair_has_zero_left_hopping() {
        let g = 0.7;
        let mut d = CouplingDecomposition::zeros(2);
        d.set_pair(0, 1, 0.0, g, g, 0.0);
        let hop = compute_hoppings(&d);
        assert_eq!(hop.left(0, 1), c(0.0, 0.0));
        assert_eq!(hop.right(0, 1), c(0.0, -g));

        let h = build_effective_hamiltonian(&d, 1.0);
        assert_eq!(h[(0, 1)], c(0.0, 0.0));
        assert_eq!(h[(1, 0)], c(0.0, -g));
        assert_eq!(h[(0, 0)], c(0.0, -0.5));
    }

    #[test]
    fn unidirectional_with_symmetric_coherent_balance() {
        // Js = -ga and Ja = gs also kills the left hopping.
        let mut d = CouplingDecomposition::zeros(2);
        d.set_pair(0, 1, 0.4, 0.3, 0.3, -0.4);
        let hop = compute_hoppings(&d);
        assert_eq!(hop.left(0, 1), c(0.0, 0.0));
        let h = build_effective_hamiltonian(&d, 1.0);
        assert_eq!(h[(0, 1)], c(0.0, 0.0));
        assert!(h[(1, 0)].norm() > 0.0);
    }

    #[test]
    fn zero_couplings_give_zero_hoppings() {
        let hop = compute_hoppings(&CouplingDecomposition::zeros(4));
        for a in 0..4 {
            for b in a + 1..4 {
                assert_eq!(hop.left(a, b), c(0.0, 0.0));
                assert_eq!(hop.right(a, b), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn symmetric_only_is_reciprocal() {
        let mut d = CouplingDecomposition::zeros(2);
        d.set_pair(0, 1, 1.0, 0.0, 0.5, 0.0);
        let hop = compute_hoppings(&d);
        assert_eq!(hop.left(0, 1), c(0.5, -0.25));
        assert_eq!(hop.right(0, 1), c(0.5, -0.25));
        assert!(hop.is_reciprocal(1e-12));
        let h = build_effective_hamiltonian(&d, 1.0);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
    }

    #[test]
    fn validate_flags_indefinite_gamma() {
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let m = CouplingMatrices::new(DMatrix::zeros(2, 2), g, 1.0).unwrap();
        let r = validate(&m);
        assert!(!r.passed);
        assert!((r.min_eigenvalue_gamma + 1.0).abs() < 1e-12);
        assert!(r.failures[0].contains("positive semidefinite"));

        let ok = validate(&CouplingMatrices::independent(3, 1.0).unwrap());
        assert!(ok.passed, "{:?}", ok.failures);
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let m = two_qubit(c(0.2, -0.1), c(0.4, 0.3));
        let back = CouplingMatrices::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"n":1,"gamma0":1,"J_re":[[0]],"J_im":[[0]],"G_re":[[1]],"G_im":[[0]],"x":1}"#;
        assert!(CouplingMatrices::from_json(bad).is_err());
        let ragged = r#"{"n":2,"gamma0":1,"J_re":[[0,0],[0]],"J_im":[[0,0],[0,0]],"G_re":[[1,0],[0,1]],"G_im":[[0,0],[0,0]]}"#;
        assert!(CouplingMatrices::from_json(ragged).is_err());
    }

    #[test]
    fn mirror_reverses_pairs() {
        let m = two_qubit(c(0.2, -0.1), c(0.4, 0.3));
        let mm = m.mirrored();
        assert_eq!(mm.j()[(0, 1)], m.j()[(1, 0)]);
        assert_eq!(mm.gamma()[(0, 1)], m.gamma()[(1, 0)]);
    }
}
