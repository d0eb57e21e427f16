//! Collective jump modes of the decoherence matrix and probability flow in
//! the single-excitation manifold.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coupling::{decompose_couplings, CouplingMatrices, C64};
use crate::error::{Error, Result};
use crate::lindblad::{basis_index, qubit_bit, DensityMatrix};

/// Relative tolerance for treating two mode rates as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Magnitudes within this of the column maximum count as ties when fixing
/// the phase.
const PHASE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveModes {
    /// Columns are the mode vectors `S_{α n}`.
    pub s: DMatrix<C64>,
    /// Mode decay rates `Γ_n`, ascending.
    pub rates: Vec<f64>,
    /// `S† J S`.
    pub jmodes: DMatrix<C64>,
    /// Set when a rate falls below `−1e-10 γ₀`.
    pub psd_warning: bool,
    pub gamma0: f64,
}

/// Coherent couplings in the mode basis, split into the parts generated by
/// the symmetric and antisymmetric qubit-basis couplings:
/// `S† J S = js + i·ja`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCouplings {
    /// Hermitian.
    pub js: DMatrix<C64>,
    /// Anti-Hermitian.
    pub ja: DMatrix<C64>,
}

/// Single-excitation coefficients `ρ_nm = ⟨n|ρ|m⟩` in the mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldState {
    pub rho: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityFlow {
    pub p: DMatrix<f64>,
    pub delta_p: DMatrix<f64>,
}

/// Fixes the phase of `v` so that its largest entry is real and positive.
/// Among entries of (numerically) equal magnitude the last one wins.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = (0..v.len())
        .rev()
        .find(|&i| v[i].norm() >= max * (1.0 - PHASE_TIE_TOL))
        .unwrap_or(0);
    let ph = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= ph;
    }
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
}

/// Replaces a degenerate block of eigenvectors by the orthonormalized
/// projections of the unit vectors `e_0, e_1, …` onto their span, which does
/// not depend on what basis the eigensolver happened to return.
fn canonical_basis(vectors: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let dim = vectors.len();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for k in 0..n {
        if out.len() == dim {
            break;
        }
        // P e_k = Σ_v v (v_k)*
        let mut w = vec![C64::new(0.0, 0.0); n];
        for v in vectors {
            let c = v[k].conj();
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += vi * c;
            }
        }
        for _ in 0..2 {
            for u in &out {
                let c: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= ui * c;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    out
}

/// Hermitian eigendecomposition of `Γ` with a deterministic ordering and
/// phase convention.
pub fn diagonalize_decoherence(m: &CouplingMatrices) -> Result<CollectiveModes> {
    let n = m.n();
    let gamma = m.gamma();
    let eig = gamma.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let rates: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vec<C64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();

    let scale = m.gamma0().abs().max(gamma.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && rates[end] - rates[end - 1] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start == 1 {
            columns.push(vecs[start].clone());
        } else {
            columns.extend(canonical_basis(&vecs[start..end], n));
        }
        start = end;
    }
    for c in &mut columns {
        fix_phase(c);
    }
    let s = DMatrix::from_fn(n, n, |a, k| columns[k][a]);
    let jmodes = s.adjoint() * m.j() * &s;
    let psd_warning = rates.first().is_some_and(|&r| r < -1e-10 * m.gamma0());
    Ok(CollectiveModes {
        s,
        rates,
        jmodes,
        psd_warning,
        gamma0: m.gamma0(),
    })
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn transform_couplings(m: &CouplingMatrices, modes: &CollectiveModes) -> Result<ModeCouplings> {
    check_dim(modes.s.nrows(), m.n())?;
    let d = decompose_couplings(m)?;
    let s = &modes.s;
    let to_c = |x: &DMatrix<f64>| x.map(|v| C64::new(v, 0.0));
    Ok(ModeCouplings {
        js: s.adjoint() * to_c(&d.js) * s,
        ja: s.adjoint() * to_c(&d.ja) * s,
    })
}

/// `P_nm = Im[J_nm ρ_mn]` and `ΔP_nm = P_nm − P_mn`.
pub fn probability_flow(ms: &ManifoldState, modes: &CollectiveModes) -> Result<ProbabilityFlow> {
    let n = modes.rates.len();
    check_dim(n, ms.rho.nrows())?;
    let j = &modes.jmodes;
    let p = DMatrix::from_fn(n, n, |a, b| (j[(a, b)] * ms.rho[(b, a)]).im);
    let delta_p = DMatrix::from_fn(n, n, |a, b| {
        let (jr, ji) = (j[(a, b)].re, j[(a, b)].im);
        let r = ms.rho[(b, a)];
        2.0 * (jr * r.im + ji * r.re)
    });
    Ok(ProbabilityFlow { p, delta_p })
}

/// `ρ_nm = Σ_αβ S*_{αn} ⟨α|ρ|β⟩ S_{βm}` from the single-excitation block
/// `rho1[α,β] = ⟨α|ρ|β⟩`.
pub fn project_block(rho1: &DMatrix<C64>, modes: &CollectiveModes) -> Result<ManifoldState> {
    check_dim(modes.s.nrows(), rho1.nrows())?;
    Ok(ManifoldState {
        rho: modes.s.adjoint() * rho1 * &modes.s,
    })
}

pub fn project_single_excitation(rho: &DensityMatrix, modes: &CollectiveModes) -> Result<ManifoldState> {
    let n = rho.n_qubits();
    check_dim(modes.s.nrows(), n)?;
    let idx = |a: usize| basis_index(n, qubit_bit(n, a));
    let rho1 = DMatrix::from_fn(n, n, |a, b| rho.data()[(idx(a), idx(b))]);
    project_block(&rho1, modes)
}

/// JSON-friendly mode summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub n: usize,
    pub gamma0: f64,
    pub rates: Vec<f64>,
    pub rate_sum: f64,
    /// `participation[n][α] = |S_{α n}|²`.
    pub participation: Vec<Vec<f64>>,
    #[serde(rename = "J_modes_re")]
    pub j_re: Vec<Vec<f64>>,
    #[serde(rename = "J_modes_im")]
    pub j_im: Vec<Vec<f64>>,
    #[serde(rename = "Js_modes_re")]
    pub js_re: Vec<Vec<f64>>,
    #[serde(rename = "Js_modes_im")]
    pub js_im: Vec<Vec<f64>>,
    #[serde(rename = "Ja_modes_re")]
    pub ja_re: Vec<Vec<f64>>,
    #[serde(rename = "Ja_modes_im")]
    pub ja_im: Vec<Vec<f64>>,
    pub psd_warning: bool,
}

impl ModeReport {
    pub fn new(m: &CouplingMatrices) -> Result<Self> {
        let modes = diagonalize_decoherence(m)?;
        let mc = transform_couplings(m, &modes)?;
        let n = m.n();
        let rows = |x: &DMatrix<C64>, f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|a| (0..n).map(|b| f(x[(a, b)])).collect()).collect()
        };
        Ok(Self {
            n,
            gamma0: m.gamma0(),
            rate_sum: modes.rates.iter().sum(),
            rates: modes.rates.clone(),
            participation: (0..n)
                .map(|k| (0..n).map(|a| modes.s[(a, k)].norm_sqr()).collect())
                .collect(),
            j_re: rows(&modes.jmodes, |z| z.re),
            j_im: rows(&modes.jmodes, |z| z.im),
            js_re: rows(&mc.js, |z| z.re),
            js_im: rows(&mc.js, |z| z.im),
            ja_re: rows(&mc.ja, |z| z.re),
            ja_im: rows(&mc.ja, |z| z.im),
            psd_warning: modes.psd_warning,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingDecomposition;

    fn pair(js: f64, ja: f64, gs: f64) -> CouplingMatrices {
        let mut d = CouplingDecomposition::zeros(2);
        d.set_pair(0, 1, js, ja, gs, 0.0);
        CouplingMatrices::from_decomposition(&d, 1.0).unwrap()
    }

    #[test]
    fn identity_gamma_gives_identity_modes() {
        let m = CouplingMatrices::independent(4, 1.0).unwrap();
        let modes = diagonalize_decoherence(&m).unwrap();
        assert_eq!(modes.rates, vec![1.0; 4]);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((modes.s - id).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn pair_modes_and_couplings() {
        let gs = 0.3;
        let modes = diagonalize_decoherence(&pair(0.0, 0.7, gs)).unwrap();
        assert!((modes.rates[0] - (1.0 - gs)).abs() < 1e-15);
        assert!((modes.rates[1] - (1.0 + gs)).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // slow mode (σ₂⁻ − σ₁⁻)/√2
        assert!((modes.s[(0, 0)] - C64::new(-h, 0.0)).norm() < 1e-15);
        assert!((modes.s[(1, 0)] - C64::new(h, 0.0)).norm() < 1e-15);
        let mc = transform_couplings(&pair(0.0, 0.7, gs), &modes).unwrap();
        assert!((mc.ja[(0, 1)] - C64::new(-0.7, 0.0)).norm() < 1e-15);
        assert!((modes.jmodes[(0, 1)] - C64::new(0.0, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn phase_convention_is_stable_under_input_phase() {
        // a gauge-transformed Γ yields the same rates and |S|
        let m = pair(0.2, 0.1, 0.4);
        let a = diagonalize_decoherence(&m).unwrap();
        let b = diagonalize_decoherence(&m.mirrored()).unwrap();
        assert_eq!(a.rates.len(), b.rates.len());
        for k in 0..2 {
            assert!((a.rates[k] - b.rates[k]).abs() < 1e-14);
            // largest entry real positive
            let col: Vec<C64> = a.s.column(k).iter().copied().collect();
            let best = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(col.iter().any(|z| (z.re - best).abs() < 1e-14 && z.im == 0.0));
        }
    }

    #[test]
    fn manifold_of_single_excitation() {
        let m = pair(0.1, 0.3, 0.5);
        let modes = diagonalize_decoherence(&m).unwrap();
        let rho = DensityMatrix::basis_projector(2, qubit_bit(2, 1)).unwrap();
        let ms = project_single_excitation(&rho, &modes).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let expect = modes.s[(1, a)].conj() * modes.s[(1, b)];
                assert!((ms.rho[(a, b)] - expect).norm() < 1e-15);
            }
        }
        let g = project_single_excitation(&DensityMatrix::ground(2).unwrap(), &modes).unwrap();
        assert!(g.rho.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }
}
