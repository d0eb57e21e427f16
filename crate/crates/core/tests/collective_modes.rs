mod common;

use common::{random_couplings, random_density};
use nalgebra::DMatrix;
use nonrecip::coupling::{CouplingMatrices, C64};
use nonrecip::ferro::{coupling_matrices, MaterialFile};
use nonrecip::lindblad::DensityMatrix;
use nonrecip::modes::{
    diagonalize_decoherence, probability_flow, project_block, project_single_excitation, transform_couplings,
    ManifoldState, ModeReport,
};
use proptest::prelude::*;

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modes_are_unitary_and_diagonalize_gamma(n in 1usize..8, seed in any::<u64>()) {
        let m = random_couplings(n, seed);
        let modes = diagonalize_decoherence(&m).unwrap();
        let s = &modes.s;
        let id = DMatrix::<C64>::identity(n, n);
        prop_assert!(max_abs(&(s.adjoint() * s - &id)) < 1e-12);
        let d = s.adjoint() * m.gamma() * s;
        for a in 0..n {
            for b in 0..n {
                let expect = if a == b { C64::new(modes.rates[a], 0.0) } else { C64::new(0.0, 0.0) };
                prop_assert!((d[(a, b)] - expect).norm() < 1e-12);
            }
        }
        prop_assert!(modes.rates.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = modes.rates.iter().sum();
        prop_assert!((sum - n as f64).abs() < 1e-12 * n as f64);
        prop_assert!(!modes.psd_warning);
    }

    #[test]
    fn mode_couplings_split_into_hermitian_parts(n in 2usize..7, seed in any::<u64>()) {
        let m = random_couplings(n, seed);
        let modes = diagonalize_decoherence(&m).unwrap();
        let mc = transform_couplings(&m, &modes).unwrap();
        prop_assert!(max_abs(&(&mc.js - mc.js.adjoint())) < 1e-12);
        prop_assert!(max_abs(&(&mc.ja + mc.ja.adjoint())) < 1e-12);
        let i = C64::new(0.0, 1.0);
        prop_assert!(max_abs(&(&mc.js + mc.ja.map(|z| z * i) - &modes.jmodes)) < 1e-12);
    }

    #[test]
    fn flow_is_antisymmetric(n in 2usize..6, seed in any::<u64>()) {
        let m = random_couplings(n, seed);
        let modes = diagonalize_decoherence(&m).unwrap();
        let rho = DensityMatrix::new(n, random_density(n, seed)).unwrap();
        let ms = project_single_excitation(&rho, &modes).unwrap();
        let f = probability_flow(&ms, &modes).unwrap();
        for a in 0..n {
            for b in 0..n {
                prop_assert!((f.delta_p[(a, b)] + f.delta_p[(b, a)]).abs() < 1e-12);
                prop_assert!((f.delta_p[(a, b)] - (f.p[(a, b)] - f.p[(b, a)])).abs() < 1e-12);
            }
        }
        // the manifold carries at most the whole probability
        let tr = ms.rho.trace();
        prop_assert!(tr.im.abs() < 1e-12);
        prop_assert!(tr.re <= 1.0 + 1e-12 && tr.re >= -1e-12);
    }
}

#[test]
fn degenerate_gamma_gives_canonical_basis() {
    let mut j = DMatrix::zeros(3, 3);
    j[(0, 1)] = C64::new(0.4, 0.2);
    j[(1, 0)] = C64::new(0.4, -0.2);
    let m = CouplingMatrices::new(j, DMatrix::identity(3, 3), 1.0).unwrap();
    let modes = diagonalize_decoherence(&m).unwrap();
    assert!(max_abs(&(&modes.s - DMatrix::<C64>::identity(3, 3))) < 1e-14);
    assert!(max_abs(&(&modes.jmodes - m.j())) < 1e-14);

    // doubly degenerate pair inside a larger spectrum: the basis must not
    // depend on the order the qubits are listed in
    let mut g = DMatrix::<C64>::identity(3, 3);
    g[(0, 2)] = C64::new(0.5, 0.0);
    g[(2, 0)] = C64::new(0.5, 0.0);
    let m = CouplingMatrices::new(DMatrix::zeros(3, 3), g, 1.0).unwrap();
    let a = diagonalize_decoherence(&m).unwrap();
    let b = diagonalize_decoherence(&m).unwrap();
    assert_eq!(a.s, b.s);
    assert!((a.rates[0] - 0.5).abs() < 1e-14);
    assert!((a.rates[1] - 1.0).abs() < 1e-14 && (a.rates[2] - 1.5).abs() < 1e-14);
}

#[test]
fn two_qubit_modes_and_phase() {
    let m = common::pair_couplings(0.0, 0.3, 0.3, 0.0);
    let modes = diagonalize_decoherence(&m).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((modes.rates[0] - 0.7).abs() < 1e-14 && (modes.rates[1] - 1.3).abs() < 1e-14);
    let s = &modes.s;
    assert!((s[(0, 0)] - C64::new(-h, 0.0)).norm() < 1e-14);
    assert!((s[(1, 0)] - C64::new(h, 0.0)).norm() < 1e-14);
    assert!((s[(0, 1)] - C64::new(h, 0.0)).norm() < 1e-14);
    assert!((s[(1, 1)] - C64::new(h, 0.0)).norm() < 1e-14);
}

#[test]
fn flow_of_single_excitation_coherence() {
    let m = common::pair_couplings(0.0, 0.3, 0.3, 0.0);
    let modes = diagonalize_decoherence(&m).unwrap();
    let rho = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(0.3, 0.0), C64::new(0.1, 0.05), C64::new(0.1, -0.05), C64::new(0.2, 0.0)],
    );
    let ms = ManifoldState { rho };
    let f = probability_flow(&ms, &modes).unwrap();
    let j = modes.jmodes[(0, 1)];
    let direct = (j * ms.rho[(1, 0)]).im - (j.conj() * ms.rho[(0, 1)]).im;
    assert!((f.delta_p[(0, 1)] - direct).abs() < 1e-15);
}

#[test]
fn ferromagnet_chain_mode_sum() {
    let arr_p = MaterialFile::default().resolve().unwrap();
    let m = coupling_matrices(&arr_p.1, &arr_p.0).unwrap();
    let modes = diagonalize_decoherence(&m).unwrap();
    let sum: f64 = modes.rates.iter().sum();
    assert!((sum - 9.0).abs() < 1e-12, "{sum}");
    assert!(!modes.psd_warning);
    let report = ModeReport::new(&m).unwrap();
    assert_eq!(report.n, 9);
    for row in &report.participation {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    serde_json::to_string(&report).unwrap();
}

#[test]
fn dimension_mismatch_is_reported() {
    let modes = diagonalize_decoherence(&random_couplings(3, 1)).unwrap();
    let rho1 = DMatrix::<C64>::identity(2, 2);
    assert!(project_block(&rho1, &modes).is_err());
    assert!(transform_couplings(&random_couplings(4, 1), &modes).is_err());
}
