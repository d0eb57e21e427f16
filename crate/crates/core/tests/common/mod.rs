#![allow(dead_code)]

pub mod bessel_oracle;
pub mod lindblad_oracle;

use nalgebra::DMatrix;
use nonrecip::coupling::{CouplingMatrices, C64};

/// Deterministic xorshift stream in [-1, 1).
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn complex(&mut self) -> C64 {
        C64::new(self.next(), self.next())
    }
}

/// Random Hermitian `J` (zero diagonal) and a positive `Γ` with unit diagonal.
pub fn random_couplings(n: usize, seed: u64) -> CouplingMatrices {
    let mut s = Stream::new(seed);
    let mut j = DMatrix::zeros(n, n);
    let mut g = DMatrix::from_diagonal_element(n, n, C64::new(1.0, 0.0));
    // diagonally dominant off-diagonals keep Γ positive definite
    let scale = 0.9 / n.max(2) as f64;
    for a in 0..n {
        for b in a + 1..n {
            let x = s.complex();
            j[(a, b)] = x;
            j[(b, a)] = x.conj();
            let y = s.complex() * scale * std::f64::consts::FRAC_1_SQRT_2;
            g[(a, b)] = y;
            g[(b, a)] = y.conj();
        }
    }
    CouplingMatrices::new(j, g, 1.0).unwrap()
}

/// Random density matrix `A A† / Tr(A A†)`.
pub fn random_density(n: usize, seed: u64) -> DMatrix<C64> {
    let mut s = Stream::new(seed ^ 0xABCD);
    let dim = 1 << n;
    let a = DMatrix::from_fn(dim, dim, |_, _| s.complex());
    let r = &a * a.adjoint();
    let tr = r.trace();
    r / tr
}

/// Two-qubit couplings from the real pair parameters.
pub fn pair_couplings(js: f64, ja: f64, gs: f64, ga: f64) -> CouplingMatrices {
    let mut d = nonrecip::coupling::CouplingDecomposition::zeros(2);
    d.set_pair(0, 1, js, ja, gs, ga);
    CouplingMatrices::from_decomposition(&d, 1.0).unwrap()
}

/// Reduced variables of a full 4×4 state.
pub fn reduce_two_qubit(rho: &DMatrix<C64>) -> nonrecip::two_qubit::TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (ee, eg, ge, gg) = (nonrecip::lindblad::basis_index(2, 0b11), nonrecip::lindblad::basis_index(2, 0b10), nonrecip::lindblad::basis_index(2, 0b01), nonrecip::lindblad::basis_index(2, 0b00));
    // |𝟙⟩ = (|ge⟩ − |eg⟩)/√2, |𝟚⟩ = (|ge⟩ + |eg⟩)/√2
    let mut v1 = vec![C64::new(0.0, 0.0); 4];
    let mut v2 = v1.clone();
    v1[ge] = C64::new(h, 0.0);
    v1[eg] = C64::new(-h, 0.0);
    v2[ge] = C64::new(h, 0.0);
    v2[eg] = C64::new(h, 0.0);
    let el = |a: &[C64], b: &[C64]| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += a[i].conj() * rho[(i, j)] * b[j];
            }
        }
        acc
    };
    nonrecip::two_qubit::TwoQubitState {
        rho_ee: rho[(ee, ee)].re,
        rho_11: el(&v1, &v1).re,
        rho_22: el(&v2, &v2).re,
        rho_gg: rho[(gg, gg)].re,
        re_rho_21: el(&v2, &v1).re,
    }
}
