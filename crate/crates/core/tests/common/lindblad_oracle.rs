//! Brute-force master equation built from explicit `2^N × 2^N` operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `σ⁻` on qubit `q` of `n`, single-qubit basis ordered (e, g).
pub fn lowering(n: usize, q: usize) -> DMatrix<C64> {
    let id = DMatrix::<C64>::identity(2, 2);
    let mut sm = DMatrix::<C64>::zeros(2, 2);
    sm[(1, 0)] = C64::new(1.0, 0.0); // |g><e|
    let mut out = DMatrix::<C64>::identity(1, 1);
    for k in 0..n {
        out = kron(&out, if k == q { &sm } else { &id });
    }
    out
}

pub fn liouvillian(rho: &DMatrix<C64>, j: &DMatrix<C64>, gamma: &DMatrix<C64>) -> DMatrix<C64> {
    let n = j.nrows();
    let dim = rho.nrows();
    let sm: Vec<_> = (0..n).map(|q| lowering(n, q)).collect();
    let sp: Vec<_> = sm.iter().map(|m| m.adjoint()).collect();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..n {
        for b in 0..n {
            h += &sp[a] * &sm[b] * (0.5 * j[(a, b)]);
        }
    }
    let i = C64::new(0.0, 1.0);
    let mut out = (&h * rho - rho * &h) * (-i);
    for a in 0..n {
        for b in 0..n {
            let g = gamma[(a, b)];
            let pm = &sp[a] * &sm[b];
            out += (&sm[b] * rho * &sp[a] - (&pm * rho + rho * &pm) * C64::new(0.5, 0.0)) * g;
        }
    }
    out
}

/// `Tr(σ_q⁺σ_q⁻ ρ)` via explicit operators.
pub fn population(rho: &DMatrix<C64>, n: usize, q: usize) -> f64 {
    let sm = lowering(n, q);
    (sm.adjoint() * &sm * rho).trace().re
}
