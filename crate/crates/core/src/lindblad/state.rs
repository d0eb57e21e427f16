use nalgebra::DMatrix;

use crate::coupling::C64;
use crate::error::{Error, Result};

/// Largest array the dense engine accepts.
pub const MAX_QUBITS: usize = 12;

/// Bit of qubit `q` (zero-based) in a basis index; qubit 0 is the most
/// significant bit.
#[inline]
pub fn qubit_bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Excitation pattern of a basis index: bit set means the qubit is excited.
/// Within each qubit factor `|e⟩` comes first, so an excited qubit has a 0 bit
/// in the basis index.
#[inline]
pub fn excitation_pattern(n: usize, index: usize) -> usize {
    index ^ ((1 << n) - 1)
}

/// Inverse of [`excitation_pattern`] (the map is an involution).
#[inline]
pub fn basis_index(n: usize, pattern: usize) -> usize {
    pattern ^ ((1 << n) - 1)
}

pub fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Validation("need at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceeds the dense-engine cap of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Dense `2^N × 2^N` density matrix in the tensor-product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(n: usize, data: DMatrix<C64>) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { n, data })
    }

    /// Projector onto the basis state with the given excitation pattern.
    pub fn basis_projector(n: usize, pattern: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let mut data = DMatrix::zeros(dim, dim);
        let i = basis_index(n, pattern & (dim - 1));
        data[(i, i)] = C64::new(1.0, 0.0);
        Ok(Self { n, data })
    }

    /// `|e…e⟩⟨e…e|`.
    pub fn fully_excited(n: usize) -> Result<Self> {
        Self::basis_projector(n, (1usize << n.min(63)) - 1)
    }

    pub fn ground(n: usize) -> Result<Self> {
        Self::basis_projector(n, 0)
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn from_pure(n: usize, psi: &[C64]) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.len(),
            });
        }
        let data = DMatrix::from_fn(dim, dim, |r, c| psi[r] * psi[c].conj());
        Ok(Self { n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ ρ_ij ρ_ji
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.data[(i, j)] * self.data[(j, i)];
            }
        }
        acc.re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨σ_q⁺σ_q⁻⟩`.
    pub fn population(&self, q: usize) -> f64 {
        let bit = qubit_bit(self.n, q);
        (0..self.dim())
            .filter(|&i| excitation_pattern(self.n, i) & bit != 0)
            .map(|i| self.data[(i, i)].re)
            .sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n).map(|q| self.population(q)).collect()
    }

    /// `⟨σ_a⁺σ_b⁻⟩ = Tr(σ_a⁺σ_b⁻ ρ)`; equals the population for `a = b`.
    pub fn correlator(&self, a: usize, b: usize) -> C64 {
        if a == b {
            return C64::new(self.population(a), 0.0);
        }
        let (ba, bb) = (qubit_bit(self.n, a), qubit_bit(self.n, b));
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..self.dim() {
            // p has a excited and b in the ground state
            if p & ba != 0 && p & bb == 0 {
                let q = (p ^ ba) | bb;
                acc += self.data[(basis_index(self.n, q), basis_index(self.n, p))];
            }
        }
        acc
    }
}
