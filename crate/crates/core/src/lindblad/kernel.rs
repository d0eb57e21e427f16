//! Liouvillian action on density matrices stored by excitation-number blocks.
//!
//! The generator commutes with the total excitation number up to a shift: a
//! matrix element `ρ[s, t]` only feeds elements with the same popcount
//! difference `|s| − |t|`. States are therefore stored as the blocks
//! `(k_row, k_col)` that the initial condition populates, and operators act
//! through precomputed neighbour lists over excitation patterns. Neither the
//! `4^N` superoperator nor the `2^N` many-body operators are materialized.

use nalgebra::DMatrix;

use super::state::{basis_index, check_qubit_count, excitation_pattern, DensityMatrix};
use crate::coupling::{CouplingMatrices, C64};
use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Excitation patterns grouped by popcount.
#[derive(Debug, Clone)]
pub(crate) struct Sectors {
    /// `states[k]` lists the patterns with `k` excitations in ascending order.
    pub states: Vec<Vec<u32>>,
    /// Rank of each pattern within its sector.
    pub rank: Vec<u32>,
}

impl Sectors {
    pub fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let mut states = vec![Vec::new(); n + 1];
        let mut rank = vec![0u32; dim];
        for p in 0..dim {
            let k = p.count_ones() as usize;
            rank[p] = states[k].len() as u32;
            states[k].push(p as u32);
        }
        Self { states, rank }
    }

    pub fn size(&self, k: usize) -> usize {
        self.states[k].len()
    }
}

/// One contiguous row-major block `(k_row, k_col)` of a packed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub k_row: usize,
    pub k_col: usize,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Which excitation blocks of `ρ` are stored, and where.
#[derive(Debug, Clone)]
pub struct PackedLayout {
    n: usize,
    blocks: Vec<Block>,
    lookup: Vec<Option<usize>>,
    len: usize,
    sectors: Sectors,
}

impl PackedLayout {
    fn with_differences(n: usize, keep: impl Fn(isize) -> bool) -> Result<Self> {
        check_qubit_count(n)?;
        let sectors = Sectors::new(n);
        let mut blocks = Vec::new();
        let mut lookup = vec![None; (n + 1) * (n + 1)];
        let mut offset = 0;
        for k_row in 0..=n {
            for k_col in 0..=n {
                if !keep(k_row as isize - k_col as isize) {
                    continue;
                }
                let (rows, cols) = (sectors.size(k_row), sectors.size(k_col));
                lookup[k_row * (n + 1) + k_col] = Some(blocks.len());
                blocks.push(Block {
                    k_row,
                    k_col,
                    offset,
                    rows,
                    cols,
                });
                offset += rows * cols;
            }
        }
        Ok(Self {
            n,
            blocks,
            lookup,
            len: offset,
            sectors,
        })
    }

    /// Every block: equivalent to dense storage.
    pub fn full(n: usize) -> Result<Self> {
        Self::with_differences(n, |_| true)
    }

    /// Only blocks with equal excitation number on both sides.
    pub fn number_diagonal(n: usize) -> Result<Self> {
        Self::with_differences(n, |q| q == 0)
    }

    /// Smallest layout closed under the dynamics that holds every non-zero
    /// entry of `rho`.
    pub fn for_state(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.n_qubits();
        let dim = rho.dim();
        let mut present = vec![false; 2 * n + 1];
        for c in 0..dim {
            let kc = excitation_pattern(n, c).count_ones() as isize;
            for r in 0..dim {
                if rho.data()[(r, c)] != C64::new(0.0, 0.0) {
                    let kr = excitation_pattern(n, r).count_ones() as isize;
                    present[(kr - kc + n as isize) as usize] = true;
                    present[(kc - kr + n as isize) as usize] = true;
                }
            }
        }
        if !present.iter().any(|&p| p) {
            present[n] = true;
        }
        Self::with_differences(n, |q| present[(q + n as isize) as usize])
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_number_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.k_row == b.k_col)
    }

    pub(crate) fn sectors(&self) -> &Sectors {
        &self.sectors
    }

    pub fn block(&self, k_row: usize, k_col: usize) -> Option<&Block> {
        if k_row > self.n || k_col > self.n {
            return None;
        }
        self.lookup[k_row * (self.n + 1) + k_col].map(|i| &self.blocks[i])
    }

    /// Copies the stored blocks out of a dense matrix. Entries outside the
    /// layout are dropped.
    pub fn pack(&self, rho: &DensityMatrix) -> Result<Vec<C64>> {
        if rho.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rho.n_qubits(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.len];
        for b in &self.blocks {
            for (i, &s) in self.sectors.states[b.k_row].iter().enumerate() {
                let r = basis_index(self.n, s as usize);
                for (j, &t) in self.sectors.states[b.k_col].iter().enumerate() {
                    let c = basis_index(self.n, t as usize);
                    out[b.offset + i * b.cols + j] = rho.data()[(r, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn unpack(&self, data: &[C64]) -> Result<DensityMatrix> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for b in &self.blocks {
            for (i, &s) in self.sectors.states[b.k_row].iter().enumerate() {
                let r = basis_index(self.n, s as usize);
                for (j, &t) in self.sectors.states[b.k_col].iter().enumerate() {
                    let c = basis_index(self.n, t as usize);
                    m[(r, c)] = data[b.offset + i * b.cols + j];
                }
            }
        }
        DensityMatrix::new(self.n, m)
    }

    pub fn trace(&self, data: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for b in self.blocks.iter().filter(|b| b.k_row == b.k_col) {
            for i in 0..b.rows {
                acc += data[b.offset + i * b.cols + i];
            }
        }
        acc
    }

    /// `max |ρ[s,t] − conj ρ[t,s]|` over stored entries.
    pub fn hermiticity_residual(&self, data: &[C64]) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let Some(m) = self.block(b.k_col, b.k_row) else {
                continue;
            };
            for i in 0..b.rows {
                for j in 0..b.cols {
                    let x = data[b.offset + i * b.cols + j];
                    let y = data[m.offset + j * m.cols + i];
                    worst = worst.max((x - y.conj()).norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue of the stored state. Number-diagonal layouts are
    /// block diagonal, so each block is diagonalized on its own.
    pub fn min_eigenvalue(&self, data: &[C64]) -> Result<f64> {
        if self.is_number_diagonal() {
            let mut worst = f64::INFINITY;
            for b in &self.blocks {
                let m = DMatrix::from_fn(b.rows, b.cols, |i, j| {
                    0.5 * (data[b.offset + i * b.cols + j] + data[b.offset + j * b.cols + i].conj())
                });
                for &e in m.symmetric_eigenvalues().iter() {
                    worst = worst.min(e);
                }
            }
            Ok(worst)
        } else {
            Ok(self.unpack(data)?.min_eigenvalue())
        }
    }
}

/// Off-diagonal element of the many-body effective Hamiltonian:
/// `H[row, col] = h_ab` with `row = col − b + a`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hop {
    pub col: u32,
    /// Qubit excited in the row state.
    pub a: u8,
    /// Qubit excited in the column state.
    pub b: u8,
    pub h: C64,
    /// Matching element `Γ_ab` of `Σ Γ_ab σ_a⁺σ_b⁻`.
    pub g: C64,
}

/// Raising link from a pattern in sector `k` to one in sector `k + 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Raise {
    pub target: u32,
    pub qubit: u8,
}

/// Precomputed action of `−i[H, ·] + L[·]` for one set of couplings.
///
/// Internally `H_eff = Σ h_ab σ_a⁺σ_b⁻` with `h = J/2 − iΓ/2`, so that
/// `dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ Γ_ab σ_b⁻ ρ σ_a⁺`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n: usize,
    gamma: Vec<C64>,
    /// Per sector: CSR row pointers into `hops`.
    hop_ptr: Vec<Vec<u32>>,
    hops: Vec<Vec<Hop>>,
    /// Per sector: diagonal of `H_eff` and of `Σ Γ_ab σ_a⁺σ_b⁻`.
    diag_h: Vec<Vec<C64>>,
    diag_g: Vec<Vec<C64>>,
    up_ptr: Vec<Vec<u32>>,
    ups: Vec<Vec<Raise>>,
}

impl Liouvillian {
    pub fn new(m: &CouplingMatrices) -> Result<Self> {
        let n = m.n();
        check_qubit_count(n)?;
        let sectors = Sectors::new(n);
        let h1 = DMatrix::from_fn(n, n, |a, b| 0.5 * m.j()[(a, b)] - 0.5 * I * m.gamma()[(a, b)]);
        let bit = |q: usize| 1u32 << (n - 1 - q);

        let mut hop_ptr = Vec::with_capacity(n + 1);
        let mut hops = Vec::with_capacity(n + 1);
        let mut diag_h = Vec::with_capacity(n + 1);
        let mut diag_g = Vec::with_capacity(n + 1);
        let mut up_ptr = Vec::with_capacity(n + 1);
        let mut ups = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut ptr = vec![0u32];
            let mut list = Vec::new();
            let mut dh = Vec::new();
            let mut dg = Vec::new();
            let mut uptr = vec![0u32];
            let mut ulist = Vec::new();
            for &s in &sectors.states[k] {
                let mut d = C64::new(0.0, 0.0);
                let mut g = C64::new(0.0, 0.0);
                for a in 0..n {
                    if s & bit(a) != 0 {
                        d += h1[(a, a)];
                        g += m.gamma()[(a, a)];
                    }
                }
                dh.push(d);
                dg.push(g);
                // row s, column s' = s − a + b
                for a in 0..n {
                    if s & bit(a) == 0 {
                        continue;
                    }
                    for b in 0..n {
                        if b == a || s & bit(b) != 0 {
                            continue;
                        }
                        let col = (s ^ bit(a)) | bit(b);
                        list.push(Hop {
                            col: sectors.rank[col as usize],
                            a: a as u8,
                            b: b as u8,
                            h: h1[(a, b)],
                            g: m.gamma()[(a, b)],
                        });
                    }
                }
                ptr.push(list.len() as u32);
                if k < n {
                    for q in 0..n {
                        if s & bit(q) == 0 {
                            ulist.push(Raise {
                                target: sectors.rank[(s | bit(q)) as usize],
                                qubit: q as u8,
                            });
                        }
                    }
                }
                uptr.push(ulist.len() as u32);
            }
            hop_ptr.push(ptr);
            hops.push(list);
            diag_h.push(dh);
            diag_g.push(dg);
            up_ptr.push(uptr);
            ups.push(ulist);
        }
        let gamma = (0..n * n).map(|i| m.gamma()[(i / n, i % n)]).collect();
        Ok(Self {
            n,
            gamma,
            hop_ptr,
            hops,
            diag_h,
            diag_g,
            up_ptr,
            ups,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_hops(&self, k: usize, i: usize) -> &[Hop] {
        let p = &self.hop_ptr[k];
        &self.hops[k][p[i] as usize..p[i + 1] as usize]
    }

    #[inline]
    fn row_ups(&self, k: usize, i: usize) -> &[Raise] {
        let p = &self.up_ptr[k];
        &self.ups[k][p[i] as usize..p[i + 1] as usize]
    }

    fn check_layout(&self, layout: &PackedLayout, rho: &[C64], out: &[C64]) -> Result<()> {
        if layout.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: layout.n_qubits(),
            });
        }
        for len in [rho.len(), out.len()] {
            if len < layout.len() {
                return Err(Error::DimensionMismatch {
                    expected: layout.len(),
                    found: len,
                });
            }
        }
        Ok(())
    }

    /// `out = L(ρ)` for an arbitrary (not necessarily Hermitian) packed `ρ`.
    pub fn apply(&self, layout: &PackedLayout, rho: &[C64], out: &mut [C64]) -> Result<()> {
        self.check_layout(layout, rho, out)?;
        for b in layout.blocks() {
            let dst = &mut out[b.offset..b.offset + b.rows * b.cols];
            let src = &rho[b.offset..b.offset + b.rows * b.cols];
            dst.fill(C64::new(0.0, 0.0));
            self.left_multiply(b, src, dst);
            // + i ρ H†
            for i in 0..b.rows {
                let srow = &src[i * b.cols..(i + 1) * b.cols];
                let drow = &mut dst[i * b.cols..(i + 1) * b.cols];
                for t in 0..b.cols {
                    let mut acc = I * self.diag_h[b.k_col][t].conj() * srow[t];
                    for hop in self.row_hops(b.k_col, t) {
                        acc += I * hop.h.conj() * srow[hop.col as usize];
                    }
                    drow[t] += acc;
                }
            }
            if let Some(up) = layout.block(b.k_row + 1, b.k_col + 1) {
                let upper = &rho[up.offset..up.offset + up.rows * up.cols];
                self.add_jumps(b, up, upper, dst, false);
            }
        }
        Ok(())
    }

    /// `out = L(ρ)` for Hermitian `ρ` on a number-diagonal layout. Computes
    /// `X = −iH_eff ρ` once and uses `L(ρ) = X + X† + jumps`; the result is
    /// Hermitian to the last bit.
    pub fn apply_hermitian(&self, layout: &PackedLayout, rho: &[C64], out: &mut [C64]) -> Result<()> {
        self.check_layout(layout, rho, out)?;
        if !layout.is_number_diagonal() {
            return self.apply(layout, rho, out);
        }
        for b in layout.blocks() {
            let len = b.rows * b.cols;
            let dst = &mut out[b.offset..b.offset + len];
            let src = &rho[b.offset..b.offset + len];
            dst.fill(C64::new(0.0, 0.0));
            self.left_multiply(b, src, dst);
            let d = b.rows;
            for i in 0..d {
                for t in 0..i {
                    let v = dst[i * d + t] + dst[t * d + i].conj();
                    dst[i * d + t] = v;
                    dst[t * d + i] = v.conj();
                }
                let v = dst[i * d + i];
                dst[i * d + i] = C64::new(2.0 * v.re, 0.0);
            }
            if let Some(up) = layout.block(b.k_row + 1, b.k_col + 1) {
                let upper = &rho[up.offset..up.offset + up.rows * up.cols];
                self.add_jumps(b, up, upper, dst, true);
            }
        }
        Ok(())
    }

    /// `dst = −i H_eff · src` restricted to the block's row sector.
    #[inline]
    fn left_multiply(&self, b: &Block, src: &[C64], dst: &mut [C64]) {
        let cols = b.cols;
        for i in 0..b.rows {
            let drow = &mut dst[i * cols..(i + 1) * cols];
            let c = -I * self.diag_h[b.k_row][i];
            let srow = &src[i * cols..(i + 1) * cols];
            for (d, s) in drow.iter_mut().zip(srow) {
                *d += c * s;
            }
            for hop in self.row_hops(b.k_row, i) {
                let c = -I * hop.h;
                let r = hop.col as usize;
                let srow = &src[r * cols..(r + 1) * cols];
                for (d, s) in drow.iter_mut().zip(srow) {
                    *d += c * s;
                }
            }
        }
    }

    /// Adds `Σ Γ_ab σ_b⁻ ρ σ_a⁺` into block `b`, reading the block `up` one
    /// excitation higher on both sides. With `lower_only` the jump term is
    /// computed for `t ≤ i` and mirrored (valid for Hermitian diagonal blocks).
    fn add_jumps(&self, b: &Block, up: &Block, upper: &[C64], dst: &mut [C64], lower_only: bool) {
        let n = self.n;
        let mut acc = vec![C64::new(0.0, 0.0); b.cols];
        let mut gcol = vec![C64::new(0.0, 0.0); n];
        for i in 0..b.rows {
            let width = if lower_only { i + 1 } else { b.cols };
            acc[..width].fill(C64::new(0.0, 0.0));
            for rs in self.row_ups(b.k_row, i) {
                let beta = rs.qubit as usize;
                for (alpha, g) in gcol.iter_mut().enumerate() {
                    *g = self.gamma[alpha * n + beta];
                }
                let urow = &upper[rs.target as usize * up.cols..(rs.target as usize + 1) * up.cols];
                for (t, a) in acc[..width].iter_mut().enumerate() {
                    let mut s = C64::new(0.0, 0.0);
                    for rt in self.row_ups(b.k_col, t) {
                        s += gcol[rt.qubit as usize] * urow[rt.target as usize];
                    }
                    *a += s;
                }
            }
            if lower_only {
                let d = b.cols;
                for t in 0..i {
                    dst[i * d + t] += acc[t];
                    dst[t * d + i] += acc[t].conj();
                }
                dst[i * d + i] += C64::new(acc[i].re, 0.0);
            } else {
                for (d, a) in dst[i * b.cols..(i + 1) * b.cols].iter_mut().zip(&acc) {
                    *d += a;
                }
            }
        }
    }

    /// `Tr(Σ Γ_ab σ_a⁺σ_b⁻ ρ)`: total emission rate of a packed state.
    pub fn total_emission(&self, layout: &PackedLayout, rho: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for b in layout.blocks().iter().filter(|b| b.k_row == b.k_col) {
            let d = b.cols;
            let blk = &rho[b.offset..b.offset + d * d];
            for i in 0..d {
                acc += self.diag_g[b.k_row][i] * blk[i * d + i];
                for hop in self.row_hops(b.k_row, i) {
                    acc += hop.g * blk[hop.col as usize * d + i];
                }
            }
        }
        acc.re
    }

    /// Populations `⟨σ_q⁺σ_q⁻⟩` and the correlator matrix `C[a][b] = ⟨σ_a⁺σ_b⁻⟩`
    /// (row-major `N×N`, diagonal = populations) of a packed state.
    pub fn correlators(&self, layout: &PackedLayout, rho: &[C64]) -> Vec<C64> {
        let n = self.n;
        let sectors = layout.sectors();
        let mut c = vec![C64::new(0.0, 0.0); n * n];
        for b in layout.blocks().iter().filter(|b| b.k_row == b.k_col) {
            let d = b.cols;
            let blk = &rho[b.offset..b.offset + d * d];
            for (i, &s) in sectors.states[b.k_row].iter().enumerate() {
                let p = blk[i * d + i];
                for q in 0..n {
                    if s & (1 << (n - 1 - q)) != 0 {
                        c[q * n + q] += p;
                    }
                }
                // H[i, col] links row state i (qubit a excited) with column
                // state col (qubit b excited): ρ[i, col] feeds ⟨σ_b⁺σ_a⁻⟩.
                for hop in self.row_hops(b.k_row, i) {
                    c[hop.b as usize * n + hop.a as usize] += blk[i * d + hop.col as usize];
                }
            }
        }
        c
    }
}

/// Single-excitation block `⟨α|ρ|β⟩` (row-major `N×N`, qubit order) of a
/// packed state; zero when the layout does not store it.
pub fn single_excitation_block(layout: &PackedLayout, rho: &[C64]) -> Vec<C64> {
    let n = layout.n_qubits();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    if let Some(b) = layout.block(1, 1) {
        // patterns 1 << (n-1-α) sorted ascending: rank r is qubit n-1-r
        for r in 0..n {
            for c in 0..n {
                out[(n - 1 - r) * n + (n - 1 - c)] = rho[b.offset + r * b.cols + c];
            }
        }
    }
    out
}

/// Dense-in, dense-out Liouvillian action.
pub fn liouvillian_apply(rho: &DensityMatrix, m: &CouplingMatrices) -> Result<DMatrix<C64>> {
    if rho.n_qubits() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: rho.n_qubits(),
        });
    }
    let layout = PackedLayout::full(m.n())?;
    let l = Liouvillian::new(m)?;
    let packed = layout.pack(rho)?;
    let mut out = vec![C64::new(0.0, 0.0); layout.len()];
    l.apply(&layout, &packed, &mut out)?;
    Ok(layout.unpack(&out)?.into_inner())
}
