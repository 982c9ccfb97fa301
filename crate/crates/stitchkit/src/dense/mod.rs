//! Exact dense-matrix backend: the brute-force oracle for every quantity the
//! estimators target.
//!
//! Bit ordering convention, shared by all modules: qubit 0 is the leftmost
//! site of the chain and the most significant bit of the computational-basis
//! index. So for `N` qubits, basis index `r` assigns qubit `q` the bit
//! `(r >> (N - 1 - q)) & 1`.

mod moments;
mod spin_chains;

pub use moments::{
    f3, f5, log_negativity, normalized_pt_moment, pt_moment, pt_spectrum, renyi_entropy,
    renyi_moment, s_ratio, MomentReport, PtProbe,
};
pub use spin_chains::{build_ising, build_xxz, gibbs_from_spectrum, gibbs_state, total_sz};

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ONE, ZERO};

/// Tolerance for density-matrix validity: Hermiticity, unit trace and the
/// positivity floor. Matches double-precision eigendecomposition noise.
pub const DENSITY_TOL: f64 = 1e-10;

/// Hard cap for the dense backend.
pub const MAX_DENSE_QUBITS: usize = 14;

/// A contiguous interval of qubits `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    pub fn new(start: usize, len: usize) -> Self {
        Interval { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.len == 0 || self.end() > n_qubits {
            return Err(Error::IntervalOutOfRange {
                start: self.start,
                len: self.len,
                n_qubits,
            });
        }
        Ok(())
    }

    /// The interval immediately following this one, of length `len`.
    pub fn then(&self, len: usize) -> Interval {
        Interval::new(self.end(), len)
    }

    pub fn contains(&self, q: usize) -> bool {
        q >= self.start && q < self.end()
    }

    /// Union with an adjacent interval (must share an endpoint).
    pub fn join(&self, other: &Interval) -> Result<Interval> {
        let (a, b) = if self.start <= other.start { (self, other) } else { (other, self) };
        if a.end() != b.start {
            return Err(Error::InvalidPartition(format!(
                "intervals [{}, {}) and [{}, {}) are not adjacent",
                a.start,
                a.end(),
                b.start,
                b.end()
            )));
        }
        Ok(Interval::new(a.start, a.len + b.len))
    }
}

/// Exact `2^N × 2^N` complex operator on an `N`-qubit chain.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: Mat<c64>,
}

impl DenseOperator {
    pub fn from_matrix(n_qubits: usize, matrix: Mat<c64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Precondition(format!(
                "matrix is {}x{}, expected {}x{} for {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                dim,
                dim,
                n_qubits
            )));
        }
        Ok(DenseOperator { n_qubits, matrix })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DenseOperator { n_qubits, matrix: Mat::zeros(dim, dim) }
    }

    /// Maximally mixed state `I / 2^N`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        DenseOperator {
            n_qubits,
            matrix: Mat::from_fn(dim, dim, |i, j| if i == j { w } else { ZERO }),
        }
    }

    /// Projector onto the computational-basis state with the given bits.
    pub fn basis_projector(bits: &[u8]) -> Self {
        let n = bits.len();
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let dim = 1usize << n;
        DenseOperator {
            n_qubits: n,
            matrix: Mat::from_fn(dim, dim, |i, j| if i == idx && j == idx { ONE } else { ZERO }),
        }
    }

    /// Pure-state density matrix `|ψ⟩⟨ψ|` from an amplitude vector.
    pub fn from_pure_state(n_qubits: usize, amplitudes: &[c64]) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::Precondition(format!(
                "state vector has {} amplitudes, expected {}",
                amplitudes.len(),
                dim
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let matrix = Mat::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj() / norm);
        Ok(DenseOperator { n_qubits, matrix })
    }

    /// The Bell pair `|Φ⁺⟩⟨Φ⁺|` on two qubits.
    pub fn bell_pair() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DenseOperator::from_pure_state(2, &[s, ZERO, ZERO, s]).unwrap()
    }

    /// `(|0…0⟩ + |1…1⟩)(⟨0…0| + ⟨1…1|)/2`: the canonical long-range
    /// correlated pure state.
    pub fn ghz(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![ZERO; dim];
        amps[0] = s;
        amps[dim - 1] = s;
        DenseOperator::from_pure_state(n_qubits, &amps).unwrap()
    }

    /// Convex mixture `(1-w)·self + w·other`.
    pub fn mix(&self, other: &DenseOperator, w: f64) -> DenseOperator {
        assert_eq!(self.n_qubits, other.n_qubits, "mixing operators of different size");
        let matrix = Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.matrix[(i, j)] * (1.0 - w) + other.matrix[(i, j)] * w
        });
        DenseOperator { n_qubits: self.n_qubits, matrix }
    }

    /// Tensor product `self ⊗ other`, with `other` appended to the right of
    /// the chain (lower-significance bits).
    pub fn tensor(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut Mat<c64> {
        &mut self.matrix
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(&self.matrix)
    }

    /// `Tr[ρ²]` without a decomposition; exact for Hermitian input.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += self.matrix[(i, j)].norm_sqr();
            }
        }
        acc
    }

    pub fn full_interval(&self) -> Interval {
        Interval::new(0, self.n_qubits)
    }

    /// Bit value of qubit `q` in basis index `r` (qubit 0 = most significant).
    #[inline]
    pub fn bit(&self, r: usize, q: usize) -> usize {
        (r >> (self.n_qubits - 1 - q)) & 1
    }

    pub fn validate_density(&self) -> Result<()> {
        self.validate_density_with(DENSITY_TOL)
    }

    pub fn validate_density_with(&self, tol: f64) -> Result<()> {
        let herm = linalg::hermiticity_deviation(&self.matrix);
        if herm > tol {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NotDensityMatrix(format!("trace is {:.12}", tr)));
        }
        let vals = linalg::eigvalsh(&self.matrix)?;
        if vals[0] < -tol {
            return Err(Error::NotDensityMatrix(format!(
                "minimum eigenvalue {:.3e} below -{:.0e}",
                vals[0], tol
            )));
        }
        Ok(())
    }

    /// Eigenvalues of the (Hermitian) operator, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Apply `u ρ u†` in place for a single-qubit unitary on qubit `q`.
    pub fn apply_single_qubit_unitary(&mut self, q: usize, u: &Mat<c64>) {
        let dim = self.dim();
        let stride = 1usize << (self.n_qubits - 1 - q);
        // left multiplication
        for col in 0..dim {
            for base in subspace_indices(dim, stride) {
                let a = self.matrix[(base, col)];
                let b = self.matrix[(base + stride, col)];
                self.matrix[(base, col)] = u[(0, 0)] * a + u[(0, 1)] * b;
                self.matrix[(base + stride, col)] = u[(1, 0)] * a + u[(1, 1)] * b;
            }
        }
        // right multiplication by u†
        for base in subspace_indices(dim, stride) {
            for row in 0..dim {
                let a = self.matrix[(row, base)];
                let b = self.matrix[(row, base + stride)];
                self.matrix[(row, base)] = a * u[(0, 0)].conj() + b * u[(0, 1)].conj();
                self.matrix[(row, base + stride)] = a * u[(1, 0)].conj() + b * u[(1, 1)].conj();
            }
        }
    }

    /// Apply `g ρ g†` in place for a two-qubit unitary on neighbors `(q, q+1)`.
    pub fn apply_two_qubit_unitary(&mut self, q: usize, g: &Mat<c64>) {
        assert!(q + 1 < self.n_qubits, "gate acts on ({}, {}) outside chain", q, q + 1);
        let dim = self.dim();
        let hi = 1usize << (self.n_qubits - 1 - q);
        let lo = hi >> 1;
        let bases: Vec<usize> = (0..dim).filter(|r| r & hi == 0 && r & lo == 0).collect();
        let idx = |base: usize| [base, base + lo, base + hi, base + hi + lo];
        let mut tmp = [ZERO; 4];
        for col in 0..dim {
            for &base in &bases {
                let rows = idx(base);
                for (i, t) in tmp.iter_mut().enumerate() {
                    *t = (0..4).map(|k| g[(i, k)] * self.matrix[(rows[k], col)]).sum();
                }
                for (k, &r) in rows.iter().enumerate() {
                    self.matrix[(r, col)] = tmp[k];
                }
            }
        }
        for &base in &bases {
            let cols = idx(base);
            for row in 0..dim {
                for (i, t) in tmp.iter_mut().enumerate() {
                    *t = (0..4).map(|k| self.matrix[(row, cols[k])] * g[(i, k)].conj()).sum();
                }
                for (k, &c) in cols.iter().enumerate() {
                    self.matrix[(row, c)] = tmp[k];
                }
            }
        }
    }
}

fn subspace_indices(dim: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..dim).filter(move |r| r & stride == 0)
}

/// Reduced density matrix on `keep`, tracing out the rest of the chain.
pub fn partial_trace(rho: &DenseOperator, keep: Interval) -> Result<DenseOperator> {
    keep.validate(rho.n_qubits())?;
    let n = rho.n_qubits();
    let dl = 1usize << keep.start;
    let dk = 1usize << keep.len;
    let dr = 1usize << (n - keep.end());
    let mut out = Mat::<c64>::zeros(dk, dk);
    for l in 0..dl {
        for a in 0..dk {
            let row_base = (l * dk + a) * dr;
            for b in 0..dk {
                let col_base = (l * dk + b) * dr;
                let mut acc = ZERO;
                for r in 0..dr {
                    acc += rho.matrix()[(row_base + r, col_base + r)];
                }
                out[(a, b)] += acc;
            }
        }
    }
    DenseOperator::from_matrix(keep.len, out)
}

/// Partial transpose with respect to the qubits in `a`.
pub fn partial_transpose(rho: &DenseOperator, a: Interval) -> Result<DenseOperator> {
    a.validate(rho.n_qubits())?;
    let n = rho.n_qubits();
    let dim = rho.dim();
    let shift = n - a.end();
    let mask = ((1usize << a.len) - 1) << shift;
    let mut out = Mat::<c64>::zeros(dim, dim);
    for col in 0..dim {
        for row in 0..dim {
            let row_sw = (row & !mask) | (col & mask);
            let col_sw = (col & !mask) | (row & mask);
            out[(row, col)] = rho.matrix()[(row_sw, col_sw)];
        }
    }
    DenseOperator::from_matrix(n, out)
}
