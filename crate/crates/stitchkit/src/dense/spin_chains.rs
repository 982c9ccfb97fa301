//! The two benchmark Hamiltonians (open-boundary 1D Ising with transverse and
//! longitudinal fields, and the XXZ chain) and exact Gibbs states.

use faer::{c64, Mat};
use num_complex::Complex64;

use super::{DenseOperator, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::linalg;

fn check_chain_size(l: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::Precondition(format!("chain length {l} < 2")));
    }
    if l > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit(l, MAX_DENSE_QUBITS));
    }
    Ok(())
}

/// `H = -(1/4) Σ_{j=1}^{L-1} [σᶻⱼ σᶻⱼ₊₁ + h_x σˣⱼ + h_z σᶻⱼ]`, open boundaries.
/// The field terms run over the same `L-1` sites as the bonds.
pub fn build_ising(l: usize, h_x: f64, h_z: f64) -> Result<DenseOperator> {
    check_chain_size(l)?;
    let dim = 1usize << l;
    let mut h = Mat::<c64>::zeros(dim, dim);
    let z = |r: usize, q: usize| 1.0 - 2.0 * ((r >> (l - 1 - q)) & 1) as f64;
    for r in 0..dim {
        let mut diag = 0.0;
        for j in 0..l - 1 {
            diag += z(r, j) * z(r, j + 1) + h_z * z(r, j);
        }
        h[(r, r)] = Complex64::new(-0.25 * diag, 0.0);
        for j in 0..l - 1 {
            let flipped = r ^ (1 << (l - 1 - j));
            h[(flipped, r)] += Complex64::new(-0.25 * h_x, 0.0);
        }
    }
    DenseOperator::from_matrix(l, h)
}

/// `H = -(1/4) Σ_{j=1}^{L-1} [σˣⱼσˣⱼ₊₁ + σʸⱼσʸⱼ₊₁ + Δ σᶻⱼσᶻⱼ₊₁]`, open
/// boundaries. Conserves total σᶻ.
pub fn build_xxz(l: usize, delta: f64) -> Result<DenseOperator> {
    check_chain_size(l)?;
    let dim = 1usize << l;
    let mut h = Mat::<c64>::zeros(dim, dim);
    let z = |r: usize, q: usize| 1.0 - 2.0 * ((r >> (l - 1 - q)) & 1) as f64;
    for r in 0..dim {
        let mut diag = 0.0;
        for j in 0..l - 1 {
            diag += delta * z(r, j) * z(r, j + 1);
        }
        h[(r, r)] = Complex64::new(-0.25 * diag, 0.0);
        // σˣσˣ + σʸσʸ exchanges anti-aligned neighbors with amplitude 2
        for j in 0..l - 1 {
            let bj = (r >> (l - 1 - j)) & 1;
            let bj1 = (r >> (l - 2 - j)) & 1;
            if bj != bj1 {
                let flipped = r ^ (1 << (l - 1 - j)) ^ (1 << (l - 2 - j));
                h[(flipped, r)] += Complex64::new(-0.5, 0.0);
            }
        }
    }
    DenseOperator::from_matrix(l, h)
}

/// Gibbs state `exp(-βH)/Z` via eigendecomposition; exact at desk scale.
pub fn gibbs_state(h: &DenseOperator, beta: f64) -> Result<DenseOperator> {
    if beta < 0.0 {
        return Err(Error::Precondition(format!("inverse temperature {beta} < 0")));
    }
    let herm = linalg::hermiticity_deviation(h.matrix());
    if herm > 1e-10 {
        return Err(Error::NotHermitian(herm));
    }
    let (vals, vecs) = linalg::eigh(h.matrix())?;
    let rho = gibbs_from_spectrum(&vals, &vecs, beta);
    let out = DenseOperator::from_matrix(h.n_qubits(), rho)?;
    out.validate_density()?;
    Ok(out)
}

/// Gibbs state from a precomputed eigendecomposition of `H`. Lets a β-scan
/// reuse one diagonalization.
pub fn gibbs_from_spectrum(vals: &[f64], vecs: &Mat<c64>, beta: f64) -> Mat<c64> {
    let n = vals.len();
    let e0 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = vals.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        let w = weights[j] / z;
        for i in 0..n {
            scaled[(i, j)] = vecs[(i, j)] * w;
        }
    }
    &scaled * vecs.adjoint()
}

/// Total-magnetization operator `Σⱼ σᶻⱼ` (diagonal).
pub fn total_sz(l: usize) -> Mat<c64> {
    let dim = 1usize << l;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for r in 0..dim {
        let mz: f64 = (0..l).map(|q| 1.0 - 2.0 * ((r >> (l - 1 - q)) & 1) as f64).sum();
        m[(r, r)] = Complex64::new(mz, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::renyi_moment;
    use crate::linalg::max_abs_diff;

    #[test]
    fn two_site_ising_without_fields() {
        let h = build_ising(2, 0.0, 0.0).unwrap();
        let expected = [-0.25, 0.25, 0.25, -0.25];
        for (i, e) in expected.iter().enumerate() {
            assert!((h.matrix()[(i, i)].re - e).abs() < 1e-15);
        }
        assert!(h.matrix()[(0, 1)] == linalg::ZERO);
    }

    #[test]
    fn ising_benchmark_parameters_accepted() {
        let h = build_ising(6, 1.1, -0.04).unwrap();
        assert!(linalg::hermiticity_deviation(h.matrix()) < 1e-14);
        assert!(build_ising(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn ising_spin_flip_symmetry_at_zero_longitudinal_field() {
        // global X flips conjugate H into itself when h_z = 0
        let l = 4;
        let h = build_ising(l, 0.7, 0.0).unwrap();
        let vals = h.spectrum().unwrap();
        let dim = 1usize << l;
        let flip = |r: usize| !r & (dim - 1);
        let flipped = Mat::from_fn(dim, dim, |i, j| h.matrix()[(flip(i), flip(j))]);
        assert!(max_abs_diff(&flipped, h.matrix()) < 1e-14);
        // and the spectrum is unchanged by adding the field asymmetrically
        let h2 = build_ising(l, 0.7, 0.3).unwrap();
        let vals2 = h2.spectrum().unwrap();
        assert!(vals.iter().zip(&vals2).any(|(a, b)| (a - b).abs() > 1e-6));
    }

    #[test]
    fn xx_chain_two_site_spectrum() {
        let h = build_xxz(2, 0.0).unwrap();
        let vals = h.spectrum().unwrap();
        let expected = [-0.5, 0.0, 0.0, 0.5];
        for (v, e) in vals.iter().zip(expected.iter()) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
    }

    #[test]
    fn xxz_conserves_magnetization() {
        let l = 5;
        let h = build_xxz(l, 2.0).unwrap();
        let sz = total_sz(l);
        let comm = h.matrix() * &sz - &sz * h.matrix();
        let norm = (0..comm.nrows())
            .flat_map(|i| (0..comm.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| comm[(i, j)].norm())
            .fold(0.0f64, f64::max);
        assert!(norm < 1e-12);
    }

    #[test]
    fn gibbs_at_zero_beta_is_maximally_mixed() {
        let h = build_ising(3, 1.1, -0.04).unwrap();
        let rho = gibbs_state(&h, 0.0).unwrap();
        let mixed = DenseOperator::maximally_mixed(3);
        assert!(max_abs_diff(rho.matrix(), mixed.matrix()) < 1e-12);
    }

    #[test]
    fn gibbs_at_large_beta_approaches_ground_projector() {
        // the field-tilted Ising chain has a unique ground state
        let h = build_ising(3, 1.1, -0.04).unwrap();
        let rho = gibbs_state(&h, 1e3).unwrap();
        let purity = renyi_moment(&rho, 2).unwrap();
        assert!((purity - 1.0).abs() < 1e-6, "purity {purity}");
    }

    // Scaling-and-squaring matrix exponential, the independent Gibbs oracle.
    fn expm(mat: &Mat<c64>) -> Mat<c64> {
        let n = mat.nrows();
        let norm: f64 = (0..n)
            .map(|i| (0..n).map(|j| mat[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let squarings = norm.log2().ceil().max(0.0) as u32 + 6;
        let scale = 0.5f64.powi(squarings as i32);
        let scaled = Mat::from_fn(n, n, |i, j| mat[(i, j)] * scale);
        // Taylor series of the scaled matrix
        let mut result = linalg::identity(n);
        let mut term = linalg::identity(n);
        for k in 1..24 {
            term = &term * &scaled;
            let inv_fact = Complex64::new(1.0 / (1..=k).map(|x| x as f64).product::<f64>(), 0.0);
            for j in 0..n {
                for i in 0..n {
                    result[(i, j)] += term[(i, j)] * inv_fact;
                }
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }

    #[test]
    fn gibbs_matches_matrix_exponential_oracle() {
        let h = build_ising(8, 1.1, -0.04).unwrap();
        let beta = 2.0;
        let rho = gibbs_state(&h, beta).unwrap();
        let scaled = Mat::from_fn(h.dim(), h.dim(), |i, j| {
            h.matrix()[(i, j)] * Complex64::new(-beta, 0.0)
        });
        let exp = expm(&scaled);
        let z = linalg::trace(&exp).re;
        let oracle = DenseOperator::from_matrix(
            8,
            Mat::from_fn(h.dim(), h.dim(), |i, j| exp[(i, j)] / z),
        )
        .unwrap();
        let p2 = renyi_moment(&rho, 2).unwrap();
        let p2_oracle = renyi_moment(&oracle, 2).unwrap();
        assert!((p2 - p2_oracle).abs() < 1e-10, "{p2} vs {p2_oracle}");
    }

    #[test]
    fn gibbs_rejects_non_hermitian() {
        let mut h = build_ising(2, 1.0, 0.0).unwrap();
        h.matrix_mut()[(0, 1)] = Complex64::new(0.3, 0.1);
        assert!(gibbs_state(&h, 1.0).is_err());
    }
}
