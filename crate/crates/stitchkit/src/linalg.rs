//! Thin wrappers around `faer` plus the small dense helpers shared by the
//! oracle and tensor-network backends. All matrices are `faer::Mat<c64>`.

use faer::linalg::solvers::{DenseSolveCore, Eigen, SelfAdjointEigen, Svd};
use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const ZERO: c64 = Complex64::new(0.0, 0.0);
pub const ONE: c64 = Complex64::new(1.0, 0.0);

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Hermitian eigendecomposition. Returns (eigenvalues ascending, eigenvectors
/// as columns in matching order).
pub fn eigh(mat: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let eig = SelfAdjointEigen::new(mat.as_ref(), Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let n = mat.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| eig.U()[(i, idx[j])]);
    Ok((sorted, vecs))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(mat: &Mat<c64>) -> Result<Vec<f64>> {
    let eig = SelfAdjointEigen::new(mat.as_ref(), Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let mut vals: Vec<f64> = (0..mat.nrows()).map(|i| eig.S()[i].re).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// General (non-Hermitian) eigendecomposition, eigenvalues sorted by
/// descending modulus. Returns (eigenvalues, right eigenvectors as columns,
/// left eigenvectors as rows) normalized so that `left * right = I`.
pub fn eig_general(mat: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>, Mat<c64>)> {
    let eig = Eigen::new(mat.as_ref()).map_err(|_| Error::Eigendecomposition)?;
    let n = mat.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<c64> = (0..n).map(|i| eig.S()[i]).collect();
    idx.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm()));
    let sorted: Vec<c64> = idx.iter().map(|&i| vals[i]).collect();
    let right = Mat::from_fn(n, n, |i, j| eig.U()[(i, idx[j])]);
    let left = right.partial_piv_lu().inverse();
    Ok((sorted, right, left))
}

/// Thin SVD: `mat = U diag(S) V†`. Returns (U, singular values, V).
pub fn thin_svd(mat: &Mat<c64>) -> Result<(Mat<c64>, Vec<f64>, Mat<c64>)> {
    let svd = Svd::new_thin(mat.as_ref()).map_err(|_| Error::Eigendecomposition)?;
    let k = Ord::min(mat.nrows(), mat.ncols());
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i].re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

pub fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn trace(mat: &Mat<c64>) -> c64 {
    (0..mat.nrows().min(mat.ncols())).map(|i| mat[(i, i)]).sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_prod(a: &Mat<c64>, b: &Mat<c64>) -> c64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn hermiticity_deviation(mat: &Mat<c64>) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..mat.ncols() {
        for i in 0..=j {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<c64> {
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random `n × n` unitary: complex Ginibre matrix + QR via modified
/// Gram-Schmidt. The normalization constants make the R factor's diagonal
/// positive, which fixes the QR phase ambiguity and yields the Haar measure.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let g = gaussian_matrix(n, n, rng);
    let mut q = g;
    for j in 0..n {
        for k in 0..j {
            let mut overlap = ZERO;
            for i in 0..n {
                overlap += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..n {
                let sub = overlap * q[(i, k)];
                q[(i, j)] -= sub;
            }
        }
        // second orthogonalization pass for numerical safety
        for k in 0..j {
            let mut overlap = ZERO;
            for i in 0..n {
                overlap += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..n {
                let sub = overlap * q[(i, k)];
                q[(i, j)] -= sub;
            }
        }
        let norm: f64 = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// Random density matrix from the Hilbert-Schmidt ensemble: `G G† / Tr`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat<c64> {
    let g = gaussian_matrix(dim, dim, rng);
    let mut rho = &g * g.adjoint();
    let t = trace(&rho).re;
    for j in 0..dim {
        for i in 0..dim {
            rho[(i, j)] /= t;
        }
    }
    rho
}

/// Random pure-state density matrix `|ψ⟩⟨ψ|` with Haar-distributed `|ψ⟩`.
pub fn random_pure_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat<c64> {
    let mut v: Vec<c64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Mat::from_fn(dim, dim, |i, j| v[i] * v[j].conj())
}

pub fn deviation_from_unitary(u: &Mat<c64>) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    max_abs_diff(&prod, &identity(n))
}
