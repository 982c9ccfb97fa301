//! Matrix-product states with right canonicalization and the sequential
//! perfect-sampling algorithm.

use faer::{c64, Mat};
use rand::Rng;

use super::mpo::{Mpo, MpoTensor};
use crate::dense::{DenseOperator, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{self, complex_gaussian, thin_svd, ZERO};
use crate::seeds::SeedTree;

/// One rank-3 site tensor `[left, physical = 2, right]`, row-major with the
/// right bond fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub right: usize,
    pub data: Vec<c64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        SiteTensor { left, right, data: vec![ZERO; left * 2 * right] }
    }

    #[inline]
    pub fn at(&self, l: usize, s: usize, r: usize) -> c64 {
        self.data[(l * 2 + s) * self.right + r]
    }

    #[inline]
    pub fn at_mut(&mut self, l: usize, s: usize, r: usize) -> &mut c64 {
        &mut self.data[(l * 2 + s) * self.right + r]
    }

    /// Reshape to the `[left × (2·right)]` matrix used for canonicalization.
    fn as_matrix(&self) -> Mat<c64> {
        Mat::from_fn(self.left, 2 * self.right, |l, sr| {
            self.at(l, sr / self.right, sr % self.right)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    None,
    Right,
}

#[derive(Clone, Debug)]
pub struct Mps {
    tensors: Vec<SiteTensor>,
    canonical: CanonicalForm,
}

impl Mps {
    pub fn from_tensors(tensors: Vec<SiteTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Precondition("empty tensor list".into()));
        }
        if tensors[0].left != 1 || tensors.last().unwrap().right != 1 {
            return Err(Error::Precondition("boundary bonds must have dimension 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::Precondition("mismatched bond dimensions".into()));
            }
        }
        Ok(Mps { tensors, canonical: CanonicalForm::None })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        self.canonical
    }

    /// Bond dimensions, one entry per bond including the trivial boundaries.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.tensors[0].left];
        dims.extend(self.tensors.iter().map(|t| t.right));
        dims
    }

    pub fn norm(&self) -> f64 {
        // contract ⟨ψ|ψ⟩ with a bond-space density matrix sweep
        let mut env = Mat::<c64>::from_fn(1, 1, |_, _| linalg::ONE);
        for t in &self.tensors {
            let mut next = Mat::<c64>::zeros(t.right, t.right);
            for l in 0..t.left {
                for lp in 0..t.left {
                    let e = env[(l, lp)];
                    if e == ZERO {
                        continue;
                    }
                    for s in 0..2 {
                        for r in 0..t.right {
                            let a = t.at(l, s, r);
                            if a == ZERO {
                                continue;
                            }
                            for rp in 0..t.right {
                                next[(r, rp)] += e * a * t.at(lp, s, rp).conj();
                            }
                        }
                    }
                }
            }
            env = next;
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    /// Bring the state to right-canonical form and normalize it. Every site
    /// tensor then satisfies `Σ_{s,r} A[k,s,r] A*[k',s,r] = δ_{kk'}`.
    pub fn right_canonicalize(&mut self) -> Result<()> {
        let n = self.tensors.len();
        for j in (1..n).rev() {
            let t = &self.tensors[j];
            let m = Mat::from_fn(t.left, 2 * t.right, |l, sr| t.at(l, sr / t.right, sr % t.right));
            let (u, s, v) = thin_svd(&m)?;
            let rank = s.len();
            let right = t.right;
            let mut new_t = SiteTensor::zeros(rank, right);
            for k in 0..rank {
                for sr in 0..2 * right {
                    *new_t.at_mut(k, sr / right, sr % right) = v[(sr, k)].conj();
                }
            }
            // carry = U · diag(S) into the left neighbor
            let prev = &self.tensors[j - 1];
            let mut absorbed = SiteTensor::zeros(prev.left, rank);
            for l in 0..prev.left {
                for sp in 0..2 {
                    for k in 0..rank {
                        let mut acc = ZERO;
                        for r in 0..prev.right {
                            acc += prev.at(l, sp, r) * u[(r, k)] * s[k];
                        }
                        *absorbed.at_mut(l, sp, k) = acc;
                    }
                }
            }
            self.tensors[j] = new_t;
            self.tensors[j - 1] = absorbed;
        }
        // isometrize the first site, dropping the global norm and phase
        let t = &self.tensors[0];
        let m = t.as_matrix();
        let (u, _s, v) = thin_svd(&m)?;
        let right = t.right;
        let mut first = SiteTensor::zeros(1, right);
        let phase = u[(0, 0)];
        for sr in 0..2 * right {
            *first.at_mut(0, sr / right, sr % right) = phase * v[(sr, 0)].conj();
        }
        self.tensors[0] = first;
        self.canonical = CanonicalForm::Right;
        Ok(())
    }

    pub fn is_right_canonical(&self, tol: f64) -> bool {
        for t in &self.tensors {
            for l in 0..t.left {
                for lp in 0..t.left {
                    let mut acc = ZERO;
                    for s in 0..2 {
                        for r in 0..t.right {
                            acc += t.at(l, s, r) * t.at(lp, s, r).conj();
                        }
                    }
                    let expected = if l == lp { 1.0 } else { 0.0 };
                    if (acc.re - expected).abs() > tol || acc.im.abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Amplitude of one computational-basis state, by direct contraction.
    pub fn amplitude(&self, bits: &[u8]) -> c64 {
        let mut v = vec![linalg::ONE];
        for (j, t) in self.tensors.iter().enumerate() {
            let s = bits[j] as usize;
            let mut next = vec![ZERO; t.right];
            for (l, &vl) in v.iter().enumerate() {
                if vl == ZERO {
                    continue;
                }
                for (r, slot) in next.iter_mut().enumerate() {
                    *slot += vl * t.at(l, s, r);
                }
            }
            v = next;
        }
        v[0]
    }

    /// Dense pure-state projector `|ψ⟩⟨ψ|`.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let l = self.len();
        if l > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit(l, MAX_DENSE_QUBITS));
        }
        // grow amplitudes over (prefix, bond)
        let mut amps: Vec<c64> = vec![linalg::ONE];
        let mut bond = 1usize;
        for t in &self.tensors {
            let prefixes = amps.len() / bond;
            let mut next = vec![ZERO; prefixes * 2 * t.right];
            for p in 0..prefixes {
                for s in 0..2 {
                    for r in 0..t.right {
                        let mut acc = ZERO;
                        for lb in 0..bond {
                            acc += amps[p * bond + lb] * t.at(lb, s, r);
                        }
                        next[(p * 2 + s) * t.right + r] = acc;
                    }
                }
            }
            amps = next;
            bond = t.right;
        }
        DenseOperator::from_pure_state(l, &amps)
    }

    /// `|ψ⟩⟨ψ|` as an MPO with bond dimension χ².
    pub fn to_density_mpo(&self) -> Mpo {
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let left = t.left * t.left;
                let right = t.right * t.right;
                let mut m = MpoTensor::zeros(left, right);
                for l in 0..t.left {
                    for lb in 0..t.left {
                        for o in 0..2 {
                            for i in 0..2 {
                                for r in 0..t.right {
                                    for rb in 0..t.right {
                                        *m.at_mut(l * t.left + lb, o, i, r * t.right + rb) =
                                            t.at(l, o, r) * t.at(lb, i, rb).conj();
                                    }
                                }
                            }
                        }
                    }
                }
                m
            })
            .collect();
        Mpo::from_tensors(tensors).expect("valid by construction")
    }

    /// Purity of the leading `m` sites, `Tr[ρ_{[0,m)}²]`, from the Frobenius
    /// norm of the left Gram matrix. Requires right-canonical form.
    pub fn prefix_purity(&self, m: usize) -> Result<f64> {
        if self.canonical != CanonicalForm::Right {
            return Err(Error::Precondition("prefix_purity requires right-canonical form".into()));
        }
        if m == 0 || m > self.len() {
            return Err(Error::Precondition(format!("prefix length {m} out of range")));
        }
        let mut env = Mat::<c64>::from_fn(1, 1, |_, _| linalg::ONE);
        for t in self.tensors.iter().take(m) {
            let mut next = Mat::<c64>::zeros(t.right, t.right);
            for l in 0..t.left {
                for lp in 0..t.left {
                    let e = env[(l, lp)];
                    if e == ZERO {
                        continue;
                    }
                    for s in 0..2 {
                        for r in 0..t.right {
                            let a = t.at(l, s, r);
                            for rp in 0..t.right {
                                next[(r, rp)] += e * a * t.at(lp, s, rp).conj();
                            }
                        }
                    }
                }
            }
            env = next;
        }
        let mut purity = 0.0;
        for i in 0..env.nrows() {
            for j in 0..env.ncols() {
                purity += env[(i, j)].norm_sqr();
            }
        }
        Ok(purity)
    }
}

/// Random MPS with iid standard complex Gaussian entries, right-canonicalized
/// and normalized; deterministic per seed. Bond dimensions are capped at the
/// exact-representability limit `2^min(j, L-j)`.
pub fn random_mps(l: usize, chi: usize, seed: u64) -> Result<Mps> {
    if chi < 1 {
        return Err(Error::Precondition("bond dimension must be ≥ 1".into()));
    }
    if l < 1 {
        return Err(Error::Precondition("need at least one site".into()));
    }
    let bond = |j: usize| -> usize {
        let cap = 1usize << j.min(l - j).min(20);
        chi.min(cap)
    };
    let tree = SeedTree::new(seed);
    let mut tensors = Vec::with_capacity(l);
    for j in 0..l {
        let mut rng = tree.child(j as u64).rng();
        let (left, right) = (bond(j), bond(j + 1));
        let mut t = SiteTensor::zeros(left, right);
        for x in t.data.iter_mut() {
            *x = complex_gaussian(&mut rng);
        }
        tensors.push(t);
    }
    let mut mps = Mps::from_tensors(tensors)?;
    mps.right_canonicalize()?;
    Ok(mps)
}

/// Product MPS for a computational-basis state.
pub fn basis_mps(bits: &[u8]) -> Mps {
    let tensors = bits
        .iter()
        .map(|&b| {
            let mut t = SiteTensor::zeros(1, 1);
            *t.at_mut(0, b as usize, 0) = linalg::ONE;
            t
        })
        .collect();
    let mut mps = Mps::from_tensors(tensors).unwrap();
    mps.canonical = CanonicalForm::Right;
    mps
}

/// One run of the sequential perfect-sampling algorithm: applies the on-site
/// unitaries and draws a bitstring exactly from the Born distribution of
/// `(⊗uⱼ)|ψ⟩`. Cost `O(L·χ²)` per sample.
pub fn perfect_sample<R: Rng + ?Sized>(
    mps: &Mps,
    local_unitaries: &[Mat<c64>],
    rng: &mut R,
) -> Result<Vec<u8>> {
    if mps.canonical_form() != CanonicalForm::Right {
        return Err(Error::Precondition("perfect sampling requires right-canonical form".into()));
    }
    if local_unitaries.len() != mps.len() {
        return Err(Error::Precondition(format!(
            "{} unitaries for {} sites",
            local_unitaries.len(),
            mps.len()
        )));
    }
    let mut bits = Vec::with_capacity(mps.len());
    let mut v: Vec<c64> = vec![linalg::ONE];
    for (t, u) in mps.tensors().iter().zip(local_unitaries) {
        let mut w = [vec![ZERO; t.right], vec![ZERO; t.right]];
        for (l, &vl) in v.iter().enumerate() {
            if vl == ZERO {
                continue;
            }
            for sp in 0..2 {
                for r in 0..t.right {
                    let a = t.at(l, sp, r);
                    if a == ZERO {
                        continue;
                    }
                    let va = vl * a;
                    w[0][r] += u[(0, sp)] * va;
                    w[1][r] += u[(1, sp)] * va;
                }
            }
        }
        let p0: f64 = w[0].iter().map(|x| x.norm_sqr()).sum();
        let p1: f64 = w[1].iter().map(|x| x.norm_sqr()).sum();
        let total = p0 + p1;
        let outcome = usize::from(rng.random::<f64>() * total >= p0);
        let norm = if outcome == 0 { p0 } else { p1 }.sqrt();
        v = std::mem::take(&mut w[outcome]);
        v.iter_mut().for_each(|x| *x /= norm);
        bits.push(outcome as u8);
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{partial_trace, renyi_moment, Interval};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn chi_one_mps_is_a_product_state() {
        let mps = random_mps(6, 1, 5).unwrap();
        let rho = mps.to_dense().unwrap();
        let half = partial_trace(&rho, Interval::new(0, 3)).unwrap();
        assert!((renyi_moment(&half, 2).unwrap() - 1.0).abs() < 1e-10);
        assert!((mps.prefix_purity(3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonicalization_normalizes_and_isometrizes() {
        let mps = random_mps(8, 3, 6).unwrap();
        assert!((mps.norm() - 1.0).abs() < 1e-12);
        assert!(mps.is_right_canonical(1e-10));
        assert_eq!(mps.canonical_form(), CanonicalForm::Right);
        let dims = mps.bond_dims();
        assert_eq!(dims[0], 1);
        assert_eq!(dims[8], 1);
        assert!(dims.iter().all(|&d| d <= 3));
    }

    #[test]
    fn dense_conversion_matches_mps_purity() {
        let mps = random_mps(8, 2, 7).unwrap();
        let rho = mps.to_dense().unwrap();
        let half = Interval::new(0, 4);
        let dense_purity = partial_trace(&rho, half).unwrap().purity();
        let mps_purity = mps.prefix_purity(4).unwrap();
        assert!((dense_purity - mps_purity).abs() < 1e-10);
        let mpo_purity = mps.to_density_mpo().trace_power(half, 2).unwrap();
        assert!((dense_purity - mpo_purity).abs() < 1e-10);
    }

    #[test]
    fn basis_mps_projects_and_amplitudes_match_dense() {
        let mps = basis_mps(&[0, 1, 0]);
        let rho = mps.to_dense().unwrap();
        let expected = DenseOperator::basis_projector(&[0, 1, 0]);
        assert!(linalg::max_abs_diff(rho.matrix(), expected.matrix()) < 1e-14);

        let random = random_mps(6, 2, 8).unwrap();
        let dense = random.to_dense().unwrap();
        let mut overlap = ZERO;
        for idx in 0..(1usize << 6) {
            let bits: Vec<u8> = (0..6).map(|q| ((idx >> (5 - q)) & 1) as u8).collect();
            let amp = random.amplitude(&bits);
            overlap += amp * amp.conj();
            // diagonal of the projector equals |amplitude|²
            let diag = dense.matrix()[(idx, idx)].re;
            assert!((diag - amp.norm_sqr()).abs() < 1e-12);
        }
        assert!((overlap.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perfect_sampling_on_basis_state_is_deterministic() {
        let mps = basis_mps(&[0, 0, 0]);
        let ids = vec![linalg::identity(2); 3];
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..20 {
            assert_eq!(perfect_sample(&mps, &ids, &mut rng).unwrap(), vec![0, 0, 0]);
        }
    }

    #[test]
    fn perfect_sampling_plus_state_marginals() {
        // |+⟩^⊗3 via Hadamard unitaries on |0⟩^⊗3: each bit is a fair coin
        let mps = basis_mps(&[0, 0, 0]);
        let h = Mat::from_fn(2, 2, |i, j| {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            c64::new(if i == 1 && j == 1 { -s } else { s }, 0.0)
        });
        let us = vec![h; 3];
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let samples = 10_000usize;
        let mut ones = [0usize; 3];
        for _ in 0..samples {
            let bits = perfect_sample(&mps, &us, &mut rng).unwrap();
            for (q, &b) in bits.iter().enumerate() {
                ones[q] += b as usize;
            }
        }
        // 5σ band around 1/2
        let tol = 5.0 * 0.5 / (samples as f64).sqrt();
        for q in 0..3 {
            let freq = ones[q] as f64 / samples as f64;
            assert!((freq - 0.5).abs() < tol, "qubit {q}: {freq}");
        }
    }

    #[test]
    fn perfect_sampling_matches_dense_born_distribution() {
        let l = 6;
        let mps = random_mps(l, 2, 11).unwrap();
        let mut unitary_rng = ChaCha12Rng::seed_from_u64(12);
        let us: Vec<Mat<c64>> = (0..l).map(|_| linalg::haar_unitary(2, &mut unitary_rng)).collect();

        // exact Born probabilities from the dense state
        let mut rho = mps.to_dense().unwrap();
        for (q, u) in us.iter().enumerate() {
            rho.apply_single_qubit_unitary(q, u);
        }
        let exact: Vec<f64> = (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect();

        let samples = 100_000usize;
        let mut counts = vec![0usize; 1 << l];
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..samples {
            let bits = perfect_sample(&mps, &us, &mut rng).unwrap();
            let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            counts[idx] += 1;
        }
        let tv: f64 = exact
            .iter()
            .zip(&counts)
            .map(|(p, &c)| (p - c as f64 / samples as f64).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "total variation distance {tv}");
    }

    #[test]
    fn non_canonical_input_is_rejected() {
        let mut t = SiteTensor::zeros(1, 1);
        *t.at_mut(0, 0, 0) = c64::new(2.0, 0.0);
        let mps = Mps::from_tensors(vec![t]).unwrap();
        let ids = vec![linalg::identity(2)];
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        assert!(perfect_sample(&mps, &ids, &mut rng).is_err());
        assert!(mps.prefix_purity(1).is_err());
    }
}
