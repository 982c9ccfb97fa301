//! Transfer-matrix analysis of translation-invariant matrix-product density
//! operators: correlation lengths, the eigenvector overlap constant, and the
//! closed-form purity-stitching bound they imply for periodic chains.

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, eig_general, random_density_matrix, ZERO};
use crate::seeds::SeedTree;

/// Translation-invariant MPDO site tensor `A^{o,i}_{a,b}` with physical
/// dimension 2 and virtual (bond) dimension `chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct MpdoTensor {
    pub chi: usize,
    /// layout `[o, i, a, b]`, `b` fastest
    pub data: Vec<c64>,
}

impl MpdoTensor {
    pub fn zeros(chi: usize) -> Self {
        MpdoTensor { chi, data: vec![ZERO; 4 * chi * chi] }
    }

    #[inline]
    pub fn at(&self, o: usize, i: usize, a: usize, b: usize) -> c64 {
        self.data[((o * 2 + i) * self.chi + a) * self.chi + b]
    }

    #[inline]
    pub fn at_mut(&mut self, o: usize, i: usize, a: usize, b: usize) -> &mut c64 {
        &mut self.data[((o * 2 + i) * self.chi + a) * self.chi + b]
    }

    pub fn scale(&self, factor: c64) -> MpdoTensor {
        MpdoTensor { chi: self.chi, data: self.data.iter().map(|x| x * factor).collect() }
    }
}

/// Random classically-correlated MPDO tensor with exact bond dimension `chi`:
/// `A^{oi}_{ab} = T[a,b]·ω_{ab}[o,i]` with strictly positive Markov weights
/// `T` and random single-qubit density matrices `ω_{ab}`. The represented
/// periodic operator is a Markov mixture of product states and is therefore
/// positive for every system size.
pub fn random_mpdo_tensor(chi: usize, seed: u64) -> Result<MpdoTensor> {
    if chi < 1 {
        return Err(Error::Precondition("bond dimension must be ≥ 1".into()));
    }
    let mut rng = SeedTree::new(seed).rng();
    let mut tensor = MpdoTensor::zeros(chi);
    for a in 0..chi {
        for b in 0..chi {
            let weight = 0.5 + rng.random::<f64>();
            let omega = random_density_matrix(2, &mut rng);
            for o in 0..2 {
                for i in 0..2 {
                    *tensor.at_mut(o, i, a, b) = omega[(o, i)] * weight;
                }
            }
        }
    }
    Ok(tensor)
}

/// Random MPDO tensor built by purification: a random MPS tensor on a doubled
/// physical leg (system ⊗ ancilla) with bond `chi_mps`, traced over the
/// ancilla. Positive for all system sizes; the MPDO bond is `chi_mps²`.
pub fn random_mpdo_purified(chi_mps: usize, seed: u64) -> Result<MpdoTensor> {
    if chi_mps < 1 {
        return Err(Error::Precondition("bond dimension must be ≥ 1".into()));
    }
    let mut rng = SeedTree::new(seed).rng();
    // B[s_phys, s_anc, a, b]
    let mut b_tensor = vec![ZERO; 4 * chi_mps * chi_mps];
    for x in b_tensor.iter_mut() {
        *x = linalg::complex_gaussian(&mut rng);
    }
    let b_at = |s: usize, anc: usize, a: usize, bb: usize| {
        b_tensor[((s * 2 + anc) * chi_mps + a) * chi_mps + bb]
    };
    let chi = chi_mps * chi_mps;
    let mut tensor = MpdoTensor::zeros(chi);
    for o in 0..2 {
        for i in 0..2 {
            for a1 in 0..chi_mps {
                for a2 in 0..chi_mps {
                    for b1 in 0..chi_mps {
                        for b2 in 0..chi_mps {
                            let mut acc = ZERO;
                            for anc in 0..2 {
                                acc += b_at(o, anc, a1, b1) * b_at(i, anc, a2, b2).conj();
                            }
                            *tensor.at_mut(o, i, a1 * chi_mps + a2, b1 * chi_mps + b2) = acc;
                        }
                    }
                }
            }
        }
    }
    Ok(tensor)
}

/// `τ₁` (`n = 1`, a `χ×χ` matrix) or `τ₂` (`n = 2`, a `χ²×χ²` matrix on
/// replica pairs) with cyclic physical contraction.
pub fn build_transfer_matrix(tensor: &MpdoTensor, n: u32) -> Result<Mat<c64>> {
    let chi = tensor.chi;
    match n {
        1 => Ok(Mat::from_fn(chi, chi, |a, b| tensor.at(0, 0, a, b) + tensor.at(1, 1, a, b))),
        2 => {
            let dim = chi * chi;
            let mut tau = Mat::<c64>::zeros(dim, dim);
            for a in 0..chi {
                for ap in 0..chi {
                    for b in 0..chi {
                        for bp in 0..chi {
                            let mut acc = ZERO;
                            for s in 0..2 {
                                for t in 0..2 {
                                    acc += tensor.at(s, t, a, b) * tensor.at(t, s, ap, bp);
                                }
                            }
                            tau[(a * chi + ap, b * chi + bp)] = acc;
                        }
                    }
                }
            }
            Ok(tau)
        }
        _ => Err(Error::Precondition(format!("transfer matrix defined for n ∈ {{1, 2}}, got {n}"))),
    }
}

/// Spectral data of `τ₁`, `τ₂` after rescaling the tensor so `λ₀ = 1`.
#[derive(Clone, Debug)]
pub struct TransferSpectrum {
    /// eigenvalues of `τ₁` by descending modulus, normalized so `λ₀ = 1`
    pub lambda: Vec<c64>,
    /// eigenvalues of `τ₂` in the same normalization (scaled by `λ₀⁻²`)
    pub mu: Vec<c64>,
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta: f64,
    /// eigenvector overlap-ratio constant
    pub c_constant: f64,
    pub gap_ok: bool,
    pub overlap_ok: bool,
    /// condition estimate of the eigenbases (Frobenius ‖V‖·‖V⁻¹‖); large
    /// values warn of near-defective transfer matrices
    pub eigenbasis_condition: f64,
    chi: usize,
}

impl TransferSpectrum {
    /// Minimal interval size `k_min = max{1, ζ·log(20·C·χ²·L)}` for a chain
    /// of `l` sites.
    pub fn k_min(&self, l: usize) -> usize {
        let arg = 20.0 * self.c_constant * (self.chi * self.chi) as f64 * l as f64;
        if arg <= 1.0 || self.zeta == 0.0 {
            return 1;
        }
        (self.zeta * arg.ln()).ceil().max(1.0) as usize
    }

    /// Smallest admissible chain length for buffer size `k`:
    /// `L ≥ max{ζ·log(2⁵χ²), 4k + ζ·log(2χ)}`.
    pub fn min_chain_length(&self, k: usize) -> usize {
        let chi2 = (self.chi * self.chi) as f64;
        let first = self.zeta * (32.0 * chi2).ln();
        let second = 4.0 * k as f64 + self.zeta * (2.0 * self.chi as f64).ln();
        first.max(second).ceil().max(1.0) as usize
    }

    pub fn chi(&self) -> usize {
        self.chi
    }
}

fn frobenius(m: &Mat<c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Full spectral analysis of the one- and two-replica transfer matrices.
/// Fails with an assumption-violation error when the leading eigenvalue of
/// either matrix is degenerate or the leading eigenvectors are orthogonal.
pub fn analyze_transfer_spectrum(tensor: &MpdoTensor) -> Result<TransferSpectrum> {
    const GAP_TOL: f64 = 1e-10;
    const OVERLAP_TOL: f64 = 1e-10;

    let chi = tensor.chi;
    let tau1 = build_transfer_matrix(tensor, 1)?;
    let (lam_raw, r1, l1) = eig_general(&tau1)?;
    let lambda0 = lam_raw[0];
    if lambda0.norm() < f64::MIN_POSITIVE {
        return Err(Error::AssumptionViolated("τ₁ has vanishing leading eigenvalue".into()));
    }
    // rescale the tensor so λ₀ = 1; τ₂ then scales by λ₀⁻²
    let rescaled = tensor.scale(Complex64::new(1.0, 0.0) / lambda0);
    let tau2 = build_transfer_matrix(&rescaled, 2)?;
    let (mu, r2, l2) = eig_general(&tau2)?;
    let lambda: Vec<c64> = lam_raw.iter().map(|l| l / lambda0).collect();

    let gap1 = if chi == 1 { 0.0 } else { lambda[1].norm() };
    let gap2 = if mu.len() == 1 { 0.0 } else { (mu[1].norm() / mu[0].norm()).min(1.0) };
    let gap_ok = gap1 < 1.0 - GAP_TOL && gap2 < 1.0 - GAP_TOL;
    if !gap_ok {
        return Err(Error::AssumptionViolated(format!(
            "transfer gap too small: |λ₁|/|λ₀| = {gap1:.12}, |μ₁|/|μ₀| = {gap2:.12}"
        )));
    }
    if mu[0].re <= 0.0 || mu[0].im.abs() > 1e-8 * mu[0].norm() {
        return Err(Error::AssumptionViolated(format!(
            "leading τ₂ eigenvalue {} is not positive",
            mu[0]
        )));
    }

    // ⟨L₀⁽¹⁾|⊗⟨L₀⁽¹⁾|R₀⁽²⁾⟩ and ⟨L₀⁽²⁾|R₀⁽¹⁾⊗R₀⁽¹⁾⟩
    let pair_overlap = |lrow: usize, lcol: usize, rcol: usize| -> c64 {
        let mut acc = ZERO;
        for a in 0..chi {
            for b in 0..chi {
                acc += l1[(lrow, a)] * l1[(lcol, b)] * r2[(a * chi + b, rcol)];
            }
        }
        acc
    };
    let co_overlap = |lrow: usize, rcol_a: usize, rcol_b: usize| -> c64 {
        let mut acc = ZERO;
        for a in 0..chi {
            for b in 0..chi {
                acc += l2[(lrow, a * chi + b)] * r1[(a, rcol_a)] * r1[(b, rcol_b)];
            }
        }
        acc
    };
    let forward = pair_overlap(0, 0, 0);
    let backward = co_overlap(0, 0, 0);
    let overlap_ok = forward.norm() > OVERLAP_TOL && backward.norm() > OVERLAP_TOL;
    if !overlap_ok {
        return Err(Error::AssumptionViolated(format!(
            "leading eigenvector overlaps vanish: |⟨L₀L₀|R₀⁽²⁾⟩| = {:.3e}, |⟨L₀⁽²⁾|R₀R₀⟩| = {:.3e}",
            forward.norm(),
            backward.norm()
        )));
    }

    let denominator = (forward * backward).norm();
    let mut c_constant = 0.0f64;
    for j in 0..chi {
        for k in 0..chi {
            for l in 0..chi * chi {
                if j == 0 && k == 0 && l == 0 {
                    continue;
                }
                let numerator = (pair_overlap(j, k, l) * co_overlap(l, j, k)).norm();
                c_constant = c_constant.max(numerator / denominator);
            }
        }
    }

    let zeta1 = if gap1 > 0.0 { -1.0 / gap1.ln() } else { 0.0 };
    let zeta2 = if gap2 > 0.0 { -1.0 / gap2.ln() } else { 0.0 };
    let zeta = zeta1.max(zeta2);

    let cond1 = frobenius(&r1) * frobenius(&l1);
    let cond2 = frobenius(&r2) * frobenius(&l2);

    Ok(TransferSpectrum {
        lambda,
        mu,
        zeta1,
        zeta2,
        zeta,
        c_constant,
        gap_ok,
        overlap_ok,
        eigenbasis_condition: cond1.max(cond2),
        chi,
    })
}

/// `Tr[τ₂^m (τ₁⊗τ₁)^{L-m}]`: the unnormalized `Tr[σ_I²]` of a length-`m`
/// interval in the periodic chain.
fn interval_purity_unnormalized(tau1: &Mat<c64>, tau2: &Mat<c64>, l: usize, m: usize) -> c64 {
    let t11 = linalg::kron(tau1, tau1);
    let mut acc = linalg::identity(tau2.nrows());
    for _ in 0..m {
        acc = &acc * tau2;
    }
    for _ in 0..(l - m) {
        acc = &acc * &t11;
    }
    linalg::trace(&acc)
}

/// Exact periodic-chain quantities from transfer-matrix powers.
pub struct PeriodicMpdo {
    tau1: Mat<c64>,
    tau2: Mat<c64>,
}

impl PeriodicMpdo {
    pub fn new(tensor: &MpdoTensor) -> Result<Self> {
        Ok(PeriodicMpdo {
            tau1: build_transfer_matrix(tensor, 1)?,
            tau2: build_transfer_matrix(tensor, 2)?,
        })
    }

    pub fn trace(&self, l: usize) -> c64 {
        let mut acc = linalg::identity(self.tau1.nrows());
        for _ in 0..l {
            acc = &acc * &self.tau1;
        }
        linalg::trace(&acc)
    }

    /// Global purity `Tr[σ²]/(Tr σ)² = Tr[τ₂^L]/(Tr[τ₁^L])²`.
    pub fn purity(&self, l: usize) -> f64 {
        let t2 = interval_purity_unnormalized(&self.tau1, &self.tau2, l, l);
        let tr = self.trace(l);
        (t2 / (tr * tr)).re
    }

    /// Normalized interval purity `Tr[ρ_I²]` for `|I| = m`.
    pub fn interval_purity(&self, l: usize, m: usize) -> f64 {
        let raw = interval_purity_unnormalized(&self.tau1, &self.tau2, l, m);
        let tr = self.trace(l);
        (raw / (tr * tr)).re
    }

    /// Periodic stitched ratio `r₂ = Π Tr[σ²_{IⱼIⱼ₊₁}] / Π Tr[σ²_{Iⱼ}]`;
    /// the normalization factors cancel between numerator and denominator.
    pub fn stitched_r2(&self, l: usize, k: usize) -> Result<f64> {
        if k == 0 || l % k != 0 {
            return Err(Error::InvalidPartition(format!("interval size {k} must divide L={l}")));
        }
        let r = l / k;
        let pair = interval_purity_unnormalized(&self.tau1, &self.tau2, l, (2 * k).min(l));
        let single = interval_purity_unnormalized(&self.tau1, &self.tau2, l, k);
        Ok(((pair / single).re).powi(r as i32))
    }
}

/// Outcome of the closed-form purity-bound check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundCheck {
    pub l: usize,
    pub k: usize,
    pub k_min: usize,
    pub actual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Check `|r₂/P₂ - 1| ≤ χ²(80C+32)(L/k)e^{-k/ζ}` for a `k`-partition of the
/// periodic chain of length `l`.
pub fn mpdo_purity_bound_check(tensor: &MpdoTensor, l: usize, k: usize) -> Result<BoundCheck> {
    let spectrum = analyze_transfer_spectrum(tensor)?;
    let k_min = spectrum.k_min(l);
    if k < k_min {
        return Err(Error::Precondition(format!(
            "interval size violated: k = {k} < k_min = {k_min}"
        )));
    }
    let min_l = spectrum.min_chain_length(k);
    if l < min_l {
        return Err(Error::Precondition(format!(
            "chain too short: L = {l} < max{{ζ log(2⁵χ²), 4k + ζ log(2χ)}} = {min_l}"
        )));
    }
    if l % k != 0 {
        return Err(Error::Precondition(format!("L/k must be an integer; got L={l}, k={k}")));
    }
    let periodic = PeriodicMpdo::new(tensor)?;
    let actual = (periodic.stitched_r2(l, k)? / periodic.purity(l) - 1.0).abs();
    let chi2 = (tensor.chi * tensor.chi) as f64;
    let bound = chi2
        * (80.0 * spectrum.c_constant + 32.0)
        * (l as f64 / k as f64)
        * (-(k as f64) / spectrum.zeta.max(f64::MIN_POSITIVE)).exp();
    Ok(BoundCheck { l, k, k_min, actual, bound, pass: actual <= bound })
}

/// Dense matrix of the periodic MPDO on `l` sites (oracle for small `l`).
pub fn mpdo_to_dense(tensor: &MpdoTensor, l: usize) -> Result<Mat<c64>> {
    if l > 10 {
        return Err(Error::SizeLimit(l, 10));
    }
    let chi = tensor.chi;
    let dim = 1usize << l;
    let mut out = Mat::<c64>::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            // Tr over the virtual ring of the product of site matrices
            let mut prod = linalg::identity(chi);
            for site in 0..l {
                let o = (row >> (l - 1 - site)) & 1;
                let i = (col >> (l - 1 - site)) & 1;
                let m = Mat::from_fn(chi, chi, |a, b| tensor.at(o, i, a, b));
                prod = &prod * &m;
            }
            out[(row, col)] = linalg::trace(&prod);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_tensor() -> MpdoTensor {
        // χ = 1, site state I/2
        let mut t = MpdoTensor::zeros(1);
        *t.at_mut(0, 0, 0, 0) = c64::new(0.5, 0.0);
        *t.at_mut(1, 1, 0, 0) = c64::new(0.5, 0.0);
        t
    }

    #[test]
    fn scalar_transfer_matrices_of_product_tensor() {
        let t = product_tensor();
        let tau1 = build_transfer_matrix(&t, 1).unwrap();
        let tau2 = build_transfer_matrix(&t, 2).unwrap();
        assert!((tau1[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((tau2[(0, 0)].re - 0.5).abs() < 1e-15);
        // rank 1 for a product tensor
        assert_eq!(tau1.nrows(), 1);
        assert_eq!(tau2.nrows(), 1);
    }

    #[test]
    fn product_tensor_spectrum_is_trivial() {
        let spec = analyze_transfer_spectrum(&product_tensor()).unwrap();
        assert_eq!(spec.zeta, 0.0);
        assert_eq!(spec.c_constant, 0.0);
        assert_eq!(spec.k_min(100), 1);
        assert!(spec.gap_ok && spec.overlap_ok);
    }

    #[test]
    fn dense_periodic_contraction_matches_transfer_traces() {
        let tensor = random_mpdo_tensor(2, 51).unwrap();
        let l = 6;
        let dense = mpdo_to_dense(&tensor, l).unwrap();
        let periodic = PeriodicMpdo::new(&tensor).unwrap();

        let tr_dense = linalg::trace(&dense);
        assert!((tr_dense - periodic.trace(l)).norm() < 1e-10 * tr_dense.norm());

        // Tr[σ_L²] = Tr[τ₂^L]
        let sq = dense.as_ref() * dense.as_ref();
        let tr_sq = linalg::trace(&sq);
        let via_tau =
            interval_purity_unnormalized(&periodic.tau1, &periodic.tau2, l, l);
        assert!((tr_sq - via_tau).norm() < 1e-10 * tr_sq.norm());

        // interval purity against dense partial trace
        let rho = crate::dense::DenseOperator::from_matrix(
            l,
            Mat::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)] / tr_dense),
        )
        .unwrap();
        let m = 2;
        let red = crate::dense::partial_trace(&rho, crate::dense::Interval::new(0, m)).unwrap();
        let dense_purity = red.purity();
        let tm_purity = periodic.interval_purity(l, m);
        assert!((dense_purity - tm_purity).abs() < 1e-10);
    }

    #[test]
    fn markov_tensors_are_admissible_with_high_probability() {
        let mut ok = 0;
        for seed in 0..20u64 {
            let tensor = random_mpdo_tensor(2, 1000 + seed).unwrap();
            if analyze_transfer_spectrum(&tensor).is_ok() {
                ok += 1;
            }
        }
        assert!(ok >= 19, "only {ok}/20 random tensors passed the spectrum assumptions");
    }

    #[test]
    fn purified_tensor_is_positive_and_admissible() {
        let tensor = random_mpdo_purified(2, 52).unwrap();
        assert_eq!(tensor.chi, 4);
        let dense = mpdo_to_dense(&tensor, 4).unwrap();
        let herm = linalg::hermiticity_deviation(&dense);
        assert!(herm < 1e-10);
        let rho = crate::dense::DenseOperator::from_matrix(4, {
            let tr = linalg::trace(&dense);
            Mat::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)] / tr)
        })
        .unwrap();
        let vals = rho.spectrum().unwrap();
        assert!(vals[0] > -1e-12, "min eigenvalue {}", vals[0]);
    }

    #[test]
    fn degenerate_tensor_raises_assumption_error() {
        // two decoupled Markov sectors give a doubly-degenerate λ₀
        let mut t = MpdoTensor::zeros(2);
        for a in 0..2 {
            *t.at_mut(0, 0, a, a) = c64::new(0.5, 0.0);
            *t.at_mut(1, 1, a, a) = c64::new(0.5, 0.0);
        }
        match analyze_transfer_spectrum(&t) {
            Err(Error::AssumptionViolated(msg)) => assert!(msg.contains("gap")),
            other => panic!("expected assumption violation, got {other:?}"),
        }
    }

    #[test]
    fn markov_chain_purity_matches_closed_form() {
        // uniform two-state Markov chain with orthogonal pure site states:
        // σ_L = Σ_configs 2^{-L} ⊗|s⟩⟨s| = I/2^L
        let mut t = MpdoTensor::zeros(2);
        for a in 0..2 {
            for b in 0..2 {
                let s = b; // emitted state tied to the target label
                *t.at_mut(s, s, a, b) = c64::new(0.5, 0.0);
            }
        }
        let periodic = PeriodicMpdo::new(&t).unwrap();
        for l in [3usize, 5] {
            assert!((periodic.purity(l) - 0.5f64.powi(l as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_check_passes_on_random_tensor_and_guards_preconditions() {
        // product tensor: zero error, trivially within the bound
        let check = mpdo_purity_bound_check(&product_tensor(), 24, 4).unwrap();
        assert!(check.pass);
        assert!(check.actual < 1e-12);

        // random χ=2 tensors at L=24: every admissible divisor k passes
        let mut tested = 0;
        for seed in 0..40u64 {
            let tensor = random_mpdo_tensor(2, 2000 + seed).unwrap();
            let Ok(spectrum) = analyze_transfer_spectrum(&tensor) else { continue };
            let l = 24;
            for k in [2usize, 3, 4] {
                if k < spectrum.k_min(l) || l < spectrum.min_chain_length(k) {
                    continue;
                }
                let check = mpdo_purity_bound_check(&tensor, l, k).unwrap();
                assert!(
                    check.pass,
                    "seed {seed} k={k}: actual {:.3e} > bound {:.3e}",
                    check.actual, check.bound
                );
                tested += 1;
            }
        }
        assert!(tested >= 10, "only {tested} admissible (tensor, k) pairs found");

        // k below k_min errors
        let tensor = random_mpdo_tensor(2, 3000).unwrap();
        let spectrum = analyze_transfer_spectrum(&tensor).unwrap();
        let k_min = spectrum.k_min(24);
        if k_min > 1 {
            assert!(matches!(
                mpdo_purity_bound_check(&tensor, 24, k_min - 1),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn purity_from_eigenvalue_sums_matches_transfer_power() {
        // Σ μⱼ^L / (Σ λⱼ^L)² equals the direct transfer-matrix expression
        let tensor = random_mpdo_tensor(2, 53).unwrap();
        let spectrum = analyze_transfer_spectrum(&tensor).unwrap();
        let periodic = {
            // rescale exactly like the analysis does
            let tau1 = build_transfer_matrix(&tensor, 1).unwrap();
            let (vals, _, _) = eig_general(&tau1).unwrap();
            PeriodicMpdo::new(&tensor.scale(Complex64::new(1.0, 0.0) / vals[0])).unwrap()
        };
        for l in [8usize, 12] {
            let mu_sum: c64 = spectrum.mu.iter().map(|m| m.powu(l as u32)).sum();
            let lam_sum: c64 = spectrum.lambda.iter().map(|x| x.powu(l as u32)).sum();
            let via_eigen = (mu_sum / (lam_sum * lam_sum)).re;
            let via_power = periodic.purity(l);
            assert!(
                (via_eigen - via_power).abs() < 1e-10,
                "L={l}: {via_eigen} vs {via_power}"
            );
        }
    }
}
