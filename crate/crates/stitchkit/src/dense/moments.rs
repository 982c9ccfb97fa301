//! Rényi moments, PT moments, negativity and the PPT probes, all computed by
//! Hermitian eigendecomposition of the relevant (reduced or partially
//! transposed) density matrix.

use serde::{Deserialize, Serialize};

use super::{partial_trace, partial_transpose, DenseOperator, Interval};
use crate::error::{Error, Result};
use crate::linalg;

/// Loose sanity tolerance used when an operation merely *requires* a density
/// matrix; strict 1e-10 validity is asserted at construction sites.
const INPUT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: u32,
    pub value: f64,
    pub regions: Vec<Interval>,
}

fn check_density_input(rho: &DenseOperator) -> Result<()> {
    let herm = linalg::hermiticity_deviation(rho.matrix());
    if herm > INPUT_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > INPUT_TOL || tr.im.abs() > INPUT_TOL {
        return Err(Error::NotDensityMatrix(format!("trace is {:.12}", tr)));
    }
    Ok(())
}

/// `P_n = Tr[ρⁿ]` via the eigenvalue sum `Σ λᵢⁿ`.
pub fn renyi_moment(rho: &DenseOperator, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Precondition("moment order must be ≥ 1".into()));
    }
    check_density_input(rho)?;
    let vals = rho.spectrum()?;
    if vals[0] < -INPUT_TOL {
        return Err(Error::NotDensityMatrix(format!(
            "minimum eigenvalue {:.3e}",
            vals[0]
        )));
    }
    Ok(vals.iter().map(|&l| l.powi(n as i32)).sum())
}

/// Rényi entropy `S_n = log(P_n) / (1 - n)` for `n ≥ 2`, in nats.
pub fn renyi_entropy(rho: &DenseOperator, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("Rényi entropy requires n ≥ 2".into()));
    }
    let p = renyi_moment(rho, n)?;
    Ok(p.ln() / (1.0 - n as f64))
}

/// Full spectrum of `ρ^{T_A}`, ascending.
pub fn pt_spectrum(rho: &DenseOperator, a: Interval) -> Result<Vec<f64>> {
    check_density_input(rho)?;
    let pt = partial_transpose(rho, a)?;
    pt.spectrum()
}

/// PT moment `p_n = Tr[(ρ^{T_A})ⁿ]`.
pub fn pt_moment(rho: &DenseOperator, a: Interval, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Precondition("moment order must be ≥ 1".into()));
    }
    let vals = pt_spectrum(rho, a)?;
    Ok(vals.iter().map(|&l| l.powi(n as i32)).sum())
}

/// Logarithmic negativity `log Σ|λⱼ|` over the PT spectrum. Spectra that are
/// non-negative up to roundoff give exactly zero.
pub fn log_negativity(rho: &DenseOperator, a: Interval) -> Result<f64> {
    let vals = pt_spectrum(rho, a)?;
    if vals[0] >= -1e-12 {
        return Ok(0.0);
    }
    let sum_abs: f64 = vals.iter().map(|l| l.abs()).sum();
    Ok(sum_abs.ln().max(0.0))
}

/// Normalized PT moment `p̃_n = p_n[AB] / (P_n[A] P_n[B])`.
pub fn normalized_pt_moment(
    rho: &DenseOperator,
    a: Interval,
    b: Interval,
    n: u32,
) -> Result<f64> {
    let probe = PtProbe::new(rho, a, b)?;
    probe.p_tilde(n)
}

/// `s_n[XY] = Tr[(ρ_XY^{T_X})ⁿ] / (Tr[ρ_Xⁿ] Tr[ρ_Yⁿ])` where `Y` is the
/// complement of the leading or trailing interval `X` in `rho_xy`.
pub fn s_ratio(rho_xy: &DenseOperator, x: Interval, n: u32) -> Result<f64> {
    let nq = rho_xy.n_qubits();
    x.validate(nq)?;
    let y = if x.start == 0 {
        Interval::new(x.len, nq - x.len)
    } else if x.end() == nq {
        Interval::new(0, nq - x.len)
    } else {
        return Err(Error::InvalidPartition(
            "X must be a prefix or suffix so that Y is contiguous".into(),
        ));
    };
    let probe = PtProbe::new(rho_xy, x, y)?;
    probe.s_ratio(n)
}

/// Entanglement probe `f₃` of the `p₃`-PPT condition; negative iff violated.
pub fn f3(rho: &DenseOperator, a: Interval, b: Interval) -> Result<f64> {
    PtProbe::new(rho, a, b)?.f3()
}

/// Entanglement probe `f₅` of the `p₅`-PPT condition; negative iff violated.
pub fn f5(rho: &DenseOperator, a: Interval, b: Interval) -> Result<f64> {
    PtProbe::new(rho, a, b)?.f5()
}

/// One eigendecomposition of `ρ^{T_A}` plus the two subsystem spectra,
/// serving every PT moment, normalized moment and PPT probe of a fixed
/// bipartition. Useful when scanning `f₃`/`f₅` over parameter grids.
pub struct PtProbe {
    pt_vals: Vec<f64>,
    a_vals: Vec<f64>,
    b_vals: Vec<f64>,
}

impl PtProbe {
    pub fn new(rho: &DenseOperator, a: Interval, b: Interval) -> Result<Self> {
        let nq = rho.n_qubits();
        a.validate(nq)?;
        b.validate(nq)?;
        let joined = a.join(&b)?;
        if joined.start != 0 || joined.len != nq {
            return Err(Error::InvalidPartition(format!(
                "A ∪ B covers [{}, {}) but the system has {} qubits",
                joined.start,
                joined.end(),
                nq
            )));
        }
        check_density_input(rho)?;
        let pt_vals = partial_transpose(rho, a)?.spectrum()?;
        let a_vals = partial_trace(rho, a)?.spectrum()?;
        let b_vals = partial_trace(rho, b)?.spectrum()?;
        Ok(PtProbe { pt_vals, a_vals, b_vals })
    }

    pub fn p(&self, n: u32) -> f64 {
        self.pt_vals.iter().map(|&l| l.powi(n as i32)).sum()
    }

    pub fn moment_a(&self, n: u32) -> f64 {
        self.a_vals.iter().map(|&l| l.powi(n as i32)).sum()
    }

    pub fn moment_b(&self, n: u32) -> f64 {
        self.b_vals.iter().map(|&l| l.powi(n as i32)).sum()
    }

    pub fn p_tilde(&self, n: u32) -> Result<f64> {
        let denom = self.moment_a(n) * self.moment_b(n);
        if denom.abs() < f64::MIN_POSITIVE {
            return Err(Error::Precondition("vanishing moment denominator".into()));
        }
        Ok(self.p(n) / denom)
    }

    pub fn s_ratio(&self, n: u32) -> Result<f64> {
        self.p_tilde(n)
    }

    pub fn f3(&self) -> Result<f64> {
        let ratio = self.moment_a(2).powi(2) * self.moment_b(2).powi(2)
            / (self.moment_a(1)
                * self.moment_b(1)
                * self.moment_a(3)
                * self.moment_b(3));
        Ok(self.p_tilde(3)? * self.p_tilde(1)? - self.p_tilde(2)?.powi(2) * ratio)
    }

    pub fn f5(&self) -> Result<f64> {
        let ratio = self.moment_a(4).powi(2) * self.moment_b(4).powi(2)
            / (self.moment_a(3)
                * self.moment_b(3)
                * self.moment_a(5)
                * self.moment_b(5));
        Ok(self.p_tilde(5)? * self.p_tilde(3)? - self.p_tilde(4)?.powi(2) * ratio)
    }

    /// Direct evaluation of the `p_n`-PPT inequality `p_n p_{n-2} ≥ p_{n-1}²`;
    /// returns the left minus right side.
    pub fn ppt_slack(&self, n: u32) -> f64 {
        self.p(n) * self.p(n - 2) - self.p(n - 1).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{build_ising, gibbs_state};
    use crate::linalg::{random_density_matrix, random_pure_density};
    use faer::Mat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_rho(n: usize, seed: u64) -> DenseOperator {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        DenseOperator::from_matrix(n, random_density_matrix(1 << n, &mut rng)).unwrap()
    }

    fn pure_rho(n: usize, seed: u64) -> DenseOperator {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        DenseOperator::from_matrix(n, random_pure_density(1 << n, &mut rng)).unwrap()
    }

    /// Trace of the explicit matrix power, the multiplication oracle.
    fn moment_by_multiplication(rho: &DenseOperator, n: u32) -> f64 {
        let mut acc = Mat::from_fn(rho.dim(), rho.dim(), |i, j| rho.matrix()[(i, j)]);
        for _ in 1..n {
            acc = &acc * rho.matrix();
        }
        linalg::trace(&acc).re
    }

    #[test]
    fn renyi_moment_of_maximally_mixed() {
        for m in 1..=3usize {
            let rho = DenseOperator::maximally_mixed(m);
            let p2 = renyi_moment(&rho, 2).unwrap();
            assert!((p2 - 0.5f64.powi(m as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi_moment_of_pure_state_is_one() {
        let rho = pure_rho(3, 21);
        for n in 1..=5 {
            assert!((renyi_moment(&rho, n).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gibbs_moment_matches_multiplication_oracle() {
        let h = build_ising(2, 1.1, -0.04).unwrap();
        let rho = gibbs_state(&h, 2.0).unwrap();
        let via_eig = renyi_moment(&rho, 3).unwrap();
        let via_mul = moment_by_multiplication(&rho, 3);
        assert!((via_eig - via_mul).abs() < 1e-10);
    }

    #[test]
    fn eigen_moments_match_multiplication_up_to_n5() {
        for (n_qubits, seed) in [(2usize, 22u64), (3, 23)] {
            let rho = random_rho(n_qubits, seed);
            for n in 2..=5 {
                let a = renyi_moment(&rho, n).unwrap();
                let b = moment_by_multiplication(&rho, n);
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn renyi_entropy_limits() {
        let pure = pure_rho(2, 24);
        assert!(renyi_entropy(&pure, 2).unwrap().abs() < 1e-9);
        for m in 1..=3usize {
            let mixed = DenseOperator::maximally_mixed(m);
            let s2 = renyi_entropy(&mixed, 2).unwrap();
            assert!((s2 - m as f64 * std::f64::consts::LN_2).abs() < 1e-12);
        }
        assert!(renyi_entropy(&pure, 1).is_err());
    }

    /// Eq.-style trace-norm sensitivity: for ρ, σ at trace distance δ the
    /// entropy difference is bounded by 2^L [1 - (1-2δ)² - 4δ²/(2^L - 1)].
    #[test]
    fn renyi2_trace_norm_sensitivity_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        for _ in 0..20 {
            let l = 3usize;
            let dim = 1usize << l;
            let rho = DenseOperator::from_matrix(l, random_density_matrix(dim, &mut rng)).unwrap();
            let sigma =
                DenseOperator::from_matrix(l, random_density_matrix(dim, &mut rng)).unwrap();
            let diff = rho.matrix() - sigma.matrix();
            let delta: f64 = linalg::eigvalsh(&diff)
                .unwrap()
                .iter()
                .map(|v| v.abs())
                .sum::<f64>()
                / 2.0;
            let lhs = (renyi_entropy(&rho, 2).unwrap() - renyi_entropy(&sigma, 2).unwrap()).abs();
            let d = dim as f64;
            let bound = d * (1.0 - (1.0 - 2.0 * delta).powi(2) - 4.0 * delta * delta / (d - 1.0));
            // the bound is only meaningful for δ ≤ 1/2; trace distance of
            // density matrices never exceeds 1
            if delta <= 0.5 {
                assert!(lhs <= bound + 1e-9, "lhs={lhs} bound={bound} delta={delta}");
            }
        }
    }

    #[test]
    fn pt_moment_basics() {
        let rho = random_rho(3, 26);
        let a = Interval::new(0, 1);
        assert!((pt_moment(&rho, a, 1).unwrap() - 1.0).abs() < 1e-10);
        let p2 = pt_moment(&rho, a, 2).unwrap();
        let purity = renyi_moment(&rho, 2).unwrap();
        assert!((p2 - purity).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_pt_moment_n3() {
        let bell = DenseOperator::bell_pair();
        let p3 = pt_moment(&bell, Interval::new(0, 1), 3).unwrap();
        assert!((p3 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn log_negativity_cases() {
        let a = random_rho(1, 27);
        let b = random_rho(1, 28);
        let product = a.tensor(&b);
        assert_eq!(log_negativity(&product, Interval::new(0, 1)).unwrap(), 0.0);

        let bell = DenseOperator::bell_pair();
        let neg = log_negativity(&bell, Interval::new(0, 1)).unwrap();
        assert!((neg - std::f64::consts::LN_2).abs() < 1e-12);

        let mixed = DenseOperator::maximally_mixed(2);
        assert_eq!(log_negativity(&mixed, Interval::new(0, 1)).unwrap(), 0.0);
    }

    #[test]
    fn normalized_pt_moment_cases() {
        let pa = pure_rho(1, 29);
        let pb = pure_rho(2, 30);
        let product = pa.tensor(&pb);
        let a = Interval::new(0, 1);
        let b = Interval::new(1, 2);
        for n in 1..=4 {
            let v = normalized_pt_moment(&product, a, b, n).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "n={n}: {v}");
        }
        let rho = random_rho(3, 31);
        assert!((normalized_pt_moment(&rho, a, b, 1).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pt_moment_magnitudes_bounded_by_purity() {
        // |p_n| ≤ Σ|λ|ⁿ ≤ Σλ² = P₂ ≤ 1 for n ≥ 2, since PT eigenvalues of a
        // state lie in [-1/2, 1]
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let a = Interval::new(0, 2);
        let b = Interval::new(2, 2);
        for _ in 0..100 {
            let rho =
                DenseOperator::from_matrix(4, random_density_matrix(16, &mut rng)).unwrap();
            let probe = PtProbe::new(&rho, a, b).unwrap();
            let p2 = probe.p(2);
            for n in 2..=5 {
                let v = probe.p(n);
                assert!(v.abs() <= p2 + 1e-10, "n={n}: |p_n|={} > P₂={p2}", v.abs());
                assert!(v.abs() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn moment_ratio_inequality() {
        // P_n² / (P_{n-1} P_{n+1}) ≤ 1, from the Cauchy-Schwarz/Hölder chain
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for _ in 0..50 {
            let rho = DenseOperator::from_matrix(3, random_density_matrix(8, &mut rng)).unwrap();
            for n in 2..=4u32 {
                let pn = renyi_moment(&rho, n).unwrap();
                let pm = renyi_moment(&rho, n - 1).unwrap();
                let pp = renyi_moment(&rho, n + 1).unwrap();
                assert!(pn * pn / (pm * pp) <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn s_ratio_on_product_state() {
        let x = random_rho(1, 34);
        let y = random_rho(2, 35);
        let rho = x.tensor(&y);
        for n in 2..=3 {
            let s = s_ratio(&rho, Interval::new(0, 1), n).unwrap();
            assert!((s - 1.0).abs() < 1e-9, "n={n}: {s}");
        }
    }

    #[test]
    fn s_ratio_n2_is_purity_ratio() {
        let rho = random_rho(3, 36);
        let x = Interval::new(0, 2);
        let s = s_ratio(&rho, x, 2).unwrap();
        let p2 = renyi_moment(&rho, 2).unwrap();
        let pa = renyi_moment(&partial_trace(&rho, x).unwrap(), 2).unwrap();
        let pb = renyi_moment(&partial_trace(&rho, Interval::new(2, 1)).unwrap(), 2).unwrap();
        assert!((s - p2 / (pa * pb)).abs() < 1e-10);
    }

    #[test]
    fn f3_cases() {
        let pa = pure_rho(1, 37);
        let pb = pure_rho(1, 38);
        let product = pa.tensor(&pb);
        let a = Interval::new(0, 1);
        let b = Interval::new(1, 1);
        assert!(f3(&product, a, b).unwrap().abs() < 1e-9);

        // Bell pair: the raw p₃-PPT slack is p₃p₁ - p₂² = 1/4 - 1 = -3/4;
        // the normalized probe divides by P₃[A]P₃[B] = 1/16, giving -12
        let bell = DenseOperator::bell_pair();
        let probe = PtProbe::new(&bell, a, b).unwrap();
        assert!((probe.ppt_slack(3) - (-0.75)).abs() < 1e-10);
        let v = f3(&bell, a, b).unwrap();
        assert!((v - (-12.0)).abs() < 1e-9, "{v}");
        assert!((v - probe.ppt_slack(3) / (probe.moment_a(3) * probe.moment_b(3))).abs() < 1e-9);
    }

    #[test]
    fn separable_states_satisfy_ppt_probes() {
        let mut rng = ChaCha12Rng::seed_from_u64(39);
        let a = Interval::new(0, 2);
        let b = Interval::new(2, 1);
        for _ in 0..50 {
            let ra = DenseOperator::from_matrix(2, random_density_matrix(4, &mut rng)).unwrap();
            let rb = DenseOperator::from_matrix(1, random_density_matrix(2, &mut rng)).unwrap();
            let rho = ra.tensor(&rb);
            assert!(f3(&rho, a, b).unwrap() >= -1e-10);
            assert!(f5(&rho, a, b).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn probe_sign_agrees_with_direct_ppt_inequality() {
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        let a = Interval::new(0, 2);
        let b = Interval::new(2, 2);
        for _ in 0..25 {
            let rho = DenseOperator::from_matrix(4, random_density_matrix(16, &mut rng)).unwrap();
            let probe = PtProbe::new(&rho, a, b).unwrap();
            assert_eq!(probe.f3().unwrap() < -1e-12, probe.ppt_slack(3) < -1e-12);
            assert_eq!(probe.f5().unwrap() < -1e-12, probe.ppt_slack(5) < -1e-12);
        }
    }

    #[test]
    fn pt_eigenvalue_soft_range() {
        // soft property: PT eigenvalues of density matrices lie in [-1/2, 1]
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..20 {
            let rho = DenseOperator::from_matrix(4, random_density_matrix(16, &mut rng)).unwrap();
            let vals = pt_spectrum(&rho, Interval::new(0, 2)).unwrap();
            assert!(vals[0] >= -0.5 - 1e-9 && vals[vals.len() - 1] <= 1.0 + 1e-9);
        }
    }
}
