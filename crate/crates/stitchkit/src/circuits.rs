//! Finite-depth brickwork circuit states, their exact factorization
//! identities, and the depolarization-parameter threshold sweep.

use faer::{c64, Mat};

use crate::dense::{partial_trace, DenseOperator, Interval, PtProbe, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{self, haar_unitary, ONE, ZERO};
use crate::seeds::SeedTree;

/// A brickwork circuit: `depth` alternating layers of two-qubit gates. Even
/// layers act on pairs (0,1), (2,3), …; odd layers on (1,2), (3,4), ….
#[derive(Clone, Debug)]
pub struct BrickworkCircuit {
    n_qubits: usize,
    /// one vec per layer of (left site index, 4×4 unitary)
    layers: Vec<Vec<(usize, Mat<c64>)>>,
}

impl BrickworkCircuit {
    pub fn identity(n_qubits: usize, depth: usize) -> Self {
        let mut layers = Vec::new();
        for t in 0..depth {
            let mut layer = Vec::new();
            let mut j = t % 2;
            while j + 1 < n_qubits {
                layer.push((j, linalg::identity(4)));
                j += 2;
            }
            layers.push(layer);
        }
        BrickworkCircuit { n_qubits, layers }
    }

    pub fn from_layers(n_qubits: usize, layers: Vec<Vec<(usize, Mat<c64>)>>) -> Result<Self> {
        for (t, layer) in layers.iter().enumerate() {
            let mut touched = vec![false; n_qubits];
            for (j, g) in layer {
                if j % 2 != t % 2 || j + 1 >= n_qubits {
                    return Err(Error::Precondition(format!(
                        "gate at site {j} breaks the brickwork parity of layer {t}"
                    )));
                }
                if touched[*j] || touched[j + 1] {
                    return Err(Error::Precondition(format!(
                        "overlapping gates in layer {t} at site {j}"
                    )));
                }
                touched[*j] = true;
                touched[j + 1] = true;
                let dev = linalg::deviation_from_unitary(g);
                if dev > 1e-12 {
                    return Err(Error::Precondition(format!(
                        "gate at ({j}, {}) deviates from unitarity by {dev:.3e}",
                        j + 1
                    )));
                }
            }
        }
        Ok(BrickworkCircuit { n_qubits, layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<(usize, Mat<c64>)>] {
        &self.layers
    }
}

/// Brickwork circuit of Haar-random two-qubit gates; deterministic per seed.
pub fn sample_random_circuit(l: usize, depth: usize, seed: u64) -> Result<BrickworkCircuit> {
    if l < 2 || depth < 1 {
        return Err(Error::Precondition(format!(
            "need L ≥ 2 and depth ≥ 1, got L={l}, depth={depth}"
        )));
    }
    let tree = SeedTree::new(seed);
    let mut layers = Vec::with_capacity(depth);
    for t in 0..depth {
        let mut layer = Vec::new();
        let mut j = t % 2;
        while j + 1 < l {
            let mut rng = tree.child(t as u64).child(j as u64).rng();
            layer.push((j, haar_unitary(4, &mut rng)));
            j += 2;
        }
        layers.push(layer);
    }
    Ok(BrickworkCircuit { n_qubits: l, layers })
}

/// Product input `⊗ⱼ σⱼ` of single-qubit density matrices.
#[derive(Clone, Debug)]
pub struct ProductInput {
    sites: Vec<Mat<c64>>,
}

impl ProductInput {
    pub fn from_sites(sites: Vec<Mat<c64>>) -> Result<Self> {
        for (j, s) in sites.iter().enumerate() {
            if s.nrows() != 2 || s.ncols() != 2 {
                return Err(Error::Precondition(format!("site {j} matrix is not 2×2")));
            }
            let herm = linalg::hermiticity_deviation(s);
            let tr = linalg::trace(s);
            if herm > 1e-10 || (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "site {j} is not a valid density matrix"
                )));
            }
        }
        Ok(ProductInput { sites })
    }

    /// All qubits in `|0⟩⟨0|`.
    pub fn zeros(l: usize) -> Self {
        let proj = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { ONE } else { ZERO });
        ProductInput { sites: vec![proj; l] }
    }

    /// `σⱼ(γ) = γ|aⱼ⟩⟨aⱼ| + (1-γ)|bⱼ⟩⟨bⱼ|` for per-site orthonormal pairs.
    pub fn depolarized(bases: &[SiteBasis], gamma: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&gamma) {
            return Err(Error::Precondition(format!(
                "depolarization parameter γ={gamma} outside [0, 1/2]"
            )));
        }
        let sites = bases
            .iter()
            .map(|basis| {
                Mat::from_fn(2, 2, |i, j| {
                    basis.a[i] * basis.a[j].conj() * gamma
                        + basis.b[i] * basis.b[j].conj() * (1.0 - gamma)
                })
            })
            .collect();
        Ok(ProductInput { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Mat<c64>] {
        &self.sites
    }

    /// Exact global purity of the product: `Π Tr[σⱼ²]`.
    pub fn purity(&self) -> f64 {
        self.sites
            .iter()
            .map(|s| (0..2).flat_map(|i| (0..2).map(move |j| s[(i, j)].norm_sqr())).sum::<f64>())
            .product()
    }
}

/// An orthonormal single-qubit pair `(|a⟩, |b⟩)`.
#[derive(Clone, Debug)]
pub struct SiteBasis {
    pub a: [c64; 2],
    pub b: [c64; 2],
}

impl SiteBasis {
    /// The computational basis pair: `|a⟩ = |1⟩`, `|b⟩ = |0⟩`.
    pub fn computational() -> Self {
        SiteBasis { a: [ZERO, ONE], b: [ONE, ZERO] }
    }

    pub fn random(rng: &mut impl rand::Rng) -> Self {
        let u = haar_unitary(2, rng);
        SiteBasis { a: [u[(0, 0)], u[(1, 0)]], b: [u[(0, 1)], u[(1, 1)]] }
    }
}

pub fn random_site_bases(l: usize, seed: u64) -> Vec<SiteBasis> {
    let tree = SeedTree::new(seed);
    (0..l)
        .map(|j| SiteBasis::random(&mut tree.child(j as u64).rng()))
        .collect()
}

/// `ρ = U⁽ℓ⁾ (⊗σⱼ) U⁽ℓ⁾†` on the dense backend.
pub fn apply_circuit(circuit: &BrickworkCircuit, input: &ProductInput) -> Result<DenseOperator> {
    let l = circuit.n_qubits();
    if input.len() != l {
        return Err(Error::Precondition(format!(
            "input has {} sites, circuit acts on {l}",
            input.len()
        )));
    }
    if l > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit(l, MAX_DENSE_QUBITS));
    }
    let mut rho = DenseOperator::from_matrix(1, input.sites()[0].clone())?;
    for site in &input.sites()[1..] {
        rho = rho.tensor(&DenseOperator::from_matrix(1, site.clone())?);
    }
    for layer in circuit.layers() {
        for (j, g) in layer {
            rho.apply_two_qubit_unitary(*j, g);
        }
    }
    Ok(rho)
}

fn interval_purity(rho: &DenseOperator, region: Interval) -> Result<f64> {
    Ok(partial_trace(rho, region)?.purity())
}

/// Deviation `|Tr(ρ_I²)⁻¹ · Tr(ρ_AB²) Tr(ρ_BC²) / Tr(ρ_B²) - 1|` for the
/// three-interval split `I = A ∪ B ∪ C`. Exactly zero (to roundoff) for
/// circuit states whenever `|B| ≥ 2ℓ-1`.
pub fn verify_purity_factorization(
    rho: &DenseOperator,
    a: Interval,
    b: Interval,
    c: Interval,
) -> Result<f64> {
    let ab = a.join(&b)?;
    let bc = b.join(&c)?;
    let full = ab.join(&c)?;
    let p_full = interval_purity(rho, full)?;
    let p_ab = interval_purity(rho, ab)?;
    let p_bc = interval_purity(rho, bc)?;
    let p_b = interval_purity(rho, b)?;
    Ok((p_ab * p_bc / (p_b * p_full) - 1.0).abs())
}

/// Deviation `|r₂/P₂ - 1|` with `r₂` assembled from exact interval purities
/// over the `k`-partition of the whole chain.
pub fn verify_chain_factorization(rho: &DenseOperator, k: usize) -> Result<f64> {
    let l = rho.n_qubits();
    let partition = crate::stitch::make_partition(l, k)?;
    let mut log_r2 = 0.0f64;
    for pair in partition.pairs() {
        log_r2 += interval_purity(rho, pair)?.ln();
    }
    for interior in partition.interiors() {
        log_r2 -= interval_purity(rho, interior)?.ln();
    }
    let p2 = rho.purity();
    Ok((log_r2.exp() / p2 - 1.0).abs())
}

/// Deviation `|p̃_n[AB] - s_n[A₂B₁]|` for the four-interval partition
/// `A = A₁ ∪ A₂`, `B = B₁ ∪ B₂` of the whole chain.
pub fn verify_pt_factorization(
    rho: &DenseOperator,
    a1: Interval,
    a2: Interval,
    b1: Interval,
    b2: Interval,
    n: u32,
) -> Result<f64> {
    let a = a1.join(&a2)?;
    let b = b1.join(&b2)?;
    let probe = PtProbe::new(rho, a, b)?;
    let p_tilde = probe.p_tilde(n)?;
    let a2b1 = a2.join(&b1)?;
    let reduced = partial_trace(rho, a2b1)?;
    let s = crate::dense::s_ratio(&reduced, Interval::new(0, a2.len), n)?;
    Ok((p_tilde - s).abs())
}

/// Extrema of the size-free `f₃`/`f₅` combinations over a depolarization
/// grid, with the detection thresholds of the circuit family.
#[derive(Clone, Debug)]
pub struct GammaThresholdReport {
    pub k3: f64,
    pub k5: f64,
    pub h3: f64,
    pub h5: f64,
    /// `-K₃/(4H₃)` when `K₃ < 0`
    pub gamma3: Option<f64>,
    /// `(-K₅/(8H₅))^{1/3}` when `K₅ < 0`
    pub gamma5: Option<f64>,
    /// detection margins `C₃ = |K₃|/2`, `C₅ = |K₅|/2` when defined
    pub c3: Option<f64>,
    pub c5: Option<f64>,
    /// bipartition cut the probes refer to
    pub cut: usize,
    pub grid: Vec<f64>,
}

impl GammaThresholdReport {
    pub fn thresholds_defined(&self) -> bool {
        self.gamma3.is_some() && self.gamma5.is_some()
    }
}

/// Uniform grid of `points` values over `[0, 1/4]`.
pub fn default_gamma_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| 0.25 * i as f64 / (points - 1) as f64).collect()
}

/// The cut position nearest to the half chain whose crossing gate lives in
/// the circuit's final layer, so that the boundary cluster takes the
/// canonical three-gate shape.
pub fn aligned_cut(l: usize, depth: usize) -> Result<usize> {
    let parity = (depth - 1) % 2;
    let half = l / 2;
    let cut = if (half + 1) % 2 == parity { half } else { half + 1 };
    if cut < 2 || cut + 2 > l {
        return Err(Error::Precondition(format!(
            "no aligned cut fits a chain of {l} qubits at depth {depth}"
        )));
    }
    Ok(cut)
}

/// Sites whose forward light cone crosses the `cut`, split by side. These are
/// the qubits whose inputs reach the boundary cluster; every other site
/// contributes a bare `Tr[σⁿ]` factor to each half-chain moment.
fn cut_clusters(circuit: &BrickworkCircuit, cut: usize) -> (usize, usize) {
    let l = circuit.n_qubits();
    let mut cluster_a = 0usize;
    let mut cluster_b = 0usize;
    for site in 0..l {
        let (mut lo, mut hi) = (site, site);
        for layer in circuit.layers() {
            for (j, _) in layer {
                if *j <= hi && j + 1 >= lo {
                    lo = lo.min(*j);
                    hi = hi.max(j + 1);
                }
            }
        }
        if site < cut && hi >= cut {
            cluster_a += 1;
        }
        if site >= cut && lo < cut {
            cluster_b += 1;
        }
    }
    (cluster_a, cluster_b)
}

/// Sweep the depolarization parameter over `grid` for a fixed circuit and
/// per-site bases, extracting the size-free extrema `K₃`, `K₅`, `H₃`, `H₅`
/// and the thresholds `γ₃`, `γ₅`.
///
/// The size-free combinations are evaluated on the full dense state: the
/// two subsystem moments are stripped of one factor `γⁿ+(1-γ)ⁿ` per site
/// outside the boundary light cone, which removes all system-size dependence
/// of the circuit family.
pub fn gamma_threshold_sweep(
    circuit: &BrickworkCircuit,
    bases: &[SiteBasis],
    grid: &[f64],
) -> Result<GammaThresholdReport> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty γ grid".into()));
    }
    let l = circuit.n_qubits();
    let depth = circuit.depth();
    if depth < 2 {
        return Err(Error::Precondition(
            "threshold sweep requires circuit depth ≥ 2".into(),
        ));
    }
    if grid.iter().any(|&g| !(0.0..=0.25).contains(&g)) {
        return Err(Error::Precondition("γ grid must lie in [0, 1/4]".into()));
    }
    let cut = aligned_cut(l, depth)?;
    let (cluster_a, cluster_b) = cut_clusters(circuit, cut);
    if cut < cluster_a || l - cut < cluster_b {
        return Err(Error::Precondition(format!(
            "boundary cluster ({cluster_a}+{cluster_b} sites) does not fit the {l}-qubit chain"
        )));
    }
    let side_a = Interval::new(0, cut);
    let side_b = Interval::new(cut, l - cut);
    let outside_a = (cut - cluster_a) as i32;
    let outside_b = (l - cut - cluster_b) as i32;

    let mut k3 = f64::NEG_INFINITY;
    let mut k5 = f64::NEG_INFINITY;
    let mut h3 = f64::NEG_INFINITY;
    let mut h5 = f64::NEG_INFINITY;
    for &gamma in grid {
        let input = ProductInput::depolarized(bases, gamma)?;
        let rho = apply_circuit(circuit, &input)?;
        let probe = PtProbe::new(&rho, side_a, side_b)?;
        let w = |n: u32| gamma.powi(n as i32) + (1.0 - gamma).powi(n as i32);
        // boundary-cluster moments with the extensive site factors stripped
        let block_a = |n: u32| probe.moment_a(n) / w(n).powi(outside_a);
        let block_b = |n: u32| probe.moment_b(n) / w(n).powi(outside_b);
        let s_tilde = |n: u32| probe.p_tilde(n);
        let t3 = block_a(2).powi(2) * block_b(2).powi(2) / (block_a(3) * block_b(3));
        let t5 = block_a(4).powi(2) * block_b(4).powi(2)
            / (block_a(3) * block_b(3) * block_a(5) * block_b(5));
        let g3 = s_tilde(3)? - s_tilde(2)?.powi(2) * t3;
        let g5 = s_tilde(5)? * s_tilde(3)? - s_tilde(4)?.powi(2) * t5;
        k3 = k3.max(g3);
        k5 = k5.max(g5);
        h3 = h3.max((s_tilde(2)?.powi(2) * t3).abs());
        h5 = h5.max((s_tilde(4)?.powi(2) * t5).abs());
    }

    let (gamma3, c3) = if k3 < 0.0 {
        (Some(-k3 / (4.0 * h3)), Some(k3.abs() / 2.0))
    } else {
        (None, None)
    };
    let (gamma5, c5) = if k5 < 0.0 {
        (Some((-k5 / (8.0 * h5)).cbrt()), Some(k5.abs() / 2.0))
    } else {
        (None, None)
    };
    Ok(GammaThresholdReport {
        k3,
        k5,
        h3,
        h5,
        gamma3,
        gamma5,
        c3,
        c5,
        cut,
        grid: grid.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{f3, renyi_moment};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sampled_gates_are_unitary_and_deterministic() {
        let c1 = sample_random_circuit(6, 3, 99).unwrap();
        let c2 = sample_random_circuit(6, 3, 99).unwrap();
        for (l1, l2) in c1.layers().iter().zip(c2.layers()) {
            for ((j1, g1), (j2, g2)) in l1.iter().zip(l2) {
                assert_eq!(j1, j2);
                assert!(linalg::deviation_from_unitary(g1) < 1e-12);
                assert!(linalg::max_abs_diff(g1, g2) == 0.0);
            }
        }
        let c3 = sample_random_circuit(6, 3, 100).unwrap();
        assert!(linalg::max_abs_diff(&c1.layers()[0][0].1, &c3.layers()[0][0].1) > 1e-3);
    }

    #[test]
    fn haar_first_moment_on_basis_state() {
        // mean of g|00⟩⟨00|g† over Haar-random g approaches I/4
        let tree = SeedTree::new(4242);
        let samples = 10_000usize;
        let mut mean = Mat::<c64>::zeros(4, 4);
        for s in 0..samples {
            let g = haar_unitary(4, &mut tree.child(s as u64).rng());
            for i in 0..4 {
                for j in 0..4 {
                    mean[(i, j)] += g[(i, 0)] * g[(j, 0)].conj();
                }
            }
        }
        // entrywise standard error is at most ~1/sqrt(samples)
        let tol = 5.0 / (samples as f64).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.25 } else { 0.0 };
                let got = mean[(i, j)] / samples as f64;
                assert!(
                    (got.re - expected).abs() < tol && got.im.abs() < tol,
                    "entry ({i},{j}) = {got}"
                );
            }
        }
    }

    #[test]
    fn identity_circuit_preserves_input() {
        let input = ProductInput::zeros(4);
        let circuit = BrickworkCircuit::identity(4, 2);
        let rho = apply_circuit(&circuit, &input).unwrap();
        let expected = DenseOperator::basis_projector(&[0, 0, 0, 0]);
        assert!(linalg::max_abs_diff(rho.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn pure_inputs_stay_pure() {
        let circuit = sample_random_circuit(5, 2, 7).unwrap();
        let rho = apply_circuit(&circuit, &ProductInput::zeros(5)).unwrap();
        assert!((renyi_moment(&rho, 2).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn depolarized_inputs_have_closed_form_purity() {
        let l = 5;
        let gamma = 0.17;
        let bases = random_site_bases(l, 11);
        let circuit = sample_random_circuit(l, 2, 12).unwrap();
        let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, gamma).unwrap())
            .unwrap();
        let expected = (gamma * gamma + (1.0 - gamma) * (1.0 - gamma)).powi(l as i32);
        assert!((rho.purity() - expected).abs() < 1e-10);
        // global purity equals the product of input purities under any circuit
        let input = ProductInput::depolarized(&bases, gamma).unwrap();
        assert!((input.purity() - expected).abs() < 1e-12);
    }

    #[test]
    fn purity_factorization_exact_above_threshold() {
        let l = 10;
        let ell = 2;
        let circuit = sample_random_circuit(l, ell, 21).unwrap();
        let bases = random_site_bases(l, 22);
        let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.3).unwrap())
            .unwrap();
        // |B| = 3 = 2ℓ-1
        let a = Interval::new(0, 4);
        let b = a.then(3);
        let c = b.then(3);
        let dev = verify_purity_factorization(&rho, a, b, c).unwrap();
        assert!(dev < 1e-9, "deviation {dev}");
    }

    #[test]
    fn purity_factorization_fails_below_threshold() {
        let l = 8;
        let circuit = sample_random_circuit(l, 2, 23).unwrap();
        let bases = random_site_bases(l, 24);
        let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.3).unwrap())
            .unwrap();
        let a = Interval::new(0, 3);
        let b = a.then(1);
        let c = b.then(4);
        let dev = verify_purity_factorization(&rho, a, b, c).unwrap();
        assert!(dev > 1e-3, "deviation {dev} unexpectedly small for |B|=1");
    }

    #[test]
    fn product_state_factorizes_for_any_partition() {
        let bases = random_site_bases(6, 25);
        let rho = apply_circuit(
            &BrickworkCircuit::identity(6, 1),
            &ProductInput::depolarized(&bases, 0.4).unwrap(),
        )
        .unwrap();
        let a = Interval::new(0, 2);
        let b = a.then(1);
        let c = b.then(3);
        assert!(verify_purity_factorization(&rho, a, b, c).unwrap() < 1e-12);
    }

    #[test]
    fn chain_factorization_on_fdqc_and_mixed_state() {
        let l = 12;
        let circuit = sample_random_circuit(l, 2, 26).unwrap();
        let bases = random_site_bases(l, 27);
        let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.25).unwrap())
            .unwrap();
        assert!(verify_chain_factorization(&rho, 3).unwrap() < 1e-9);

        let mixed = DenseOperator::maximally_mixed(6);
        for k in [1, 2, 3] {
            assert!(verify_chain_factorization(&mixed, k).unwrap() < 1e-12);
        }
    }

    #[test]
    fn pt_factorization_exact_above_threshold() {
        let l = 12;
        let ell = 2;
        let circuit = sample_random_circuit(l, ell, 28).unwrap();
        let bases = random_site_bases(l, 29);
        let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.3).unwrap())
            .unwrap();
        let a1 = Interval::new(0, 3);
        let a2 = a1.then(3);
        let b1 = a2.then(3);
        let b2 = b1.then(3);
        for n in [2, 3] {
            let dev = verify_pt_factorization(&rho, a1, a2, b1, b2, n).unwrap();
            assert!(dev < 1e-9, "n={n}: deviation {dev}");
        }
    }

    #[test]
    fn pt_factorization_trivial_for_product_states() {
        let bases = random_site_bases(8, 30);
        let rho = apply_circuit(
            &BrickworkCircuit::identity(8, 1),
            &ProductInput::depolarized(&bases, 0.35).unwrap(),
        )
        .unwrap();
        let a1 = Interval::new(0, 2);
        let a2 = a1.then(2);
        let b1 = a2.then(2);
        let b2 = b1.then(2);
        for n in [2, 3] {
            assert!(verify_pt_factorization(&rho, a1, a2, b1, b2, n).unwrap() < 1e-12);
        }
    }

    #[test]
    fn gamma_sweep_identity_circuit_has_nonnegative_k3() {
        let l = 8;
        let circuit = BrickworkCircuit::identity(l, 2);
        let bases = random_site_bases(l, 31);
        let grid = default_gamma_grid(16);
        let report = gamma_threshold_sweep(&circuit, &bases, &grid).unwrap();
        assert!(report.k3 >= -1e-9, "K3 = {}", report.k3);
        assert!(!report.thresholds_defined());
    }

    // A fixed circuit draw whose boundary cluster realizes negative extrema;
    // drawn from the same Haar ensemble as any other seed.
    const DETECTING_CIRCUIT_SEED: u64 = 293;
    const DETECTING_BASIS_SEED: u64 = 100_293;

    #[test]
    fn gamma_sweep_detecting_circuit() {
        let l = 10;
        let circuit = sample_random_circuit(l, 2, DETECTING_CIRCUIT_SEED).unwrap();
        let bases = random_site_bases(l, DETECTING_BASIS_SEED);
        let grid = default_gamma_grid(16);
        let report = gamma_threshold_sweep(&circuit, &bases, &grid).unwrap();
        assert!(report.k3 < 0.0, "K3 = {}", report.k3);
        assert!(report.k5 < 0.0, "K5 = {}", report.k5);
        let gamma3 = report.gamma3.unwrap();
        assert!(gamma3 > 0.0);
        // theorem: f₃(ρ(γ)) ≤ -C₃ for all γ ≤ γ₃/L, at the aligned cut
        let c3 = report.c3.unwrap();
        let a = Interval::new(0, report.cut);
        let b = Interval::new(report.cut, l - report.cut);
        let mut checked = 0;
        for &gamma in grid.iter().filter(|&&g| g <= gamma3 / l as f64) {
            let rho = apply_circuit(
                &circuit,
                &ProductInput::depolarized(&bases, gamma).unwrap(),
            )
            .unwrap();
            let v = f3(&rho, a, b).unwrap();
            assert!(v <= -c3 + 1e-9, "γ={gamma}: f3={v} vs -C3={}", -c3);
            checked += 1;
        }
        assert!(checked >= 1);

        // with γ_L = γ₅/L^{1/3}, the p₅ threshold coexists with a global
        // entropy growing like L^{2/3}
        let gamma5 = report.gamma5.unwrap();
        for l in [6usize, 9, 12] {
            let gamma_l = (gamma5 / (l as f64).cbrt()).min(0.5);
            let circ = sample_random_circuit(l, 2, 36).unwrap();
            let b = random_site_bases(l, 37);
            let rho =
                apply_circuit(&circ, &ProductInput::depolarized(&b, gamma_l).unwrap()).unwrap();
            let s2 = -rho.purity().ln();
            assert!(
                s2 >= gamma5 * (l as f64).powf(2.0 / 3.0) - 1e-9,
                "L={l}: S2={s2}"
            );
        }
    }

    #[test]
    fn reflection_symmetric_circuit_commutes_with_reflection() {
        // build a depth-2 circuit on 4 qubits whose gates mirror onto each
        // other (g ↦ SWAP g SWAP) and check ρ is reflection invariant
        let mut rng = ChaCha12Rng::seed_from_u64(38);
        let swap = Mat::from_fn(4, 4, |i, j| {
            let swapped = ((j & 1) << 1) | (j >> 1);
            if i == swapped { ONE } else { ZERO }
        });
        let g = haar_unitary(4, &mut rng);
        let g_mirror = &swap * &g * &swap;
        // middle gate of the odd layer must be its own mirror image
        let h = haar_unitary(4, &mut rng);
        let h_sym_h = &h + &swap * &h * &swap; // Hermitianize under swap after adding adjoint
        let herm = (&h_sym_h + h_sym_h.adjoint()) * faer::Scale(Complex64::new(0.25, 0.0));
        let (vals, vecs) = linalg::eigh(&herm).unwrap();
        let phases = Mat::from_fn(4, 4, |i, j| {
            if i == j { Complex64::new(0.0, vals[i]).exp() } else { ZERO }
        });
        let g_mid = &vecs * phases * vecs.adjoint();
        let layers = vec![
            vec![(0usize, g.clone()), (2usize, g_mirror.clone())],
            vec![(1usize, g_mid)],
        ];
        let circuit = BrickworkCircuit::from_layers(4, layers).unwrap();
        let sigma = {
            let mut rng2 = ChaCha12Rng::seed_from_u64(40);
            let b = SiteBasis::random(&mut rng2);
            ProductInput::depolarized(&[b.clone(), b.clone(), b.clone(), b], 0.3).unwrap()
        };
        let rho = apply_circuit(&circuit, &sigma).unwrap();
        // reflection = reversing the qubit order = reversing bit order of indices
        let l = 4;
        let reflect = |r: usize| (0..l).fold(0usize, |acc, q| (acc << 1) | ((r >> q) & 1));
        let reflected = Mat::from_fn(rho.dim(), rho.dim(), |i, j| {
            rho.matrix()[(reflect(i), reflect(j))]
        });
        assert!(linalg::max_abs_diff(&reflected, rho.matrix()) < 1e-10);
    }
}
