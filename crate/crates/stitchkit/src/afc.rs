//! Numerical factorization-error studies: relative-error and additive-error
//! scans over the buffer size, the minimal buffer `k*`, PPT phase scans over
//! temperature and size, and the ansatz consistency check.

use serde::Serialize;

use crate::dense::{partial_trace, s_ratio, DenseOperator, Interval, PtProbe};
use crate::error::{Error, Result};
use crate::stitch::{
    afc_required_k, make_covering_partition, run_purity_protocol_with, stitched_purity,
};
use crate::tn::Mpo;

/// Values at or below this are reported as limited by numerical precision and
/// excluded from decay-rate reasoning.
pub const NUMERICAL_FLOOR: f64 = 1e-12;

/// One scan point, CSV-ready.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRecord {
    pub model: String,
    pub h_x: Option<f64>,
    pub h_z: Option<f64>,
    pub delta_aniso: Option<f64>,
    pub beta: Option<f64>,
    pub l: usize,
    pub k: usize,
    pub chi: Option<usize>,
    pub epsilon_r: Option<f64>,
    pub epsilon_a: Option<f64>,
    pub f3: Option<f64>,
    pub f5: Option<f64>,
    pub floor_flag: bool,
}

impl ScanRecord {
    pub fn csv_header() -> &'static str {
        "model,hx,hz,delta_aniso,beta,L,k,chi,epsilon_r,epsilon_a,f3,f5,floor_flag"
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            opt(&self.h_x),
            opt(&self.h_z),
            opt(&self.delta_aniso),
            opt(&self.beta),
            self.l,
            self.k,
            opt(&self.chi),
            opt(&self.epsilon_r),
            opt(&self.epsilon_a),
            opt(&self.f3),
            opt(&self.f5),
            self.floor_flag,
        )
    }
}

pub fn write_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from(ScanRecord::csv_header());
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Metadata describing where a scanned state came from.
#[derive(Clone, Debug, Default)]
pub struct ModelTag {
    pub model: String,
    pub h_x: Option<f64>,
    pub h_z: Option<f64>,
    pub delta_aniso: Option<f64>,
    pub beta: Option<f64>,
}

/// A state a scan can interrogate: exact dense matrix, or a thermal MPO with
/// a lower-bond-dimension companion for the convergence check.
pub enum ScanTarget {
    Dense(DenseOperator),
    Mpo { mpo: Mpo, chi: usize, check: Option<Mpo> },
}

impl ScanTarget {
    pub fn chain_length(&self) -> usize {
        match self {
            ScanTarget::Dense(rho) => rho.n_qubits(),
            ScanTarget::Mpo { mpo, .. } => mpo.len(),
        }
    }

    fn chi(&self) -> Option<usize> {
        match self {
            ScanTarget::Dense(_) => None,
            ScanTarget::Mpo { chi, .. } => Some(*chi),
        }
    }

    fn interval_purity(&self, region: Interval) -> Result<f64> {
        match self {
            ScanTarget::Dense(rho) => Ok(partial_trace(rho, region)?.purity()),
            ScanTarget::Mpo { mpo, .. } => mpo.trace_power(region, 2),
        }
    }

    fn global_purity(&self) -> Result<f64> {
        match self {
            ScanTarget::Dense(rho) => Ok(rho.purity()),
            ScanTarget::Mpo { mpo, .. } => {
                mpo.trace_power(Interval::new(0, mpo.len()), 2)
            }
        }
    }

    /// `p̃₃[AB]` for the half-chain bipartition.
    fn normalized_pt3(&self) -> Result<f64> {
        let l = self.chain_length();
        let a = Interval::new(0, l / 2);
        let b = Interval::new(l / 2, l - l / 2);
        match self {
            ScanTarget::Dense(rho) => PtProbe::new(rho, a, b)?.p_tilde(3),
            ScanTarget::Mpo { mpo, .. } => {
                let p3 = mpo.pt_moment(a, b, 3)?;
                let pa = mpo.trace_power(a, 3)?;
                let pb = mpo.trace_power(b, 3)?;
                Ok(p3 / (pa * pb))
            }
        }
    }

    /// `s₃[A₂B₁]` for buffers of size `k` around the central cut.
    fn s3_inner(&self, k: usize) -> Result<f64> {
        let l = self.chain_length();
        let a2 = Interval::new(l / 2 - k, k);
        let b1 = Interval::new(l / 2, k);
        match self {
            ScanTarget::Dense(rho) => {
                let reduced = partial_trace(rho, a2.join(&b1)?)?;
                s_ratio(&reduced, Interval::new(0, k), 3)
            }
            ScanTarget::Mpo { mpo, .. } => {
                let p3 = mpo.pt_moment(a2, b1, 3)?;
                let pa = mpo.trace_power(a2, 3)?;
                let pb = mpo.trace_power(b1, 3)?;
                Ok(p3 / (pa * pb))
            }
        }
    }

    /// For the MPO backend, evaluate `f` on the production and check bond
    /// dimensions and demand 1e-8 agreement before emitting a value.
    fn converged<F: Fn(&ScanTarget) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let value = f(self)?;
        if let ScanTarget::Mpo { check: Some(check), chi, .. } = self {
            let lower = ScanTarget::Mpo { mpo: check.clone(), chi: *chi, check: None };
            let check_value = f(&lower)?;
            if (value - check_value).abs() > 1e-8 {
                return Err(Error::Convergence(format!(
                    "bond-dimension check failed: {value:.12e} vs {check_value:.12e}"
                )));
            }
        }
        Ok(value)
    }
}

/// Exact stitched ratio `r₂(k)` from interval purities over a covering
/// partition (the last interval may be shorter when `k ∤ L`).
pub fn exact_r2(target: &ScanTarget, k: usize) -> Result<f64> {
    let partition = make_covering_partition(target.chain_length(), k)?;
    let pairs: Result<Vec<f64>> =
        partition.pairs().iter().map(|&p| target.interval_purity(p)).collect();
    let interiors: Result<Vec<f64>> =
        partition.interiors().iter().map(|&p| target.interval_purity(p)).collect();
    Ok(stitched_purity(&pairs?, &interiors?)?.value)
}

/// `ε_r(k) = |r₂(k)/P₂ - 1|` for each `k` in the list.
pub fn relative_error_scan(
    target: &ScanTarget,
    tag: &ModelTag,
    k_list: &[usize],
) -> Result<Vec<ScanRecord>> {
    let l = target.chain_length();
    let p2 = target.converged(|t| t.global_purity())?;
    k_list
        .iter()
        .map(|&k| {
            let eps = target.converged(|t| Ok((exact_r2(t, k)? / p2 - 1.0).abs()))?;
            Ok(ScanRecord {
                model: tag.model.clone(),
                h_x: tag.h_x,
                h_z: tag.h_z,
                delta_aniso: tag.delta_aniso,
                beta: tag.beta,
                l,
                k,
                chi: target.chi(),
                epsilon_r: Some(eps),
                epsilon_a: None,
                f3: None,
                f5: None,
                floor_flag: eps <= NUMERICAL_FLOOR,
            })
        })
        .collect()
}

/// Minimal scanned `k ≤ L/2` with `ε_r < δ`.
pub fn k_star(records: &[ScanRecord], delta: f64) -> Option<usize> {
    records
        .iter()
        .filter(|r| r.k <= r.l / 2)
        .filter(|r| r.epsilon_r.is_some_and(|e| e < delta))
        .map(|r| r.k)
        .min()
}

/// `ε_a(k) = |p̃₃[AB] - s₃[A₂B₁]|` for each `k`; the partition is infeasible
/// when `2k > L/2`.
pub fn additive_error_scan(
    target: &ScanTarget,
    tag: &ModelTag,
    k_list: &[usize],
) -> Result<Vec<ScanRecord>> {
    let l = target.chain_length();
    if l % 2 != 0 {
        return Err(Error::Precondition("additive-error scan needs an even chain".into()));
    }
    let p_tilde = target.converged(|t| t.normalized_pt3())?;
    k_list
        .iter()
        .map(|&k| {
            if 2 * k > l / 2 {
                return Err(Error::InvalidPartition(format!(
                    "buffer {k} infeasible: 2k > L/2 = {}",
                    l / 2
                )));
            }
            let eps = target.converged(|t| Ok((t.s3_inner(k)? - p_tilde).abs()))?;
            Ok(ScanRecord {
                model: tag.model.clone(),
                h_x: tag.h_x,
                h_z: tag.h_z,
                delta_aniso: tag.delta_aniso,
                beta: tag.beta,
                l,
                k,
                chi: target.chi(),
                epsilon_r: None,
                epsilon_a: Some(eps),
                f3: None,
                f5: None,
                floor_flag: eps <= NUMERICAL_FLOOR,
            })
        })
        .collect()
}

/// One point of the PPT phase scan.
#[derive(Clone, Debug, Serialize)]
pub struct PptPoint {
    pub beta: f64,
    pub l: usize,
    pub f3: f64,
    pub f5: f64,
    pub detect3: bool,
    pub detect5: bool,
}

/// `f₃`, `f₅` of the half-chain bipartition of Gibbs states over a `β × L`
/// grid, with detection thresholds `f_n ≤ -C_n`. One Hamiltonian
/// diagonalization is shared across the temperature axis.
pub fn ppt_phase_scan(
    spec: crate::tn::HamiltonianSpec,
    beta_list: &[f64],
    l_list: &[usize],
    c3: f64,
    c5: f64,
) -> Result<Vec<PptPoint>> {
    let mut out = Vec::new();
    for &l in l_list {
        let h = spec.dense(l)?;
        let (vals, vecs) = crate::linalg::eigh(h.matrix())?;
        let a = Interval::new(0, l / 2);
        let b = Interval::new(l / 2, l - l / 2);
        for &beta in beta_list {
            let rho = DenseOperator::from_matrix(
                l,
                crate::dense::gibbs_from_spectrum(&vals, &vecs, beta),
            )?;
            let probe = PtProbe::new(&rho, a, b)?;
            let f3 = probe.f3()?;
            let f5 = probe.f5()?;
            out.push(PptPoint {
                beta,
                l,
                f3,
                f5,
                detect3: f3 <= -c3,
                detect5: f5 <= -c5,
            });
        }
    }
    Ok(out)
}

/// Default thresholds of the phase plots.
pub const DEFAULT_C3: f64 = 0.01;
pub const DEFAULT_C5: f64 = 0.001;

#[derive(Clone, Debug, Serialize)]
pub struct RedFlagEntry {
    pub alpha2: f64,
    pub xi2: f64,
    pub k: usize,
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RedFlagReport {
    pub entries: Vec<RedFlagEntry>,
    /// pairs of successive entries whose estimates disagree beyond 2δ
    pub inconsistent_steps: Vec<usize>,
    pub flagged: bool,
}

/// How the consistency check obtains its per-ansatz purity estimates.
pub enum RedFlagMode {
    /// exact interval purities (isolates the factorization error)
    Exact,
    /// full simulated protocol with `m` rounds per region
    Sampled { m: usize, seed: u64 },
}

/// Repeat the purity estimation with increasing ansatz values `(α₂, ξ₂)` and
/// flag the run when successive estimates move by more than the combined
/// expected precision `2δ`. A flag signals that the factorization ansatz is
/// inconsistent with the state.
pub fn afc_red_flag_check(
    rho: &DenseOperator,
    ansatz: &[(f64, f64)],
    delta: f64,
    mode: RedFlagMode,
) -> Result<RedFlagReport> {
    let l = rho.n_qubits();
    let mut entries = Vec::new();
    for &(alpha2, xi2) in ansatz {
        let k = afc_required_k(alpha2, xi2, l as u32, delta)?.min(l / 2).max(1);
        let estimate = match &mode {
            RedFlagMode::Exact => exact_r2(&ScanTarget::Dense(rho.clone()), k)?,
            RedFlagMode::Sampled { m, seed } => {
                let partition = make_covering_partition(l, k)?;
                run_purity_protocol_with(rho, partition, *m, *seed)?.stitched.value
            }
        };
        entries.push(RedFlagEntry { alpha2, xi2, k, estimate });
    }
    let mut inconsistent_steps = Vec::new();
    for (idx, pair) in entries.windows(2).enumerate() {
        let rel = (pair[0].estimate / pair[1].estimate - 1.0).abs();
        if rel > 2.0 * delta {
            inconsistent_steps.push(idx);
        }
    }
    Ok(RedFlagReport { flagged: !inconsistent_steps.is_empty(), entries, inconsistent_steps })
}

/// Simple log-linear decay-rate fit of `ε(k)` for reporting, ignoring
/// floor-limited points.
pub fn decay_rate_fit(records: &[ScanRecord]) -> Option<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| !r.floor_flag)
        .filter_map(|r| {
            let e = r.epsilon_r.or(r.epsilon_a)?;
            (e > 0.0).then(|| (r.k as f64, e.ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(-slope)
}
