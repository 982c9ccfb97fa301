//! Partition bookkeeping and the stitched global estimators: products of
//! overlapping-pair estimates divided by interior estimates, assembled in the
//! log domain because global purities are exponentially small in the chain
//! length.

mod bounds;
mod protocol;

pub use bounds::{
    afc_required_k, afc_required_m, confidence_m_purity_fdqc, required_m_pt3_fdqc,
    required_m_purity_fdqc,
};
pub use protocol::{
    run_f3_protocol, run_purity_protocol, run_purity_protocol_with, F3ProtocolResult,
    PurityProtocolResult,
};

use serde::{Deserialize, Serialize};

use crate::dense::Interval;
use crate::error::{Error, Result};

/// A chain of length `l` split into `R = l/k` adjacent intervals of size `k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalPartition {
    l: usize,
    k: usize,
    intervals: Vec<Interval>,
}

/// Strict partition: `k` must divide `l`.
pub fn make_partition(l: usize, k: usize) -> Result<IntervalPartition> {
    if k == 0 || k > l {
        return Err(Error::InvalidPartition(format!("interval size {k} out of range for L={l}")));
    }
    if l % k != 0 {
        return Err(Error::InvalidPartition(format!(
            "interval size {k} does not divide the chain length {l}"
        )));
    }
    Ok(IntervalPartition {
        l,
        k,
        intervals: (0..l / k).map(|j| Interval::new(j * k, k)).collect(),
    })
}

/// Covering partition for scans: `R = ceil(l/k)` intervals, the last one
/// shorter when `k` does not divide `l`.
pub fn make_covering_partition(l: usize, k: usize) -> Result<IntervalPartition> {
    if k == 0 || k > l {
        return Err(Error::InvalidPartition(format!("interval size {k} out of range for L={l}")));
    }
    let mut intervals = Vec::new();
    let mut start = 0;
    while start < l {
        let len = k.min(l - start);
        intervals.push(Interval::new(start, len));
        start += len;
    }
    Ok(IntervalPartition { l, k, intervals })
}

impl IntervalPartition {
    pub fn chain_length(&self) -> usize {
        self.l
    }

    pub fn interval_size(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// The `R-1` overlapping pairs `Iⱼ ∪ Iⱼ₊₁`.
    pub fn pairs(&self) -> Vec<Interval> {
        self.intervals
            .windows(2)
            .map(|w| w[0].join(&w[1]).expect("adjacent by construction"))
            .collect()
    }

    /// The `R-2` interior intervals `I₂ … I_{R-1}`; the boundary intervals
    /// never enter a stitched denominator.
    pub fn interiors(&self) -> Vec<Interval> {
        if self.intervals.len() < 3 {
            return Vec::new();
        }
        self.intervals[1..self.intervals.len() - 1].to_vec()
    }
}

/// Measurement allocation for one stitched run: the partition, the per-region
/// round count and the derived per-region seeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StitchPlan {
    pub partition: IntervalPartition,
    pub m_per_region: usize,
    pub master_seed: u64,
    pub region_seeds: Vec<(Interval, u64)>,
}

impl StitchPlan {
    pub fn new(partition: IntervalPartition, m_per_region: usize, master_seed: u64) -> Self {
        let tree = crate::seeds::SeedTree::new(master_seed);
        let mut region_seeds = Vec::new();
        for (idx, pair) in partition.pairs().into_iter().enumerate() {
            region_seeds.push((pair, tree.child(idx as u64).value()));
        }
        let offset = partition.pairs().len() as u64;
        for (idx, interior) in partition.interiors().into_iter().enumerate() {
            region_seeds.push((interior, tree.child(offset + idx as u64).value()));
        }
        StitchPlan { partition, m_per_region, master_seed, region_seeds }
    }

    /// `M_T = Σ_I M_I`.
    pub fn total_measurements(&self) -> usize {
        self.m_per_region * self.region_seeds.len()
    }
}

/// A stitched value with its quality flag. Statistical inputs can be
/// negative at small `M`; the magnitude is then assembled from absolute
/// values and `negative_inputs` reports how many signs were dropped.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StitchedEstimate {
    pub value: f64,
    pub negative_inputs: usize,
}

impl StitchedEstimate {
    pub fn is_reliable(&self) -> bool {
        self.negative_inputs == 0
    }

    /// Magnitude of the stitched product, for callers that opt in to
    /// absolute-value stitching.
    pub fn magnitude(&self) -> f64 {
        self.value.abs()
    }
}

/// `r₂ = Π pair / Π interior`, accumulated in the log domain. Expects
/// `pairs.len() == interiors.len() + 1` (an `R`-interval partition gives
/// `R-1` pairs and `R-2` interiors).
pub fn stitched_purity(pairs: &[f64], interiors: &[f64]) -> Result<StitchedEstimate> {
    if pairs.len() != interiors.len() + 1 {
        return Err(Error::InvalidPartition(format!(
            "{} pair estimates cannot match {} interior estimates",
            pairs.len(),
            interiors.len()
        )));
    }
    let mut log_mag = 0.0f64;
    let mut sign = 1.0f64;
    let mut negative_inputs = 0usize;
    for &p in pairs {
        if p == 0.0 {
            return Err(Error::Precondition("zero pair estimate".into()));
        }
        if p < 0.0 {
            negative_inputs += 1;
            sign = -sign;
        }
        log_mag += p.abs().ln();
    }
    for &q in interiors {
        if q == 0.0 {
            return Err(Error::Precondition("zero interior estimate in the denominator".into()));
        }
        if q < 0.0 {
            negative_inputs += 1;
            sign = -sign;
        }
        log_mag -= q.abs().ln();
    }
    Ok(StitchedEstimate { value: sign * log_mag.exp(), negative_inputs })
}

/// `S₂ = Σ S₂(pairs) - Σ S₂(interiors)`; identically `-log(stitched_purity)`
/// on consistent inputs.
pub fn stitched_renyi2(pair_entropies: &[f64], interior_entropies: &[f64]) -> f64 {
    pair_entropies.iter().sum::<f64>() - interior_entropies.iter().sum::<f64>()
}

/// `s_n⁽ᵉ⁾ = p_n⁽ᵉ⁾[A₂B₁] / (P_n⁽ᵉ⁾[A₂]·P_n⁽ᵉ⁾[B₁])`.
pub fn stitched_pt(p_n_estimate: f64, moment_a2: f64, moment_b1: f64) -> Result<f64> {
    let denom = moment_a2 * moment_b1;
    if denom == 0.0 {
        return Err(Error::Precondition("zero moment in the stitched PT denominator".into()));
    }
    Ok(p_n_estimate / denom)
}

/// Estimated normalized PT moments `p̃₁…` and stitched subsystem moments
/// `P₁[A]…`, `P₁[B]…`, indexed by the moment order (entry 0 ↔ n = 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PtEstimateBundle {
    pub p_tilde: Vec<f64>,
    pub moments_a: Vec<f64>,
    pub moments_b: Vec<f64>,
}

impl PtEstimateBundle {
    fn get(&self, list: &[f64], n: u32) -> Result<f64> {
        list.get(n as usize - 1).copied().ok_or_else(|| {
            Error::Precondition(format!("bundle does not carry moment order {n}"))
        })
    }

    pub fn p_tilde(&self, n: u32) -> Result<f64> {
        self.get(&self.p_tilde, n)
    }

    pub fn moment_a(&self, n: u32) -> Result<f64> {
        self.get(&self.moments_a, n)
    }

    pub fn moment_b(&self, n: u32) -> Result<f64> {
        self.get(&self.moments_b, n)
    }
}

/// `f₃ = p̃₃p̃₁ - p̃₂²·P₂²[A]P₂²[B] / (P₁[A]P₁[B]P₃[A]P₃[B])` from estimates.
pub fn stitched_f3(bundle: &PtEstimateBundle) -> Result<f64> {
    let ratio = bundle.moment_a(2)?.powi(2) * bundle.moment_b(2)?.powi(2)
        / (bundle.moment_a(1)? * bundle.moment_b(1)? * bundle.moment_a(3)? * bundle.moment_b(3)?);
    Ok(bundle.p_tilde(3)? * bundle.p_tilde(1)? - bundle.p_tilde(2)?.powi(2) * ratio)
}

/// `f₅ = p̃₅p̃₃ - p̃₄²·P₄²[A]P₄²[B] / (P₃[A]P₃[B]P₅[A]P₅[B])` from estimates.
pub fn stitched_f5(bundle: &PtEstimateBundle) -> Result<f64> {
    let ratio = bundle.moment_a(4)?.powi(2) * bundle.moment_b(4)?.powi(2)
        / (bundle.moment_a(3)? * bundle.moment_b(3)? * bundle.moment_a(5)? * bundle.moment_b(5)?);
    Ok(bundle.p_tilde(5)? * bundle.p_tilde(3)? - bundle.p_tilde(4)?.powi(2) * ratio)
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
