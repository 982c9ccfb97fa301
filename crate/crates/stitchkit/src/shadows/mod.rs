//! Randomized-measurement simulation and classical-shadow estimators: local
//! Haar unitaries followed by projective measurements, per-round shadow
//! matrices, and the U-statistic moment estimators with their variance
//! bounds.

mod estimators;
mod io;

pub use estimators::{
    estimate_moment, estimate_observable, estimate_pt_moment, estimate_purity, hamming_purity,
    p3_variance_bound, purity_variance_bound,
};
pub use io::{load_batch, save_batch};

use faer::{c64, Mat};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{partial_trace, DenseOperator, Interval};
use crate::error::{Error, Result};
use crate::linalg::{self, haar_unitary};
use crate::seeds::SeedTree;
use crate::tn::{perfect_sample, Mps};

/// Measurement allocation scheme. `Shadow` draws fresh unitaries every round
/// (`n_M = 1`); `Reuse` repeats each of `n_u` random unitaries for `n_m`
/// projective measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Shadow,
    Reuse { n_u: usize, n_m: usize },
}

/// One randomized-measurement round on a region: the sampled on-site
/// unitaries and the observed outcome bits.
#[derive(Clone, Debug)]
pub struct ShadowRecord {
    pub round: usize,
    pub unitaries: Vec<Mat<c64>>,
    pub outcome: Vec<u8>,
}

/// A seeded collection of rounds for one region.
#[derive(Clone, Debug)]
pub struct MeasurementBatch {
    pub region: Interval,
    pub scheme: Scheme,
    pub seed: u64,
    pub records: Vec<ShadowRecord>,
}

impl MeasurementBatch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Haar-random single-qubit unitary, deterministic per seed.
pub fn sample_haar_qubit_unitary(seed: u64) -> Mat<c64> {
    haar_unitary(2, &mut SeedTree::new(seed).rng())
}

/// The state being measured. The dense backend handles mixed states up to 14
/// qubits; the MPS backend handles pure states via perfect sampling.
pub enum StateBackend<'a> {
    Dense(&'a DenseOperator),
    Mps(&'a Mps),
}

/// Simulate `m` randomized-measurement rounds on `region`. Outcomes follow
/// the Born distribution of `(⊗uⱼ)ρ(⊗uⱼ)†` marginalized to the region; the
/// dense backend computes the marginal probabilities exactly and samples
/// from them, the MPS backend runs the perfect-sampling algorithm.
pub fn simulate_batch(
    backend: &StateBackend<'_>,
    region: Interval,
    m: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<MeasurementBatch> {
    if let Scheme::Reuse { n_u, n_m } = scheme {
        if n_u * n_m != m {
            return Err(Error::Precondition(format!(
                "reuse scheme needs n_u·n_m = M; got {n_u}·{n_m} ≠ {m}"
            )));
        }
    }
    let tree = SeedTree::new(seed);
    let records = match backend {
        StateBackend::Dense(rho) => {
            region.validate(rho.n_qubits())?;
            let marginal = partial_trace(rho, region)?;
            simulate_dense_rounds(&marginal, region.len, m, scheme, tree)
        }
        StateBackend::Mps(mps) => {
            region.validate(mps.len())?;
            simulate_mps_rounds(mps, region, m, scheme, tree)?
        }
    };
    Ok(MeasurementBatch { region, scheme, seed, records })
}

fn draw_unitaries(sites: usize, tree: SeedTree) -> Vec<Mat<c64>> {
    (0..sites)
        .map(|j| haar_unitary(2, &mut tree.child(j as u64).rng()))
        .collect()
}

fn unitary_seed_for_round(scheme: Scheme, round: usize) -> u64 {
    match scheme {
        Scheme::Shadow => round as u64,
        Scheme::Reuse { n_m, .. } => (round / n_m) as u64,
    }
}

fn simulate_dense_rounds(
    marginal: &DenseOperator,
    sites: usize,
    m: usize,
    scheme: Scheme,
    tree: SeedTree,
) -> Vec<ShadowRecord> {
    let unitary_tree = tree.child(0);
    let outcome_tree = tree.child(1);
    (0..m)
        .map(|round| {
            let us = draw_unitaries(sites, unitary_tree.child(unitary_seed_for_round(scheme, round)));
            let mut rotated = marginal.clone();
            for (q, u) in us.iter().enumerate() {
                rotated.apply_single_qubit_unitary(q, u);
            }
            let mut rng = outcome_tree.child(round as u64).rng();
            let x: f64 = rng.random();
            let outcome = sample_from_diagonal(rotated.matrix(), x);
            let bits = (0..sites).map(|q| ((outcome >> (sites - 1 - q)) & 1) as u8).collect();
            ShadowRecord { round, unitaries: us, outcome: bits }
        })
        .collect()
}

fn sample_from_diagonal(rho: &Mat<c64>, x: f64) -> usize {
    let dim = rho.nrows();
    let total: f64 = (0..dim).map(|i| rho[(i, i)].re.max(0.0)).sum();
    let mut acc = 0.0;
    for i in 0..dim {
        acc += rho[(i, i)].re.max(0.0) / total;
        if x < acc {
            return i;
        }
    }
    dim - 1
}

fn simulate_mps_rounds(
    mps: &Mps,
    region: Interval,
    m: usize,
    scheme: Scheme,
    tree: SeedTree,
) -> Result<Vec<ShadowRecord>> {
    let unitary_tree = tree.child(0);
    let outcome_tree = tree.child(1);
    let identity = linalg::identity(2);
    (0..m)
        .map(|round| {
            let us = draw_unitaries(
                region.len,
                unitary_tree.child(unitary_seed_for_round(scheme, round)),
            );
            // unitaries act on the region, identities elsewhere
            let full: Vec<Mat<c64>> = (0..mps.len())
                .map(|site| {
                    if region.contains(site) {
                        us[site - region.start].clone()
                    } else {
                        identity.clone()
                    }
                })
                .collect();
            let mut rng = outcome_tree.child(round as u64).rng();
            let bits = perfect_sample(mps, &full, &mut rng)?;
            let outcome = bits[region.start..region.end()].to_vec();
            Ok(ShadowRecord { round, unitaries: us, outcome })
        })
        .collect()
}

/// Per-site shadow factor `3u†|k⟩⟨k|u - I`.
pub(crate) fn site_shadow(u: &Mat<c64>, k: u8) -> Mat<c64> {
    let k = k as usize;
    Mat::from_fn(2, 2, |i, j| {
        let projector = u[(k, i)].conj() * u[(k, j)] * 3.0;
        if i == j { projector - 1.0 } else { projector }
    })
}

/// The classical shadow `⊗ᵢ[3uᵢ†|kᵢ⟩⟨kᵢ|uᵢ - I]` restricted to `sub`
/// (an interval of the batch region, in absolute qubit coordinates).
pub fn shadow_matrix(record: &ShadowRecord, region: Interval, sub: Interval) -> Result<DenseOperator> {
    if sub.start < region.start || sub.end() > region.end() {
        return Err(Error::IntervalOutOfRange {
            start: sub.start,
            len: sub.len,
            n_qubits: region.end(),
        });
    }
    let offset = sub.start - region.start;
    let mut out = Mat::from_fn(1, 1, |_, _| linalg::ONE);
    for j in offset..offset + sub.len {
        out = linalg::kron(&out, &site_shadow(&record.unitaries[j], record.outcome[j]));
    }
    DenseOperator::from_matrix(sub.len, out)
}
