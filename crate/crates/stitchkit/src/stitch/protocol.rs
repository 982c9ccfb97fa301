//! End-to-end estimation runs: simulate independent per-region measurement
//! batches, apply the single-region estimators, and stitch. Used by the CLI,
//! the consistency check and the acceptance suite.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    make_partition, stitched_f3, stitched_purity, PtEstimateBundle, StitchedEstimate, StitchPlan,
};
use crate::dense::{DenseOperator, Interval};
use crate::error::{Error, Result};
use crate::seeds::SeedTree;
use crate::shadows::{
    estimate_moment, estimate_pt_moment, estimate_purity, simulate_batch, Scheme, StateBackend,
};

#[derive(Clone, Debug, Serialize)]
pub struct PurityProtocolResult {
    pub plan: StitchPlan,
    pub pair_estimates: Vec<f64>,
    pub interior_estimates: Vec<f64>,
    pub stitched: StitchedEstimate,
    /// exact global purity of the simulated state, for error reporting
    pub exact: f64,
    pub relative_error: f64,
}

/// Steps 2-4 of the purity protocol on a dense state: per-region shadow
/// batches with disjoint seed streams, pair/interior purity estimates, and
/// the stitched global value.
pub fn run_purity_protocol(
    rho: &DenseOperator,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<PurityProtocolResult> {
    run_purity_protocol_with(rho, make_partition(rho.n_qubits(), k)?, m, seed)
}

/// As [`run_purity_protocol`] but over a caller-supplied partition (covering
/// partitions allow buffer sizes that do not divide the chain).
pub fn run_purity_protocol_with(
    rho: &DenseOperator,
    partition: super::IntervalPartition,
    m: usize,
    seed: u64,
) -> Result<PurityProtocolResult> {
    let plan = StitchPlan::new(partition, m, seed);
    let estimates: Vec<f64> = plan
        .region_seeds
        .par_iter()
        .map(|&(region, region_seed)| {
            let batch = simulate_batch(
                &StateBackend::Dense(rho),
                region,
                m,
                Scheme::Shadow,
                region_seed,
            )?;
            estimate_purity(&batch, region)
        })
        .collect::<Result<_>>()?;
    let n_pairs = plan.partition.pairs().len();
    let (pair_estimates, interior_estimates) = estimates.split_at(n_pairs);
    let stitched = stitched_purity(pair_estimates, interior_estimates)?;
    let exact = rho.purity();
    Ok(PurityProtocolResult {
        pair_estimates: pair_estimates.to_vec(),
        interior_estimates: interior_estimates.to_vec(),
        relative_error: (stitched.value / exact - 1.0).abs(),
        stitched,
        exact,
        plan,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct F3ProtocolResult {
    /// estimated normalized PT moments `s_n⁽ᵉ⁾` for n = 1, 2, 3
    pub s_estimates: Vec<f64>,
    /// stitched subsystem moments of the two halves, n = 1, 2, 3
    pub moments_a: Vec<f64>,
    pub moments_b: Vec<f64>,
    pub f3: f64,
    pub exact_f3: f64,
}

/// Estimate `f₃` of the half-chain bipartition: the normalized PT moments
/// come from buffered regions of size `k` around the cut, the subsystem
/// moments from moment-stitching over each half. Every region uses its own
/// measurement batch.
pub fn run_f3_protocol(
    rho: &DenseOperator,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<F3ProtocolResult> {
    let l = rho.n_qubits();
    if l % 2 != 0 {
        return Err(Error::Precondition("f₃ protocol needs an even chain".into()));
    }
    let half = l / 2;
    if 2 * k > half {
        return Err(Error::Precondition(format!(
            "buffer size {k} too large: need 2k ≤ L/2 = {half}"
        )));
    }
    let tree = SeedTree::new(seed);
    let a2 = Interval::new(half - k, k);
    let b1 = Interval::new(half, k);
    let pt_region = a2.join(&b1)?;

    // three independent batches for the PT part, per the protocol
    let pt_batch = simulate_batch(
        &StateBackend::Dense(rho),
        pt_region,
        m,
        Scheme::Shadow,
        tree.child(0).value(),
    )?;
    let a2_batch = simulate_batch(
        &StateBackend::Dense(rho),
        a2,
        m,
        Scheme::Shadow,
        tree.child(1).value(),
    )?;
    let b1_batch = simulate_batch(
        &StateBackend::Dense(rho),
        b1,
        m,
        Scheme::Shadow,
        tree.child(2).value(),
    )?;
    let mut s_estimates = vec![1.0]; // s₁ = 1 identically
    for n in 2..=3u32 {
        let p = estimate_pt_moment(&pt_batch, a2, b1, n)?;
        let ma = estimate_moment(&a2_batch, a2, n)?;
        let mb = estimate_moment(&b1_batch, b1, n)?;
        s_estimates.push(super::stitched_pt(p, ma, mb)?);
    }

    // stitched moments of each half via the moment analog of the purity
    // factorization: one batch per region, shared across moment orders
    let stitch_half = |offset: usize, tag: u64| -> Result<Vec<f64>> {
        let partition = super::make_covering_partition(half, k)?;
        let sub_tree = tree.child(tag);
        let mut moments = vec![1.0]; // n = 1
        let mut region_estimates: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![], vec![]); 2];
        for (idx, region) in partition
            .pairs()
            .into_iter()
            .chain(partition.interiors())
            .enumerate()
        {
            let shifted = Interval::new(region.start + offset, region.len);
            let batch = simulate_batch(
                &StateBackend::Dense(rho),
                shifted,
                m,
                Scheme::Shadow,
                sub_tree.child(idx as u64).value(),
            )?;
            let is_pair = idx < partition.pairs().len();
            for (slot, n) in (2..=3u32).enumerate() {
                let est = estimate_moment(&batch, shifted, n)?;
                if is_pair {
                    region_estimates[slot].0.push(est);
                } else {
                    region_estimates[slot].1.push(est);
                }
            }
        }
        for (pairs, interiors) in &region_estimates {
            moments.push(stitched_purity(pairs, interiors)?.value);
        }
        Ok(moments)
    };
    let moments_a = stitch_half(0, 3)?;
    let moments_b = stitch_half(half, 4)?;

    let bundle = PtEstimateBundle {
        p_tilde: s_estimates.clone(),
        moments_a: moments_a.clone(),
        moments_b: moments_b.clone(),
    };
    let f3 = stitched_f3(&bundle)?;
    let exact_f3 =
        crate::dense::f3(rho, Interval::new(0, half), Interval::new(half, half))?;
    Ok(F3ProtocolResult { s_estimates, moments_a, moments_b, f3, exact_f3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{apply_circuit, random_site_bases, sample_random_circuit, ProductInput};

    #[test]
    fn purity_protocol_converges_on_small_fdqc() {
        let l = 6;
        let circuit = sample_random_circuit(l, 1, 131).unwrap();
        let bases = random_site_bases(l, 132);
        let rho =
            apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.25).unwrap()).unwrap();
        let result = run_purity_protocol(&rho, 1, 20_000, 133).unwrap();
        assert!(result.stitched.is_reliable());
        assert!(
            result.relative_error < 0.25,
            "relative error {}",
            result.relative_error
        );
        // reproducibility
        let again = run_purity_protocol(&rho, 1, 20_000, 133).unwrap();
        assert_eq!(result.stitched.value, again.stitched.value);
    }

    #[test]
    fn f3_protocol_tracks_exact_value_on_fdqc() {
        let l = 8;
        let circuit = sample_random_circuit(l, 2, 134).unwrap();
        let bases = random_site_bases(l, 135);
        let rho =
            apply_circuit(&circuit, &ProductInput::depolarized(&bases, 0.1).unwrap()).unwrap();
        let result = run_f3_protocol(&rho, 2, 30_000, 136).unwrap();
        assert!(
            (result.f3 - result.exact_f3).abs() < 0.3,
            "estimate {} vs exact {}",
            result.f3,
            result.exact_f3
        );
        assert!(run_f3_protocol(&rho, 3, 100, 1).is_err());
    }
}
