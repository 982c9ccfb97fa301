//! Unbiased moment estimators from classical shadows. The U-statistics over
//! distinct index tuples are evaluated through power sums of the shadow
//! matrices, which is exactly equal to the naive tuple sums at a cost linear
//! in the number of rounds.

use faer::{c64, Mat};

use super::{site_shadow, MeasurementBatch, Scheme};
use crate::dense::{DenseOperator, Interval};
use crate::error::{Error, Result};
use crate::linalg::{self, trace_prod, ZERO};

/// Per-round factors on `sub`, optionally transposing the sites inside `transpose`.
fn record_factors(
    batch: &MeasurementBatch,
    sub: Interval,
    transpose: Option<Interval>,
    round: usize,
) -> Vec<Mat<c64>> {
    let record = &batch.records[round];
    (sub.start..sub.end())
        .map(|site| {
            let j = site - batch.region.start;
            let m = site_shadow(&record.unitaries[j], record.outcome[j]);
            match transpose {
                Some(t) if t.contains(site) => m.transpose().to_owned(),
                _ => m,
            }
        })
        .collect()
}

fn kron_all(factors: &[Mat<c64>]) -> Mat<c64> {
    let mut out = Mat::from_fn(1, 1, |_, _| linalg::ONE);
    for f in factors {
        out = linalg::kron(&out, f);
    }
    out
}

fn check_region(batch: &MeasurementBatch, sub: Interval) -> Result<()> {
    if sub.start < batch.region.start || sub.end() > batch.region.end() {
        return Err(Error::IntervalOutOfRange {
            start: sub.start,
            len: sub.len,
            n_qubits: batch.region.end(),
        });
    }
    Ok(())
}

/// `(1/M) Σ_r Tr[O ρ⁽ʳ⁾]` for an observable on the full batch region.
pub fn estimate_observable(batch: &MeasurementBatch, observable: &DenseOperator) -> Result<f64> {
    if observable.n_qubits() != batch.region.len {
        return Err(Error::Precondition(format!(
            "observable acts on {} qubits, region has {}",
            observable.n_qubits(),
            batch.region.len
        )));
    }
    if batch.is_empty() {
        return Err(Error::Precondition("empty batch".into()));
    }
    let mut acc = ZERO;
    for round in 0..batch.len() {
        let shadow = kron_all(&record_factors(batch, batch.region, None, round));
        acc += trace_prod(observable.matrix(), &shadow);
    }
    Ok(acc.re / batch.len() as f64)
}

/// Accumulated power sums of the (possibly partially transposed) shadows.
struct PowerSums {
    m: usize,
    /// `S = Σ A_r`
    s: Mat<c64>,
    /// `Σ A_r²` (only accumulated when `order ≥ 3`)
    s2: Option<Mat<c64>>,
    /// `Σ Tr[A_r²]`
    tr2: f64,
    /// `Σ Tr[A_r³]`
    tr3: f64,
}

fn accumulate(batch: &MeasurementBatch, sub: Interval, transpose: Option<Interval>, order: u32) -> PowerSums {
    let dim = 1usize << sub.len;
    let m = batch.len();
    let mut s = Mat::<c64>::zeros(dim, dim);
    let mut s2 = if order >= 3 { Some(Mat::<c64>::zeros(dim, dim)) } else { None };
    let mut tr2 = 0.0;
    let mut tr3 = 0.0;
    for round in 0..m {
        let factors = record_factors(batch, sub, transpose, round);
        let shadow = kron_all(&factors);
        for j in 0..dim {
            for i in 0..dim {
                s[(i, j)] += shadow[(i, j)];
            }
        }
        // traces of powers factorize over the tensor product
        tr2 += factors.iter().map(|f| trace_prod(f, f).re).product::<f64>();
        if let Some(acc2) = s2.as_mut() {
            let squares: Vec<Mat<c64>> = factors.iter().map(|f| f * f).collect();
            let sq = kron_all(&squares);
            for j in 0..dim {
                for i in 0..dim {
                    acc2[(i, j)] += sq[(i, j)];
                }
            }
            tr3 += factors
                .iter()
                .zip(&squares)
                .map(|(f, f2)| trace_prod(f2, f).re)
                .product::<f64>();
        }
    }
    PowerSums { m, s, s2, tr2, tr3 }
}

impl PowerSums {
    /// `Σ_{r≠r'} Tr[A_r A_{r'}] / (M(M-1))`
    fn pair_statistic(&self) -> f64 {
        let m = self.m as f64;
        let tr_s2 = trace_prod(&self.s, &self.s).re;
        (tr_s2 - self.tr2) / (m * (m - 1.0))
    }

    /// `Σ_{r₁≠r₂≠r₃} Tr[A_{r₁} A_{r₂} A_{r₃}] / (M(M-1)(M-2))`
    fn triple_statistic(&self) -> f64 {
        let m = self.m as f64;
        let s2 = self.s2.as_ref().expect("third-order sums not accumulated");
        let s_sq = &self.s * &self.s;
        let tr_s3 = trace_prod(&s_sq, &self.s).re;
        let tr_s2s = trace_prod(s2, &self.s).re;
        (tr_s3 - 3.0 * tr_s2s + 2.0 * self.tr3) / (m * (m - 1.0) * (m - 2.0))
    }
}

/// Unbiased purity estimator: the pair U-statistic over distinct rounds.
pub fn estimate_purity(batch: &MeasurementBatch, sub: Interval) -> Result<f64> {
    check_region(batch, sub)?;
    if batch.len() < 2 {
        return Err(Error::Precondition("purity estimation needs M ≥ 2".into()));
    }
    if matches!(batch.scheme, Scheme::Reuse { .. }) {
        return Err(Error::Precondition(
            "shadow estimators need the shadow scheme (n_M = 1)".into(),
        ));
    }
    Ok(accumulate(batch, sub, None, 2).pair_statistic())
}

/// Unbiased PT-moment estimator for `n ∈ {2, 3}` on adjacent intervals
/// `A`, `B` with the transpose applied to `A`.
pub fn estimate_pt_moment(batch: &MeasurementBatch, a: Interval, b: Interval, n: u32) -> Result<f64> {
    let sub = a.join(&b)?;
    check_region(batch, sub)?;
    if matches!(batch.scheme, Scheme::Reuse { .. }) {
        return Err(Error::Precondition(
            "shadow estimators need the shadow scheme (n_M = 1)".into(),
        ));
    }
    if batch.len() < n as usize {
        return Err(Error::Precondition(format!("PT moment of order {n} needs M ≥ {n}")));
    }
    match n {
        2 => Ok(accumulate(batch, sub, Some(a), 2).pair_statistic()),
        3 => Ok(accumulate(batch, sub, Some(a), 3).triple_statistic()),
        _ => Err(Error::Precondition(
            "estimator implemented for n ∈ {2, 3}; higher orders live in the oracle".into(),
        )),
    }
}

/// Unbiased Rényi-moment estimator for `n ∈ {2, 3}` (untransposed shadows).
pub fn estimate_moment(batch: &MeasurementBatch, sub: Interval, n: u32) -> Result<f64> {
    check_region(batch, sub)?;
    if matches!(batch.scheme, Scheme::Reuse { .. }) {
        return Err(Error::Precondition(
            "shadow estimators need the shadow scheme (n_M = 1)".into(),
        ));
    }
    if batch.len() < n as usize {
        return Err(Error::Precondition(format!("moment of order {n} needs M ≥ {n}")));
    }
    match n {
        2 => Ok(accumulate(batch, sub, None, 2).pair_statistic()),
        3 => Ok(accumulate(batch, sub, None, 3).triple_statistic()),
        _ => Err(Error::Precondition(
            "estimator implemented for n ∈ {2, 3}; higher orders live in the oracle".into(),
        )),
    }
}

/// Purity estimator from outcome pairs under shared unitaries, weighting a
/// pair at Hamming distance `D` by `(-2)^{-D}` with the `2^{|I|}` prefactor.
pub fn hamming_purity(batch: &MeasurementBatch, sub: Interval) -> Result<f64> {
    check_region(batch, sub)?;
    let Scheme::Reuse { n_u, n_m } = batch.scheme else {
        return Err(Error::Precondition("Hamming estimator needs the reuse scheme".into()));
    };
    if n_m < 2 {
        return Err(Error::Precondition("Hamming estimator needs n_M ≥ 2".into()));
    }
    let offset = sub.start - batch.region.start;
    let weights: Vec<f64> = (0..=sub.len).map(|d| (-2.0f64).powi(-(d as i32))).collect();
    let pack = |outcome: &[u8]| -> u32 {
        outcome[offset..offset + sub.len]
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | b as u32)
    };
    let mut total = 0.0;
    for group in 0..n_u {
        let packed: Vec<u32> =
            (0..n_m).map(|k| pack(&batch.records[group * n_m + k].outcome)).collect();
        for k in 0..n_m {
            for kp in k + 1..n_m {
                let d = (packed[k] ^ packed[kp]).count_ones() as usize;
                total += 2.0 * weights[d];
            }
        }
    }
    let norm = (n_u * n_m * (n_m - 1)) as f64;
    Ok((1u64 << sub.len) as f64 * total / norm)
}

/// Right-hand side of the purity variance bound:
/// `4·(2^{|I|} P₂ / M) + 2·(2^{2|I|} / (M-1))²`.
pub fn purity_variance_bound(region_size: usize, p2: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Precondition("variance bound needs M ≥ 2".into()));
    }
    let d = (1u64 << region_size) as f64;
    Ok(4.0 * d * p2 / m as f64 + 2.0 * (d * d / (m as f64 - 1.0)).powi(2))
}

/// Right-hand side of the third PT-moment variance bound:
/// `9·2^{|AB|}/M·Tr[ρ⁴] + 18·2^{3|AB|}/(M-1)²·p₂ + 6·2^{6|AB|}/(M-2)³`.
pub fn p3_variance_bound(ab_size: usize, tr_rho4: f64, p2: f64, m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::Precondition("variance bound needs M ≥ 3".into()));
    }
    let d = (1u64 << ab_size) as f64;
    let m = m as f64;
    Ok(9.0 * d / m * tr_rho4
        + 18.0 * d.powi(3) / (m - 1.0).powi(2) * p2
        + 6.0 * d.powi(6) / (m - 2.0).powi(3))
}
