//! Matrix-product operators with open boundaries, and the replica
//! contractions that evaluate `Tr[ρ_Iⁿ]` and PT moments without ever
//! materializing a reduced density matrix.

use faer::{c64, Mat};

use crate::dense::{DenseOperator, Interval, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};

/// Rank-4 site tensor `[left, phys-out, phys-in, right]`, right bond fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct MpoTensor {
    pub left: usize,
    pub right: usize,
    pub data: Vec<c64>,
}

impl MpoTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        MpoTensor { left, right, data: vec![ZERO; left * 4 * right] }
    }

    #[inline]
    pub fn at(&self, l: usize, o: usize, i: usize, r: usize) -> c64 {
        self.data[((l * 2 + o) * 2 + i) * self.right + r]
    }

    #[inline]
    pub fn at_mut(&mut self, l: usize, o: usize, i: usize, r: usize) -> &mut c64 {
        &mut self.data[((l * 2 + o) * 2 + i) * self.right + r]
    }

    /// Physical trace `Σ_s T[l, s, s, r]` as a matrix on the bond space.
    fn physical_trace(&self) -> Mat<c64> {
        Mat::from_fn(self.left, self.right, |l, r| self.at(l, 0, 0, r) + self.at(l, 1, 1, r))
    }
}

#[derive(Clone, Debug)]
pub struct Mpo {
    tensors: Vec<MpoTensor>,
}

impl Mpo {
    pub fn from_tensors(tensors: Vec<MpoTensor>) -> Result<Self> {
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
        Ok(Mpo { tensors })
    }

    pub fn identity(l: usize) -> Self {
        let tensors = (0..l)
            .map(|_| {
                let mut t = MpoTensor::zeros(1, 1);
                *t.at_mut(0, 0, 0, 0) = linalg::ONE;
                *t.at_mut(0, 1, 1, 0) = linalg::ONE;
                t
            })
            .collect();
        Mpo { tensors }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[MpoTensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut Vec<MpoTensor> {
        &mut self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.tensors[0].left];
        dims.extend(self.tensors.iter().map(|t| t.right));
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Trace of the represented operator.
    pub fn trace(&self) -> c64 {
        let mut v = vec![linalg::ONE];
        for t in &self.tensors {
            let t1 = t.physical_trace();
            let mut next = vec![ZERO; t.right];
            for (l, &vl) in v.iter().enumerate() {
                if vl == ZERO {
                    continue;
                }
                for (r, slot) in next.iter_mut().enumerate() {
                    *slot += vl * t1[(l, r)];
                }
            }
            v = next;
        }
        v[0]
    }

    /// Dense matrix of the represented operator. Memory is `4^L · χ`; callers
    /// keep `L` small.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let l = self.len();
        if l > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit(l, MAX_DENSE_QUBITS));
        }
        // one partial matrix per right-bond value
        let mut mats: Vec<Mat<c64>> = vec![Mat::from_fn(1, 1, |_, _| linalg::ONE)];
        for t in &self.tensors {
            let dim = mats[0].nrows() * 2;
            let mut next: Vec<Mat<c64>> = (0..t.right).map(|_| Mat::zeros(dim, dim)).collect();
            for (lb, mat) in mats.iter().enumerate() {
                for o in 0..2 {
                    for i in 0..2 {
                        for r in 0..t.right {
                            let w = t.at(lb, o, i, r);
                            if w == ZERO {
                                continue;
                            }
                            let target = &mut next[r];
                            for a in 0..mat.nrows() {
                                for b in 0..mat.ncols() {
                                    target[(a * 2 + o, b * 2 + i)] += w * mat[(a, b)];
                                }
                            }
                        }
                    }
                }
            }
            mats = next;
        }
        DenseOperator::from_matrix(l, mats.swap_remove(0))
    }

    /// Environment-contracted reduced density matrix on `I`, normalized to
    /// unit trace.
    pub fn reduced_density(&self, region: Interval) -> Result<DenseOperator> {
        region.validate(self.len())?;
        if region.len > 12 {
            return Err(Error::Precondition(format!(
                "reduced density on {} qubits exceeds the 12-qubit extraction limit",
                region.len
            )));
        }
        // left environment
        let mut left_env = vec![linalg::ONE];
        for t in self.tensors.iter().take(region.start) {
            let t1 = t.physical_trace();
            let mut next = vec![ZERO; t.right];
            for (l, &vl) in left_env.iter().enumerate() {
                for (r, slot) in next.iter_mut().enumerate() {
                    *slot += vl * t1[(l, r)];
                }
            }
            left_env = next;
        }
        // right environment
        let mut right_env = vec![linalg::ONE];
        for t in self.tensors.iter().skip(region.end()).rev() {
            let t1 = t.physical_trace();
            let mut next = vec![ZERO; t.left];
            for (r, &vr) in right_env.iter().enumerate() {
                for (l, slot) in next.iter_mut().enumerate() {
                    *slot += t1[(l, r)] * vr;
                }
            }
            right_env = next;
        }
        // grow the open-legged middle part: G[(out, in), bond]
        let dim = 1usize << region.len;
        let mut g: Vec<c64> = left_env.clone(); // shape [1, 1, bond]
        let mut out_dim = 1usize;
        for t in self.tensors.iter().skip(region.start).take(region.len) {
            let mut next = vec![ZERO; out_dim * 2 * out_dim * 2 * t.right];
            for oo in 0..out_dim {
                for ii in 0..out_dim {
                    for l in 0..t.left {
                        let gv = g[(oo * out_dim + ii) * t.left + l];
                        if gv == ZERO {
                            continue;
                        }
                        for o in 0..2 {
                            for i in 0..2 {
                                for r in 0..t.right {
                                    let w = t.at(l, o, i, r);
                                    if w == ZERO {
                                        continue;
                                    }
                                    let row = oo * 2 + o;
                                    let col = ii * 2 + i;
                                    next[(row * (out_dim * 2) + col) * t.right + r] += gv * w;
                                }
                            }
                        }
                    }
                }
            }
            g = next;
            out_dim *= 2;
        }
        let bond = right_env.len();
        let mut rho = Mat::<c64>::zeros(dim, dim);
        for row in 0..dim {
            for col in 0..dim {
                let mut acc = ZERO;
                for (r, &env) in right_env.iter().enumerate() {
                    acc += g[(row * dim + col) * bond + r] * env;
                }
                rho[(row, col)] = acc;
            }
        }
        let tr = linalg::trace(&rho);
        if tr.norm() < f64::MIN_POSITIVE {
            return Err(Error::Precondition("reduced operator has zero trace".into()));
        }
        for col in 0..dim {
            for row in 0..dim {
                rho[(row, col)] /= tr;
            }
        }
        DenseOperator::from_matrix(region.len, rho)
    }

    /// `Tr[ρ_Iⁿ]` for the normalized operator `ρ = M / Tr M`, by contracting
    /// `n` replicas of the MPO with cyclic physical wiring inside `I`.
    pub fn trace_power(&self, region: Interval, n: u32) -> Result<f64> {
        region.validate(self.len())?;
        let flags = vec![false; region.len];
        let raw = self.replica_contraction(region, n, &flags)?;
        let tr = self.trace();
        Ok((raw / tr.powu(n)).re)
    }

    /// `Tr[(ρ_XY^{T_X})ⁿ]` for adjacent intervals `X`, `Y`; anticyclic wiring
    /// on `X` implements the partial transpose.
    pub fn pt_moment(&self, x: Interval, y: Interval, n: u32) -> Result<f64> {
        let region = x.join(&y)?;
        region.validate(self.len())?;
        let flags: Vec<bool> = (0..region.len).map(|j| x.contains(region.start + j)).collect();
        let raw = self.replica_contraction(region, n, &flags)?;
        let tr = self.trace();
        Ok((raw / tr.powu(n)).re)
    }

    /// Shared n-replica contraction. `transpose_site[j]` swaps the physical
    /// legs of site `region.start + j`, turning cyclic into anticyclic wiring.
    fn replica_contraction(&self, region: Interval, n: u32, transpose_site: &[bool]) -> Result<c64> {
        if n < 1 {
            return Err(Error::Precondition("replica order must be ≥ 1".into()));
        }
        let n = n as usize;
        let max_bond = self.max_bond();
        let state_size = max_bond.checked_pow(n as u32).ok_or(Error::Precondition(
            "replica contraction state overflows".into(),
        ))?;
        if state_size > (1usize << 26) {
            return Err(Error::Precondition(format!(
                "replica contraction needs {state_size} bond-tuple amplitudes; over the memory limit"
            )));
        }

        let mut v: Vec<c64> = vec![linalg::ONE];
        let mut bond = 1usize;
        for (site, t) in self.tensors.iter().enumerate() {
            debug_assert_eq!(bond.pow(n as u32), v.len());
            if site < region.start || site >= region.end() {
                // outside: independent physical trace on every replica
                let t1 = t.physical_trace();
                for axis in 0..n {
                    v = apply_axis(&v, bond, t.right, n, axis, |l, r| t1[(l, r)]);
                }
            } else if n == 1 {
                let t1 = t.physical_trace();
                v = apply_axis(&v, bond, t.right, 1, 0, |l, r| t1[(l, r)]);
            } else {
                let flip = transpose_site[site - region.start];
                let tt = |l: usize, o: usize, i: usize, r: usize| {
                    if flip { t.at(l, i, o, r) } else { t.at(l, o, i, r) }
                };
                // replica 1 opens the cycle: w[o1, m, r1, l2..ln]
                let tail = bond.pow((n - 1) as u32);
                let mut w = vec![ZERO; 2 * 2 * t.right * tail];
                for l1 in 0..bond {
                    for (rest, chunk) in v[l1 * tail..(l1 + 1) * tail].iter().enumerate() {
                        let amp = *chunk;
                        if amp == ZERO {
                            continue;
                        }
                        for o1 in 0..2 {
                            for m in 0..2 {
                                for r1 in 0..t.right {
                                    let coeff = tt(l1, o1, m, r1);
                                    if coeff == ZERO {
                                        continue;
                                    }
                                    w[((o1 * 2 + m) * t.right + r1) * tail + rest] += amp * coeff;
                                }
                            }
                        }
                    }
                }
                // replicas 2..n-1: consume l_t, emit r_t, thread the m index
                let mut emitted = t.right; // product of emitted r dims so far
                let mut remaining = tail; // product of remaining l dims
                for _t_idx in 1..n - 1 {
                    remaining /= bond;
                    let mut next = vec![ZERO; 2 * 2 * emitted * t.right * remaining];
                    for o1 in 0..2 {
                        for m_prev in 0..2 {
                            for e in 0..emitted {
                                for lt in 0..bond {
                                    for rest in 0..remaining {
                                        let amp = w[(((o1 * 2 + m_prev) * emitted + e) * bond + lt)
                                            * remaining
                                            + rest];
                                        if amp == ZERO {
                                            continue;
                                        }
                                        for m in 0..2 {
                                            for rt in 0..t.right {
                                                let coeff = tt(lt, m_prev, m, rt);
                                                if coeff == ZERO {
                                                    continue;
                                                }
                                                next[(((o1 * 2 + m) * (emitted * t.right)
                                                    + e * t.right
                                                    + rt)
                                                    * remaining)
                                                    + rest] += amp * coeff;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    w = next;
                    emitted *= t.right;
                }
                // last replica closes the cycle: in index = o1
                let mut next = vec![ZERO; emitted * t.right];
                for o1 in 0..2 {
                    for m_prev in 0..2 {
                        for e in 0..emitted {
                            for ln in 0..bond {
                                let amp = w[((o1 * 2 + m_prev) * emitted + e) * bond + ln];
                                if amp == ZERO {
                                    continue;
                                }
                                for rn in 0..t.right {
                                    let coeff = tt(ln, m_prev, o1, rn);
                                    if coeff == ZERO {
                                        continue;
                                    }
                                    next[e * t.right + rn] += amp * coeff;
                                }
                            }
                        }
                    }
                }
                v = next;
            }
            bond = t.right;
        }
        Ok(v[0])
    }

    /// Hermiticity deviation of the represented operator estimated from
    /// `Tr[(M - M†)(M - M†)†] / Tr[M M†]`, computable at any size.
    pub fn hermiticity_deviation(&self) -> f64 {
        let full = Interval::new(0, self.len());
        let mm_dag = self.two_replica_adjoint();
        let tr_m2 = self
            .replica_contraction(full, 2, &vec![false; self.len()])
            .unwrap_or(ZERO);
        // Tr[(M-M†)(M-M†)†] = 2 Tr[M M†] - Tr[M M] - conj(Tr[M M])
        let dev = 2.0 * mm_dag.re - 2.0 * tr_m2.re;
        (dev / mm_dag.re.max(f64::MIN_POSITIVE)).max(0.0)
    }

    /// `Tr[M M†]` via a two-replica contraction with conjugated second copy.
    fn two_replica_adjoint(&self) -> c64 {
        let mut v: Vec<c64> = vec![linalg::ONE];
        let mut bond = 1usize;
        for t in &self.tensors {
            let mut next = vec![ZERO; t.right * t.right];
            for l1 in 0..bond {
                for l2 in 0..bond {
                    let amp = v[l1 * bond + l2];
                    if amp == ZERO {
                        continue;
                    }
                    for o in 0..2 {
                        for i in 0..2 {
                            for r1 in 0..t.right {
                                let c1 = t.at(l1, o, i, r1);
                                if c1 == ZERO {
                                    continue;
                                }
                                for r2 in 0..t.right {
                                    let c2 = t.at(l2, o, i, r2).conj();
                                    next[r1 * t.right + r2] += amp * c1 * c2;
                                }
                            }
                        }
                    }
                }
            }
            v = next;
            bond = t.right;
        }
        v[0]
    }
}

/// Apply a bond-space matrix to one replica axis of the tuple state.
fn apply_axis<F: Fn(usize, usize) -> c64>(
    v: &[c64],
    dim_in: usize,
    dim_out: usize,
    n: usize,
    axis: usize,
    coeff: F,
) -> Vec<c64> {
    // current shape: axes 0..axis have dim_out, axes axis..n have dim_in
    let outer: usize = dim_out.pow(axis as u32);
    let inner: usize = dim_in.pow((n - axis - 1) as u32);
    let mut out = vec![ZERO; outer * dim_out * inner];
    for o in 0..outer {
        for li in 0..dim_in {
            for rest in 0..inner {
                let amp = v[(o * dim_in + li) * inner + rest];
                if amp == ZERO {
                    continue;
                }
                for ro in 0..dim_out {
                    let c = coeff(li, ro);
                    if c == ZERO {
                        continue;
                    }
                    out[(o * dim_out + ro) * inner + rest] += amp * c;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{partial_trace, renyi_moment, s_ratio, DenseOperator};
    use crate::linalg::max_abs_diff;
    use crate::tn::mps::random_mps;

    #[test]
    fn identity_mpo_reduces_to_maximally_mixed() {
        let mpo = Mpo::identity(5);
        assert!((mpo.trace().re - 32.0).abs() < 1e-12);
        let red = mpo.reduced_density(Interval::new(1, 2)).unwrap();
        let mixed = DenseOperator::maximally_mixed(2);
        assert!(max_abs_diff(red.matrix(), mixed.matrix()) < 1e-13);
        assert!((red.trace().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trace_power_unity_for_n1() {
        let mps = random_mps(7, 3, 21).unwrap();
        let mpo = mps.to_density_mpo();
        for start in [0usize, 2] {
            let v = mpo.trace_power(Interval::new(start, 3), 1).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn replica_contraction_matches_dense_oracle() {
        let mps = random_mps(7, 2, 22).unwrap();
        let mpo = mps.to_density_mpo();
        let rho = mps.to_dense().unwrap();
        for (region, n) in [
            (Interval::new(0, 3), 2u32),
            (Interval::new(2, 3), 2),
            (Interval::new(2, 3), 3),
            (Interval::new(1, 4), 4),
        ] {
            let via_mpo = mpo.trace_power(region, n).unwrap();
            let red = partial_trace(&rho, region).unwrap();
            let via_dense = renyi_moment(&red, n).unwrap();
            assert!(
                (via_mpo - via_dense).abs() < 1e-9,
                "region {region:?} n={n}: {via_mpo} vs {via_dense}"
            );
        }
    }

    #[test]
    fn pt_moment_equals_trace_power_for_n2() {
        let mps = random_mps(6, 2, 23).unwrap();
        let mpo = mps.to_density_mpo();
        let x = Interval::new(1, 2);
        let y = Interval::new(3, 2);
        let pt2 = mpo.pt_moment(x, y, 2).unwrap();
        let p2 = mpo.trace_power(Interval::new(1, 4), 2).unwrap();
        assert!((pt2 - p2).abs() < 1e-10);
    }

    #[test]
    fn pt_moment_matches_dense_oracle() {
        let mps = random_mps(7, 2, 24).unwrap();
        let mpo = mps.to_density_mpo();
        let rho = mps.to_dense().unwrap();
        let x = Interval::new(2, 2);
        let y = Interval::new(4, 2);
        for n in [2u32, 3] {
            let via_mpo = mpo.pt_moment(x, y, n).unwrap();
            let red = partial_trace(&rho, x.join(&y).unwrap()).unwrap();
            let s_num = s_ratio(&red, Interval::new(0, 2), n).unwrap();
            let pa = renyi_moment(&partial_trace(&red, Interval::new(0, 2)).unwrap(), n).unwrap();
            let pb = renyi_moment(&partial_trace(&red, Interval::new(2, 2)).unwrap(), n).unwrap();
            let via_dense = s_num * pa * pb;
            assert!(
                (via_mpo - via_dense).abs() < 1e-9,
                "n={n}: {via_mpo} vs {via_dense}"
            );
        }
    }

    #[test]
    fn reduced_density_matches_dense_partial_trace() {
        let mps = random_mps(8, 3, 25).unwrap();
        let mpo = mps.to_density_mpo();
        let rho = mps.to_dense().unwrap();
        let region = Interval::new(2, 3);
        let via_mpo = mpo.reduced_density(region).unwrap();
        let via_dense = partial_trace(&rho, region).unwrap();
        assert!(max_abs_diff(via_mpo.matrix(), via_dense.matrix()) < 1e-10);
    }

    #[test]
    fn to_dense_round_trip() {
        let mps = random_mps(5, 2, 26).unwrap();
        let mpo = mps.to_density_mpo();
        let dense_from_mpo = mpo.to_dense().unwrap();
        let dense_from_mps = mps.to_dense().unwrap();
        assert!(max_abs_diff(dense_from_mpo.matrix(), dense_from_mps.matrix()) < 1e-12);
    }

    #[test]
    fn hermiticity_deviation_detects_asymmetry() {
        let mps = random_mps(5, 2, 27).unwrap();
        let mpo = mps.to_density_mpo();
        assert!(mpo.hermiticity_deviation() < 1e-10);
        let mut broken = mpo.clone();
        *broken.tensors_mut()[2].at_mut(0, 0, 1, 0) += c64::new(0.5, 0.3);
        assert!(broken.hermiticity_deviation() > 1e-4);
    }
}
