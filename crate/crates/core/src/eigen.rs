//! Dense symmetric eigenvalues and comparisons between finite spectra.
//!
//! The solver reduces the matrix to tridiagonal form by Householder
//! reflections on packed lower-triangular storage, then runs implicit QL
//! with Wilkinson-type shifts on the tridiagonal matrix. Only eigenvalues are
//! computed. The symmetric rank-2 update of one reflection is fused with the
//! matrix-vector product needed by the next, so each step makes one pass over
//! the trailing triangle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levelrep::WeightedOperator;

/// Largest dimension accepted by the dense solver (`3^8 = 6561` fits).
pub const MAX_DENSE_DIMENSION: usize = 8192;

/// Eigenvalues closer than this are reported as one entry.
pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 1e-7;

/// Distinct eigenvalues with multiplicities, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumApprox {
    entries: Vec<(f64, usize)>,
    threshold: f64,
}

impl SpectrumApprox {
    /// Groups sorted eigenvalues whose consecutive gaps are below
    /// `threshold`; each group is represented by its mean.
    pub fn from_sorted(values: &[f64], threshold: f64) -> Self {
        let mut entries: Vec<(f64, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || values[i] - values[i - 1] >= threshold {
                if i > start {
                    let group = &values[start..i];
                    let mean = group.iter().sum::<f64>() / group.len() as f64;
                    entries.push((mean, group.len()));
                }
                start = i;
            }
        }
        Self { entries, threshold }
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Sum of multiplicities.
    pub fn dimension(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn max(&self) -> Option<(f64, usize)> {
        self.entries.last().copied()
    }

    pub fn min(&self) -> Option<(f64, usize)> {
        self.entries.first().copied()
    }

    /// Every eigenvalue repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect()
    }
}

/// Symmetric matrix in packed lower-triangular, row-major storage:
/// row `i` holds columns `0..=i` starting at offset `i(i+1)/2`.
#[derive(Debug, Clone)]
pub struct PackedSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl PackedSymmetric {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Takes the lower triangle of a symmetric operator.
    pub fn from_operator(op: &WeightedOperator) -> Self {
        let mut m = Self::zeros(op.dimension());
        for &(r, c, w) in op.entries() {
            if c <= r {
                m.data[offset(r) + c] = w;
            }
        }
        m
    }

    /// Takes the lower triangle of a row-major dense matrix.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[offset(i)..offset(i) + i + 1].copy_from_slice(&dense[i * n..i * n + i + 1]);
        }
        m
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        self.data[offset(i) + j]
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[offset(i) + j]
    }
}

#[inline]
fn offset(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Builds the reflector annihilating column `c` below the subdiagonal.
/// Writes `v` on indices `c+1..n` (with `v[c+1] = 1`) and returns
/// `(tau, beta)` such that `(I - tau v vᵀ) x = beta e_1`.
fn reflector(a: &PackedSymmetric, c: usize, v: &mut [f64]) -> (f64, f64) {
    let n = a.n;
    let alpha = a.get(c + 1, c);
    let mut scale = 0.0f64;
    for i in c + 2..n {
        scale = scale.max(a.get(i, c).abs());
    }
    v[c + 1] = 1.0;
    if scale == 0.0 {
        for x in &mut v[c + 2..n] {
            *x = 0.0;
        }
        return (0.0, alpha);
    }
    let mut ssq = 0.0;
    for i in c + 2..n {
        let x = a.get(i, c) / scale;
        ssq += x * x;
    }
    let xnorm = scale * ssq.sqrt();
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let inv = 1.0 / (alpha - beta);
    for i in c + 2..n {
        v[i] = a.get(i, c) * inv;
    }
    (tau, beta)
}

/// `q = B v` over the trailing block `start..n`.
fn trailing_symv(a: &PackedSymmetric, start: usize, v: &[f64], q: &mut [f64]) {
    for x in &mut q[start..] {
        *x = 0.0;
    }
    for i in start..a.n {
        let row = &a.data[offset(i) + start..offset(i) + i];
        let vi = v[i];
        let (head, tail) = q.split_at_mut(i);
        let qs = &mut head[start..i];
        let vs = &v[start..i];
        let mut acc = 0.0;
        for ((&x, &vj), qj) in row.iter().zip(vs).zip(qs.iter_mut()) {
            acc += x * vj;
            *qj += x * vi;
        }
        tail[0] += acc + a.data[offset(i) + i] * vi;
    }
}

/// One row of the fused pass: `row -= v_i w + w_i v` on columns `s..i`,
/// accumulating the next product into `q` and returning the row's dot term.
#[inline]
fn fused_row(row: &mut [f64], vs: &[f64], ws: &[f64], nv: &[f64], qs: &mut [f64], vi: f64, wi: f64, nvi: f64) -> f64 {
    let len = row.len();
    let (vs, ws, nv, qs) = (&vs[..len], &ws[..len], &nv[..len], &mut qs[..len]);
    let mut acc = [0.0f64; 4];
    let body = len - len % 4;
    let mut j = 0;
    while j < body {
        for l in 0..4 {
            let x = row[j + l] - vi * ws[j + l] - wi * vs[j + l];
            row[j + l] = x;
            acc[l] += x * nv[j + l];
            qs[j + l] += x * nvi;
        }
        j += 4;
    }
    let mut tail = 0.0;
    for k in body..len {
        let x = row[k] - vi * ws[k] - wi * vs[k];
        row[k] = x;
        tail += x * nv[k];
        qs[k] += x * nvi;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Householder reduction to tridiagonal form. Returns the diagonal and the
/// subdiagonal (`e[k]` couples `k` and `k + 1`). Consumes the matrix.
pub fn tridiagonalize(mut a: PackedSymmetric) -> (Vec<f64>, Vec<f64>) {
    let n = a.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return (d, e);
    }
    if n == 1 {
        d[0] = a.get(0, 0);
        return (d, e);
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut next_v = vec![0.0; n];
    let mut next_q = vec![0.0; n];

    let (mut tau, beta) = reflector(&a, 0, &mut v);
    e[0] = beta;
    d[0] = a.get(0, 0);
    trailing_symv(&a, 1, &v, &mut q);

    for c in 0..n - 1 {
        // (v, tau) reflect column c; q = B v with B the block c+1..n.
        let lo = c + 1;
        if tau != 0.0 {
            let mut pv = 0.0;
            for i in lo..n {
                w[i] = tau * q[i];
                pv += w[i] * v[i];
            }
            let k = 0.5 * tau * pv;
            for i in lo..n {
                w[i] -= k * v[i];
            }
        } else {
            for x in &mut w[lo..n] {
                *x = 0.0;
            }
        }
        if lo == n - 1 {
            *a.at(lo, lo) -= 2.0 * v[lo] * w[lo];
            d[lo] = a.get(lo, lo);
            break;
        }
        // Column lo of the updated block, which the next reflector reads.
        for i in lo..n {
            let x = v[i] * w[lo] + w[i] * v[lo];
            *a.at(i, lo) -= x;
        }
        d[lo] = a.get(lo, lo);
        let (next_tau, next_beta) = reflector(&a, lo, &mut next_v);
        e[lo] = next_beta;

        let s = lo + 1;
        for x in &mut next_q[s..n] {
            *x = 0.0;
        }
        for i in s..n {
            let (vi, wi, nvi) = (v[i], w[i], next_v[i]);
            let start = offset(i);
            let (row, diag) = a.data[start + s..=start + i].split_at_mut(i - s);
            let (head, tail) = next_q.split_at_mut(i);
            let dot = fused_row(row, &v[s..i], &w[s..i], &next_v[s..i], &mut head[s..i], vi, wi, nvi);
            diag[0] -= 2.0 * vi * wi;
            tail[0] += dot + diag[0] * nvi;
        }
        std::mem::swap(&mut v, &mut next_v);
        std::mem::swap(&mut q, &mut next_q);
        tau = next_tau;
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix `(d, e)` by implicit QL,
/// returned unsorted in `d`.
pub fn tridiagonal_eigenvalues(d: &mut [f64], e: &[f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a packed symmetric matrix, ascending.
pub fn packed_eigenvalues(a: PackedSymmetric) -> Result<Vec<f64>> {
    let (mut d, e) = tridiagonalize(a);
    tridiagonal_eigenvalues(&mut d, &e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues of a symmetric operator with multiplicity, ascending.
pub fn eigenvalues(op: &WeightedOperator) -> Result<Vec<f64>> {
    let n = op.dimension();
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::DimensionOverflow {
            dim: n,
            max: MAX_DENSE_DIMENSION,
        });
    }
    if let Some((row, col)) = op.check_symmetric() {
        return Err(Error::NotSymmetric { row, col });
    }
    packed_eigenvalues(PackedSymmetric::from_operator(op))
}

/// Eigenvalues of `op`, merged into clusters closer than `cluster_threshold`.
pub fn symmetric_eigenvalues(op: &WeightedOperator, cluster_threshold: f64) -> Result<SpectrumApprox> {
    Ok(SpectrumApprox::from_sorted(&eigenvalues(op)?, cluster_threshold))
}

/// Whether every eigenvalue of `a` (with multiplicity) can be matched to a
/// distinct eigenvalue of `b` within `tol`.
///
/// Greedy: each value of `a`, in increasing order, takes the smallest unused
/// value of `b` that is at least `x - tol`. All windows have the same width,
/// so this succeeds whenever any matching exists.
pub fn multiset_contained(a: &SpectrumApprox, b: &SpectrumApprox, tol: f64) -> bool {
    let b = b.entries();
    let mut j = 0;
    let mut left = b.first().map_or(0, |e| e.1);
    for &(x, mut count) in a.entries() {
        while count > 0 {
            while j < b.len() && (left == 0 || b[j].0 < x - tol) {
                j += 1;
                left = b.get(j).map_or(0, |e| e.1);
            }
            if j == b.len() || b[j].0 > x + tol {
                return false;
            }
            let take = count.min(left);
            count -= take;
            left -= take;
        }
    }
    true
}

fn nearest_in_sorted(sorted: &[f64], x: f64) -> f64 {
    let i = sorted.partition_point(|&y| y < x);
    let mut best = f64::INFINITY;
    if i < sorted.len() {
        best = best.min((sorted[i] - x).abs());
    }
    if i > 0 {
        best = best.min((sorted[i - 1] - x).abs());
    }
    best
}

/// Distance from `x` to the nearest element of a sorted slice.
pub fn distance_to_sorted(sorted: &[f64], x: f64) -> f64 {
    nearest_in_sorted(sorted, x)
}

/// Hausdorff distance between two finite sets of reals.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let ab = sa.iter().map(|&x| nearest_in_sorted(&sb, x)).fold(0.0, f64::max);
    let ba = sb.iter().map(|&x| nearest_in_sorted(&sa, x)).fold(0.0, f64::max);
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::builtin_group;
    use crate::levelrep::uniform_hecke;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: the number of eigenvalues below `x` equals the
    /// number of negative pivots in the symmetric elimination of `A - xI`
    /// (signs of ratios of leading principal minors).
    fn count_below(n: usize, a: &[f64], x: f64) -> usize {
        let mut m: Vec<f64> = a.to_vec();
        for i in 0..n {
            m[i * n + i] -= x;
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut p = m[k * n + k];
            if p == 0.0 {
                p = -f64::EPSILON;
            }
            if p < 0.0 {
                negatives += 1;
            }
            for i in k + 1..n {
                let f = m[i * n + k] / p;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..=i {
                    m[i * n + j] -= f * m[k * n + j];
                }
            }
            // keep the lower triangle consistent for the next pivot row
            for i in k + 1..n {
                for j in k + 1..i {
                    m[j * n + i] = m[i * n + j];
                }
            }
        }
        negatives
    }

    fn oracle_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
        let bound = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        (0..n)
            .map(|k| {
                let (mut lo, mut hi) = (-bound, bound);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(n, a, mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn matches_inertia_oracle_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..4 {
            let n = 50;
            let a = random_symmetric(n, &mut rng);
            let ours = packed_eigenvalues(PackedSymmetric::from_dense(n, &a)).unwrap();
            let oracle = oracle_eigenvalues(n, &a);
            for (x, y) in ours.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn handles_structured_and_tiny_matrices() {
        assert!(packed_eigenvalues(PackedSymmetric::zeros(0)).unwrap().is_empty());
        let one = PackedSymmetric::from_dense(1, &[3.5]);
        assert_eq!(packed_eigenvalues(one).unwrap(), vec![3.5]);
        let two = PackedSymmetric::from_dense(2, &[2.0, 1.0, 1.0, 2.0]);
        let ev = packed_eigenvalues(two).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
        // already diagonal, and a block with a zero column below the diagonal
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = i as f64;
        }
        a[4 * n + 5] = 1.0;
        a[5 * n + 4] = 1.0;
        let ev = packed_eigenvalues(PackedSymmetric::from_dense(n, &a)).unwrap();
        let oracle = oracle_eigenvalues(n, &a);
        for (x, y) in ev.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn grigorchuk_small_levels() {
        let g = builtin_group("grigorchuk").unwrap();
        let s1 = symmetric_eigenvalues(&uniform_hecke(&g, 1), DEFAULT_CLUSTER_THRESHOLD).unwrap();
        let v1: Vec<f64> = s1.values().collect();
        assert!((v1[0] - 0.5).abs() < 1e-14 && (v1[1] - 1.0).abs() < 1e-14);
        let s2 = symmetric_eigenvalues(&uniform_hecke(&g, 2), DEFAULT_CLUSTER_THRESHOLD).unwrap();
        let sqrt5 = 5f64.sqrt();
        let expected = [(1.0 - sqrt5) / 4.0, 0.5, (1.0 + sqrt5) / 4.0, 1.0];
        assert_eq!(s2.entries().len(), 4);
        for ((x, m), y) in s2.entries().iter().zip(expected) {
            assert_eq!(*m, 1);
            assert!((x - y).abs() < 1e-14);
        }
        assert!(multiset_contained(&s1, &s2, 1e-10));
    }

    #[test]
    fn gamma_level_one_has_double_quarter() {
        let g = builtin_group("gamma").unwrap();
        let s = symmetric_eigenvalues(&uniform_hecke(&g, 1), DEFAULT_CLUSTER_THRESHOLD).unwrap();
        assert_eq!(s.entries().len(), 2);
        assert!((s.entries()[0].0 - 0.25).abs() < 1e-14);
        assert_eq!(s.entries()[0].1, 2);
        assert!((s.entries()[1].0 - 1.0).abs() < 1e-14);
        assert_eq!(s.dimension(), 3);
    }

    #[test]
    fn rejects_non_symmetric_and_oversized() {
        let op = WeightedOperator::from_triplets(2, vec![(0, 1, 1.0)]);
        assert!(matches!(eigenvalues(&op), Err(Error::NotSymmetric { .. })));
        let big = WeightedOperator::from_triplets(MAX_DENSE_DIMENSION + 1, vec![]);
        assert!(matches!(eigenvalues(&big), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn containment_examples() {
        let sa = |v: &[f64]| SpectrumApprox::from_sorted(v, 1e-12);
        assert!(multiset_contained(&sa(&[1.0]), &sa(&[0.5, 1.0]), 1e-6));
        assert!(!multiset_contained(&sa(&[0.3]), &sa(&[0.5, 1.0]), 1e-6));
        // multiplicity matters
        assert!(!multiset_contained(&sa(&[1.0, 1.0]), &sa(&[0.5, 1.0]), 1e-6));
        assert!(multiset_contained(&sa(&[0.25, 0.25]), &sa(&[0.25, 0.25, 1.0]), 1e-9));
        // a greedy match that must skip to the right neighbour
        assert!(multiset_contained(&sa(&[0.0, 0.1]), &sa(&[0.05, 0.14]), 0.06));
        assert!(multiset_contained(&sa(&[]), &sa(&[0.5]), 1e-6));
    }

    #[test]
    fn clustering_merges_close_values() {
        let s = SpectrumApprox::from_sorted(&[0.0, 1e-9, 2e-9, 0.5, 1.0 - 1e-12, 1.0], 1e-7);
        assert_eq!(s.entries().len(), 3);
        assert_eq!(s.entries()[0].1, 3);
        assert_eq!(s.entries()[2].1, 2);
        assert_eq!(s.dimension(), 6);
        assert_eq!(s.expanded().len(), 6);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&[0.0, 1.0], &[0.5]).unwrap(), 0.5);
        assert!(matches!(hausdorff_distance(&[], &[1.0]), Err(Error::EmptySet)));
    }

    #[test]
    fn uniform_spectra_lie_in_unit_interval() {
        for name in crate::automata::BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            let max = if g.degree() == 2 { 7 } else { 5 };
            for n in 0..=max {
                let ev = eigenvalues(&uniform_hecke(&g, n)).unwrap();
                assert_eq!(ev.len(), g.degree().pow(n as u32));
                assert!(ev.iter().all(|&x| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&x)));
                assert!((ev.last().unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}
