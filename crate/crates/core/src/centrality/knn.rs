//! Exact k-nearest-neighbour search.
//!
//! Candidate generation uses the Gram identity
//! `|x - y|² = |x|² + |y|² - 2 x·y` over blocked matrix products, which is
//! fast but inexact. Every candidate whose rounding interval can still reach
//! the current k-th best is kept, and the final selection re-evaluates the
//! survivors by direct summation. The result is identical to an exhaustive
//! scan that uses the same direct summation.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, PointId};
use crate::scalar::Scalar;

const QUERY_BLOCK: usize = 256;
const DATA_BLOCK: usize = 4096;

/// Neighbour lists in row space: row `i`'s neighbours occupy
/// `neighbors[i*k..(i+1)*k]`, nearest first.
#[derive(Debug, Clone)]
pub struct KnnTable<T> {
    k: usize,
    ids: Vec<PointId>,
    neighbors: Vec<usize>,
    distances: Vec<T>,
}

impl<T: Scalar> KnnTable<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn neighbor_rows(&self, row: usize) -> &[usize] {
        &self.neighbors[row * self.k..(row + 1) * self.k]
    }

    pub fn neighbor_ids(&self, row: usize) -> Vec<PointId> {
        self.neighbor_rows(row).iter().map(|&r| self.ids[r]).collect()
    }

    pub fn distances(&self, row: usize) -> &[T] {
        &self.distances[row * self.k..(row + 1) * self.k]
    }

    /// All `m * k` edge distances, row-major.
    pub fn all_distances(&self) -> &[T] {
        &self.distances
    }
}

/// Squared Euclidean distance by direct summation in coordinate order.
pub fn squared_distance<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| {
            let diff = x - y;
            acc + diff * diff
        })
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    lower: T,
    upper: T,
    row: usize,
}

struct CandidateList<T> {
    k: usize,
    items: Vec<Candidate<T>>,
    /// Upper bound on the true k-th smallest squared distance.
    threshold: T,
}

impl<T: Scalar> CandidateList<T> {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(4 * k + 64),
            threshold: T::infinity(),
        }
    }

    #[inline]
    fn offer(&mut self, lower: T, upper: T, row: usize) {
        if lower <= self.threshold {
            self.items.push(Candidate { lower, upper, row });
            if self.items.len() >= 4 * self.k + 64 {
                self.prune();
            }
        }
    }

    fn prune(&mut self) {
        if self.items.len() < self.k {
            return;
        }
        let mut uppers: Vec<T> = self.items.iter().map(|c| c.upper).collect();
        let (_, kth, _) = uppers.select_nth_unstable_by(self.k - 1, |a, b| a.partial_cmp(b).unwrap());
        self.threshold = *kth;
        let t = self.threshold;
        self.items.retain(|c| c.lower <= t);
    }
}

/// The `k` nearest other points of every point, by Euclidean distance, ties
/// broken by ascending id. Distances are returned sorted ascending.
pub fn pairwise_knn<T: Scalar>(features: &FeatureSet<T>, k: usize) -> Result<KnnTable<T>> {
    let m = features.len();
    if k == 0 || k >= m {
        return Err(Error::param(format!(
            "neighbour count k must satisfy 1 <= k < m (k = {k}, m = {m})"
        )));
    }
    if features.points().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("features contain non-finite values"));
    }
    let x = features.points();
    let d = features.dim();

    // Centering shrinks the norms that enter the Gram identity, which tightens
    // the rounding intervals; exact distances are still taken from `x`.
    let mean = x.mean_axis(Axis(0)).expect("m >= 2");
    let centered: Array2<T> = x - &mean.insert_axis(Axis(0));
    let norms: Array1<T> = centered.rows().into_iter().map(|r| r.dot(&r)).collect();
    let slack = T::epsilon() * T::of((2 * d + 8) as f64);
    let ids = features.ids();

    let blocks: Vec<(Vec<usize>, Vec<T>)> = (0..m)
        .step_by(QUERY_BLOCK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q0| {
            let q1 = (q0 + QUERY_BLOCK).min(m);
            let queries = centered.slice(s![q0..q1, ..]);
            let mut lists: Vec<CandidateList<T>> = (q0..q1).map(|_| CandidateList::new(k)).collect();
            let mut gram = Array2::<T>::zeros((q1 - q0, DATA_BLOCK.min(m)));
            for d0 in (0..m).step_by(DATA_BLOCK) {
                let d1 = (d0 + DATA_BLOCK).min(m);
                let data = centered.slice(s![d0..d1, ..]);
                let mut g = gram.slice_mut(s![.., ..d1 - d0]);
                ndarray::linalg::general_mat_mul(T::one(), &queries, &data.t(), T::zero(), &mut g);
                for (qi, list) in lists.iter_mut().enumerate() {
                    let qrow = q0 + qi;
                    let nq = norms[qrow];
                    let grow = g.row(qi);
                    for (j, (&dot, &nj)) in grow.iter().zip(norms.slice(s![d0..d1]).iter()).enumerate() {
                        let row = d0 + j;
                        if row == qrow {
                            continue;
                        }
                        let approx = nq + nj - (dot + dot);
                        let tol = slack * (nq + nj);
                        list.offer(approx - tol, approx + tol, row);
                    }
                }
            }

            let mut rows = Vec::with_capacity((q1 - q0) * k);
            let mut dists = Vec::with_capacity((q1 - q0) * k);
            for (qi, mut list) in lists.into_iter().enumerate() {
                list.prune();
                let qrow = q0 + qi;
                let mut exact: Vec<(T, PointId, usize)> = list
                    .items
                    .iter()
                    .map(|c| (squared_distance(x.row(qrow), x.row(c.row)), ids[c.row], c.row))
                    .collect();
                exact.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                for &(d2, _, row) in exact.iter().take(k) {
                    rows.push(row);
                    dists.push(d2.sqrt());
                }
            }
            (rows, dists)
        })
        .collect();

    let mut neighbors = Vec::with_capacity(m * k);
    let mut distances = Vec::with_capacity(m * k);
    for (rows, dists) in blocks {
        neighbors.extend(rows);
        distances.extend(dists);
    }
    debug_assert_eq!(neighbors.len(), m * k);
    Ok(KnnTable {
        k,
        ids: ids.to_vec(),
        neighbors,
        distances,
    })
}

/// `round(4 ln m)` clamped to `[1, m - 1]`.
pub fn default_k(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::param(format!("default_k needs m >= 2, got {m}")));
    }
    let k = (4.0 * (m as f64).ln()).round() as usize;
    Ok(k.clamp(1, m - 1))
}
