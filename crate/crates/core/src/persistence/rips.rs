//! Rips persistence from a distance matrix.
//!
//! H0 comes from Kruskal-style union-find over the sorted edges. H1 comes
//! from reducing the edge/triangle incidence matrix over Z/2 in its
//! anti-transposed (coboundary) form, which yields the same pairs as the
//! boundary reduction. Edges that merge components are cleared up front,
//! coboundaries are enumerated on the fly, and only the reduction
//! combinations are stored.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::union_find::UnionFind;
use super::{FiltrationSpec, PersistenceDiagram, PersistencePair};
use crate::geometry::DistanceMatrix;
use crate::scalar::{cmp_scalar, Scalar};

const NO_EDGE: u32 = u32::MAX;

/// Triangle key in filtration order: rank of its longest edge in the edge
/// order, then its combinatorial index.
type TriKey = (u32, u64);

struct EdgeIndex {
    n: usize,
    /// Rank of every admitted edge in filtration order, as a full row-major
    /// `n x n` table so cofacet scans read two contiguous rows.
    rank: Vec<u32>,
    binom2: Vec<u64>,
    binom3: Vec<u64>,
}

impl EdgeIndex {
    #[inline]
    fn row(&self, i: usize) -> &[u32] {
        &self.rank[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    fn triangle_index(&self, i: usize, j: usize, k: usize) -> u64 {
        let mut v = [i, j, k];
        v.sort_unstable();
        self.binom3[v[2]] + self.binom2[v[1]] + v[0] as u64
    }

    /// Visits every triangle containing edge `(i, j)` of rank `r` that lies
    /// inside the filtration.
    #[inline]
    fn for_each_cofacet(&self, i: usize, j: usize, r: u32, mut f: impl FnMut(TriKey)) {
        let (ri, rj) = (self.row(i), self.row(j));
        for k in 0..self.n {
            let (rik, rjk) = (ri[k], rj[k]);
            if k == i || k == j || rik == NO_EDGE || rjk == NO_EDGE {
                continue;
            }
            f((r.max(rik).max(rjk), self.triangle_index(i, j, k)));
        }
    }

    /// Smallest cofacet of edge `(i, j)` of rank `r`. The triangle index
    /// grows with the third vertex, so the first vertex whose two edges
    /// precede `r` gives the minimum and ends the scan.
    #[inline]
    fn min_cofacet(&self, i: usize, j: usize, r: u32) -> Option<TriKey> {
        let (ri, rj) = (self.row(i), self.row(j));
        let mut best: Option<(u32, usize)> = None;
        for k in 0..self.n {
            let (rik, rjk) = (ri[k], rj[k]);
            if k == i || k == j || rik == NO_EDGE || rjk == NO_EDGE {
                continue;
            }
            let m = r.max(rik).max(rjk);
            if m == r {
                return Some((r, self.triangle_index(i, j, k)));
            }
            if best.map_or(true, |(bm, _)| m < bm) {
                best = Some((m, k));
            }
        }
        best.map(|(m, k)| (m, self.triangle_index(i, j, k)))
    }
}

/// Pops the smallest key with odd multiplicity.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<TriKey>>) -> Option<TriKey> {
    while let Some(Reverse(top)) = heap.pop() {
        if heap.peek() == Some(&Reverse(top)) {
            heap.pop();
        } else {
            return Some(top);
        }
    }
    None
}

/// Vietoris-Rips persistence diagram of the matrix, up to `spec.max_dim`.
pub fn rips_persistence<T: Scalar>(dm: &DistanceMatrix<T>, spec: &FiltrationSpec<T>) -> PersistenceDiagram<T> {
    let n = dm.len();
    let mut edges: Vec<(T, u32, u32)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            if d <= spec.threshold {
                edges.push((d, i as u32, j as u32));
            }
        }
    }
    edges.sort_by(|a, b| cmp_scalar(&a.0, &b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut points = Vec::new();

    // H0 and clearing: an edge that merges two components cannot create a loop.
    let mut uf = UnionFind::new(n);
    let mut merges = vec![false; edges.len()];
    for (r, &(d, i, j)) in edges.iter().enumerate() {
        if uf.union(i as usize, j as usize) {
            merges[r] = true;
            if d > T::zero() {
                points.push(PersistencePair::new(0, T::zero(), d));
            }
        }
    }
    for _ in 0..uf.components() {
        points.push(PersistencePair::new(0, T::zero(), T::infinity()));
    }

    if spec.max_dim >= 1 && n >= 3 {
        points.extend(h1_pairs(dm, &edges, &merges));
    }

    PersistenceDiagram {
        points,
        scale_tag: dm.tag(),
        threshold: spec.threshold,
    }
}

fn h1_pairs<T: Scalar>(dm: &DistanceMatrix<T>, edges: &[(T, u32, u32)], merges: &[bool]) -> Vec<PersistencePair<T>> {
    let n = dm.len();
    let mut rank = vec![NO_EDGE; n * n];
    for (r, &(_, i, j)) in edges.iter().enumerate() {
        let (i, j) = (i as usize, j as usize);
        rank[i * n + j] = r as u32;
        rank[j * n + i] = r as u32;
    }
    let binom2: Vec<u64> = (0..n as u64).map(|a| a * a.saturating_sub(1) / 2).collect();
    let binom3: Vec<u64> = (0..n as u64)
        .map(|a| a * a.saturating_sub(1) * a.saturating_sub(2) / 6)
        .collect();
    let index = EdgeIndex {
        n,
        rank,
        binom2,
        binom3,
    };

    let endpoints = |r: u32| {
        let (_, i, j) = edges[r as usize];
        (i as usize, j as usize)
    };

    let mut owner: HashMap<TriKey, u32> = HashMap::new();
    // reduction combinations of the columns that own a pivot; absent means
    // the column was never combined with another
    let mut combos: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut pairs = Vec::new();
    let mut heap: BinaryHeap<Reverse<TriKey>> = BinaryHeap::new();

    for r in (0..edges.len() as u32).rev() {
        if merges[r as usize] {
            continue;
        }
        let birth = edges[r as usize].0;
        let (i, j) = endpoints(r);

        // Cheap first pass: the unreduced pivot is the smallest cofacet.
        let Some(first) = index.min_cofacet(i, j, r) else {
            pairs.push(PersistencePair::new(1, birth, T::infinity()));
            continue;
        };
        if !owner.contains_key(&first) {
            owner.insert(first, r);
            let death = edges[first.0 as usize].0;
            if death > birth {
                pairs.push(PersistencePair::new(1, birth, death));
            }
            continue;
        }

        heap.clear();
        index.for_each_cofacet(i, j, r, |key| heap.push(Reverse(key)));
        let mut combo = vec![r];
        loop {
            match pop_pivot(&mut heap) {
                None => {
                    pairs.push(PersistencePair::new(1, birth, T::infinity()));
                    break;
                }
                Some(pivot) => match owner.get(&pivot) {
                    Some(&other) => {
                        heap.push(Reverse(pivot));
                        let trivial = [other];
                        let members = combos.get(&other).map_or(&trivial[..], |c| c.as_slice());
                        for &e in members {
                            combo.push(e);
                            let (a, b) = endpoints(e);
                            index.for_each_cofacet(a, b, e, |key| heap.push(Reverse(key)));
                        }
                    }
                    None => {
                        owner.insert(pivot, r);
                        let combo = reduce_mod2(combo);
                        if combo != [r] {
                            combos.insert(r, combo);
                        }
                        let death = edges[pivot.0 as usize].0;
                        if death > birth {
                            pairs.push(PersistencePair::new(1, birth, death));
                        }
                        break;
                    }
                },
            }
        }
    }
    pairs
}

/// Keeps the entries that occur an odd number of times.
fn reduce_mod2(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut k = 0;
    while k < v.len() {
        let mut m = k;
        while m < v.len() && v[m] == v[k] {
            m += 1;
        }
        if (m - k) % 2 == 1 {
            out.push(v[k]);
        }
        k = m;
    }
    out
}
