//! Exact bottleneck distance: binary search over the finite set of candidate
//! costs with a Hopcroft-Karp perfect-matching test at each step.

use std::collections::VecDeque;

use super::{PersistenceDiagram, PersistencePair};
use crate::scalar::{cmp_scalar, Scalar};

#[inline]
fn linf<T: Scalar>(a: &PersistencePair<T>, b: &PersistencePair<T>) -> T {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Cost of sending a point to the diagonal.
#[inline]
fn to_diagonal<T: Scalar>(a: &PersistencePair<T>) -> T {
    (a.death - a.birth) / (T::one() + T::one())
}

/// Bottleneck distance between the `dim` parts of two diagrams.
///
/// Essential classes are matched among themselves by sorted birth; if the
/// two diagrams have different numbers of essential classes in `dim` the
/// distance is `+inf`.
pub fn bottleneck_distance<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>, dim: u8) -> T {
    let split = |d: &PersistenceDiagram<T>| {
        let mut finite = Vec::new();
        let mut essential = Vec::new();
        for p in d.in_dim(dim) {
            if p.is_essential() {
                essential.push(p.birth);
            } else if p.death > p.birth {
                finite.push(*p);
            }
        }
        essential.sort_by(cmp_scalar);
        (finite, essential)
    };
    let (fa, ea) = split(a);
    let (fb, eb) = split(b);
    if ea.len() != eb.len() {
        return T::infinity();
    }
    let essential_cost = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max);
    essential_cost.max(finite_bottleneck(&fa, &fb))
}

fn finite_bottleneck<T: Scalar>(a: &[PersistencePair<T>], b: &[PersistencePair<T>]) -> T {
    if a.is_empty() && b.is_empty() {
        return T::zero();
    }
    let mut candidates: Vec<T> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(T::zero());
    candidates.extend(a.iter().map(to_diagonal));
    candidates.extend(b.iter().map(to_diagonal));
    for p in a {
        for q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.sort_by(cmp_scalar);
    candidates.dedup();

    // the largest candidate (everything to the diagonal or better) is feasible
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Left side: points of `a`, then diagonal copies of `b`.
/// Right side: points of `b`, then diagonal copies of `a`.
fn perfect_matching_exists<T: Scalar>(a: &[PersistencePair<T>], b: &[PersistencePair<T>], r: T) -> bool {
    let (m, k) = (a.len(), b.len());
    let size = m + k;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            if linf(p, q) <= r {
                adj[i].push(j);
            }
        }
        if to_diagonal(p) <= r {
            adj[i].push(k + i);
        }
    }
    for (j, q) in b.iter().enumerate() {
        let left = m + j;
        if to_diagonal(q) <= r {
            adj[left].push(j);
        }
        // diagonal to diagonal is free
        adj[left].extend(k..k + m);
    }
    hopcroft_karp(&adj, size) == size
}

/// Maximum matching size in a bipartite graph given as left adjacency lists.
fn hopcroft_karp(adj: &[Vec<usize>], right_size: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left_size = adj.len();
    let mut match_left = vec![FREE; left_size];
    let mut match_right = vec![FREE; right_size];
    let mut dist = vec![0usize; left_size];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left_size {
            if match_left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_right[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }

        // DFS along layers, iterative to stay off the call stack
        let mut next_edge = vec![0usize; left_size];
        for start in 0..left_size {
            if match_left[start] != FREE {
                continue;
            }
            let mut stack = vec![start];
            let mut augmented = false;
            while let Some(&u) = stack.last() {
                if next_edge[u] >= adj[u].len() {
                    dist[u] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let v = adj[u][next_edge[u]];
                next_edge[u] += 1;
                let w = match_right[v];
                if w == FREE {
                    // flip the path recorded on the stack
                    let mut v_cur = v;
                    while let Some(x) = stack.pop() {
                        let prev = match_left[x];
                        match_left[x] = v_cur;
                        match_right[v_cur] = x;
                        v_cur = prev;
                    }
                    augmented = true;
                    break;
                } else if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
            if augmented {
                matched += 1;
            }
        }
    }
    matched
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::CloudTag;

    fn dgm(pts: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(
            pts.iter().map(|&(b, d)| PersistencePair::new(1, b, d)).collect(),
            CloudTag::Raw,
        )
    }

    /// Enumerates every partial matching; diagrams of up to three points.
    fn brute_force(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        fn rec(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
            if i == a.len() {
                let rest = b
                    .iter()
                    .zip(used.iter())
                    .filter(|(_, u)| !**u)
                    .map(|(q, _)| (q.1 - q.0) / 2.0)
                    .fold(0.0, f64::max);
                *best = best.min(cur.max(rest));
                return;
            }
            let p = a[i];
            rec(i + 1, a, b, used, cur.max((p.1 - p.0) / 2.0), best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    let c = (p.0 - b[j].0).abs().max((p.1 - b[j].1).abs());
                    rec(i + 1, a, b, used, cur.max(c), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn examples() {
        let d = dgm(&[(0.0, 4.0), (1.0, 2.0)]);
        assert_eq!(bottleneck_distance(&d, &d, 1), 0.0);
        assert_eq!(bottleneck_distance(&dgm(&[(0.0, 2.0)]), &dgm(&[]), 1), 1.0);
        assert_eq!(bottleneck_distance(&d, &dgm(&[(0.5, 4.0)]), 1), 0.5);
        assert_eq!(brute_force(&[(0.0, 4.0), (1.0, 2.0)], &[(0.5, 4.0)]), 0.5);
    }

    #[test]
    fn essential_mismatch_is_infinite() {
        let a = dgm(&[(0.0, f64::INFINITY)]);
        let b = dgm(&[(0.2, 1.0)]);
        assert!(bottleneck_distance(&a, &b, 1).is_infinite());
        let c = dgm(&[(0.5, f64::INFINITY), (0.2, 1.0)]);
        assert_eq!(bottleneck_distance(&a, &c, 1), 0.5);
    }

    #[test]
    fn matches_brute_force_on_small_diagrams() {
        use crate::rng::rng_from_seed;
        use rand::Rng;
        let mut rng = rng_from_seed(5);
        for _ in 0..300 {
            let na = rng.random_range(0..=3);
            let nb = rng.random_range(0..=3);
            let mut gen = |n: usize| -> Vec<(f64, f64)> {
                (0..n)
                    .map(|_| {
                        let b: f64 = rng.random_range(0.0..2.0);
                        (b, b + rng.random_range(0.01..2.0))
                    })
                    .collect()
            };
            let (a, b) = (gen(na), gen(nb));
            let got = bottleneck_distance(&dgm(&a), &dgm(&b), 1);
            let want = brute_force(&a, &b);
            assert!((got - want).abs() < 1e-12, "{a:?} {b:?}: {got} vs {want}");
            assert_eq!(got, bottleneck_distance(&dgm(&b), &dgm(&a), 1));
        }
    }
}
