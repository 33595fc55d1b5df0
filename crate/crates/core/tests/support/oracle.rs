//! Brute-force reference implementations used only by tests.

#![allow(dead_code)]

use swtest_core::{DistanceMatrix, PersistenceDiagram, PersistencePair};

/// Enumerates every vertex, edge and triangle, sorts the whole filtration by
/// (value, dimension, vertices), and runs the textbook left-to-right column
/// reduction on the full boundary matrix over Z/2. Returns the sorted list
/// of nonzero-persistence pairs in dimensions 0 and 1.
pub fn naive_rips_pairs(dm: &DistanceMatrix) -> Vec<(u8, f64, f64)> {
    let n = dm.len();
    let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in 0..n {
        simplices.push((0.0, vec![i]));
    }
    for i in 0..n {
        for j in i + 1..n {
            simplices.push((dm.get(i, j), vec![i, j]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                simplices.push((v, vec![i, j, k]));
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });
    let position: std::collections::HashMap<Vec<usize>, usize> = simplices
        .iter()
        .enumerate()
        .map(|(k, s)| (s.1.clone(), k))
        .collect();

    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|(_, s)| {
            let mut col: Vec<usize> = if s.len() == 1 {
                vec![]
            } else {
                (0..s.len())
                    .map(|drop| {
                        let face: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, &v)| v).collect();
                        position[&face]
                    })
                    .collect()
            };
            col.sort_unstable();
            col
        })
        .collect();

    let mut low_owner: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut pairs = Vec::new();
    let mut paired = vec![false; simplices.len()];
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&other) => {
                    let add = columns[other].clone();
                    columns[j] = symmetric_difference(&columns[j], &add);
                }
                None => {
                    low_owner.insert(low, j);
                    break;
                }
            }
        }
        if let Some(&low) = columns[j].last() {
            paired[low] = true;
            paired[j] = true;
            let dim = (simplices[low].1.len() - 1) as u8;
            let (b, d) = (simplices[low].0, simplices[j].0);
            if d > b {
                pairs.push((dim, b, d));
            }
        }
    }
    for (k, (v, s)) in simplices.iter().enumerate() {
        // triangles can be unpaired (they would pair with tetrahedra)
        if !paired[k] && s.len() <= 2 {
            pairs.push(((s.len() - 1) as u8, *v, f64::INFINITY));
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn diagram_pairs(d: &PersistenceDiagram) -> Vec<(u8, f64, f64)> {
    let mut v: Vec<(u8, f64, f64)> = d.points.iter().map(|p: &PersistencePair| (p.dim, p.birth, p.death)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Every size-`b` subset of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, b: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, b: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == b {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < b - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, b, &mut Vec::new(), &mut out);
    out
}

/// Exact radius `2 L^{-1}(alpha)` from all subsets, with the Hausdorff
/// distance computed by direct min/max over the point coordinates.
pub fn exhaustive_radius(cloud: &swtest_core::PointCloud, b: usize, alpha: f64) -> f64 {
    let n = cloud.len();
    let dist = |i: usize, j: usize| -> f64 {
        cloud
            .point(i)
            .iter()
            .zip(cloud.point(j))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut values: Vec<f64> = all_subsets(n, b)
        .iter()
        .map(|s| {
            (0..n)
                .map(|i| s.iter().map(|&j| dist(i, j)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        })
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // smallest t such that the fraction of values strictly above t is <= alpha
    let total = values.len() as f64;
    for &t in &values {
        let above = values.iter().filter(|&&v| v > t).count() as f64;
        if above / total <= alpha {
            return 2.0 * t;
        }
    }
    unreachable!()
}
