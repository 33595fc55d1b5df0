//! Euclidean distance matrices and Hausdorff distances.

use rayon::prelude::*;

use crate::embedding::{CloudTag, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric distance matrix with zero diagonal, stored as the strict upper
/// triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T: Scalar = f64> {
    n: usize,
    condensed: Vec<T>,
    tag: CloudTag,
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

#[inline]
pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    sq_dist(a, b).sqrt()
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds a matrix from the strict upper triangle, row-major.
    pub fn from_condensed(n: usize, condensed: Vec<T>, tag: CloudTag) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("distance matrix needs at least one point"));
        }
        if condensed.len() != n * (n - 1) / 2 {
            return Err(Error::invalid(format!(
                "{} entries do not form a condensed {n}x{n} matrix",
                condensed.len()
            )));
        }
        if condensed.iter().any(|d| !(*d >= T::zero()) || !d.is_finite()) {
            return Err(Error::invalid("distances must be finite and nonnegative"));
        }
        Ok(Self { n, condensed, tag })
    }

    /// Full square matrix input; only the upper triangle is read.
    pub fn from_square(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut condensed = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("distance matrix must be square"));
            }
            condensed.extend_from_slice(&row[i + 1..]);
        }
        Self::from_condensed(n, condensed, CloudTag::Raw)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tag(&self) -> CloudTag {
        self.tag
    }

    pub fn condensed(&self) -> &[T] {
        &self.condensed
    }

    /// Position of `(i, j)`, `i < j`, in the condensed storage.
    #[inline]
    pub fn condensed_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.condensed[self.condensed_index(i, j)],
            std::cmp::Ordering::Greater => self.condensed[self.condensed_index(j, i)],
            std::cmp::Ordering::Equal => T::zero(),
        }
    }

    pub fn max_distance(&self) -> T {
        self.condensed.iter().fold(T::zero(), |m, &d| m.max(d))
    }
}

/// Pairwise Euclidean distances of a cloud.
pub fn pairwise_distances<T: Scalar>(cloud: &PointCloud<T>) -> Result<DistanceMatrix<T>> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::invalid("cannot build distances of an empty cloud"));
    }
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            (i + 1..n).map(|j| euclidean(p, cloud.point(j))).collect()
        })
        .collect();
    Ok(DistanceMatrix {
        n,
        condensed: rows.concat(),
        tag: cloud.tag(),
    })
}

fn directed_hausdorff<T: Scalar>(from: &PointCloud<T>, to: &PointCloud<T>) -> T {
    from.points()
        .map(|a| {
            to.points()
                .map(|b| sq_dist(a, b))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max)
        .sqrt()
}

/// Symmetric Hausdorff distance between two finite clouds.
pub fn hausdorff<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Hausdorff distance of an empty cloud"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Hausdorff distance between the full cloud behind `dm` and the sub-cloud
/// indexed by `subset`. Because the subset is contained in the cloud this is
/// the one-sided `max_i min_{j in subset} d(i, j)`.
pub fn hausdorff_to_subset<T: Scalar>(dm: &DistanceMatrix<T>, subset: &[usize]) -> Result<T> {
    if subset.is_empty() {
        return Err(Error::invalid("empty subset"));
    }
    let n = dm.len();
    let mut member = vec![false; n];
    for &j in subset {
        if j >= n {
            return Err(Error::invalid(format!("subset index {j} out of range {n}")));
        }
        member[j] = true;
    }
    Ok(subset_distance_unchecked(dm, subset, &member))
}

/// `member[j]` must be true exactly for the indices in `subset`.
pub(crate) fn subset_distance_unchecked<T: Scalar>(dm: &DistanceMatrix<T>, subset: &[usize], member: &[bool]) -> T {
    let mut worst = T::zero();
    for i in 0..dm.len() {
        if member[i] {
            continue;
        }
        let mut best = T::infinity();
        for &j in subset {
            let d = dm.get(i, j);
            if d < best {
                best = d;
                // cannot raise the running max any more
                if best <= worst {
                    break;
                }
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn cloud(points: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_points(points, CloudTag::Raw).unwrap()
    }

    fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
        let mut rng = rng_from_seed(seed);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        cloud(&pts)
    }

    #[test]
    fn small_matrices() {
        let dm = pairwise_distances(&cloud(&[vec![0.0, 0.0]])).unwrap();
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
        let dm = pairwise_distances(&cloud(&[vec![0.0, 0.0], vec![3.0, 4.0]])).unwrap();
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.get(1, 0), 5.0);
    }

    #[test]
    fn matrix_matches_per_pair_recomputation() {
        let c = random_cloud(10, 4, 1);
        let dm = pairwise_distances(&c).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let direct: f64 = c
                    .point(i)
                    .iter()
                    .zip(c.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert_eq!(dm.get(i, j), direct);
            }
        }
        // triangle inequality spot check
        for (i, j, k) in [(0, 1, 2), (3, 7, 9), (4, 5, 8)] {
            assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-12);
        }
    }

    #[test]
    fn hausdorff_examples() {
        let x = random_cloud(6, 3, 2);
        assert_eq!(hausdorff(&x, &x).unwrap(), 0.0);
        assert_eq!(hausdorff(&cloud(&[vec![0.0]]), &cloud(&[vec![3.0]])).unwrap(), 3.0);
        let a = cloud(&[vec![0.0], vec![1.0], vec![2.0]]);
        let b = cloud(&[vec![0.0], vec![2.0]]);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        assert!(hausdorff(&a, &cloud(&[vec![0.0, 1.0]])).is_err());
    }

    #[test]
    fn subset_examples() {
        let path = cloud(&[vec![0.0], vec![1.0], vec![2.0]]);
        let dm = pairwise_distances(&path).unwrap();
        assert_eq!(hausdorff_to_subset(&dm, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(hausdorff_to_subset(&dm, &[0]).unwrap(), 2.0);
        assert!(hausdorff_to_subset(&dm, &[]).is_err());
        assert!(hausdorff_to_subset(&dm, &[3]).is_err());
    }

    #[test]
    fn subset_form_matches_general_hausdorff() {
        let mut rng = rng_from_seed(99);
        for seed in 0..50 {
            let c = random_cloud(12, 3, seed);
            let dm = pairwise_distances(&c).unwrap();
            let b = rng.random_range(1..=12);
            let subset = rand::seq::index::sample(&mut rng, 12, b).into_vec();
            let via_matrix = hausdorff_to_subset(&dm, &subset).unwrap();
            let general = hausdorff(&c, &c.select(&subset).unwrap()).unwrap();
            assert!((via_matrix - general).abs() < 1e-12);
        }
    }
}
