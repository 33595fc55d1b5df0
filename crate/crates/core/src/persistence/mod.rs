//! Vietoris-Rips persistent homology in dimensions 0 and 1, bottleneck
//! distance, and diagram serialization.
//!
//! Filtration values follow the max-edge-length convention: a simplex enters
//! at the length of its longest edge. With the Čech filtration indexed by
//! ball diameter this gives `Cech(r) ⊆ Rips(r) ⊆ Cech(2r)`, so Rips diagrams
//! are stable under a perturbation of Hausdorff size `eps` up to bottleneck
//! distance `2 eps`.

mod bottleneck;
mod rips;
mod union_find;

use std::io::{Read, Write};

use serde::Serialize;

use crate::embedding::CloudTag;
use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::scalar::{cmp_scalar, Scalar};

pub use bottleneck::bottleneck_distance;
pub use rips::rips_persistence;
pub use union_find::UnionFind;

/// Point count above which [`FiltrationSpec::default_for`] caps the
/// filtration at half the diameter.
pub const FULL_FILTRATION_MAX_POINTS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencePair<T: Scalar = f64> {
    pub dim: u8,
    pub birth: T,
    /// `+inf` for essential classes.
    pub death: T,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn new(dim: u8, birth: T, death: T) -> Self {
        Self { dim, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }
}

/// Which homology dimensions to compute and how far to grow the complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationSpec<T: Scalar = f64> {
    /// 0 for components only, 1 to add loops.
    pub max_dim: u8,
    /// Longest edge admitted; `+inf` for the full filtration.
    pub threshold: T,
}

impl<T: Scalar> FiltrationSpec<T> {
    pub fn full(max_dim: u8) -> Self {
        Self {
            max_dim,
            threshold: T::infinity(),
        }
    }

    pub fn with_threshold(max_dim: u8, threshold: T) -> Result<Self> {
        if !(threshold >= T::zero()) {
            return Err(Error::invalid("filtration threshold must be >= 0"));
        }
        Ok(Self { max_dim, threshold })
    }

    /// Full filtration up to [`FULL_FILTRATION_MAX_POINTS`] points, half the
    /// diameter beyond that.
    pub fn default_for(dm: &DistanceMatrix<T>) -> Self {
        if dm.len() <= FULL_FILTRATION_MAX_POINTS {
            Self::full(1)
        } else {
            Self {
                max_dim: 1,
                threshold: dm.max_distance() / (T::one() + T::one()),
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.threshold.is_infinite()
    }
}

/// Multiset of birth/death pairs. Zero-persistence pairs are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T: Scalar = f64> {
    pub points: Vec<PersistencePair<T>>,
    /// Tag of the cloud the diagram was computed from.
    pub scale_tag: CloudTag,
    /// Edge-length cap used to build the diagram (`+inf` when full).
    pub threshold: T,
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn new(points: Vec<PersistencePair<T>>, scale_tag: CloudTag) -> Self {
        Self {
            points,
            scale_tag,
            threshold: T::infinity(),
        }
    }

    pub fn in_dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    /// Points sorted by dimension, then birth, then death.
    pub fn sorted(&self) -> Vec<PersistencePair<T>> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then_with(|| cmp_scalar(&a.birth, &b.birth))
                .then_with(|| cmp_scalar(&a.death, &b.death))
        });
        pts
    }

    /// Finite points of `dim` ordered by decreasing persistence.
    pub fn most_persistent(&self, dim: u8) -> Vec<PersistencePair<T>> {
        let mut pts: Vec<_> = self.in_dim(dim).filter(|p| !p.is_essential()).copied().collect();
        pts.sort_by(|a, b| cmp_scalar(&b.persistence(), &a.persistence()));
        pts
    }

    /// Writes `dim,birth,death` rows; essential classes use `inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dim,birth,death")?;
        for p in self.sorted() {
            let death = if p.is_essential() {
                "inf".to_string()
            } else {
                p.death.to_string()
            };
            writeln!(out, "{},{},{}", p.dim, p.birth, death)?;
        }
        Ok(())
    }

    pub fn from_csv_reader<R: Read>(reader: R, scale_tag: CloudTag) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if row == 0 && record.get(0) == Some("dim") {
                continue;
            }
            if record.len() != 3 {
                return Err(Error::Parse(format!("row {}: expected dim,birth,death", row + 1)));
            }
            let bad = || Error::Parse(format!("row {}: unparsable entry", row + 1));
            let dim: u8 = record[0].parse().map_err(|_| bad())?;
            let birth: f64 = record[1].parse().map_err(|_| bad())?;
            let death: f64 = match &record[2] {
                "inf" | "Inf" | "+inf" => f64::INFINITY,
                s => s.parse().map_err(|_| bad())?,
            };
            points.push(PersistencePair::new(dim, T::from_f64_lossy(birth), T::from_f64_lossy(death)));
        }
        Ok(Self::new(points, scale_tag))
    }
}

/// Largest `death - birth` over finite points of `dim`; 0 if there are none.
pub fn max_persistence<T: Scalar>(diagram: &PersistenceDiagram<T>, dim: u8) -> T {
    diagram
        .in_dim(dim)
        .filter(|p| !p.is_essential())
        .map(|p| p.persistence())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_persistence_examples() {
        let empty = PersistenceDiagram::<f64>::new(vec![], CloudTag::Raw);
        assert_eq!(max_persistence(&empty, 1), 0.0);

        let sq = PersistenceDiagram::new(vec![PersistencePair::new(1, 1.0, 2f64.sqrt())], CloudTag::Raw);
        assert_eq!(max_persistence(&sq, 1), 2f64.sqrt() - 1.0);

        let mut with_zero = sq.clone();
        with_zero.points.push(PersistencePair::new(1, 0.5, 0.5));
        with_zero.points.push(PersistencePair::new(1, 0.0, f64::INFINITY));
        assert_eq!(max_persistence(&with_zero, 1), max_persistence(&sq, 1));
        assert_eq!(max_persistence(&sq, 0), 0.0);
    }

    #[test]
    fn csv_round_trip_with_inf() {
        let d = PersistenceDiagram::new(
            vec![
                PersistencePair::new(0, 0.0, f64::INFINITY),
                PersistencePair::new(0, 0.0, 1.5),
                PersistencePair::new(1, 1.0, 1.25),
            ],
            CloudTag::Scaled,
        );
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dim,birth,death\n0,0,1.5\n0,0,inf\n"));
        let back = PersistenceDiagram::<f64>::from_csv_reader(buf.as_slice(), CloudTag::Scaled).unwrap();
        assert_eq!(back.sorted(), d.sorted());
    }
}
