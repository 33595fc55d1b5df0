//! Sliding-window (time-delay) embeddings and the pointwise maps applied to
//! them: scaling by `1/sqrt(dim)` and centralize-then-normalize.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{FunctionSpec, SampledSignal};

/// Norm at or below which a centralized window counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Anything that can be evaluated at an arbitrary time.
pub trait Signal1d {
    fn value_at(&self, t: f64) -> f64;
}

impl Signal1d for SampledSignal {
    fn value_at(&self, t: f64) -> f64 {
        self.interpolate(t)
    }
}

impl Signal1d for FunctionSpec {
    fn value_at(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

impl<F: Fn(f64) -> f64> Signal1d for F {
    fn value_at(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CloudTag {
    Raw,
    Scaled,
    CentralizedNormalized,
}

/// Post-processing applied to a raw embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PostProcess {
    /// Divide every coordinate by `sqrt(dim)`.
    Scaled,
    /// Subtract the coordinate mean, then project to the unit sphere.
    CentralizedNormalized,
}

impl PostProcess {
    pub fn tag(self) -> CloudTag {
        match self {
            PostProcess::Scaled => CloudTag::Scaled,
            PostProcess::CentralizedNormalized => CloudTag::CentralizedNormalized,
        }
    }
}

/// Delay `2 pi / (L (2N + 1))`: with `2N` delays the window covers one
/// period of an `L`-periodic signal up to a single step.
pub fn tau_schedule(half_dim: usize, frequency: f64) -> Result<f64> {
    if half_dim < 1 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if !(frequency >= 1.0 && frequency.is_finite()) {
        return Err(Error::invalid(format!("L must be >= 1, got {frequency}")));
    }
    Ok(2.0 * PI / (frequency * (2 * half_dim + 1) as f64))
}

/// Embedding parameters: ambient dimension `2N + 1`, `2N` delays of `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// N; the window holds `2N + 1` samples.
    pub half_dim: usize,
    /// L, periods per `2 pi`. `None` when `tau` was set directly.
    pub frequency: Option<f64>,
    pub tau: f64,
}

impl EmbeddingParams {
    pub fn from_schedule(half_dim: usize, frequency: f64) -> Result<Self> {
        Ok(Self {
            half_dim,
            frequency: Some(frequency),
            tau: tau_schedule(half_dim, frequency)?,
        })
    }

    pub fn with_tau(half_dim: usize, tau: f64) -> Result<Self> {
        if half_dim < 1 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be > 0, got {tau}")));
        }
        Ok(Self {
            half_dim,
            frequency: None,
            tau,
        })
    }

    /// M = 2N, the number of delays.
    pub fn window_count(&self) -> usize {
        2 * self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim + 1
    }

    /// Time covered by one window, `M tau`.
    pub fn window_span(&self) -> f64 {
        self.window_count() as f64 * self.tau
    }
}

/// Finite point set in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Scalar = f64> {
    dim: usize,
    coords: Vec<T>,
    tag: CloudTag,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(dim: usize, coords: Vec<T>, tag: CloudTag) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords, tag })
    }

    pub fn from_points(points: &[Vec<T>], tag: CloudTag) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("empty point list"))?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::invalid(format!(
                "point of length {} in a cloud of dimension {dim}",
                p.len()
            )));
        }
        Self::new(dim, points.concat(), tag)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn tag(&self) -> CloudTag {
        self.tag
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Sub-cloud with the given point indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid(format!("point index {i} out of range {}", self.len())));
            }
            coords.extend_from_slice(self.point(i));
        }
        Self::new(self.dim, coords, self.tag)
    }

    /// Same cloud in another scalar type.
    pub fn cast<U: Scalar>(&self) -> PointCloud<U> {
        PointCloud {
            dim: self.dim,
            coords: self.coords.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect(),
            tag: self.tag,
        }
    }

    /// One row per point, comma separated, no header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Little-endian `f64` coordinates, row-major, no header.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.coords
            .iter()
            .flat_map(|x| x.to_f64_lossy().to_le_bytes())
            .collect()
    }

    pub fn from_le_bytes(bytes: &[u8], dim: usize, tag: CloudTag) -> Result<Self> {
        if bytes.len() % 8 != 0 {
            return Err(Error::Parse(format!("{} bytes is not a whole number of f64", bytes.len())));
        }
        let coords = bytes
            .chunks_exact(8)
            .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
            .collect();
        Self::new(dim, coords, tag)
    }
}

/// Sample times `t` whose whole window `t + M tau` stays inside the observed
/// range, so no embedding coordinate relies on end-point clamping.
pub fn admissible_base_times(signal: &SampledSignal, params: &EmbeddingParams) -> Vec<f64> {
    let last = signal.times()[signal.len() - 1];
    let span = params.window_span();
    signal
        .times()
        .iter()
        .copied()
        .filter(|&t| t + span <= last)
        .collect()
}

/// One `(M + 1)`-dimensional point per base time; coordinate `j` is the
/// signal at `t + j tau`.
pub fn sliding_window<T: Scalar, S: Signal1d + ?Sized>(
    signal: &S,
    base_times: &[f64],
    window_count: usize,
    tau: f64,
) -> Result<PointCloud<T>> {
    if base_times.is_empty() {
        return Err(Error::invalid("no base times to embed"));
    }
    if window_count < 1 {
        return Err(Error::invalid("window count M must be at least 1"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be > 0, got {tau}")));
    }
    let dim = window_count + 1;
    let mut coords = Vec::with_capacity(base_times.len() * dim);
    for &t in base_times {
        coords.extend((0..dim).map(|j| T::from_f64_lossy(signal.value_at(t + j as f64 * tau))));
    }
    PointCloud::new(dim, coords, CloudTag::Raw)
}

/// Embeds `signal` at its admissible base times.
pub fn embed_signal<T: Scalar>(signal: &SampledSignal, params: &EmbeddingParams) -> Result<PointCloud<T>> {
    let base = admissible_base_times(signal, params);
    if base.is_empty() {
        return Err(Error::invalid(format!(
            "window span {:.4} exceeds the observed time range {:.4}",
            params.window_span(),
            signal.span()
        )));
    }
    sliding_window(signal, &base, params.window_count(), params.tau)
}

/// Removes the projection onto the all-ones vector.
pub fn centralize<T: Scalar>(x: &[T]) -> Vec<T> {
    if x.is_empty() {
        return Vec::new();
    }
    let mean = x.iter().fold(T::zero(), |acc, &v| acc + v) / T::from_usize_lossy(x.len());
    x.iter().map(|&v| v - mean).collect()
}

fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

/// Projects to the unit sphere; vectors with norm at or below
/// [`DEGENERACY_THRESHOLD`] are rejected.
pub fn normalize<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    let n = norm(x);
    if !(n.to_f64_lossy() > DEGENERACY_THRESHOLD) {
        return Err(Error::DegeneratePoint {
            index: 0,
            norm: n.to_f64_lossy(),
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    Ok(x.iter().map(|&v| v / n).collect())
}

/// Applies `mode` to every point of a raw cloud. Degenerate windows are
/// reported with their index in the cloud.
pub fn postprocess<T: Scalar>(cloud: &PointCloud<T>, mode: PostProcess) -> Result<PointCloud<T>> {
    if cloud.tag() != CloudTag::Raw {
        return Err(Error::invalid(format!(
            "post-processing expects a raw cloud, got {:?}",
            cloud.tag()
        )));
    }
    let dim = cloud.dim();
    let mut coords = cloud.coords().to_vec();
    match mode {
        PostProcess::Scaled => {
            let s = T::from_usize_lossy(dim).sqrt();
            coords.par_iter_mut().for_each(|x| *x = *x / s);
        }
        PostProcess::CentralizedNormalized => {
            coords
                .par_chunks_mut(dim)
                .enumerate()
                .try_for_each(|(i, p)| -> Result<()> {
                    let c = centralize(p);
                    let u = normalize(&c).map_err(|e| match e {
                        Error::DegeneratePoint { norm, threshold, .. } => Error::DegeneratePoint {
                            index: i,
                            norm,
                            threshold,
                        },
                        other => other,
                    })?;
                    p.copy_from_slice(&u);
                    Ok(())
                })?;
        }
    }
    PointCloud::new(dim, coords, mode.tag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_values() {
        assert_relative_eq!(tau_schedule(1, 1.0).unwrap(), 2.0 * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(tau_schedule(10, 1.0).unwrap(), 2.0 * PI / 21.0, max_relative = 1e-12);
        assert_relative_eq!(tau_schedule(10, 2.0).unwrap(), PI / 21.0, max_relative = 1e-12);
        assert!(tau_schedule(0, 1.0).is_err());
        assert!(tau_schedule(3, 0.5).is_err());
        let p = EmbeddingParams::from_schedule(10, 1.0).unwrap();
        assert_eq!((p.window_count(), p.dim()), (20, 21));
    }

    #[test]
    fn embeds_linear_and_constant_functions() {
        let s = SampledSignal::new((0..10).map(f64::from).collect(), (0..10).map(f64::from).collect()).unwrap();
        let c: PointCloud = sliding_window(&s, &[0.0], 2, 1.0).unwrap();
        assert_eq!(c.point(0), &[0.0, 1.0, 2.0]);
        assert_eq!(c.tag(), CloudTag::Raw);

        let k = s.map_values(|_| 4.0);
        let c: PointCloud = sliding_window(&k, &[0.5, 1.5, 3.0], 3, 0.7).unwrap();
        assert!(c.coords().iter().all(|&x| x == 4.0));

        assert!(sliding_window::<f64, _>(&s, &[], 2, 1.0).is_err());
    }

    #[test]
    fn embeds_cosine_within_interpolation_error() {
        let n = 20_000;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 4.0 * PI / (n - 1) as f64).collect();
        let s = SampledSignal::new(times.clone(), times.iter().map(|t| t.cos()).collect()).unwrap();
        let c: PointCloud = sliding_window(&s, &[0.0], 2, 2.0 * PI / 3.0).unwrap();
        for (got, want) in c.point(0).iter().zip([1.0, -0.5, -0.5]) {
            assert!((got - want).abs() < 1e-3);
        }
    }

    #[test]
    fn base_times_respect_window() {
        let s = SampledSignal::new((0..=20).map(f64::from).collect(), vec![1.0; 21]).unwrap();
        let p = EmbeddingParams::with_tau(2, 1.25).unwrap();
        let base = admissible_base_times(&s, &p);
        assert_eq!(base.last(), Some(&15.0));
        assert_eq!(base.len(), 16);
    }

    #[test]
    fn centralize_and_normalize() {
        assert_eq!(centralize(&[1.0, 2.0, 3.0]), vec![-1.0, 0.0, 1.0]);
        assert!(centralize(&[2.5; 7]).iter().all(|&x| x == 0.0));
        let n = normalize(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(n[0], 0.6);
        assert_relative_eq!(n[1], 0.8);
        assert_eq!(normalize(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(normalize(&[0.0f64; 3]), Err(Error::DegeneratePoint { .. })));
    }

    #[test]
    fn scaled_divides_by_root_dim() {
        let pts: Vec<Vec<f64>> = (1..4).map(|k| vec![3.0 * k as f64; 3]).collect();
        let c = PointCloud::from_points(&pts, CloudTag::Raw).unwrap();
        let s = postprocess(&c, PostProcess::Scaled).unwrap();
        assert_eq!(s.tag(), CloudTag::Scaled);
        for (a, b) in s.coords().iter().zip(c.coords()) {
            assert_relative_eq!(*a, b / 3f64.sqrt(), max_relative = 1e-15);
        }
        assert!(postprocess(&s, PostProcess::Scaled).is_err());
    }

    #[test]
    fn degenerate_index_is_reported() {
        let pts = vec![vec![1.0, 2.0, 0.0], vec![5.0, 5.0, 5.0], vec![0.0, 1.0, 0.0]];
        let c = PointCloud::from_points(&pts, CloudTag::Raw).unwrap();
        match postprocess(&c, PostProcess::CentralizedNormalized) {
            Err(Error::DegeneratePoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected degenerate point, got {other:?}"),
        }
    }

    #[test]
    fn binary_and_csv_layouts() {
        let pts = vec![vec![1.0, -2.5], vec![0.125, 4.0]];
        let c = PointCloud::from_points(&pts, CloudTag::Scaled).unwrap();
        let bytes = c.to_le_bytes();
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[8..16], &(-2.5f64).to_le_bytes());
        assert_eq!(PointCloud::<f64>::from_le_bytes(&bytes, 2, CloudTag::Scaled).unwrap(), c);
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1,-2.5\n0.125,4\n");
        assert!(PointCloud::<f64>::from_le_bytes(&bytes[..30], 2, CloudTag::Raw).is_err());
    }

    #[test]
    fn f32_clouds_work() {
        let s = SampledSignal::new((0..50).map(f64::from).collect(), (0..50).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap();
        let p = EmbeddingParams::with_tau(3, 1.0).unwrap();
        let c: PointCloud<f32> = embed_signal(&s, &p).unwrap();
        let cn = postprocess(&c, PostProcess::CentralizedNormalized).unwrap();
        for pt in cn.points() {
            let n: f32 = pt.iter().map(|x| x * x).sum::<f32>().sqrt();
            assert!((n - 1.0).abs() < 1e-5);
        }
    }
}
