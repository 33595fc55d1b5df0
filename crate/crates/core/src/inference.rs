//! Subsampling confidence radii for sliding-window persistence diagrams and
//! the periodicity decision built on them.
//!
//! For a cloud `X` of `n` points, draw `K` subsets of size `b`, record the
//! Hausdorff distance from each subset to `X`, and take the smallest `t` at
//! which at most an `alpha` fraction of the draws exceed `t`. Twice that
//! value is the radius `c`. A loop whose persistence exceeds `2c` cannot be
//! explained by a diagram within bottleneck distance `c` of the diagonal,
//! and the signal is declared periodic when at least one such loop exists.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{embed_signal, postprocess, CloudTag, EmbeddingParams, PointCloud, PostProcess};
use crate::error::{Error, Result};
use crate::geometry::{pairwise_distances, subset_distance_unchecked, DistanceMatrix};
use crate::persistence::{bottleneck_distance, rips_persistence, FiltrationSpec, PersistenceDiagram, PersistencePair};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::{cmp_scalar, Scalar};
use crate::signal::{denoise_moving_average, SampledSignal};

/// Monte-Carlo subsampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleConfig {
    /// Subsample size.
    pub b: usize,
    /// Number of Monte-Carlo draws K.
    pub draws: usize,
    pub alpha: f64,
    pub seed: u64,
}

pub const MIN_DRAWS: usize = 100;

impl SubsampleConfig {
    pub fn new(b: usize, draws: usize, alpha: f64, seed: u64) -> Result<Self> {
        let cfg = Self { b, draws, alpha, seed };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.b < 2 {
            return Err(Error::invalid(format!("subsample size b must be >= 2, got {}", self.b)));
        }
        if self.draws < MIN_DRAWS {
            return Err(Error::invalid(format!(
                "need at least {MIN_DRAWS} Monte-Carlo draws, got {}",
                self.draws
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Checks the config against a cloud of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.check()?;
        if self.b > n {
            return Err(Error::invalid(format!(
                "subsample size b = {} exceeds the {n} available points",
                self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundVariant {
    /// Radius for the diagram of the cloud scaled by `1/sqrt(dim)`.
    Scaled,
    /// Radius for the diagram of the centralized, normalized cloud.
    Normalized,
}

impl BoundVariant {
    pub fn matches(self, tag: CloudTag) -> bool {
        matches!(
            (self, tag),
            (BoundVariant::Scaled, CloudTag::Scaled) | (BoundVariant::Normalized, CloudTag::CentralizedNormalized)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Ambient dimension of the cloud.
    pub dim: usize,
    /// Number of points the subsets were drawn from.
    pub points: usize,
    pub b: usize,
    pub draws: usize,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceBound<T: Scalar = f64> {
    pub c_alpha: T,
    pub variant: BoundVariant,
    /// Hausdorff distance of every draw, in draw order, on the scale of the
    /// diagram the bound applies to.
    pub distances: Vec<T>,
    pub params: BoundParams,
}

impl<T: Scalar> ConfidenceBound<T> {
    /// Radius at another level, reusing the same draws.
    pub fn radius_at(&self, alpha: f64) -> T {
        let mut sorted = self.distances.clone();
        sorted.sort_by(cmp_scalar);
        let two = T::one() + T::one();
        two * exceedance_quantile(&sorted, alpha)
    }
}

/// Smallest `t` with at most `alpha * K` of the sorted values strictly above
/// it, i.e. the `ceil((1 - alpha) K)`-th order statistic.
pub fn exceedance_quantile<T: Scalar>(sorted: &[T], alpha: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let k = sorted.len();
    // the tolerance absorbs representation error in alpha * K
    let allowed = ((alpha * k as f64) + 1e-9).floor() as usize;
    let rank = k - allowed.min(k - 1);
    sorted[rank - 1]
}

/// Confidence radius for a post-processed cloud.
///
/// `Scaled` and `CentralizedNormalized` clouds use their own distances. A
/// `Raw` cloud yields the `Scaled` radius by dividing its distances by
/// `sqrt(dim)`, which is the same number computed the other way round.
pub fn confidence_bound<T: Scalar>(cloud: &PointCloud<T>, cfg: &SubsampleConfig) -> Result<ConfidenceBound<T>> {
    cfg.validate(cloud.len())?;
    let dm = pairwise_distances(cloud)?;
    confidence_bound_from_matrix(&dm, cloud.dim(), cfg)
}

/// As [`confidence_bound`], from a precomputed distance matrix whose tag
/// records how the cloud was post-processed.
pub fn confidence_bound_from_matrix<T: Scalar>(
    dm: &DistanceMatrix<T>,
    dim: usize,
    cfg: &SubsampleConfig,
) -> Result<ConfidenceBound<T>> {
    let n = dm.len();
    cfg.validate(n)?;
    let (variant, rescale) = match dm.tag() {
        CloudTag::Raw => (BoundVariant::Scaled, T::from_usize_lossy(dim).sqrt()),
        CloudTag::Scaled => (BoundVariant::Scaled, T::one()),
        CloudTag::CentralizedNormalized => (BoundVariant::Normalized, T::one()),
    };
    let distances: Vec<T> = (0..cfg.draws)
        .into_par_iter()
        .map_init(
            || vec![false; n],
            |member, k| {
                let mut rng = rng_from_seed(derive_seed(cfg.seed, k as u64));
                let subset = index::sample(&mut rng, n, cfg.b).into_vec();
                for &j in &subset {
                    member[j] = true;
                }
                let d = subset_distance_unchecked(dm, &subset, member);
                for &j in &subset {
                    member[j] = false;
                }
                d / rescale
            },
        )
        .collect();
    let mut sorted = distances.clone();
    sorted.sort_by(cmp_scalar);
    let two = T::one() + T::one();
    Ok(ConfidenceBound {
        c_alpha: two * exceedance_quantile(&sorted, cfg.alpha),
        variant,
        distances,
        params: BoundParams {
            dim,
            points: n,
            b: cfg.b,
            draws: cfg.draws,
            alpha: cfg.alpha,
            seed: cfg.seed,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome<T: Scalar = f64> {
    pub periodic: bool,
    pub bound: ConfidenceBound<T>,
    #[serde(skip)]
    pub diagram: Option<PersistenceDiagram<T>>,
    /// H1 points with persistence above `2 c`. Capped essential classes
    /// appear with `death` equal to the filtration threshold.
    pub significant: Vec<PersistencePair<T>>,
    /// Largest H1 persistences, descending (at most five).
    pub top_h1: Vec<T>,
    pub diagnostics: Vec<String>,
    pub embedding: Option<EmbeddingParams>,
}

/// Applies the `persistence > 2c` rule to the H1 part of `diagram`.
pub fn decide_periodicity<T: Scalar>(diagram: &PersistenceDiagram<T>, bound: &ConfidenceBound<T>) -> Result<TestOutcome<T>> {
    if !bound.variant.matches(diagram.scale_tag) {
        return Err(Error::invalid(format!(
            "a {:?} bound does not apply to a diagram of a {:?} cloud",
            bound.variant, diagram.scale_tag
        )));
    }
    let cutoff = (T::one() + T::one()) * bound.c_alpha;
    let mut significant = Vec::new();
    let mut diagnostics = Vec::new();
    let mut capped = 0;
    for p in diagram.in_dim(1) {
        if p.is_essential() {
            capped += 1;
            if diagram.threshold.is_finite() && diagram.threshold - p.birth > cutoff {
                significant.push(PersistencePair::new(1, p.birth, diagram.threshold));
            }
        } else if p.persistence() > cutoff {
            significant.push(*p);
        }
    }
    if capped > 0 {
        diagnostics.push(format!(
            "{capped} H1 class(es) still alive at the filtration threshold {}; death taken as the threshold",
            diagram.threshold
        ));
    }
    let mut top_h1: Vec<T> = diagram
        .in_dim(1)
        .map(|p| {
            if p.is_essential() {
                diagram.threshold - p.birth
            } else {
                p.persistence()
            }
        })
        .collect();
    top_h1.sort_by(|a, b| cmp_scalar(b, a));
    top_h1.truncate(5);
    Ok(TestOutcome {
        periodic: !significant.is_empty(),
        bound: bound.clone(),
        diagram: Some(diagram.clone()),
        significant,
        top_h1,
        diagnostics,
        embedding: None,
    })
}

/// Everything [`run_test`] needs besides the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSpec {
    pub embedding: EmbeddingParams,
    pub subsample: SubsampleConfig,
    pub mode: PostProcess,
    pub denoise: bool,
    /// Filtration cap; `None` picks [`FiltrationSpec::default_for`].
    pub threshold: Option<f64>,
}

/// Full pipeline: optional moving-average denoising, embedding at the
/// admissible base times, post-processing, confidence radius, Rips
/// persistence and the decision rule.
pub fn test_periodicity<T: Scalar>(
    signal: &SampledSignal,
    embedding: &EmbeddingParams,
    cfg: &SubsampleConfig,
    mode: PostProcess,
    denoise: bool,
) -> Result<TestOutcome<T>> {
    run_test(
        signal,
        &TestSpec {
            embedding: *embedding,
            subsample: *cfg,
            mode,
            denoise,
            threshold: None,
        },
    )
}

pub fn run_test<T: Scalar>(signal: &SampledSignal, spec: &TestSpec) -> Result<TestOutcome<T>> {
    let denoised;
    let signal = if spec.denoise {
        denoised = denoise_moving_average(signal)?;
        &denoised
    } else {
        signal
    };
    let raw: PointCloud<T> = embed_signal(signal, &spec.embedding)?;
    let cloud = postprocess(&raw, spec.mode).map_err(|e| match e {
        Error::DegeneratePoint { index, norm, threshold } => Error::InvalidArgument(format!(
            "window {index} (base time {:.6}) is flat after centralizing: norm {norm:e} <= {threshold:e}",
            crate::embedding::admissible_base_times(signal, &spec.embedding)[index]
        )),
        other => other,
    })?;
    let dm = pairwise_distances(&cloud)?;
    let bound = confidence_bound_from_matrix(&dm, cloud.dim(), &spec.subsample)?;
    let filtration = match spec.threshold {
        Some(t) => FiltrationSpec::with_threshold(1, T::from_f64_lossy(t))?,
        None => FiltrationSpec::default_for(&dm),
    };
    let diagram = rips_persistence(&dm, &filtration);
    let mut outcome = decide_periodicity(&diagram, &bound)?;
    outcome.embedding = Some(spec.embedding);
    Ok(outcome)
}

/// Per-N entry of a [`ConvergenceReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub half_dim: usize,
    pub tau: f64,
    pub points: usize,
    pub c_scaled: f64,
    pub c_normalized: f64,
    pub h1_max_persistence: f64,
    #[serde(skip)]
    pub diagram: PersistenceDiagram<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// `|c̄(N_{k+1}) - c̄(N_k)|`.
    pub normalized_steps: Vec<f64>,
    /// `|c(N_k) - c̄(N_k)|`.
    pub scaled_vs_normalized: Vec<f64>,
    /// Bottleneck distance between successive H1 diagrams of the
    /// centralized, normalized clouds.
    pub diagram_steps: Vec<f64>,
    /// Least-squares slopes of the three sequences against N on log-log
    /// axes (successive differences are placed at the smaller N).
    pub slopes: ConvergenceSlopes,
    /// Mean and root-mean-square used to standardize the signal.
    pub signal_mean: f64,
    pub signal_rms: f64,
    /// Estimated `|f̂(m)|`, m = 1..=20, at harmonics of the target frequency.
    pub fourier_magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSlopes {
    pub normalized_steps: f64,
    pub scaled_vs_normalized: f64,
    pub diagram_steps: f64,
}

/// Trapezoid mean and root-mean-square of the interpolant over the observed
/// span.
pub fn standardization(signal: &SampledSignal) -> (f64, f64) {
    let t = signal.times();
    let v = signal.values();
    let span = signal.span();
    let trap = |g: &dyn Fn(usize) -> f64| -> f64 {
        (1..t.len()).map(|k| 0.5 * (g(k - 1) + g(k)) * (t[k] - t[k - 1])).sum::<f64>() / span
    };
    let mean = trap(&|k| v[k]);
    // exact integral of the squared linear interpolant on each segment
    let var = (1..t.len())
        .map(|k| {
            let (a, b) = (v[k - 1] - mean, v[k] - mean);
            (a * a + a * b + b * b) / 3.0 * (t[k] - t[k - 1])
        })
        .sum::<f64>()
        / span;
    (mean, var.sqrt())
}

/// Magnitudes of the first `count` Fourier coefficients at harmonics of
/// `frequency`, by trapezoid quadrature over the observed span.
pub fn fourier_magnitudes(signal: &SampledSignal, frequency: f64, count: usize) -> Vec<f64> {
    let t = signal.times();
    let v = signal.values();
    let span = signal.span();
    (1..=count)
        .map(|m| {
            let w = m as f64 * frequency;
            let (mut re, mut im) = (0.0, 0.0);
            for k in 1..t.len() {
                let h = 0.5 * (t[k] - t[k - 1]);
                let (s0, c0) = (w * t[k - 1]).sin_cos();
                let (s1, c1) = (w * t[k]).sin_cos();
                re += h * (v[k - 1] * c0 + v[k] * c1);
                im -= h * (v[k - 1] * s0 + v[k] * s1);
            }
            (re * re + im * im).sqrt() / span
        })
        .collect()
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Tracks the scaled and normalized radii and the normalized H1 diagram as
/// the embedding dimension grows.
///
/// The signal is first standardized to zero mean and unit mean square over
/// its observed span. All N share the base times admissible for the largest
/// window, so only the embedding changes from row to row.
pub fn convergence_probe(
    signal: &SampledSignal,
    frequency: f64,
    half_dims: &[usize],
    cfg: &SubsampleConfig,
) -> Result<ConvergenceReport> {
    if half_dims.len() < 2 {
        return Err(Error::invalid("the probe needs at least two values of N"));
    }
    if half_dims.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("values of N must be ascending"));
    }
    let (mean, rms) = standardization(signal);
    if !(rms > 0.0) {
        return Err(Error::invalid("constant signal cannot be standardized"));
    }
    let standardized = signal.map_values(|v| (v - mean) / rms);

    let params: Vec<EmbeddingParams> = half_dims
        .iter()
        .map(|&n| EmbeddingParams::from_schedule(n, frequency))
        .collect::<Result<_>>()?;
    let widest = params
        .iter()
        .copied()
        .max_by(|a, b| a.window_span().total_cmp(&b.window_span()))
        .expect("nonempty");
    let base = crate::embedding::admissible_base_times(&standardized, &widest);
    if base.is_empty() {
        return Err(Error::invalid("no base time admits the widest window"));
    }

    let rows: Vec<ConvergenceRow> = params
        .par_iter()
        .map(|p| -> Result<ConvergenceRow> {
            let raw: PointCloud<f64> =
                crate::embedding::sliding_window(&standardized, &base, p.window_count(), p.tau)?;
            let scaled = postprocess(&raw, PostProcess::Scaled)?;
            let normalized = postprocess(&raw, PostProcess::CentralizedNormalized)?;
            let c_scaled = confidence_bound(&scaled, cfg)?.c_alpha;
            let dm = pairwise_distances(&normalized)?;
            let c_normalized = confidence_bound_from_matrix(&dm, normalized.dim(), cfg)?.c_alpha;
            let diagram = rips_persistence(&dm, &FiltrationSpec::default_for(&dm));
            Ok(ConvergenceRow {
                half_dim: p.half_dim,
                tau: p.tau,
                points: base.len(),
                c_scaled,
                c_normalized,
                h1_max_persistence: crate::persistence::max_persistence(&diagram, 1),
                diagram,
            })
        })
        .collect::<Result<_>>()?;

    let normalized_steps: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[1].c_normalized - w[0].c_normalized).abs())
        .collect();
    let scaled_vs_normalized: Vec<f64> = rows.iter().map(|r| (r.c_scaled - r.c_normalized).abs()).collect();
    let diagram_steps: Vec<f64> = rows
        .windows(2)
        .map(|w| bottleneck_distance(&w[0].diagram, &w[1].diagram, 1))
        .collect();
    let ns: Vec<f64> = half_dims.iter().map(|&n| n as f64).collect();
    let slopes = ConvergenceSlopes {
        normalized_steps: loglog_slope(&ns[..ns.len() - 1], &normalized_steps),
        scaled_vs_normalized: loglog_slope(&ns, &scaled_vs_normalized),
        diagram_steps: loglog_slope(&ns[..ns.len() - 1], &diagram_steps),
    };
    Ok(ConvergenceReport {
        rows,
        normalized_steps,
        scaled_vs_normalized,
        diagram_steps,
        slopes,
        signal_mean: mean,
        signal_rms: rms,
        fourier_magnitudes: fourier_magnitudes(signal, frequency, 20),
    })
}
