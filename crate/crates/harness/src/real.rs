//! Batch screening of recorded signals with randomly drawn delays.
//!
//! Each file is truncated, then tested at several candidate periods drawn
//! log-uniformly between twice the median sampling gap and a quarter of the
//! observed span. The delay for a candidate period `P` is `P / (2N + 1)`, so
//! one window covers `2N/(2N+1)` of a period. A file is reported periodic
//! if any candidate succeeds.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use swtest_core::embedding::admissible_base_times;
use swtest_core::inference::run_test;
use swtest_core::rng::{derive_stream, rng_from_seed};
use swtest_core::{EmbeddingParams, PostProcess, SampledSignal, SubsampleConfig, TestSpec};

use crate::error::{plan_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RealDataConfig {
    pub truncate: usize,
    /// Random candidate periods per file.
    pub delays: usize,
    pub alpha: f64,
    pub seed: u64,
    pub half_dim: usize,
    pub draws: usize,
    /// Subsample size as a fraction of the embedded cloud.
    pub subsample_fraction: f64,
    pub mode: PostProcess,
    pub denoise: bool,
    /// Periods tested in addition to the random draws, e.g. a period known
    /// from domain knowledge.
    pub extra_periods: Vec<f64>,
}

impl Default for RealDataConfig {
    fn default() -> Self {
        Self {
            truncate: 500,
            delays: 5,
            alpha: 0.05,
            seed: 0,
            half_dim: 10,
            draws: 1000,
            subsample_fraction: 0.5,
            mode: PostProcess::CentralizedNormalized,
            denoise: false,
            extra_periods: Vec::new(),
        }
    }
}

impl RealDataConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncate < 4 {
            return Err(plan_err("truncate must be at least 4"));
        }
        if self.delays == 0 && self.extra_periods.is_empty() {
            return Err(plan_err("no candidate periods: delays is 0 and no extra periods given"));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(plan_err("subsample fraction must lie in (0, 1]"));
        }
        if let Some(p) = self.extra_periods.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(plan_err(format!("period {p} is not positive")));
        }
        SubsampleConfig::new(2, self.draws, self.alpha, 0)?;
        EmbeddingParams::with_tau(self.half_dim, 1.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayTrial {
    pub period: f64,
    pub tau: f64,
    pub random: bool,
    pub periodic: bool,
    pub points: Option<usize>,
    pub b: Option<usize>,
    pub c_alpha: Option<f64>,
    pub top_h1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileVerdict {
    pub path: String,
    /// `None` when the file could not be used at all.
    pub periodic: Option<bool>,
    pub samples: usize,
    pub seed: u64,
    pub trials: Vec<DelayTrial>,
    pub error: Option<String>,
}

impl FileVerdict {
    /// Delays at which a significant loop was found.
    pub fn successful_taus(&self) -> Vec<f64> {
        self.trials.iter().filter(|t| t.periodic).map(|t| t.tau).collect()
    }
}

/// Log-uniform candidate periods on `[2 * median gap, span / 4]`.
pub fn draw_periods(signal: &SampledSignal, count: usize, seed: u64) -> Result<Vec<f64>> {
    let mut gaps: Vec<f64> = signal.times().windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    let median = if gaps.len() % 2 == 1 { gaps[mid] } else { 0.5 * (gaps[mid - 1] + gaps[mid]) };
    let lo = 2.0 * median;
    let hi = signal.span() / 4.0;
    if !(lo < hi) {
        return Err(plan_err(format!(
            "too few samples for random delays: 2 x median gap {lo} >= span/4 {hi}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|_| rng.random_range(a..b).exp()).collect())
}

pub fn screen_signal(signal: &SampledSignal, cfg: &RealDataConfig, seed: u64) -> Result<Vec<DelayTrial>> {
    let signal = if signal.len() > cfg.truncate { signal.truncate(cfg.truncate)? } else { signal.clone() };
    let random = if cfg.delays > 0 { draw_periods(&signal, cfg.delays, derive_stream(seed, "period", 0))? } else { Vec::new() };
    let candidates = random
        .iter()
        .map(|&p| (p, true))
        .chain(cfg.extra_periods.iter().map(|&p| (p, false)));
    Ok(candidates
        .enumerate()
        .map(|(i, (period, is_random))| trial(&signal, cfg, period, is_random, derive_stream(seed, "subsample", i as u64)))
        .collect())
}

fn trial(signal: &SampledSignal, cfg: &RealDataConfig, period: f64, random: bool, seed: u64) -> DelayTrial {
    let tau = period / (2 * cfg.half_dim + 1) as f64;
    let mut t = DelayTrial {
        period,
        tau,
        random,
        periodic: false,
        points: None,
        b: None,
        c_alpha: None,
        top_h1: None,
        error: None,
    };
    let run = || -> swtest_core::Result<swtest_core::TestOutcome> {
        let embedding = EmbeddingParams::with_tau(cfg.half_dim, tau)?;
        let points = admissible_base_times(signal, &embedding).len();
        let b = ((cfg.subsample_fraction * points as f64).round() as usize).clamp(2, points.max(2));
        let subsample = SubsampleConfig::new(b, cfg.draws, cfg.alpha, seed)?;
        run_test(
            signal,
            &TestSpec {
                embedding,
                subsample,
                mode: cfg.mode,
                denoise: cfg.denoise,
                threshold: None,
            },
        )
    };
    match run() {
        Ok(o) => {
            t.periodic = o.periodic;
            t.points = Some(o.bound.params.points);
            t.b = Some(o.bound.params.b);
            t.c_alpha = Some(o.bound.c_alpha);
            t.top_h1 = o.top_h1.first().copied();
        }
        Err(e) => t.error = Some(e.to_string()),
    }
    t
}

/// Screens every file; a bad file yields an error entry and the batch goes on.
pub fn run_real_data(files: &[PathBuf], cfg: &RealDataConfig) -> Result<Vec<FileVerdict>> {
    cfg.validate()?;
    Ok(files
        .par_iter()
        .enumerate()
        .map(|(i, path)| screen_file(path, cfg, derive_stream(cfg.seed, "file", i as u64)))
        .collect())
}

fn screen_file(path: &Path, cfg: &RealDataConfig, seed: u64) -> FileVerdict {
    let mut verdict = FileVerdict {
        path: path.display().to_string(),
        periodic: None,
        samples: 0,
        seed,
        trials: Vec::new(),
        error: None,
    };
    let outcome = SampledSignal::from_csv_path(path)
        .map_err(crate::error::HarnessError::from)
        .and_then(|s| {
            verdict.samples = s.len().min(cfg.truncate);
            screen_signal(&s, cfg, seed)
        });
    match outcome {
        Ok(trials) => {
            verdict.periodic = Some(trials.iter().any(|t| t.periodic));
            verdict.trials = trials;
        }
        Err(e) => verdict.error = Some(e.to_string()),
    }
    verdict
}
