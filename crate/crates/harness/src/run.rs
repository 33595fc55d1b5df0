//! Executes an [`ExperimentPlan`] and tallies detections.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use swtest_core::inference::run_test;
use swtest_core::rng::{derive_seed, derive_stream};
use swtest_core::signal::{add_noise, sample_uniform};
use swtest_core::{gls_test, EmbeddingParams, SampledSignal, SubsampleConfig, TestSpec};

use crate::error::Result;
use crate::plan::{ExperimentPlan, Method, NoiseCell};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// When set, every Tds diagram is written here as CSV and its path is
    /// recorded in the run log.
    pub diagram_dir: Option<PathBuf>,
}

/// Result of one method on one repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRun {
    pub rep: usize,
    pub seed: u64,
    pub periodic: bool,
    /// Stage error; the run then counts as a non-detection.
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub top_h1: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagram_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fap: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl MethodRun {
    fn failed(rep: usize, seed: u64, err: impl ToString, elapsed: Duration) -> Self {
        Self {
            rep,
            seed,
            periodic: false,
            error: Some(err.to_string()),
            c_alpha: None,
            points: None,
            top_h1: Vec::new(),
            diagnostics: Vec::new(),
            diagram_path: None,
            best_frequency: None,
            fap: None,
            elapsed,
        }
    }
}

/// Detections for one (method, noise cell) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub method: Method,
    pub noise_kind: String,
    pub scale: f64,
    pub detections: usize,
    pub repetitions: usize,
    pub failures: usize,
    pub runs: Vec<MethodRun>,
}

impl CellReport {
    pub fn mean_runtime(&self) -> Duration {
        let total: Duration = self.runs.iter().map(|r| r.elapsed).sum();
        total / self.runs.len().max(1) as u32
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.seed).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub function: String,
    pub domain: (f64, f64),
    pub n: usize,
    pub b: usize,
    pub half_dim: usize,
    pub frequency: f64,
    pub tau: f64,
    pub alpha: f64,
    pub draws: usize,
    pub mode: swtest_core::PostProcess,
    pub denoise: bool,
    pub repetitions: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub plan: PlanSummary,
    /// Ordered by method, then by the plan's noise grid.
    pub cells: Vec<CellReport>,
}

impl DetectionReport {
    pub fn cell(&self, method: Method, noise_kind: &str, scale: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.noise_kind == noise_kind && c.scale == scale)
    }

    /// Long-format table, one row per (method, noise cell).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "noise_kind", "scale", "detections", "repetitions"])?;
        for c in &self.cells {
            w.write_record([
                c.method.label().to_string(),
                c.noise_kind.clone(),
                c.scale.to_string(),
                c.detections.to_string(),
                c.repetitions.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Run log. Wall-clock timings are machine dependent, so they are only
    /// included on request and live under a separate `timings` key.
    pub fn to_json(&self, with_timings: bool) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if with_timings {
            let timings: Vec<serde_json::Value> = self
                .cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "method": c.method,
                        "noise_kind": c.noise_kind,
                        "scale": c.scale,
                        "mean_runtime_secs": c.mean_runtime().as_secs_f64(),
                    })
                })
                .collect();
            value["timings"] = serde_json::Value::Array(timings);
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// Wide table with methods as rows and noise cells as columns.
    pub fn render_table(&self) -> String {
        let mut methods: Vec<Method> = self.cells.iter().map(|c| c.method).collect();
        methods.dedup();
        let columns: Vec<(String, f64)> = self
            .cells
            .iter()
            .filter(|c| c.method == methods[0])
            .map(|c| (c.noise_kind.clone(), c.scale))
            .collect();
        let mut s = format!("{:<6}", "");
        for (kind, scale) in &columns {
            let head = if kind == "none" { "none".to_string() } else { format!("{kind} {scale}") };
            s.push_str(&format!("{head:>9}"));
        }
        s.push('\n');
        for m in methods {
            s.push_str(&format!("{:<6}", m.label()));
            for (kind, scale) in &columns {
                let v = self.cell(m, kind, *scale).map(|c| c.detections.to_string()).unwrap_or_default();
                s.push_str(&format!("{v:>9}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Seed of repetition `rep` in `cell`. Each run depends on this value only.
pub fn run_seed(master_seed: u64, cell: &NoiseCell, rep: usize) -> u64 {
    derive_seed(derive_stream(master_seed, &cell.key(), 0), rep as u64)
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<DetectionReport> {
    run_plan_with(plan, &RunOptions::default())
}

pub fn run_plan_with(plan: &ExperimentPlan, opts: &RunOptions) -> Result<DetectionReport> {
    plan.validate()?;
    let embedding = EmbeddingParams::from_schedule(plan.half_dim, plan.frequency)?;
    if let Some(dir) = &opts.diagram_dir {
        std::fs::create_dir_all(dir)?;
    }

    let jobs: Vec<(usize, usize)> = (0..plan.noise.len())
        .flat_map(|c| (0..plan.repetitions).map(move |r| (c, r)))
        .collect();
    let results: Vec<Vec<MethodRun>> = jobs
        .par_iter()
        .map(|&(c, rep)| {
            let seed = run_seed(plan.master_seed, &plan.noise[c], rep);
            run_once(plan, &embedding, &plan.noise[c], rep, seed, opts)
        })
        .collect();

    let mut cells = Vec::new();
    for (mi, &method) in plan.methods.iter().enumerate() {
        for (c, cell) in plan.noise.iter().enumerate() {
            let runs: Vec<MethodRun> = results[c * plan.repetitions..(c + 1) * plan.repetitions]
                .iter()
                .map(|per_method| per_method[mi].clone())
                .collect();
            cells.push(CellReport {
                method,
                noise_kind: cell.kind_label().to_string(),
                scale: cell.scale(),
                detections: runs.iter().filter(|r| r.periodic).count(),
                repetitions: runs.len(),
                failures: runs.iter().filter(|r| r.error.is_some()).count(),
                runs,
            });
        }
    }
    Ok(DetectionReport {
        schema_version: SCHEMA_VERSION,
        plan: PlanSummary {
            function: plan.function.name(),
            domain: plan.domain,
            n: plan.n,
            b: plan.b,
            half_dim: plan.half_dim,
            frequency: plan.frequency,
            tau: embedding.tau,
            alpha: plan.alpha,
            draws: plan.draws,
            mode: plan.mode,
            denoise: plan.denoise,
            repetitions: plan.repetitions,
            master_seed: plan.master_seed,
        },
        cells,
    })
}

/// Runs repetition `rep` of noise cell `cell` with an explicit seed. This is
/// the unit of work of [`run_plan`], exposed so callers can re-run or
/// reorder individual repetitions.
pub fn run_repetition(plan: &ExperimentPlan, cell: usize, rep: usize, seed: u64) -> Result<Vec<MethodRun>> {
    plan.validate()?;
    let cell = plan
        .noise
        .get(cell)
        .ok_or_else(|| crate::error::plan_err(format!("no noise cell {cell}")))?;
    let embedding = EmbeddingParams::from_schedule(plan.half_dim, plan.frequency)?;
    Ok(run_once(plan, &embedding, cell, rep, seed, &RunOptions::default()))
}

/// One repetition of every method on a shared sample. Returns one entry per
/// method, in plan order.
fn run_once(
    plan: &ExperimentPlan,
    embedding: &EmbeddingParams,
    cell: &NoiseCell,
    rep: usize,
    seed: u64,
    opts: &RunOptions,
) -> Vec<MethodRun> {
    let start = Instant::now();
    let signal = match corrupted_sample(plan, cell, seed) {
        Ok(s) => s,
        Err(e) => {
            return plan
                .methods
                .iter()
                .map(|_| MethodRun::failed(rep, seed, &e, start.elapsed()))
                .collect()
        }
    };
    plan.methods
        .iter()
        .map(|&m| match m {
            Method::Tds => run_tds(plan, embedding, cell, &signal, rep, seed, opts),
            Method::Gls => run_gls(plan, &signal, rep, seed),
        })
        .collect()
}

fn corrupted_sample(plan: &ExperimentPlan, cell: &NoiseCell, seed: u64) -> swtest_core::Result<SampledSignal> {
    let clean = sample_uniform(&plan.function, plan.domain, plan.n, derive_stream(seed, "sample", 0))?;
    match cell {
        NoiseCell::Clean => Ok(clean),
        NoiseCell::Noisy(spec) => add_noise(&clean, *spec, derive_stream(seed, "noise", 0)),
    }
}

fn run_tds(
    plan: &ExperimentPlan,
    embedding: &EmbeddingParams,
    cell: &NoiseCell,
    signal: &SampledSignal,
    rep: usize,
    seed: u64,
    opts: &RunOptions,
) -> MethodRun {
    let start = Instant::now();
    let spec = SubsampleConfig::new(plan.b, plan.draws, plan.alpha, derive_stream(seed, "subsample", 0)).map(
        |subsample| TestSpec {
            embedding: *embedding,
            subsample,
            mode: plan.mode,
            denoise: plan.denoise && matches!(cell, NoiseCell::Noisy(_)),
            threshold: None,
        },
    );
    let outcome = spec.and_then(|spec| run_test::<f64>(signal, &spec));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return MethodRun::failed(rep, seed, e, start.elapsed()),
    };
    let mut diagnostics = outcome.diagnostics.clone();
    let diagram_path = match (&opts.diagram_dir, &outcome.diagram) {
        (Some(dir), Some(diagram)) => {
            match write_diagram(dir, cell, rep, diagram) {
                Ok(p) => Some(p),
                Err(e) => {
                    diagnostics.push(format!("diagram not written: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    MethodRun {
        rep,
        seed,
        periodic: outcome.periodic,
        error: None,
        c_alpha: Some(outcome.bound.c_alpha),
        points: Some(outcome.bound.params.points),
        top_h1: outcome.top_h1.iter().take(3).copied().collect(),
        diagnostics,
        diagram_path,
        best_frequency: None,
        fap: None,
        elapsed: start.elapsed(),
    }
}

fn write_diagram(dir: &Path, cell: &NoiseCell, rep: usize, d: &swtest_core::PersistenceDiagram) -> Result<String> {
    let path = dir.join(format!("tds_{}_{}_rep{rep:04}.csv", cell.kind_label(), cell.scale()));
    let file = std::fs::File::create(&path)?;
    d.write_csv(std::io::BufWriter::new(file))?;
    Ok(path.display().to_string())
}

fn run_gls(plan: &ExperimentPlan, signal: &SampledSignal, rep: usize, seed: u64) -> MethodRun {
    let start = Instant::now();
    match gls_test(signal, plan.alpha) {
        Ok(g) => MethodRun {
            rep,
            seed,
            periodic: g.periodic,
            error: None,
            c_alpha: None,
            points: None,
            top_h1: Vec::new(),
            diagnostics: Vec::new(),
            diagram_path: None,
            best_frequency: Some(g.best_frequency),
            fap: Some(g.fap),
            elapsed: start.elapsed(),
        },
        Err(e) => MethodRun::failed(rep, seed, e, start.elapsed()),
    }
}
