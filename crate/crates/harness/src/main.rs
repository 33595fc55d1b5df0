use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use swtest::plan::ExperimentPlan;
use swtest::{run_plan_with, run_real_data, RealDataConfig, RunOptions};
use swtest_core::embedding::{embed_signal, postprocess};
use swtest_core::geometry::pairwise_distances;
use swtest_core::inference::{confidence_bound, convergence_probe, run_test};
use swtest_core::persistence::rips_persistence;
use swtest_core::signal::{denoise_moving_average, sample_uniform};
use swtest_core::{
    gls_periodogram, gls_test, CloudTag, EmbeddingParams, FiltrationSpec, FunctionSpec, PointCloud, PostProcess,
    SampledSignal, SubsampleConfig, TestSpec,
};

/// Bad flags or parameter combinations; exits with status 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T, E: std::fmt::Display>(r: Result<T, E>) -> anyhow::Result<T> {
    r.map_err(|e| UsageError(e.to_string()).into())
}

#[derive(Parser)]
#[command(name = "swtest", version, about = "Periodicity testing with sliding-window persistence")]
struct Cli {
    /// Master seed for sampling, noise and subsampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Output file for the command's main artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SignalArgs {
    /// Signal CSV with columns t,value.
    #[arg(long, conflicts_with = "function")]
    input: Option<PathBuf>,
    /// Built-in function: f1, f2, damped1, damped2, chirp, cos, cos:L.
    #[arg(long = "fn", value_name = "NAME")]
    function: Option<String>,
    /// Number of uniform samples for a built-in function.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Sampling interval as `a,b`; defaults to [0, 4pi].
    #[arg(long, value_parser = parse_domain)]
    domain: Option<(f64, f64)>,
    /// Moving-average denoising before embedding.
    #[arg(long)]
    denoise: bool,
}

#[derive(Args, Clone)]
struct EmbedArgs {
    /// Half embedding dimension N (the cloud lives in dimension 2N+1).
    #[arg(long = "N", default_value_t = 10)]
    half_dim: usize,
    /// Angular frequency L of the target period 2pi/L.
    #[arg(long = "L", default_value_t = 1.0)]
    frequency: f64,
    /// Explicit delay; overrides the schedule from --L.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Scaled)]
    mode: Mode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Raw,
    Scaled,
    Normalized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CloudFormat {
    Csv,
    Bin,
}

#[derive(Subcommand)]
enum Command {
    /// Write the sliding-window point cloud of a signal.
    Embed {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, value_enum, default_value_t = CloudFormat::Csv)]
        format: CloudFormat,
    },
    /// Rips persistence diagram of an embedded signal or a point cloud CSV.
    Diagram {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        /// Point cloud CSV (one point per row, no header) instead of a signal.
        #[arg(long, conflicts_with_all = ["input", "function"])]
        cloud: Option<PathBuf>,
        /// Filtration cap; defaults to the full filtration for small clouds.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Subsampling confidence radius c_alpha of an embedded signal.
    Bound {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, default_value_t = 200)]
        b: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
    },
    /// Full periodicity test.
    Test {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, default_value_t = 200)]
        b: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Generalized Lomb-Scargle periodogram and its false-alarm test.
    Gls {
        #[command(flatten)]
        signal: SignalArgs,
    },
    /// Detection tables over repetitions and noise levels.
    Simulate {
        /// Preset table (1, 2 or 3).
        #[arg(long, conflicts_with = "plan")]
        table: Option<u8>,
        /// TOML plan file.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        /// Function overriding the preset's.
        #[arg(long = "fn", value_name = "NAME")]
        function: Option<String>,
        /// Only the noiseless column.
        #[arg(long)]
        clean_only: bool,
        /// Also write the JSON run log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write each Tds diagram as CSV into this directory.
        #[arg(long)]
        diagram_dir: Option<PathBuf>,
        /// Include wall-clock timings in the JSON log.
        #[arg(long)]
        timings: bool,
    },
    /// Radius and diagram trends as N grows.
    Converge {
        #[command(flatten)]
        signal: SignalArgs,
        #[arg(long = "L", default_value_t = 1.0)]
        frequency: f64,
        /// Comma-separated values of N.
        #[arg(long = "Ns", value_delimiter = ',', default_value = "5,10,20,40")]
        half_dims: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        b: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
    },
    /// Screen recorded signals with random delays.
    Real {
        /// Signal CSV files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 500)]
        truncate: usize,
        /// Random candidate periods per file.
        #[arg(long, default_value_t = 5)]
        delays: usize,
        #[arg(long = "N", default_value_t = 10)]
        half_dim: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        /// Subsample size as a fraction of each cloud.
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        /// Extra period to test on every file (repeatable).
        #[arg(long = "period")]
        periods: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Normalized)]
        mode: Mode,
    },
}

fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(a < b) {
        return Err(format!("empty interval [{a}, {b}]"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        usage(rayon::ThreadPoolBuilder::new().num_threads(t).build_global())?;
    }
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        bail!(UsageError(format!("--alpha must lie in (0, 1), got {}", cli.alpha)));
    }
    match &cli.command {
        Command::Embed { signal, embed, format } => cmd_embed(&cli, signal, embed, *format),
        Command::Diagram {
            signal,
            embed,
            cloud,
            threshold,
        } => cmd_diagram(&cli, signal, embed, cloud.as_deref(), *threshold),
        Command::Bound { signal, embed, b, draws } => cmd_bound(&cli, signal, embed, *b, *draws),
        Command::Test {
            signal,
            embed,
            b,
            draws,
            threshold,
        } => cmd_test(&cli, signal, embed, *b, *draws, *threshold),
        Command::Gls { signal } => cmd_gls(&cli, signal),
        Command::Simulate {
            table,
            plan,
            reps,
            function,
            clean_only,
            log,
            diagram_dir,
            timings,
        } => {
            let mut p = match (plan, table) {
                (Some(path), _) => usage(ExperimentPlan::from_toml_path(path))?,
                (None, t) => {
                    let f = usage(function.as_deref().map(FunctionSpec::from_name).transpose())?;
                    usage(ExperimentPlan::table(t.unwrap_or(1), f, cli.seed))?
                }
            };
            if plan.is_some() && function.is_some() {
                p.function = usage(FunctionSpec::from_name(function.as_deref().unwrap()))?;
            }
            if let Some(r) = reps {
                p.repetitions = *r;
            }
            if *clean_only {
                p.noise.truncate(1);
            }
            p.alpha = cli.alpha;
            usage(p.validate())?;
            let opts = RunOptions {
                diagram_dir: diagram_dir.clone(),
            };
            let report = run_plan_with(&p, &opts)?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            if let Some(path) = log {
                std::fs::write(path, report.to_json(*timings)?).with_context(|| format!("writing {}", path.display()))?;
            }
            match &cli.out {
                Some(path) => std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
                None if !cli.json => io::stdout().write_all(&csv)?,
                None => {}
            }
            if cli.json {
                println!("{}", report.to_json(*timings)?);
            } else if cli.out.is_some() {
                print!("{}", report.render_table());
            }
            Ok(())
        }
        Command::Converge {
            signal,
            frequency,
            half_dims,
            b,
            draws,
        } => cmd_converge(&cli, signal, *frequency, half_dims, *b, *draws),
        Command::Real {
            files,
            truncate,
            delays,
            half_dim,
            draws,
            fraction,
            periods,
            mode,
        } => {
            let cfg = RealDataConfig {
                truncate: *truncate,
                delays: *delays,
                alpha: cli.alpha,
                seed: cli.seed,
                half_dim: *half_dim,
                draws: *draws,
                subsample_fraction: *fraction,
                mode: usage(post_mode(*mode))?,
                denoise: false,
                extra_periods: periods.clone(),
            };
            usage(cfg.validate())?;
            let verdicts = run_real_data(files, &cfg)?;
            if cli.json {
                emit(&cli, serde_json::to_string_pretty(&verdicts)?.as_bytes())?;
            } else {
                let mut s = String::from("file,verdict,successful_taus\n");
                for v in &verdicts {
                    let verdict = match (v.periodic, &v.error) {
                        (Some(true), _) => "PERIODIC".to_string(),
                        (Some(false), _) => "NOT PERIODIC".to_string(),
                        (None, e) => format!("ERROR: {}", e.as_deref().unwrap_or("unknown")),
                    };
                    let taus: Vec<String> = v.successful_taus().iter().map(|t| format!("{t:.6}")).collect();
                    s.push_str(&format!("{},{},{}\n", v.path, verdict, taus.join(";")));
                }
                emit(&cli, s.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn emit(cli: &Cli, bytes: &[u8]) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(bytes)?),
    }
}

fn post_mode(m: Mode) -> Result<PostProcess, String> {
    match m {
        Mode::Scaled => Ok(PostProcess::Scaled),
        Mode::Normalized => Ok(PostProcess::CentralizedNormalized),
        Mode::Raw => Err("raw mode is only available for `embed`".into()),
    }
}

fn load_signal(cli: &Cli, args: &SignalArgs) -> anyhow::Result<SampledSignal> {
    let signal = match &args.input {
        Some(path) => {
            SampledSignal::from_csv_path(path).with_context(|| format!("reading signal {}", path.display()))?
        }
        None => {
            let name = args.function.as_deref().unwrap_or("cos");
            let f = usage(FunctionSpec::from_name(name))?;
            if args.n < 2 {
                bail!(UsageError(format!("--n must be at least 2, got {}", args.n)));
            }
            sample_uniform(&f, args.domain.unwrap_or((0.0, 4.0 * PI)), args.n, cli.seed)?
        }
    };
    Ok(if args.denoise { denoise_moving_average(&signal)? } else { signal })
}

fn embedding_params(args: &EmbedArgs) -> anyhow::Result<EmbeddingParams> {
    usage(match args.tau {
        Some(tau) => EmbeddingParams::with_tau(args.half_dim, tau),
        None => EmbeddingParams::from_schedule(args.half_dim, args.frequency),
    })
}

fn check_b(b: usize, n: usize) -> anyhow::Result<()> {
    if b > n {
        bail!(UsageError(format!("subsample size --b {b} exceeds the {n} samples (b > n)")));
    }
    Ok(())
}

fn embedded_cloud(cli: &Cli, signal: &SignalArgs, embed: &EmbedArgs) -> anyhow::Result<PointCloud> {
    let params = embedding_params(embed)?;
    let s = load_signal(cli, signal)?;
    let raw: PointCloud = embed_signal(&s, &params)?;
    Ok(match post_mode(embed.mode) {
        Ok(mode) => postprocess(&raw, mode)?,
        Err(_) => raw,
    })
}

fn cmd_embed(cli: &Cli, signal: &SignalArgs, embed: &EmbedArgs, format: CloudFormat) -> anyhow::Result<()> {
    let cloud = embedded_cloud(cli, signal, embed)?;
    match format {
        CloudFormat::Csv => {
            let mut buf = Vec::new();
            cloud.write_csv(&mut buf)?;
            emit(cli, &buf)
        }
        CloudFormat::Bin => {
            let Some(path) = &cli.out else {
                bail!(UsageError("--format bin needs --out".into()));
            };
            std::fs::write(path, cloud.to_le_bytes())?;
            eprintln!("{} points of dimension {} written to {}", cloud.len(), cloud.dim(), path.display());
            Ok(())
        }
    }
}

fn read_cloud(path: &Path) -> anyhow::Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let p: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("row {} of {} is not numeric", i + 1, path.display()))?;
        points.push(p);
    }
    Ok(PointCloud::from_points(&points, CloudTag::Raw)?)
}

fn cmd_diagram(
    cli: &Cli,
    signal: &SignalArgs,
    embed: &EmbedArgs,
    cloud: Option<&Path>,
    threshold: Option<f64>,
) -> anyhow::Result<()> {
    let cloud = match cloud {
        Some(path) => read_cloud(path)?,
        None => embedded_cloud(cli, signal, embed)?,
    };
    let dm = pairwise_distances(&cloud)?;
    let spec = match threshold {
        Some(t) => usage(FiltrationSpec::with_threshold(1, t))?,
        None => FiltrationSpec::default_for(&dm),
    };
    let diagram = rips_persistence(&dm, &spec);
    let mut buf = Vec::new();
    diagram.write_csv(&mut buf)?;
    emit(cli, &buf)
}

fn cmd_bound(cli: &Cli, signal: &SignalArgs, embed: &EmbedArgs, b: usize, draws: usize) -> anyhow::Result<()> {
    let cfg = usage(SubsampleConfig::new(b, draws, cli.alpha, cli.seed))?;
    let s = load_signal(cli, signal)?;
    check_b(b, s.len())?;
    usage(post_mode(embed.mode))?;
    let params = embedding_params(embed)?;
    let raw: PointCloud = embed_signal(&s, &params)?;
    let cloud = postprocess(&raw, post_mode(embed.mode).expect("checked"))?;
    let bound = confidence_bound(&cloud, &cfg)?;
    if cli.json {
        emit(cli, serde_json::to_string_pretty(&bound)?.as_bytes())
    } else {
        emit(
            cli,
            format!(
                "c_alpha = {:.6}\npoints = {}, b = {}, draws = {}, alpha = {}\n",
                bound.c_alpha, bound.params.points, b, draws, cli.alpha
            )
            .as_bytes(),
        )
    }
}

fn cmd_test(
    cli: &Cli,
    signal: &SignalArgs,
    embed: &EmbedArgs,
    b: usize,
    draws: usize,
    threshold: Option<f64>,
) -> anyhow::Result<()> {
    let subsample = usage(SubsampleConfig::new(b, draws, cli.alpha, cli.seed))?;
    let mode = usage(post_mode(embed.mode))?;
    let embedding = embedding_params(embed)?;
    let s = load_signal(cli, signal)?;
    check_b(b, s.len())?;
    let spec = TestSpec {
        embedding,
        subsample,
        mode,
        denoise: false,
        threshold,
    };
    let outcome: swtest_core::TestOutcome = run_test(&s, &spec)?;
    if cli.json {
        return emit(cli, serde_json::to_string_pretty(&outcome)?.as_bytes());
    }
    let top: Vec<String> = outcome.top_h1.iter().take(3).map(|p| format!("{p:.6}")).collect();
    let mut text = format!(
        "{}\nc_alpha = {:.6}\ntop H1 persistence: {}\npoints = {}, b = {}, N = {}, tau = {:.6}\n",
        if outcome.periodic { "PERIODIC" } else { "NOT PERIODIC" },
        outcome.bound.c_alpha,
        if top.is_empty() { "none".to_string() } else { top.join(", ") },
        outcome.bound.params.points,
        b,
        embedding.half_dim,
        embedding.tau,
    );
    for d in &outcome.diagnostics {
        text.push_str(&format!("note: {d}\n"));
    }
    emit(cli, text.as_bytes())
}

fn cmd_gls(cli: &Cli, signal: &SignalArgs) -> anyhow::Result<()> {
    let s = load_signal(cli, signal)?;
    let outcome = gls_test(&s, cli.alpha)?;
    if let Some(path) = &cli.out {
        let pg = gls_periodogram(&s, &swtest_core::gls::default_grid(&s))?;
        pg.write_csv(BufWriter::new(File::create(path)?))?;
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&outcome)?);
    } else {
        println!(
            "{}\nbest frequency = {:.6} (period {:.6})\npower = {:.6}\nfalse alarm probability = {:.3e}",
            if outcome.periodic { "PERIODIC" } else { "NOT PERIODIC" },
            outcome.best_frequency,
            1.0 / outcome.best_frequency,
            outcome.best_power,
            outcome.fap
        );
    }
    Ok(())
}

fn cmd_converge(
    cli: &Cli,
    signal: &SignalArgs,
    frequency: f64,
    half_dims: &[usize],
    b: usize,
    draws: usize,
) -> anyhow::Result<()> {
    let cfg = usage(SubsampleConfig::new(b, draws, cli.alpha, cli.seed))?;
    let s = load_signal(cli, signal)?;
    check_b(b, s.len())?;
    let report = convergence_probe(&s, frequency, half_dims, &cfg)?;
    if cli.json {
        return emit(cli, serde_json::to_string_pretty(&report)?.as_bytes());
    }
    let mut text = String::from("N,tau,points,c_scaled,c_normalized,h1_max_persistence\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{:.6},{},{:.6},{:.6},{:.6}\n",
            r.half_dim, r.tau, r.points, r.c_scaled, r.c_normalized, r.h1_max_persistence
        ));
    }
    text.push_str(&format!(
        "slope |c_scaled - c_normalized| = {:.4}\nslope successive c_normalized = {:.4}\nslope successive d_B = {:.4}\n",
        report.slopes.scaled_vs_normalized, report.slopes.normalized_steps, report.slopes.diagram_steps
    ));
    text.push_str(&format!(
        "standardized with mean {:.6}, rms {:.6}\nfourier magnitudes: {}\n",
        report.signal_mean,
        report.signal_rms,
        report
            .fourier_magnitudes
            .iter()
            .map(|m| format!("{m:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    ));
    emit(cli, text.as_bytes())
}

