//! Sampled 1-D signals: the built-in test functions, uniform sampling,
//! noise models, moving-average denoising and linear interpolation.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Irregularly sampled signal on a closed interval.
///
/// Times are strictly ascending and lie inside `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    times: Vec<f64>,
    values: Vec<f64>,
    domain: (f64, f64),
}

impl SampledSignal {
    /// Builds a signal whose domain is `[times[0], times[last]]`.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let domain = match (times.first(), times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::invalid("a signal needs at least 2 samples")),
        };
        Self::with_domain(times, values, domain)
    }

    pub fn with_domain(times: Vec<f64>, values: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "times and values differ in length ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid("a signal needs at least 2 samples"));
        }
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 <= domain.1) {
            return Err(Error::invalid("domain must be a finite closed interval"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value {v}")));
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid(format!(
                    "times must be strictly ascending ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if times[0] < domain.0 || times[times.len() - 1] > domain.1 {
            return Err(Error::invalid("sample times fall outside the domain"));
        }
        Ok(Self { times, values, domain })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time between the first and last sample.
    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Same times, values replaced. Used by the value-only transforms.
    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            times: self.times.clone(),
            values,
            domain: self.domain,
        }
    }

    /// Maps every value through `f`, keeping the times.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// First `n` samples (or all of them if there are fewer).
    pub fn truncate(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        Self::new(self.times[..n].to_vec(), self.values[..n].to_vec())
    }

    /// Piecewise-linear interpolant, clamped to the end values outside the
    /// observed time range.
    pub fn interpolate(&self, t: f64) -> f64 {
        let times = &self.times;
        let last = times.len() - 1;
        if t <= times[0] {
            return self.values[0];
        }
        if t >= times[last] {
            return self.values[last];
        }
        // first index with times[idx] > t; 1 <= idx <= last here
        let idx = times.partition_point(|&x| x <= t);
        let (t0, t1) = (times[idx - 1], times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        if t == t0 {
            return v0;
        }
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    /// Reads a two-column `t,value` CSV. A non-numeric first row is taken
    /// as a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            if record.len() < 2 {
                return Err(Error::Parse(format!("row {}: expected 2 columns", row + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "row {}: could not parse `{},{}`",
                        row + 1,
                        &record[0],
                        &record[1]
                    )))
                }
            }
        }
        Self::new(times, values)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

/// Built-in test functions used by the simulation tables, plus tabulated
/// user data.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// 3 / (2 - cos x)
    ThreeOverTwoMinusCos,
    /// log(5 + sin 3x) + exp(cos 5x)
    LogSinPlusExpCos,
    /// exp(-x/5) / (2 - cos x)
    DampedThreeOverTwoMinusCos,
    /// exp(-x/5) (log(5 + sin 3x) + exp(cos 5x))
    DampedLogSinPlusExpCos,
    /// sin(10 sqrt x), with sqrt clamped at 0 for negative x
    Chirp,
    /// cos(L x)
    PureCosine(f64),
    UserTabulated(SampledSignal),
}

impl FunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::ThreeOverTwoMinusCos => 3.0 / (2.0 - x.cos()),
            FunctionSpec::LogSinPlusExpCos => log_sin_exp_cos(x),
            FunctionSpec::DampedThreeOverTwoMinusCos => (-x / 5.0).exp() / (2.0 - x.cos()),
            FunctionSpec::DampedLogSinPlusExpCos => (-x / 5.0).exp() * log_sin_exp_cos(x),
            FunctionSpec::Chirp => (10.0 * x.max(0.0).sqrt()).sin(),
            FunctionSpec::PureCosine(l) => (l * x).cos(),
            FunctionSpec::UserTabulated(s) => s.interpolate(x),
        }
    }

    /// Short name used by the CLI and in reports.
    pub fn name(&self) -> String {
        match self {
            FunctionSpec::ThreeOverTwoMinusCos => "f1".into(),
            FunctionSpec::LogSinPlusExpCos => "f2".into(),
            FunctionSpec::DampedThreeOverTwoMinusCos => "damped1".into(),
            FunctionSpec::DampedLogSinPlusExpCos => "damped2".into(),
            FunctionSpec::Chirp => "chirp".into(),
            FunctionSpec::PureCosine(l) if *l == 1.0 => "cos".into(),
            FunctionSpec::PureCosine(l) => format!("cos:{l}"),
            FunctionSpec::UserTabulated(_) => "tabulated".into(),
        }
    }

    /// Inverse of [`FunctionSpec::name`] for the built-ins. `cos:L` selects
    /// `cos(L x)`.
    pub fn from_name(name: &str) -> Result<Self> {
        let spec = match name {
            "f1" | "three-over-two-minus-cos" => FunctionSpec::ThreeOverTwoMinusCos,
            "f2" | "log-sin-plus-exp-cos" => FunctionSpec::LogSinPlusExpCos,
            "damped1" => FunctionSpec::DampedThreeOverTwoMinusCos,
            "damped2" => FunctionSpec::DampedLogSinPlusExpCos,
            "chirp" => FunctionSpec::Chirp,
            "cos" => FunctionSpec::PureCosine(1.0),
            other => match other.strip_prefix("cos:") {
                Some(l) => {
                    let l: f64 = l
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad cosine frequency `{l}`")))?;
                    FunctionSpec::PureCosine(l)
                }
                None => return Err(Error::invalid(format!("unknown function `{other}`"))),
            },
        };
        Ok(spec)
    }
}

fn log_sin_exp_cos(x: f64) -> f64 {
    (5.0 + (3.0 * x).sin()).ln() + (5.0 * x).cos().exp()
}

/// Draws `n` i.i.d. uniform times on `domain`, sorted, and evaluates `f`.
pub fn sample_uniform(f: &FunctionSpec, domain: (f64, f64), n: usize, seed: u64) -> Result<SampledSignal> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2 samples, got {n}")));
    }
    let (lo, hi) = domain;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("empty or non-finite domain [{lo}, {hi}]")));
    }
    let mut rng = rng_from_seed(seed);
    let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    times.sort_by(f64::total_cmp);
    // ties have probability ~0 but would break strict ordering
    while times.windows(2).any(|w| w[0] >= w[1]) {
        times.dedup();
        while times.len() < n {
            times.push(rng.random_range(lo..=hi));
        }
        times.sort_by(f64::total_cmp);
    }
    let values = times.iter().map(|&t| f.eval(t)).collect();
    SampledSignal::with_domain(times, values, domain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    GaussianAdditive,
    GaussianMultiplicative,
    LaplacianAdditive,
    LaplacianMultiplicative,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::GaussianAdditive,
        NoiseKind::GaussianMultiplicative,
        NoiseKind::LaplacianAdditive,
        NoiseKind::LaplacianMultiplicative,
    ];

    /// Two-letter column label (GA, GM, LA, LM).
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::GaussianAdditive => "GA",
            NoiseKind::GaussianMultiplicative => "GM",
            NoiseKind::LaplacianAdditive => "LA",
            NoiseKind::LaplacianMultiplicative => "LM",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(label))
    }

    fn is_multiplicative(self) -> bool {
        matches!(
            self,
            NoiseKind::GaussianMultiplicative | NoiseKind::LaplacianMultiplicative
        )
    }

    fn is_laplacian(self) -> bool {
        matches!(
            self,
            NoiseKind::LaplacianAdditive | NoiseKind::LaplacianMultiplicative
        )
    }
}

/// Noise model. `scale` is the standard deviation of the unit-variance
/// error term for every kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub scale: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, scale: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("noise scale must be >= 0, got {scale}")));
        }
        Ok(Self { kind, scale })
    }
}

/// Standard Laplace draw with unit variance (scale 1/sqrt 2).
fn unit_laplace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    // u in [-0.5, 0.5); 1 - 2|u| in (0, 1]
    -FRAC_1_SQRT_2 * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Corrupts the values; times are untouched. The error draws do not depend
/// on the values, so additive noise commutes with value translation.
pub fn add_noise(s: &SampledSignal, spec: NoiseSpec, seed: u64) -> Result<SampledSignal> {
    let spec = NoiseSpec::new(spec.kind, spec.scale)?;
    if spec.scale == 0.0 {
        return Ok(s.clone());
    }
    let mut rng = rng_from_seed(seed);
    let values = s
        .values()
        .iter()
        .map(|&v| {
            let e = if spec.kind.is_laplacian() {
                unit_laplace(&mut rng)
            } else {
                rng.sample::<f64, _>(StandardNormal)
            };
            if spec.kind.is_multiplicative() {
                v * (1.0 + spec.scale * e)
            } else {
                v + spec.scale * e
            }
        })
        .collect();
    Ok(s.with_values(values))
}

/// Moving-average window: the odd integer above 3 closest to sqrt(n), ties
/// going to the larger window.
pub fn moving_average_window(n: usize) -> Result<usize> {
    if n < 5 {
        return Err(Error::invalid(format!("moving average needs n >= 5, got {n}")));
    }
    let root = (n as f64).sqrt();
    let mut lo = root.floor() as usize;
    if lo % 2 == 0 {
        lo = lo.saturating_sub(1);
    }
    let hi = lo + 2;
    let w = if root - (lo as f64) < (hi as f64) - root { lo } else { hi };
    Ok(w.max(5))
}

/// Centered moving average with the window from [`moving_average_window`].
/// Near the ends the window shrinks symmetrically.
pub fn denoise_moving_average(s: &SampledSignal) -> Result<SampledSignal> {
    let n = s.len();
    let half = moving_average_window(n)? / 2;
    let v = s.values();
    let values = (0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            if r == 0 {
                return v[i];
            }
            let sum: f64 = v[i - r..=i + r].iter().sum();
            sum / (2 * r + 1) as f64
        })
        .collect();
    Ok(s.with_values(values))
}
