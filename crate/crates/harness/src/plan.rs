//! Experiment plans: table presets and the TOML plan format.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use swtest_core::{FunctionSpec, NoiseKind, NoiseSpec, PostProcess};

use crate::error::{plan_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sliding-window embedding with subsampling confidence radius.
    Tds,
    Gls,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Tds => "Tds",
            Method::Gls => "GLS",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tds" => Some(Method::Tds),
            "gls" => Some(Method::Gls),
            _ => None,
        }
    }
}

/// One column of a detection table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NoiseCell {
    Clean,
    Noisy(NoiseSpec),
}

impl NoiseCell {
    pub fn kind_label(&self) -> &'static str {
        match self {
            NoiseCell::Clean => "none",
            NoiseCell::Noisy(s) => s.kind.label(),
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            NoiseCell::Clean => 0.0,
            NoiseCell::Noisy(s) => s.scale,
        }
    }

    /// Stable key used to derive the cell's seed stream.
    pub fn key(&self) -> String {
        format!("{}:{}", self.kind_label(), self.scale())
    }

    /// Parses `none` or `KIND:scale`, e.g. `GA:0.1`. Accepts its own keys.
    pub fn parse(s: &str) -> Result<Self> {
        let bare = s.strip_suffix(":0").unwrap_or(s);
        if bare.eq_ignore_ascii_case("none") || bare.eq_ignore_ascii_case("clean") {
            return Ok(NoiseCell::Clean);
        }
        let (kind, scale) = s
            .split_once(':')
            .ok_or_else(|| plan_err(format!("noise cell `{s}` is not `none` or KIND:scale")))?;
        let kind = NoiseKind::from_label(kind).ok_or_else(|| plan_err(format!("unknown noise kind `{kind}`")))?;
        let scale: f64 = scale
            .parse()
            .map_err(|_| plan_err(format!("bad noise scale `{scale}`")))?;
        Ok(NoiseCell::Noisy(NoiseSpec::new(kind, scale)?))
    }
}

/// Clean column followed by GA, GM, LA, LM at 0.1, 0.2, 0.3.
pub fn standard_noise_grid() -> Vec<NoiseCell> {
    let mut cells = vec![NoiseCell::Clean];
    for kind in NoiseKind::ALL {
        for scale in [0.1, 0.2, 0.3] {
            cells.push(NoiseCell::Noisy(NoiseSpec { kind, scale }));
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub function: FunctionSpec,
    pub domain: (f64, f64),
    /// Samples per repetition.
    pub n: usize,
    /// Subsample size.
    pub b: usize,
    /// Half embedding dimension N.
    pub half_dim: usize,
    /// Angular frequency L used by the delay schedule.
    pub frequency: f64,
    pub alpha: f64,
    /// Monte-Carlo draws K.
    pub draws: usize,
    pub mode: PostProcess,
    /// Moving-average denoising before embedding, noisy cells only.
    pub denoise: bool,
    pub noise: Vec<NoiseCell>,
    pub repetitions: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
}

pub const DEFAULT_REPETITIONS: usize = 20;
pub const DEFAULT_DRAWS: usize = 1000;

impl ExperimentPlan {
    /// Desk-scale presets for the three simulation tables. `function`
    /// overrides the table's default function.
    pub fn table(table: u8, function: Option<FunctionSpec>, master_seed: u64) -> Result<Self> {
        let (default_fn, n, b, mode) = match table {
            1 => (FunctionSpec::ThreeOverTwoMinusCos, 500, 200, PostProcess::Scaled),
            2 => (
                FunctionSpec::DampedThreeOverTwoMinusCos,
                200,
                50,
                PostProcess::CentralizedNormalized,
            ),
            3 => (FunctionSpec::Chirp, 300, 100, PostProcess::Scaled),
            other => return Err(plan_err(format!("no preset for table {other}; expected 1, 2 or 3"))),
        };
        let methods = if table == 2 {
            vec![Method::Tds]
        } else {
            vec![Method::Tds, Method::Gls]
        };
        Ok(Self {
            function: function.unwrap_or(default_fn),
            domain: (0.0, 4.0 * PI),
            n,
            b,
            half_dim: 10,
            frequency: 1.0,
            alpha: 0.05,
            draws: DEFAULT_DRAWS,
            mode,
            denoise: true,
            noise: standard_noise_grid(),
            repetitions: DEFAULT_REPETITIONS,
            methods,
            master_seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(plan_err("repetitions must be >= 1"));
        }
        if self.methods.is_empty() {
            return Err(plan_err("at least one method is required"));
        }
        if self.noise.is_empty() {
            return Err(plan_err("the noise grid is empty"));
        }
        if self.b > self.n {
            return Err(plan_err(format!("subsample size b = {} exceeds n = {}", self.b, self.n)));
        }
        if !(self.domain.0.is_finite() && self.domain.1.is_finite() && self.domain.0 < self.domain.1) {
            return Err(plan_err(format!("domain {:?} is empty or not finite", self.domain)));
        }
        if self.n < 4 {
            return Err(plan_err("n must be at least 4"));
        }
        swtest_core::EmbeddingParams::from_schedule(self.half_dim, self.frequency)?;
        swtest_core::SubsampleConfig::new(self.b, self.draws, self.alpha, 0)?;
        if let FunctionSpec::UserTabulated(_) = self.function {
            return Err(plan_err("simulation plans need a built-in function"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PlanFile = toml::from_str(text)?;
        file.into_plan()
    }

    pub fn from_toml_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// On-disk plan. Every key is optional; missing keys come from the `table`
/// preset (table 1 when absent).
///
/// ```toml
/// table = 2
/// function = "damped2"
/// repetitions = 50
/// noise = ["none", "GA:0.1"]
/// methods = ["tds", "gls"]
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub table: Option<u8>,
    pub function: Option<String>,
    pub domain: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub b: Option<usize>,
    #[serde(alias = "N")]
    pub half_dim: Option<usize>,
    #[serde(alias = "L")]
    pub frequency: Option<f64>,
    pub alpha: Option<f64>,
    pub draws: Option<usize>,
    pub mode: Option<String>,
    pub denoise: Option<bool>,
    pub noise: Option<Vec<String>>,
    pub repetitions: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub seed: Option<u64>,
}

pub fn parse_mode(s: &str) -> Result<PostProcess> {
    match s.to_ascii_lowercase().as_str() {
        "scaled" | "s" => Ok(PostProcess::Scaled),
        "normalized" | "cn" | "centralized-normalized" => Ok(PostProcess::CentralizedNormalized),
        other => Err(plan_err(format!("unknown mode `{other}`; expected scaled or normalized"))),
    }
}

impl PlanFile {
    pub fn into_plan(self) -> Result<ExperimentPlan> {
        let function = self.function.as_deref().map(FunctionSpec::from_name).transpose()?;
        let mut plan = ExperimentPlan::table(self.table.unwrap_or(1), function, self.seed.unwrap_or(0))?;
        if let Some([a, b]) = self.domain {
            plan.domain = (a, b);
        }
        if let Some(v) = self.n {
            plan.n = v;
        }
        if let Some(v) = self.b {
            plan.b = v;
        }
        if let Some(v) = self.half_dim {
            plan.half_dim = v;
        }
        if let Some(v) = self.frequency {
            plan.frequency = v;
        }
        if let Some(v) = self.alpha {
            plan.alpha = v;
        }
        if let Some(v) = self.draws {
            plan.draws = v;
        }
        if let Some(m) = self.mode {
            plan.mode = parse_mode(&m)?;
        }
        if let Some(v) = self.denoise {
            plan.denoise = v;
        }
        if let Some(cells) = self.noise {
            plan.noise = cells.iter().map(|c| NoiseCell::parse(c)).collect::<Result<_>>()?;
        }
        if let Some(v) = self.repetitions {
            plan.repetitions = v;
        }
        if let Some(ms) = self.methods {
            plan.methods = ms
                .iter()
                .map(|m| Method::from_label(m).ok_or_else(|| plan_err(format!("unknown method `{m}`"))))
                .collect::<Result<_>>()?;
        }
        plan.validate()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for t in 1..=3 {
            ExperimentPlan::table(t, None, 1).unwrap().validate().unwrap();
        }
        assert!(ExperimentPlan::table(4, None, 1).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = standard_noise_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], NoiseCell::Clean);
        assert_eq!(g[1].key(), "GA:0.1");
        assert_eq!(g[12].key(), "LM:0.3");
    }

    #[test]
    fn toml_overrides_preset() {
        let plan = ExperimentPlan::from_toml_str(
            r#"
table = 2
function = "damped2"
repetitions = 3
noise = ["none", "gm:0.2"]
methods = ["tds", "gls"]
seed = 9
"#,
        )
        .unwrap();
        assert_eq!(plan.function, FunctionSpec::DampedLogSinPlusExpCos);
        assert_eq!((plan.n, plan.b), (200, 50));
        assert_eq!(plan.mode, PostProcess::CentralizedNormalized);
        assert_eq!(plan.repetitions, 3);
        assert_eq!(plan.noise[1].key(), "GM:0.2");
        assert_eq!(plan.methods, vec![Method::Tds, Method::Gls]);
        assert_eq!(plan.master_seed, 9);
    }

    #[test]
    fn toml_rejects_bad_plans() {
        assert!(ExperimentPlan::from_toml_str("repetitions = 0").is_err());
        assert!(ExperimentPlan::from_toml_str("b = 600").is_err());
        assert!(ExperimentPlan::from_toml_str("colour = 1").is_err());
        assert!(ExperimentPlan::from_toml_str("noise = [\"XX:0.1\"]").is_err());
    }
}
