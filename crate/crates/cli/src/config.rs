//! Experiment configuration files.
//!
//! A config is one JSON object with a `suite` discriminator and a
//! suite-specific `inputs` block:
//!
//! ```json
//! { "suite": "axioms", "seed": 42, "format": "csv", "output_dir": "out",
//!   "inputs": { "cases": 1000, "oracle_cases": 500 } }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subexp::{AmbiguitySet, FamilySpec, GNormalParams, Grid, ScaleRule, SequenceGenerator, TestFunction};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: field `{field}`: {message}")]
    Invalid { path: PathBuf, field: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub suite: SuiteConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Format,
}

/// Top-level shape before the `inputs` block is matched to its suite. A
/// missing block means all defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: String,
    #[serde(default)]
    inputs: Option<serde_json::Value>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    format: Format,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = String;

    fn try_from(raw: RawConfig) -> Result<Self, String> {
        let inputs = raw.inputs.unwrap_or_else(|| serde_json::json!({}));
        let tagged = serde_json::json!({ "suite": raw.suite, "inputs": inputs });
        let suite = SuiteConfig::deserialize(tagged).map_err(|e| format!("suite `{}`: {e}", raw.suite))?;
        Ok(Self {
            suite,
            output_dir: raw.output_dir,
            seed: raw.seed,
            format: raw.format,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", content = "inputs", rename_all = "kebab-case")]
pub enum SuiteConfig {
    Axioms(AxiomInputs),
    Levy(Empty),
    Kolmogorov(KolmogorovInputs),
    Rosenthal(Empty),
    ThreeSeries(ThreeSeriesInputs),
    Cauchy(CauchyInputs),
    Gpde(GpdeInputs),
    Clt(CltInputs),
}

impl SuiteConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteConfig::Axioms(_) => "axioms",
            SuiteConfig::Levy(_) => "levy",
            SuiteConfig::Kolmogorov(_) => "kolmogorov",
            SuiteConfig::Rosenthal(_) => "rosenthal",
            SuiteConfig::ThreeSeries(_) => "three-series",
            SuiteConfig::Cauchy(_) => "cauchy",
            SuiteConfig::Gpde(_) => "gpde",
            SuiteConfig::Clt(_) => "clt",
        }
    }

    /// Suites whose instance stream is drawn from the seed.
    pub fn is_randomized(&self) -> bool {
        matches!(self, SuiteConfig::Axioms(_) | SuiteConfig::Rosenthal(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomInputs {
    #[serde(default = "default_axiom_cases")]
    pub cases: usize,
    #[serde(default = "default_oracle_cases")]
    pub oracle_cases: usize,
}

fn default_axiom_cases() -> usize {
    1000
}

fn default_oracle_cases() -> usize {
    500
}

impl Default for AxiomInputs {
    fn default() -> Self {
        Self {
            cases: default_axiom_cases(),
            oracle_cases: default_oracle_cases(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KolmogorovForms {
    I,
    Ii,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KolmogorovInputs {
    #[serde(default)]
    pub form: KolmogorovForms,
}

/// A family given by name (`fair_coin`, `two_variance`) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyInput {
    Named(String),
    Inline(FamilySpec),
}

impl FamilyInput {
    pub fn build(&self) -> Result<AmbiguitySet<f64>, String> {
        match self {
            FamilyInput::Named(name) => match name.as_str() {
                "fair_coin" => Ok(SequenceGenerator::fair_coin()),
                "two_variance" => Ok(SequenceGenerator::two_variance_family()),
                other => Err(format!("unknown family `{other}` (expected fair_coin or two_variance)")),
            },
            FamilyInput::Inline(spec) => AmbiguitySet::try_from(spec.clone()).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInputs {
    pub family: FamilyInput,
    pub scale: ScaleRule,
    pub horizon: usize,
    #[serde(default)]
    pub quantum_bits: Option<u32>,
}

impl GeneratorInputs {
    pub fn build(&self) -> Result<SequenceGenerator, String> {
        let family = self.family.build()?;
        let gen = SequenceGenerator::new(family, self.scale, self.horizon).map_err(|e| e.to_string())?;
        Ok(match self.quantum_bits {
            Some(b) => gen.quantized(b),
            None => gen,
        })
    }
}

/// `|value − target| ≤ tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub target: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSeriesInputs {
    pub generator: GeneratorInputs,
    #[serde(default = "one")]
    pub c: f64,
    /// Optional check on the last S3 partial sum.
    #[serde(default)]
    pub expect_s3: Option<Target>,
    /// Optional lower bound on the last S3 partial sum.
    #[serde(default)]
    pub expect_s3_above: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedTrend {
    Shrinks,
    Stalls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyInputs {
    pub generator: GeneratorInputs,
    pub eps: f64,
    pub pairs: Vec<(usize, usize)>,
    /// The Cauchy trend "shrinks" when the last capacity is below this.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub expect_trend: Option<ExpectedTrend>,
    /// Every pair's upper capacity must be at least this.
    #[serde(default)]
    pub expect_min_capacity: Option<f64>,
    /// Test-function ids for the distribution diagnostic; empty skips it.
    #[serde(default)]
    pub phis: Vec<String>,
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_settle")]
    pub settle_tol: f64,
    #[serde(default)]
    pub expect_distribution_trend: Option<ExpectedTrend>,
}

fn default_threshold() -> f64 {
    0.05
}

fn default_settle() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInputs {
    pub half_width: f64,
    pub dx: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    subexp::gpde::DEFAULT_RATIO
}

impl Default for GridInputs {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            dx: 0.01,
            horizon: 1.0,
            ratio: default_ratio(),
        }
    }
}

impl GridInputs {
    pub fn build(&self, params: &GNormalParams) -> Result<Grid, String> {
        Grid::with_ratio(params, self.half_width, self.dx, self.horizon, self.ratio).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopyCheckInputs {
    pub pairs: Vec<(f64, f64)>,
    pub tol: f64,
    /// Also solve on the refined grid and require the gap to shrink.
    #[serde(default)]
    pub require_shrink: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpdeInputs {
    pub sigma_lo_sq: f64,
    pub sigma_hi_sq: f64,
    #[serde(default)]
    pub grid: GridInputs,
    /// Initial data, a test-function id.
    pub phi: String,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Compare with classical heat quadrature; needs equal variances.
    #[serde(default)]
    pub linear_limit_tol: Option<f64>,
    #[serde(default)]
    pub copy_check: Option<CopyCheckInputs>,
}

fn default_times() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltInputs {
    pub family: FamilyInput,
    /// Added to every support point before the run.
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub phis: Vec<String>,
    pub n_schedule: Vec<usize>,
    #[serde(default = "default_c_schedule")]
    pub c_schedule: Vec<f64>,
    #[serde(default = "default_x_schedule")]
    pub x_schedule: Vec<f64>,
    #[serde(default)]
    pub grid: GridInputs,
    /// Largest admissible gap at the last `n`.
    #[serde(default)]
    pub max_gap: Option<f64>,
    /// Require the last gap below the first for every φ.
    #[serde(default)]
    pub require_decrease: bool,
    /// Smallest admissible max gap at the last `n` (necessity exhibits).
    #[serde(default)]
    pub min_gap: Option<f64>,
}

fn default_c_schedule() -> Vec<f64> {
    vec![1.0, 4.0, 16.0]
}

fn default_x_schedule() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

impl CltInputs {
    pub fn test_functions(&self) -> Result<Vec<TestFunction>, String> {
        if self.phis.is_empty() {
            return Ok(TestFunction::clt_set());
        }
        self.phis.iter().map(|id| lookup_phi(id)).collect()
    }
}

pub fn lookup_phi(id: &str) -> Result<TestFunction, String> {
    TestFunction::by_id(id).ok_or_else(|| format!("unknown test function `{id}`"))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// Parses and validates; `path` only labels diagnostics.
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate().map_err(|(field, message)| ConfigError::Invalid {
            path: path.to_path_buf(),
            field,
            message,
        })?;
        Ok(cfg)
    }

    /// On failure returns the offending field path and a message.
    fn validate(&self) -> Result<(), (String, String)> {
        let bad = |field: &str, msg: String| Err((field.to_string(), msg));
        if self.suite.is_randomized() && self.seed.is_none() {
            return bad("seed", format!("suite `{}` is randomized and needs a seed", self.suite.name()));
        }
        match &self.suite {
            SuiteConfig::Axioms(a) if a.cases == 0 && a.oracle_cases == 0 => {
                bad("inputs.cases", "at least one case is required".into())
            }
            SuiteConfig::ThreeSeries(t) => {
                t.generator.build().map_err(at("inputs.generator"))?;
                if t.c.is_nan() || t.c <= 0.0 {
                    return bad("inputs.c", format!("must be positive, got {}", t.c));
                }
                Ok(())
            }
            SuiteConfig::Cauchy(c) => {
                let gen = c.generator.build().map_err(at("inputs.generator"))?;
                if c.eps.is_nan() || c.eps <= 0.0 {
                    return bad("inputs.eps", format!("must be positive, got {}", c.eps));
                }
                for &(m, n) in &c.pairs {
                    if m > n || n > gen.horizon {
                        return bad("inputs.pairs", format!("({m}, {n}) needs m <= n <= horizon {}", gen.horizon));
                    }
                }
                for id in &c.phis {
                    lookup_phi(id).map_err(at("inputs.phis"))?;
                }
                if !c.phis.is_empty() && c.checkpoints.is_empty() {
                    return bad("inputs.checkpoints", "needed when phis are given".into());
                }
                Ok(())
            }
            SuiteConfig::Gpde(g) => {
                let params = GNormalParams::new(g.sigma_lo_sq, g.sigma_hi_sq).map_err(|e| at("inputs")(e.to_string()))?;
                g.grid.build(&params).map_err(at("inputs.grid"))?;
                lookup_phi(&g.phi).map_err(at("inputs.phi"))?;
                if g.linear_limit_tol.is_some() && g.sigma_lo_sq != g.sigma_hi_sq {
                    return bad("inputs.linear_limit_tol", "needs sigma_lo_sq == sigma_hi_sq".into());
                }
                Ok(())
            }
            SuiteConfig::Clt(c) => {
                c.family.build().map_err(at("inputs.family"))?;
                c.test_functions().map_err(at("inputs.phis"))?;
                if c.n_schedule.is_empty() {
                    return bad("inputs.n_schedule", "must not be empty".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn at(field: &'static str) -> impl Fn(String) -> (String, String) {
    move |message| (field.to_string(), message)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_json(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_axiom_config() {
        let cfg = parse(r#"{"suite": "axioms", "seed": 7}"#).unwrap();
        assert_eq!(cfg.suite, SuiteConfig::Axioms(AxiomInputs::default()));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn randomized_suites_need_a_seed() {
        let err = parse(r#"{"suite": "rosenthal"}"#).unwrap_err();
        assert!(err.to_string().contains("field `seed`"), "{err}");
        assert!(parse(r#"{"suite": "levy"}"#).is_ok());
    }

    #[test]
    fn unknown_suites_and_fields_are_rejected() {
        let err = parse(r#"{"suite": "nope"}"#).unwrap_err();
        assert!(err.to_string().contains("nope"), "{err}");
        let err = parse(r#"{"suite": "kolmogorov", "inputs": {"from": "i"}}"#).unwrap_err();
        assert!(err.to_string().contains("from"), "{err}");
        let err = parse(r#"{"suite": "levy", "sead": 1}"#).unwrap_err();
        assert!(err.to_string().contains("sead"), "{err}");
    }

    #[test]
    fn generator_errors_name_the_field() {
        let text = r#"{"suite": "three-series", "inputs": {
            "generator": {"family": {"support": [-1, 1], "laws": [[0.5, 0.4]]},
                          "scale": {"kind": "geometric", "base": 0.5}, "horizon": 10}}}"#;
        let err = parse(text).unwrap_err().to_string();
        assert!(err.contains("inputs.generator") && err.contains("law 0"), "{err}");
    }

    #[test]
    fn round_trips_through_json() {
        let text = r#"{"suite": "clt", "seed": null, "format": "json", "inputs": {
            "family": "two_variance", "n_schedule": [25, 100]}}"#;
        let cfg = parse(text).unwrap();
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse(&back).unwrap(), cfg);
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name.starts_with("family_") {
                continue;
            }
            ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{e}"));
            seen += 1;
        }
        assert!(seen >= 8);
    }
}
