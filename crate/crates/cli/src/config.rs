//! Run configurations. Every file carries `"version": 1` and rejects unknown fields.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cfh_core::flow::IntegratorConfig;
use cfh_core::geometry::FramePose;
use cfh_core::grid::GridSpec;
use cfh_core::oracles::cone_variety_point;
use cfh_core::variety::{sample_point, Axis, GroupElement, SampleRegion, SingularLine, SolveFor, State, VarietyPoint};
use cfh_core::verify::Tolerances;

use crate::artifact::read_points;
use crate::mesh::MeshConfig;

pub const CONFIG_VERSION: u32 = 1;

/// Where a leaf starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    /// An explicit point; `slack` widens the membership tolerance.
    Point {
        state: State,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slack: Option<f64>,
    },
    /// x2 from G = 0 and one y from F = 0.
    Sample { x1: f64, x3: f64, y_free: [f64; 2], solve_for: SolveFor, sign: f64 },
    /// The variety point of the Euclidean Clifford cone at height u2.
    Cone { u2: f64 },
    Singular { line: SingularLine, t: f64 },
    /// Record `index` of a points file written by `cfh sample`.
    PointsFile { path: PathBuf, index: usize },
}

impl SeedSpec {
    pub fn resolve(&self, base: &Path) -> Result<VarietyPoint> {
        let p = match self {
            SeedSpec::Point { state, slack: None } => VarietyPoint::new(*state)?,
            SeedSpec::Point { state, slack: Some(s) } => VarietyPoint::with_tolerance(*state, *s)?,
            SeedSpec::Sample { x1, x3, y_free, solve_for, sign } => sample_point(*x1, *x3, *y_free, *solve_for, *sign)?,
            SeedSpec::Cone { u2 } => cone_variety_point(*u2)?,
            SeedSpec::Singular { line, t } => VarietyPoint::new(line.point(*t))?,
            SeedSpec::PointsFile { path, index } => {
                let file = resolve_path(base, path);
                let (_, records) = read_points(&file)?;
                let rec = records
                    .iter()
                    .find(|r| r.index == *index)
                    .ok_or_else(|| anyhow!("{} has no record {index}", file.display()))?;
                match rec.point {
                    Some(q) => VarietyPoint::new(q)?,
                    None => bail!("record {index} of {} is infeasible: {}", file.display(), rec.error.as_deref().unwrap_or("no point")),
                }
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub n: usize,
    #[serde(default)]
    pub region: SampleRegion,
    /// Draws per record before it is reported infeasible.
    #[serde(default = "default_attempts")]
    pub attempts_per_point: usize,
    #[serde(default)]
    pub name: Option<String>,
}

fn default_attempts() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub seed: SeedSpec,
    /// 1, 2 or 3.
    pub field: Axis,
    pub t: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub seed: SeedSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub chart: PathBuf,
    pub element: GroupElement,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub chart: PathBuf,
    #[serde(default)]
    pub pose: FramePose,
    #[serde(default)]
    pub flip_normal: bool,
    /// Defaults to the configuration the chart was built with.
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    pub curvature: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    #[serde(default)]
    pub chart: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceSpec {
    pub chart_a: PathBuf,
    pub grid_a: PathBuf,
    pub chart_b: PathBuf,
    pub grid_b: PathBuf,
    /// The verdict the run asserts.
    #[serde(default = "yes")]
    pub expect_congruent: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub samples: usize,
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub curvature: f64,
    #[serde(default)]
    pub region: SampleRegion,
    /// Asserted lower bound on the floor of every nonzero H.
    #[serde(default)]
    pub floor_at_least: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub version: u32,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub suite: Option<SuiteSpec>,
    #[serde(default)]
    pub congruence: Option<CongruenceSpec>,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Relative paths inside a config are taken from the config's directory.
pub fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses a config, checking the version tag before the fields.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
    match value.get("version") {
        None => bail!("config is missing the required \"version\" field"),
        Some(v) if v.as_u64() == Some(u64::from(CONFIG_VERSION)) => {}
        Some(v) => bail!("unsupported config version {v}, expected {CONFIG_VERSION}"),
    }
    serde_json::from_value(value).context("invalid config")
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

/// Directory that relative paths in the config at `path` are resolved against.
pub fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_required() {
        let err = parse_config::<SampleConfig>(r#"{"n": 1}"#).unwrap_err();
        assert!(err.to_string().contains("version"));
        let err = parse_config::<SampleConfig>(r#"{"version": 2, "n": 1}"#).unwrap_err();
        assert!(err.to_string().contains("version 2"));
        assert!(parse_config::<SampleConfig>(r#"{"version": 1, "n": 1}"#).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse_config::<SampleConfig>(r#"{"version": 1, "n": 1, "extra": 0}"#).is_err());
        let nested = r#"{"version": 1, "seed": {"cone": {"u2": 0}}, "grid": {"u1": {"min": 0, "max": 0, "count": 1, "step": 1},
            "u2": {"min": 0, "max": 0, "count": 1}, "u3": {"min": 0, "max": 0, "count": 1}}}"#;
        assert!(parse_config::<ChartConfig>(nested).is_err());
        let integrator = r#"{"version": 1, "seed": {"cone": {"u2": 0}}, "field": 2, "t": 1, "integrator": {"tol": 1}}"#;
        assert!(parse_config::<TraceConfig>(integrator).is_err());
    }

    #[test]
    fn seeds_resolve() {
        let base = Path::new(".");
        let s: SeedSpec = serde_json::from_str(r#"{"singular": {"line": "plus", "t": 0}}"#).unwrap();
        assert_eq!(s.resolve(base).unwrap().state(), &SingularLine::Plus.point(0.0));
        let s: SeedSpec = serde_json::from_str(r#"{"sample": {"x1": 1, "x3": 2, "y_free": [1, 0], "solve_for": "y2", "sign": 1}}"#).unwrap();
        assert_eq!(s.resolve(base).unwrap(), sample_point(1.0, 2.0, [1.0, 0.0], SolveFor::Y2, 1.0).unwrap());
        let s = SeedSpec::Point { state: [1.0, 1.0, 1.0, 0.0, 0.0, 0.0], slack: None };
        assert!(s.resolve(base).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        assert_eq!(resolve_path(Path::new("runs/a"), Path::new("chart.json")), PathBuf::from("runs/a/chart.json"));
        assert_eq!(resolve_path(Path::new("runs"), Path::new("/tmp/c.json")), PathBuf::from("/tmp/c.json"));
    }
}
