use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    self, Distribution, GaussianComponent2D, GaussianMixture1D, GaussianMixture2D, LaplaceMixture1D, Spiral2D,
};
use crate::error::{Error, Result};
use crate::estimators::{BandwidthRule, IteratedConfig};
use crate::scores::NoiseMode;

/// Sample sizes of a scaling study when none are configured.
pub const DEFAULT_SCALING_NS: [usize; 7] = [500, 1000, 2000, 5000, 10_000, 20_000, 50_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Scaling,
    Winrate,
    Grid2d,
    Iterated,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Winrate => "winrate",
            ExperimentKind::Grid2d => "grid2d",
            ExperimentKind::Iterated => "iterated",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An estimator as named in configs and result files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Silverman,
    SdKdeExact,
    SdKdeNoisy(f64),
    EmpSdKde,
    SdKdeTable,
}

impl Method {
    /// Score noise level reported in the `sigma` column.
    pub fn sigma(&self) -> f64 {
        match self {
            Method::SdKdeNoisy(s) => *s,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Silverman => f.write_str("silverman"),
            Method::SdKdeExact => f.write_str("sd-kde-exact"),
            Method::SdKdeNoisy(s) => write!(f, "sd-kde-noisy:{s}"),
            Method::EmpSdKde => f.write_str("emp-sd-kde"),
            Method::SdKdeTable => f.write_str("sd-kde-table"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "silverman" => Method::Silverman,
            "sd-kde-exact" => Method::SdKdeExact,
            "emp-sd-kde" => Method::EmpSdKde,
            "sd-kde-table" => Method::SdKdeTable,
            _ => {
                let sigma = s
                    .strip_prefix("sd-kde-noisy:")
                    .ok_or_else(|| Error::config(format!("unknown method `{s}`")))?;
                let sigma: f64 = sigma
                    .parse()
                    .map_err(|_| Error::config(format!("bad noise level in `{s}`")))?;
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::config(format!("noise level must be >= 0 in `{s}`")));
                }
                Method::SdKdeNoisy(sigma)
            }
        })
    }
}

/// A target given by parameters instead of a preset name.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSpec {
    GaussMix {
        weight: f64,
        mu1: f64,
        sigma1: f64,
        mu2: f64,
        sigma2: f64,
    },
    LaplaceMix {
        weight: f64,
        loc1: f64,
        scale1: f64,
        loc2: f64,
        scale2: f64,
    },
    #[serde(rename = "mog-2d")]
    Mog2d { components: Vec<ComponentSpec> },
    Spiral {
        growth: f64,
        noise: f64,
        theta_start: f64,
        theta_end: f64,
        #[serde(default = "default_spiral_nodes")]
        quadrature_nodes: usize,
    },
}

fn default_spiral_nodes() -> usize {
    Spiral2D::DEFAULT_QUADRATURE_NODES
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl TargetSpec {
    pub fn build(&self) -> Result<Arc<dyn Distribution>> {
        Ok(match self {
            TargetSpec::GaussMix { weight, mu1, sigma1, mu2, sigma2 } => {
                Arc::new(GaussianMixture1D::new(*weight, *mu1, *sigma1, *mu2, *sigma2)?)
            }
            TargetSpec::LaplaceMix { weight, loc1, scale1, loc2, scale2 } => {
                Arc::new(LaplaceMixture1D::new(*weight, *loc1, *scale1, *loc2, *scale2)?)
            }
            TargetSpec::Mog2d { components } => Arc::new(GaussianMixture2D::new(
                components
                    .iter()
                    .map(|c| GaussianComponent2D {
                        weight: c.weight,
                        mean: c.mean,
                        covariance: c.covariance,
                    })
                    .collect(),
            )?),
            TargetSpec::Spiral { growth, noise, theta_start, theta_end, quadrature_nodes } => Arc::new(
                Spiral2D::new(*growth, *noise, *theta_start, *theta_end, *quadrature_nodes)?,
            ),
        })
    }
}

/// A fully resolved, validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub targets: Vec<String>,
    pub methods: Vec<Method>,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub noise_mode: NoiseMode,
    pub bandwidth: BandwidthRule,
    /// Grid nodes per axis; `None` means 2048 in 1D and 256 in 2D.
    pub grid_count: Option<usize>,
    pub iterated: IteratedConfig,
    pub score_table: Option<PathBuf>,
    pub custom_targets: BTreeMap<String, TargetSpec>,
    /// File name of the results CSV inside the output directory.
    pub output: String,
    /// Record wall-clock times. Off makes output byte-reproducible.
    pub timing: bool,
    /// Write 2D density rasters.
    pub rasters: bool,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for `kind`, with no targets and no seeds.
    pub fn new(kind: ExperimentKind) -> Self {
        let (methods, ns) = match kind {
            ExperimentKind::Scaling => (vec![Method::Silverman, Method::SdKdeExact], DEFAULT_SCALING_NS.to_vec()),
            ExperimentKind::Winrate => (vec![Method::SdKdeExact, Method::Silverman], vec![100]),
            ExperimentKind::Grid2d => (vec![Method::Silverman, Method::SdKdeExact], vec![2000]),
            ExperimentKind::Iterated => (Vec::new(), vec![1000]),
        };
        ExperimentConfig {
            kind,
            targets: Vec::new(),
            methods,
            ns,
            seeds: Vec::new(),
            noise_mode: NoiseMode::PerPoint,
            bandwidth: BandwidthRule::default(),
            grid_count: None,
            iterated: IteratedConfig::default(),
            score_table: None,
            custom_targets: BTreeMap::new(),
            output: "results.csv".into(),
            timing: true,
            rasters: true,
            threads: None,
        }
    }

    /// Parses TOML text, applying `key=value` overrides first. Relative
    /// paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, overrides: &[String], base_dir: Option<&Path>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        raw.resolve(base_dir)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides, path.parent())
    }

    pub fn target(&self, name: &str) -> Result<Arc<dyn Distribution>> {
        match self.custom_targets.get(name) {
            Some(spec) => spec.build().map_err(|e| Error::config(format!("target `{name}`: {e}"))),
            None => distributions::preset(name),
        }
    }

    /// Checks every cross-field constraint; returns config errors only.
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::config("no targets configured"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("no seeds configured"));
        }
        let distinct: BTreeSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return Err(Error::config("every sample size must be at least 2"));
        }
        if let Some(c) = self.grid_count {
            if c < 2 {
                return Err(Error::config("grid count must be at least 2"));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        if self.output.is_empty() || Path::new(&self.output).file_name().is_none() {
            return Err(Error::config("output must name a file"));
        }
        for b in [self.bandwidth.silverman_constant, self.bandwidth.sdkde_constant] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config("bandwidth constants must be positive"));
            }
        }
        for name in &self.targets {
            let target = self.target(name)?;
            match self.kind {
                ExperimentKind::Grid2d if target.dim() != 2 => {
                    return Err(Error::config(format!("grid2d needs a 2D target, `{name}` is 1D")))
                }
                ExperimentKind::Iterated if target.dim() != 1 => {
                    return Err(Error::config(format!("iterated needs a 1D target, `{name}` is 2D")))
                }
                _ => {}
            }
        }
        match self.kind {
            ExperimentKind::Winrate if self.methods.len() != 2 => {
                return Err(Error::config("winrate needs exactly two methods: candidate, baseline"))
            }
            ExperimentKind::Grid2d => {
                if !self.methods.contains(&Method::Silverman) || self.methods.len() != 2 {
                    return Err(Error::config("grid2d needs silverman plus one SD-KDE method"));
                }
            }
            ExperimentKind::Iterated => {
                if !self.methods.is_empty() {
                    return Err(Error::config("iterated does not take a method list"));
                }
                self.iterated.validate().map_err(|e| Error::config(e.to_string()))?;
            }
            _ => {}
        }
        if self.methods.is_empty() && self.kind != ExperimentKind::Iterated {
            return Err(Error::config("no methods configured"));
        }
        let distinct: BTreeSet<String> = self.methods.iter().map(Method::to_string).collect();
        if distinct.len() != self.methods.len() {
            return Err(Error::config("methods must be distinct"));
        }
        if self.methods.contains(&Method::SdKdeTable) && self.score_table.is_none() {
            return Err(Error::config("method sd-kde-table needs [score_table] path"));
        }
        Ok(())
    }
}

/// Parses `a..b` (half-open) or `a..=b` into a seed list.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::config(format!("bad seed range `{s}` (expected a..b or a..=b)"));
    let (lo, hi, inclusive) = match s.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = s.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive { (lo..=hi).collect() } else { (lo..hi).collect() };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{assignment}` is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for p in parents {
        cursor = cursor
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    List(Vec<u64>),
    Range(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    #[serde(alias = "target")]
    targets: OneOrMany,
    methods: Option<Vec<String>>,
    ns: Option<Vec<usize>>,
    seeds: SeedSpec,
    noise_mode: Option<NoiseMode>,
    #[serde(default)]
    bandwidth: BandwidthRule,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    iterated: IteratedConfig,
    score_table: Option<RawScoreTable>,
    #[serde(default)]
    custom_targets: BTreeMap<String, TargetSpec>,
    output: Option<String>,
    timing: Option<bool>,
    rasters: Option<bool>,
    threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScoreTable {
    path: PathBuf,
}

impl RawConfig {
    fn resolve(self, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.experiment);
        cfg.targets = match self.targets {
            OneOrMany::One(t) => vec![t],
            OneOrMany::Many(ts) => ts,
        };
        if let Some(methods) = self.methods {
            cfg.methods = methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
        }
        if let Some(ns) = self.ns {
            cfg.ns = ns;
        }
        cfg.seeds = match self.seeds {
            SeedSpec::List(s) => s,
            SeedSpec::Range(r) => parse_seed_range(&r)?,
        };
        if let Some(m) = self.noise_mode {
            cfg.noise_mode = m;
        }
        cfg.bandwidth = self.bandwidth;
        cfg.grid_count = self.grid.count;
        cfg.iterated = self.iterated;
        cfg.score_table = self.score_table.map(|t| match base_dir {
            Some(dir) if t.path.is_relative() => dir.join(t.path),
            _ => t.path,
        });
        cfg.custom_targets = self.custom_targets;
        if let Some(o) = self.output {
            cfg.output = o;
        }
        if let Some(t) = self.timing {
            cfg.timing = t;
        }
        if let Some(r) = self.rasters {
            cfg.rasters = r;
        }
        cfg.threads = self.threads;
        cfg.validate()?;
        Ok(cfg)
    }
}
