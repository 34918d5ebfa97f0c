//! Run configuration: TOML schema, defaults and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use xxrelay::cluster::{ClusterSpec, CRITICAL_THRESHOLD, DEFAULT_EPSILON};
use xxrelay::search::AngleMode;
use xxrelay::stats::DEFAULT_NODES;
use xxrelay::ChainConfig;

use crate::error::CliError;

pub const DEFAULT_N: usize = 10;
pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 20.0;
pub const DEFAULT_OUTPUT_DIR: &str = "xxrelay-out";

/// What a run computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OptimalTime,
    Field,
    Relay,
    Clusters,
    Critical,
    Lifetime,
    Boundary,
    Crossing,
    ReproduceFigure,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OptimalTime => "optimal-time",
            Mode::Field => "field",
            Mode::Relay => "relay",
            Mode::Clusters => "clusters",
            Mode::Critical => "critical",
            Mode::Lifetime => "lifetime",
            Mode::Boundary => "boundary",
            Mode::Crossing => "crossing",
            Mode::ReproduceFigure => "reproduce-figure",
        }
    }
}

/// Figure whose data a `reproduce-figure` run regenerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| format!("unknown figure {s:?}, expected one of fig1..fig9"))
    }
}

/// Either an inclusive range with a step or an explicit list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start: f64, stop: f64, step: f64 },
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        GridSpec::Range { start, stop, step }
    }

    /// Grid points; a range ends exactly at `stop`.
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::Values(v) if v.is_empty() => Err("grid is empty".into()),
            GridSpec::Values(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err("grid contains a non-finite value".into());
                }
                Ok(v.clone())
            }
            GridSpec::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && *step > 0.0 && step.is_finite()) {
                    return Err(format!("bad range {start}..{stop} step {step}"));
                }
                if stop < start {
                    return Err(format!("range stop {stop} below start {start}"));
                }
                let count = ((stop - start) / step).round() as usize;
                Ok((0..=count).map(|k| if k == count { *stop } else { start + step * k as f64 }).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub n: usize,
    pub coupling: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub registration_time: Option<f64>,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self { n: DEFAULT_N, coupling: DEFAULT_COUPLING, registration_time: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub nodes: usize,
    pub horizon: f64,
    pub lambda: GridSpec,
    pub alpha: GridSpec,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            nodes: DEFAULT_NODES,
            horizon: DEFAULT_HORIZON,
            lambda: GridSpec::range(0.5, 1.0, 0.01),
            alpha: GridSpec::range(0.0, 1.0, 0.02),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Cluster destruction level.
    pub epsilon: f64,
    /// Concurrence above which entanglement counts as present.
    pub threshold: f64,
    /// Single-state runs use `(lambda, alpha)`.
    pub lambda: f64,
    pub alpha: f64,
    /// `(M, i)` pairs; empty means every cluster of size 3 to 5.
    pub clusters: Vec<(usize, usize)>,
    pub angle_mode: AngleMode,
    pub tolerance: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            threshold: CRITICAL_THRESHOLD,
            lambda: 0.7,
            alpha: 0.0,
            clusters: Vec::new(),
            angle_mode: AngleMode::Tied,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    figure: Option<Figure>,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
    chain: ChainSection,
    grids: GridSection,
    analysis: AnalysisSection,
    #[allow(dead_code)]
    manifest: Option<toml::Table>,
}

/// Validated configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<Figure>,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub chain: ChainSection,
    pub grids: GridSection,
    pub analysis: AnalysisSection,
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub figure: Option<Figure>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub dt: Option<f64>,
    pub nodes: Option<usize>,
    pub horizon: Option<f64>,
}

const TOP_KEYS: &[&str] = &["mode", "figure", "output_dir", "threads", "chain", "grids", "analysis", "manifest"];
const CHAIN_KEYS: &[&str] = &["n", "coupling", "registration_time"];
const GRID_KEYS: &[&str] = &["dt", "nodes", "horizon", "lambda", "alpha"];
const RANGE_KEYS: &[&str] = &["start", "stop", "step"];
const ANALYSIS_KEYS: &[&str] = &["epsilon", "threshold", "lambda", "alpha", "clusters", "angle_mode", "tolerance"];

fn unknown_keys(doc: &toml::Table) -> Vec<String> {
    let mut out = BTreeSet::new();
    let check = |table: &toml::Table, known: &[&str], prefix: &str, out: &mut BTreeSet<String>| {
        for key in table.keys().filter(|k| !known.contains(&k.as_str())) {
            out.insert(format!("{prefix}{key}"));
        }
    };
    check(doc, TOP_KEYS, "", &mut out);
    let sub = |name: &str| doc.get(name).and_then(toml::Value::as_table);
    if let Some(t) = sub("chain") {
        check(t, CHAIN_KEYS, "chain.", &mut out);
    }
    if let Some(t) = sub("analysis") {
        check(t, ANALYSIS_KEYS, "analysis.", &mut out);
    }
    if let Some(t) = sub("grids") {
        check(t, GRID_KEYS, "grids.", &mut out);
        for axis in ["lambda", "alpha"] {
            if let Some(r) = t.get(axis).and_then(toml::Value::as_table) {
                check(r, RANGE_KEYS, &format!("grids.{axis}."), &mut out);
            }
        }
    }
    out.into_iter().collect()
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    let unknown = unknown_keys(&doc);
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let raw: RawConfig = serde_path_to_error::deserialize(toml::Value::Table(doc)).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner().message()))
    })?;
    let mode = overrides.mode.or(raw.mode).ok_or_else(|| CliError::Config("mode is required".into()))?;
    let mut grids = raw.grids;
    grids.dt = overrides.dt.unwrap_or(grids.dt);
    grids.nodes = overrides.nodes.unwrap_or(grids.nodes);
    grids.horizon = overrides.horizon.unwrap_or(grids.horizon);
    let config = RunConfig {
        mode,
        figure: overrides.figure.or(raw.figure),
        output_dir: overrides
            .output_dir
            .clone()
            .or(raw.output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        threads: overrides.threads.or(raw.threads),
        chain: raw.chain,
        grids,
        analysis: raw.analysis,
    };
    config.validate()?;
    Ok(config)
}

fn check(ok: bool, message: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(message()))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.chain_config()?;
        if let Some(t) = self.chain.registration_time {
            check(t > 0.0 && t.is_finite(), || format!("chain.registration_time must be positive, got {t}"))?;
        }
        let g = &self.grids;
        check(g.dt > 0.0 && g.dt.is_finite(), || format!("grids.dt must be positive, got {}", g.dt))?;
        check(g.nodes > 0, || "grids.nodes must be at least 1".into())?;
        check(g.horizon > 0.0 && g.horizon.is_finite(), || {
            format!("grids.horizon must be positive, got {}", g.horizon)
        })?;
        let lambdas = self.lambdas()?;
        check(lambdas.iter().all(|l| (0.5..=1.0).contains(l)), || "grids.lambda values must lie in [0.5, 1]".into())?;
        let alphas = self.alphas()?;
        check(alphas.iter().all(|a| (0.0..=1.0).contains(a)), || "grids.alpha values must lie in [0, 1]".into())?;
        let a = &self.analysis;
        check(a.epsilon > 0.0 && a.epsilon < 1.0, || {
            format!("analysis.epsilon must lie in (0, 1), got {}", a.epsilon)
        })?;
        check(a.threshold > 0.0 && a.threshold < 1.0, || {
            format!("analysis.threshold must lie in (0, 1), got {}", a.threshold)
        })?;
        check((0.0..=1.0).contains(&a.lambda), || format!("analysis.lambda must lie in [0, 1], got {}", a.lambda))?;
        check((0.0..=1.0).contains(&a.alpha), || format!("analysis.alpha must lie in [0, 1], got {}", a.alpha))?;
        check(a.tolerance > 0.0, || format!("analysis.tolerance must be positive, got {}", a.tolerance))?;
        self.cluster_specs()?;
        check(self.threads != Some(0), || "threads must be at least 1".into())?;
        match (self.mode, self.figure) {
            (Mode::ReproduceFigure, None) => Err(CliError::Config("mode reproduce-figure needs a figure".into())),
            _ => Ok(()),
        }
    }

    pub fn chain_config(&self) -> Result<ChainConfig, CliError> {
        ChainConfig::new(self.chain.n, self.chain.coupling).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn lambdas(&self) -> Result<Vec<f64>, CliError> {
        self.grids.lambda.points().map_err(|e| CliError::Config(format!("grids.lambda: {e}")))
    }

    pub fn alphas(&self) -> Result<Vec<f64>, CliError> {
        self.grids.alpha.points().map_err(|e| CliError::Config(format!("grids.alpha: {e}")))
    }

    /// Configured clusters, or every cluster of size 3 to 5 that fits.
    pub fn cluster_specs(&self) -> Result<Vec<ClusterSpec>, CliError> {
        let n = self.chain.n;
        let eps = self.analysis.epsilon;
        let pairs: Vec<(usize, usize)> = if self.analysis.clusters.is_empty() {
            (3..=5usize.min(n)).flat_map(|m| (1..=n + 1 - m).map(move |i| (m, i))).collect()
        } else {
            self.analysis.clusters.clone()
        };
        pairs
            .into_iter()
            .map(|(m, i)| {
                ClusterSpec::new(m, i, eps, n)
                    .map_err(|e| CliError::Config(format!("analysis.clusters ({m}, {i}): {e}")))
            })
            .collect()
    }
}
