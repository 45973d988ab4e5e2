//! Config-driven experiments with CSV/JSON artifacts and manifests.
//!
//! Every run is a pure function of its [`ExperimentConfig`]; sub-task seeds
//! are derived from the config seed with fixed labels.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{lipschitz_excess, threshold_map, GraphMetric};
use crate::error::{invalid, Error, Result};
use crate::generators::{
    build_hk, random_regular_expander, standard_graph, stretched_expander, ExpanderSpec, HkParams, StandardKind,
};
use crate::graph::{diameter, edge_expansion, Bfs, DiameterMode, Graph, RootedGraph, VertexSubset};
use crate::io::{load_graph, GraphMetadata};
use crate::rng::{derive_seed, stream};
use crate::scales::{
    graphic_markov_type_probe, growth_summary, scan_good_scales, speed_bound_for_growth, temper_insulate_with,
    RootedGrowth, ScaleConstants, ScanGrid, ScanResult, TemperReport,
};
use crate::stats::{Estimate, Running};
use crate::walk::{msd_exact, msd_monte_carlo, BfsOracle, RestrictedWalk, Start, TorusOracle};

// seed labels
const GRAPH_SEED: u64 = 1;
const WALK_SEED: u64 = 2;
const EMBED_SEED: u64 = 3;
const EXCEPTIONAL_SEED: u64 = 4;
const CONTROL_SEED: u64 = 5;
const PLANAR_SEED: u64 = 6;
const BOUND_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Build the configured graph and save it with its sidecar.
    Gen,
    Walk,
    Embed,
    Scan,
    Exceptional,
    Planar,
    DiffusiveVsBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Standard { family: StandardKind, dims: Vec<usize> },
    /// `gap_threshold` overrides the lazy second-eigenvalue ceiling.
    Expander {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap_threshold: Option<f64>,
    },
    /// `G_n[stretch]`.
    Stretched {
        n: usize,
        stretch: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap_threshold: Option<f64>,
    },
    Hk { n_sequence: Vec<usize> },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkParams {
    pub t_grid: Vec<usize>,
    pub samples: usize,
    pub mode: WalkMode,
    /// Fixed start vertex; stationary when absent.
    pub start: Option<usize>,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            t_grid: vec![1, 4, 16, 64],
            samples: 1000,
            mode: WalkMode::Exact,
            start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedParams {
    pub m: usize,
    pub taus: Vec<f64>,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self { m: 100, taus: vec![8.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    pub root: Option<usize>,
    pub k0: u32,
    pub ks: Vec<u32>,
    pub radii_per_scale: usize,
    pub ells: Vec<u32>,
    pub n_per_ell: usize,
    /// Request the untruncated grid; refused when infeasible.
    pub full_grid: bool,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            root: None,
            k0: 1,
            ks: vec![1, 2],
            radii_per_scale: 3,
            ells: vec![1],
            n_per_ell: 3,
            full_grid: false,
        }
    }
}

impl ScanParams {
    pub fn grid(&self) -> Result<ScanGrid> {
        if self.full_grid {
            ScanGrid::full(self.k0)
        } else {
            ScanGrid::geometric(self.k0, &self.ks, self.radii_per_scale, &self.ells, self.n_per_ell)
        }
    }
}

/// Slowly growing `f` against which `t ln t / f(t)` thresholds are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowFunction {
    /// `ln ln(t + e^e)`.
    LogLog,
    /// `ln(t + e)`.
    Log,
}

impl SlowFunction {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Self::LogLog => (t + std::f64::consts::E.exp()).ln().ln(),
            Self::Log => (t + std::f64::consts::E).ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExceptionalParams {
    pub n_values: Vec<usize>,
    pub factor: f64,
    pub samples: usize,
    /// Multiplier on `n² ln n` for locating the measurement time.
    pub t_scale: f64,
    pub control: bool,
    pub control_samples: usize,
    pub slow_function: SlowFunction,
    /// Lazy second-eigenvalue ceiling for the base expanders. Cubic graphs
    /// cannot get much below (1 + 2√2/3)/2 ≈ 0.971 once n is in the hundreds.
    pub expander_threshold: f64,
}

impl Default for ExceptionalParams {
    fn default() -> Self {
        Self {
            n_values: vec![64, 128, 256],
            factor: 1.5,
            samples: 6000,
            t_scale: 1.0,
            control: true,
            control_samples: 6000,
            slow_function: SlowFunction::LogLog,
            expander_threshold: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanarParams {
    pub sizes: Vec<usize>,
    pub t_values: Vec<usize>,
    pub probe_sides: Vec<usize>,
    pub probe_times: Vec<usize>,
    pub starts: usize,
    pub slack: f64,
}

impl Default for PlanarParams {
    fn default() -> Self {
        Self {
            sizes: vec![128],
            t_values: vec![16, 64, 256],
            probe_sides: vec![4, 8, 16],
            probe_times: vec![1, 2, 4, 8, 16, 32],
            starts: 16,
            slack: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub root: Option<usize>,
    pub n_values: Vec<u64>,
    pub lambdas: Vec<f64>,
    pub radii: Vec<u64>,
    /// Starts beyond this many are subsampled from π.
    pub max_starts: usize,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            root: None,
            n_values: vec![4],
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            radii: vec![40],
            max_starts: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub max_vertices: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_vertices: crate::generators::DEFAULT_VERTEX_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub walk: WalkParams,
    #[serde(default)]
    pub embed: EmbedParams,
    #[serde(default)]
    pub scan: ScanParams,
    #[serde(default)]
    pub exceptional: ExceptionalParams,
    #[serde(default)]
    pub planar: PlanarParams,
    #[serde(default)]
    pub bound: BoundParams,
    #[serde(default)]
    pub caps: Caps,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn check_times(name: &str, ts: &[usize]) -> Result<()> {
    if ts.is_empty() || ts.contains(&0) {
        return Err(Error::Config(format!("{name} must be a nonempty list of positive times")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!("{name} must be positive and finite")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, experiment: ExperimentKind) -> Self {
        Self {
            name: name.into(),
            experiment,
            seed: 0,
            output_dir: default_output_dir(),
            graph: None,
            walk: WalkParams::default(),
            embed: EmbedParams::default(),
            scan: ScanParams::default(),
            exceptional: ExceptionalParams::default(),
            planar: PlanarParams::default(),
            bound: BoundParams::default(),
            caps: Caps::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    /// Checks every parameter the selected experiment reads.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config("name must be a nonempty file-name-safe string".into()));
        }
        // TOML integers are signed
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed must be at most {}", i64::MAX)));
        }
        let needs_graph = matches!(
            self.experiment,
            ExperimentKind::Gen | ExperimentKind::Walk | ExperimentKind::Embed | ExperimentKind::Scan | ExperimentKind::DiffusiveVsBound
        );
        if needs_graph {
            let spec = self
                .graph
                .as_ref()
                .ok_or_else(|| Error::Config(format!("{:?} needs a [graph] section", self.experiment)))?;
            validate_graph_spec(spec, &self.caps)?;
        }
        match self.experiment {
            ExperimentKind::Gen => {}
            ExperimentKind::Walk => {
                check_times("walk.t_grid", &self.walk.t_grid)?;
                if self.walk.mode == WalkMode::MonteCarlo && self.walk.samples == 0 {
                    return Err(Error::Config("walk.samples must be positive".into()));
                }
            }
            ExperimentKind::Embed => {
                if self.embed.m == 0 || self.embed.taus.is_empty() {
                    return Err(Error::Config("embed needs m > 0 and at least one tau".into()));
                }
                for &tau in &self.embed.taus {
                    check_positive("embed.taus", tau)?;
                }
            }
            ExperimentKind::Scan => {
                self.scan.grid()?;
            }
            ExperimentKind::Exceptional => {
                let e = &self.exceptional;
                if e.n_values.len() < 2 || e.n_values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("exceptional.n_values needs at least two increasing sizes".into()));
                }
                if e.n_values.iter().any(|&n| n < 4 || n % 2 != 0) {
                    return Err(Error::Config("exceptional.n_values must be even and at least 4".into()));
                }
                check_positive("exceptional.factor", e.factor)?;
                check_positive("exceptional.t_scale", e.t_scale)?;
                if !(e.expander_threshold > 0.0 && e.expander_threshold < 1.0) {
                    return Err(Error::Config("exceptional.expander_threshold must lie in (0,1)".into()));
                }
                if e.samples < 2 || (e.control && e.control_samples < 2) {
                    return Err(Error::Config("exceptional sample counts must be at least 2".into()));
                }
            }
            ExperimentKind::Planar => {
                let p = &self.planar;
                if p.sizes.is_empty() || p.sizes.contains(&0) {
                    return Err(Error::Config("planar.sizes must be positive".into()));
                }
                check_times("planar.t_values", &p.t_values)?;
                check_times("planar.probe_times", &p.probe_times)?;
                if p.probe_sides.is_empty() || p.probe_sides.contains(&0) || p.starts == 0 {
                    return Err(Error::Config("planar needs probe sides and starts".into()));
                }
                if p.probe_sides.iter().any(|&s| p.sizes.iter().any(|&l| s > l)) {
                    return Err(Error::Config("probe boxes must fit in every grid".into()));
                }
                if !(p.slack >= 0.0) {
                    return Err(Error::Config("planar.slack must be non-negative".into()));
                }
            }
            ExperimentKind::DiffusiveVsBound => {
                let b = &self.bound;
                if b.n_values.is_empty() || b.n_values.contains(&0) || b.radii.is_empty() || b.max_starts == 0 {
                    return Err(Error::Config("bound needs positive n values, radii and max_starts".into()));
                }
                if b.lambdas.is_empty() {
                    return Err(Error::Config("bound.lambdas must be nonempty".into()));
                }
                for &l in &b.lambdas {
                    check_positive("bound.lambdas", l)?;
                }
                for &n in &b.n_values {
                    if ScaleConstants::new(n)?.beta > crate::graph::MAX_SCALE {
                        return Err(Error::Config(format!("bound n = {n} is beyond the supported scales")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_graph_spec(spec: &GraphSpec, caps: &Caps) -> Result<()> {
    let too_big = |size: usize| -> Result<()> {
        if size > caps.max_vertices {
            return Err(Error::Config(format!(
                "graph would have {size} vertices, above caps.max_vertices = {}",
                caps.max_vertices
            )));
        }
        Ok(())
    };
    match spec {
        GraphSpec::Standard { family, dims } => {
            let want = match family {
                StandardKind::Path | StandardKind::Cycle => 1,
                StandardKind::Grid | StandardKind::Torus => 2,
            };
            if dims.len() != want || dims.contains(&0) {
                return Err(Error::Config(format!("{family:?} takes {want} positive dimension(s)")));
            }
            too_big(dims.iter().product())
        }
        GraphSpec::Expander { n, gap_threshold } => {
            expander_spec(*n, 0, *gap_threshold).validate().map_err(|e| Error::Config(e.to_string()))?;
            too_big(*n)
        }
        GraphSpec::Stretched { n, stretch, gap_threshold } => {
            expander_spec(*n, 0, *gap_threshold).validate().map_err(|e| Error::Config(e.to_string()))?;
            if *stretch == 0 {
                return Err(Error::Config("stretch must be positive".into()));
            }
            too_big(n + (3 * n / 2) * (stretch - 1))
        }
        GraphSpec::Hk { n_sequence } => HkParams::new(n_sequence.clone())
            .validate()
            .map_err(|e| Error::Config(e.to_string())),
        GraphSpec::File { path } => {
            if path.as_os_str().is_empty() {
                return Err(Error::Config("graph file path is empty".into()));
            }
            Ok(())
        }
    }
}

fn expander_spec(n: usize, seed: u64, gap_threshold: Option<f64>) -> ExpanderSpec {
    let mut spec = ExpanderSpec::new(n, seed);
    if let Some(t) = gap_threshold {
        spec.spectral_gap_threshold = t;
    }
    spec
}

pub struct BuiltGraph {
    pub graph: RootedGraph,
    pub meta: GraphMetadata,
}

/// Builds the configured graph; generator randomness comes from `seed`.
pub fn build_graph(spec: &GraphSpec, seed: u64, caps: &Caps) -> Result<BuiltGraph> {
    validate_graph_spec(spec, caps)?;
    let params = serde_json::to_value(spec)?;
    match spec {
        GraphSpec::Standard { family, dims } => {
            let g = standard_graph(*family, dims)?;
            let meta = GraphMetadata::new(format!("{family:?}").to_lowercase(), params, None);
            let graph = RootedGraph::new(g, 0)?;
            Ok(BuiltGraph {
                meta: meta.with_rooted(&graph),
                graph,
            })
        }
        GraphSpec::Expander { n, gap_threshold } => {
            let e = random_regular_expander(&expander_spec(*n, seed, *gap_threshold))?;
            let diam = diameter(&e.graph, DiameterMode::Exact)?.value;
            let mut meta = GraphMetadata::new("expander", params, Some(seed));
            meta.diameter_constant = Some(diam as f64 / (*n as f64).ln());
            let graph = RootedGraph::new(e.graph, 0)?;
            Ok(BuiltGraph {
                meta: meta.with_rooted(&graph),
                graph,
            })
        }
        GraphSpec::Stretched { n, stretch, gap_threshold } => {
            let (graph, e) = stretched_expander(&expander_spec(*n, seed, *gap_threshold), *stretch)?;
            let diam = diameter(&e.graph, DiameterMode::Exact)?.value;
            let mut meta = GraphMetadata::new("stretched_expander", params, Some(seed));
            meta.diameter_constant = Some(diam as f64 / (*n as f64).ln());
            Ok(BuiltGraph {
                meta: meta.with_rooted(&graph),
                graph,
            })
        }
        GraphSpec::Hk { n_sequence } => {
            let mut hp = HkParams::new(n_sequence.clone());
            hp.vertex_budget = caps.max_vertices;
            let hk = build_hk(&hp, &ExpanderSpec::new(n_sequence[0], seed))?;
            let mut meta = GraphMetadata::new("hk", params, Some(seed));
            meta.diameter_constant = Some(hk.diameter_constant);
            Ok(BuiltGraph {
                meta: meta.with_rooted(&hk.graph),
                graph: hk.graph,
            })
        }
        GraphSpec::File { path } => {
            let (g, meta) = load_graph(path)?;
            if g.vertex_count() > caps.max_vertices {
                return Err(Error::Config("graph file exceeds caps.max_vertices".into()));
            }
            let meta = meta.unwrap_or_else(|| GraphMetadata::new("file", params, None));
            let mut graph = RootedGraph::new(g, meta.root.unwrap_or(0))?;
            if let Some(levels) = meta.levels.clone() {
                graph = graph.with_levels(levels)?;
            }
            Ok(BuiltGraph { graph, meta })
        }
    }
}

/// One CSV data row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    /// Time or scale parameter of the statistic.
    pub t: f64,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(t: f64, statistic: impl Into<String>, e: Estimate, seed: u64) -> Self {
        Self {
            t,
            statistic: statistic.into(),
            value: e.mean,
            stderr: e.stderr,
            n_samples: e.samples,
            seed,
        }
    }

    pub fn exact(t: f64, statistic: impl Into<String>, value: f64, seed: u64) -> Self {
        Self::new(t, statistic, Estimate::exact(value), seed)
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

// ---------------------------------------------------------------- walk

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub vertices: usize,
    pub start: Option<usize>,
    pub mode: WalkMode,
    pub t_grid: Vec<usize>,
    pub msd: Vec<Estimate>,
}

pub fn run_walk(config: &ExperimentConfig) -> Result<(WalkReport, Vec<CsvRow>)> {
    let spec = config.graph.as_ref().ok_or_else(|| invalid("walk needs a graph"))?;
    let built = build_graph(spec, derive_seed(config.seed, GRAPH_SEED), &config.caps)?;
    let g = &built.graph.graph;
    let p = &config.walk;
    let walk = RestrictedWalk::simple(g);
    let start = p.start.map_or(Start::Stationary, Start::Vertex);
    let mut t_grid = p.t_grid.clone();
    t_grid.sort_unstable();
    t_grid.dedup();
    let seed = derive_seed(config.seed, WALK_SEED);
    let msd = match p.mode {
        WalkMode::Exact => msd_exact(&walk, start, &t_grid)?.into_iter().map(Estimate::exact).collect(),
        WalkMode::MonteCarlo => match spec {
            GraphSpec::Standard {
                family: StandardKind::Torus,
                dims,
            } => msd_monte_carlo(&walk, start, &t_grid, p.samples, seed, &mut TorusOracle::new(dims[0], dims[1]))?,
            _ => msd_monte_carlo(&walk, start, &t_grid, p.samples, seed, &mut BfsOracle::new(g))?,
        },
    };
    let rows = t_grid
        .iter()
        .zip(&msd)
        .map(|(&t, &e)| CsvRow::new(t as f64, "msd", e, seed))
        .collect();
    Ok((
        WalkReport {
            vertices: g.vertex_count(),
            start: p.start,
            mode: p.mode,
            t_grid,
            msd,
        },
        rows,
    ))
}

// ---------------------------------------------------------------- embed

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedScale {
    pub tau: f64,
    pub m: usize,
    pub max_lipschitz_excess: f64,
    pub mean_edge_distance: f64,
    pub file: String,
}

pub fn run_embed(config: &ExperimentConfig, out: &Path) -> Result<(Vec<EmbedScale>, Vec<CsvRow>, Vec<String>)> {
    let spec = config.graph.as_ref().ok_or_else(|| invalid("embed needs a graph"))?;
    let built = build_graph(spec, derive_seed(config.seed, GRAPH_SEED), &config.caps)?;
    let g = &built.graph.graph;
    let seed = derive_seed(config.seed, EMBED_SEED);
    let mut scales = Vec::new();
    let mut rows = Vec::new();
    let mut files = Vec::new();
    for (i, &tau) in config.embed.taus.iter().enumerate() {
        let sub_seed = derive_seed(seed, i as u64);
        let mut metric = GraphMetric::full(g);
        let e = threshold_map(&mut metric, tau, config.embed.m, sub_seed)?;
        let excess = (0..e.m)
            .map(|s| lipschitz_excess(&mut metric, e.sample(s)))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut edge = Running::default();
        for (u, v) in g.edges() {
            edge.push(e.distance(u, v));
        }
        let stem = format!("{}_tau{}", config.name, i);
        e.save(&out.join(&stem))?;
        files.push(format!("{stem}.json"));
        files.push(format!("{stem}.bin"));
        rows.push(CsvRow::exact(tau, "max_lipschitz_excess", excess, sub_seed));
        rows.push(CsvRow::new(tau, "mean_edge_distance", edge.estimate(), sub_seed));
        scales.push(EmbedScale {
            tau,
            m: e.m,
            max_lipschitz_excess: excess,
            mean_edge_distance: edge.mean(),
            file: stem,
        });
    }
    Ok((scales, rows, files))
}

// ---------------------------------------------------------------- scan

pub fn run_scan(config: &ExperimentConfig) -> Result<(ScanResult, Vec<CsvRow>)> {
    let spec = config.graph.as_ref().ok_or_else(|| invalid("scan needs a graph"))?;
    let built = build_graph(spec, derive_seed(config.seed, GRAPH_SEED), &config.caps)?;
    let root = config.scan.root.unwrap_or(built.graph.root);
    let result = scan_good_scales(&built.graph.graph, root, &config.scan.grid()?)?;
    let b = result.best;
    let rows = vec![
        CsvRow::exact(0.0, "psi", result.psi, config.seed),
        CsvRow::exact(0.0, "selected_k", b.k as f64, config.seed),
        CsvRow::exact(0.0, "selected_r", b.r as f64, config.seed),
        CsvRow::exact(0.0, "selected_ell", b.ell as f64, config.seed),
        CsvRow::exact(b.n as f64, "selected_n", b.n as f64, config.seed),
        CsvRow::exact(b.n as f64, "c", result.c, config.seed),
        CsvRow::exact(b.n as f64, "tempered", result.report.tempered as u8 as f64, config.seed),
        CsvRow::exact(b.n as f64, "insulated", result.report.insulated as u8 as f64, config.seed),
    ];
    Ok((result, rows))
}

// ---------------------------------------------------------------- exceptional

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Error bars too wide to assert anything.
    Insignificant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPoint {
    pub n: usize,
    pub t: usize,
    pub vertices: usize,
    pub msd: Estimate,
    /// `MSD(t) / t`.
    pub ratio: Estimate,
    /// `t ln t / f(t)`.
    pub threshold: f64,
    /// `3σ < 10%` of the estimate.
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub n: usize,
    pub t: usize,
    pub side: usize,
    pub ratio: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalReport {
    pub points: Vec<ExceptionalPoint>,
    pub increasing: bool,
    /// `(r_max − 3σ) / (r_min + 3σ)`.
    pub ratio_lower: f64,
    pub factor: f64,
    pub significant: bool,
    pub verdict: Verdict,
    pub control: Vec<ControlPoint>,
    pub control_flat: Option<bool>,
}

fn significant(e: &Estimate) -> bool {
    3.0 * e.stderr < 0.1 * e.mean
}

fn scale_estimate(e: Estimate, by: f64) -> Estimate {
    Estimate {
        mean: e.mean / by,
        stderr: e.stderr / by,
        samples: e.samples,
    }
}

/// Monte Carlo `E[d(Z_0, Z_t)²]` for the simple walk on the `side × side`
/// torus, simulated by coordinates (a uniform start is stationary, and the
/// displacement law does not depend on it).
pub fn torus_msd_monte_carlo(side: usize, t: usize, count: usize, seed: u64) -> Result<Estimate> {
    if side < 3 || count == 0 {
        return Err(invalid("torus control needs side >= 3 and samples"));
    }
    let mut acc = Running::default();
    let oracle = TorusOracle::new(side, side);
    for i in 0..count as u64 {
        let mut rng = stream(seed, i);
        let (mut r, mut c) = (0usize, 0usize);
        for _ in 0..t {
            match rng.gen_range(0..4u8) {
                0 => r = (r + 1) % side,
                1 => r = (r + side - 1) % side,
                2 => c = (c + 1) % side,
                _ => c = (c + side - 1) % side,
            }
        }
        let d = oracle.distance(0, r * side + c) as f64;
        acc.push(d * d);
    }
    Ok(acc.estimate())
}

pub fn exceptional_time(n: usize, t_scale: f64) -> usize {
    let n = n as f64;
    (t_scale * n * n * n.ln()).ceil() as usize
}

/// Stationary-start MSD on `G_n[n]` at `t_n = ⌈n² ln n⌉` for each `n`, with
/// a torus control at the same times.
pub fn run_exceptional(config: &ExperimentConfig) -> Result<(ExceptionalReport, Vec<CsvRow>)> {
    let p = &config.exceptional;
    let seed = derive_seed(config.seed, EXCEPTIONAL_SEED);
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &n in &p.n_values {
        let graph_seed = derive_seed(seed, 2 * n as u64);
        let walk_seed = derive_seed(seed, 2 * n as u64 + 1);
        let (h, _) = stretched_expander(&expander_spec(n, graph_seed, Some(p.expander_threshold)), n)?;
        let g = &h.graph;
        let t = exceptional_time(n, p.t_scale);
        let walk = RestrictedWalk::simple(g);
        let msd = msd_monte_carlo(&walk, Start::Stationary, &[t], p.samples, walk_seed, &mut BfsOracle::new(g))?[0];
        let ratio = scale_estimate(msd, t as f64);
        let tf = t as f64;
        let threshold = tf * tf.ln() / p.slow_function.eval(tf);
        rows.push(CsvRow::new(tf, format!("msd_n{n}"), msd, walk_seed));
        rows.push(CsvRow::new(tf, format!("ratio_n{n}"), ratio, walk_seed));
        rows.push(CsvRow::exact(tf, format!("threshold_n{n}"), threshold, walk_seed));
        points.push(ExceptionalPoint {
            n,
            t,
            vertices: g.vertex_count(),
            msd,
            ratio,
            threshold,
            significant: significant(&msd),
        });
    }
    let increasing = points.windows(2).all(|w| w[1].ratio.mean > w[0].ratio.mean);
    let (first, last) = (&points[0].ratio, &points[points.len() - 1].ratio);
    let ratio_lower = (last.mean - 3.0 * last.stderr) / (first.mean + 3.0 * first.stderr);
    let all_significant = points.iter().all(|q| q.significant);
    let verdict = if !all_significant {
        Verdict::Insignificant
    } else if increasing && ratio_lower >= p.factor {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let mut control = Vec::new();
    if p.control {
        let cseed = derive_seed(config.seed, CONTROL_SEED);
        for &n in &p.n_values {
            let t = exceptional_time(n, p.t_scale);
            // wide enough that wrap-around is negligible at time t
            let side = 8 * ((t as f64).sqrt().ceil() as usize);
            let s = derive_seed(cseed, n as u64);
            let msd = torus_msd_monte_carlo(side, t, p.control_samples, s)?;
            let ratio = scale_estimate(msd, t as f64);
            rows.push(CsvRow::new(t as f64, format!("control_ratio_n{n}"), ratio, s));
            control.push(ControlPoint { n, t, side, ratio });
        }
    }
    let control_flat = p.control.then(|| {
        control.iter().all(|a| {
            control.iter().all(|b| {
                (a.ratio.mean - b.ratio.mean).abs()
                    <= 3.0 * (a.ratio.stderr.powi(2) + b.ratio.stderr.powi(2)).sqrt()
            })
        })
    });
    Ok((
        ExceptionalReport {
            points,
            increasing,
            ratio_lower,
            factor: p.factor,
            significant: all_significant,
            verdict,
            control,
            control_flat,
        },
        rows,
    ))
}

// ---------------------------------------------------------------- planar

/// Axis-aligned box `[row0, row0 + side) × [col0, col0 + side)` in an
/// `l × l` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub l: usize,
    pub row0: usize,
    pub col0: usize,
    pub side: usize,
}

impl GridBox {
    pub fn centered(l: usize, side: usize) -> Self {
        let o = (l - side) / 2;
        Self {
            l,
            row0: o,
            col0: o,
            side,
        }
    }

    pub fn corner(l: usize, side: usize) -> Self {
        Self {
            l,
            row0: 0,
            col0: 0,
            side,
        }
    }

    pub fn subset(&self, g: &Graph) -> Result<VertexSubset> {
        VertexSubset::from_vertices(
            g,
            (self.row0..self.row0 + self.side)
                .flat_map(|r| (self.col0..self.col0 + self.side).map(move |c| r * self.l + c)),
        )
    }

    /// Box sides lying on the grid border.
    fn border_sides(&self) -> usize {
        [
            self.row0 == 0,
            self.col0 == 0,
            self.row0 + self.side == self.l,
            self.col0 + self.side == self.l,
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    /// `|∂S| / μ(S)` from counting, valid for `l ≥ 2`.
    pub fn expansion_closed_form(&self) -> f64 {
        let open = 4 - self.border_sides();
        let boundary = open * self.side;
        let measure = 4 * self.side * self.side - self.border_sides() * self.side;
        boundary as f64 / measure as f64
    }

    pub fn measure(&self) -> usize {
        4 * self.side * self.side - self.border_sides() * self.side
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarRow {
    pub l: usize,
    pub t: usize,
    pub m: f64,
    /// `(M / t)²`.
    pub target: f64,
    pub feasible: bool,
    /// The selected box, or the least expanding one when none is feasible.
    pub chosen: GridBox,
    pub expansion: f64,
    pub min_msd: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarReport {
    pub rows: Vec<PlanarRow>,
    pub all_hold: bool,
}

/// For each grid and time: the Markov-type constant `M`, the smallest Følner
/// box with `φ(S) ≤ (M/t)²`, and the smallest MSD of the walk on the grid
/// from starts drawn from `π_S`.
pub fn run_planar_dichotomy(config: &ExperimentConfig) -> Result<(PlanarReport, Vec<CsvRow>)> {
    let p = &config.planar;
    let seed = derive_seed(config.seed, PLANAR_SEED);
    let mut out = Vec::new();
    let mut csv = Vec::new();
    for &l in &p.sizes {
        let g = standard_graph(StandardKind::Grid, &[l, l])?;
        let probes = p
            .probe_sides
            .iter()
            .map(|&s| GridBox::centered(l, s).subset(&g))
            .collect::<Result<Vec<_>>>()?;
        let m = graphic_markov_type_probe(&g, &probes, &p.probe_times)?.m;
        let mut boxes: Vec<GridBox> = (1..=l)
            .flat_map(|s| [GridBox::centered(l, s), GridBox::corner(l, s)])
            .collect();
        boxes.sort_by_key(|b| b.measure());
        let walk = RestrictedWalk::simple(&g);
        for &t in &p.t_values {
            let target = (m / t as f64).powi(2);
            let feasible = boxes.iter().find(|b| b.expansion_closed_form() <= target);
            let chosen = *feasible.unwrap_or_else(|| {
                boxes
                    .iter()
                    .min_by(|a, b| a.expansion_closed_form().total_cmp(&b.expansion_closed_form()))
                    .expect("nonempty")
            });
            let s = chosen.subset(&g)?;
            let expansion = edge_expansion(&g, &s)?;
            let restricted = RestrictedWalk::new(&g, s)?;
            let sseed = derive_seed(seed, (l * 1_000_003 + t) as u64);
            let mut min_msd = f64::INFINITY;
            for i in 0..p.starts as u64 {
                let x = restricted.sample_start(Start::Stationary, &mut stream(sseed, i));
                min_msd = min_msd.min(msd_exact(&walk, Start::Vertex(x), &[t])?[0]);
            }
            let bound = 2.0 * m * m * t as f64;
            let holds = feasible.is_some() && min_msd <= bound * (1.0 + p.slack);
            csv.push(CsvRow::exact(t as f64, format!("expansion_l{l}"), expansion, sseed));
            csv.push(CsvRow::exact(t as f64, format!("min_msd_l{l}"), min_msd, sseed));
            csv.push(CsvRow::exact(t as f64, format!("bound_l{l}"), bound, sseed));
            out.push(PlanarRow {
                l,
                t,
                m,
                target,
                feasible: feasible.is_some(),
                chosen,
                expansion,
                min_msd,
                bound,
                holds,
            });
        }
    }
    let all_hold = out.iter().all(|r| r.holds);
    Ok((PlanarReport { rows: out, all_hold }, csv))
}

// ---------------------------------------------------------------- diffusive vs bound

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleRow {
    pub n: u64,
    pub lambda: f64,
    pub r: u64,
    pub report: TemperReport,
    /// Triples failing the temper/insulate gate are reported, not asserted.
    pub included: bool,
    /// `π` of `S↑_λ(α_n)` within `B(r)`.
    pub s_up_mass: Option<f64>,
    /// Speed budget `2n + 256 Σ …` with `f(k) = 128(1 + λ φ̄(k))`.
    pub budget: Option<f64>,
    /// `E[d(Z_0, Z_{2n})² 1_{S↑}(Z_0)]` for the stationary walk on `B(r)`.
    pub conditional_msd: Option<f64>,
    pub budget_holds: Option<bool>,
    /// `π` of starts outside `S↑` or whose MSD exceeds the budget.
    pub exceedance: Option<f64>,
    /// `2/λ`.
    pub decay_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<TripleRow>,
    /// Exceedance non-increasing in λ within every `(n, r)` group.
    pub monotone: bool,
}

struct StartMsd {
    vertices: Vec<u32>,
    weights: Vec<f64>,
    msd: Vec<f64>,
}

fn start_msds(walk: &RestrictedWalk, t: usize, max_starts: usize, seed: u64) -> Result<StartMsd> {
    let pi = walk.stationary();
    let (vertices, weights): (Vec<u32>, Vec<f64>) = if walk.len() <= max_starts {
        pi.iter().map(|(v, p)| (v as u32, p)).unzip()
    } else {
        let w = 1.0 / max_starts as f64;
        (0..max_starts as u64)
            .map(|i| (walk.sample_start(Start::Stationary, &mut stream(seed, i)) as u32, w))
            .unzip()
    };
    let msd = vertices
        .iter()
        .map(|&x| Ok(msd_exact(walk, Start::Vertex(x as usize), &[t])?[0]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(StartMsd { vertices, weights, msd })
}

/// Gate and speed-budget measurement for one `(n, λ, r)` triple around `rho`.
pub fn bound_check_triple(
    g: &Graph,
    rho: usize,
    n: u64,
    lambda: f64,
    r: u64,
    max_starts: usize,
    seed: u64,
) -> Result<TripleRow> {
    let c = ScaleConstants::new(n)?;
    let growth = RootedGrowth::new(g, rho, r, c.beta.max(1))?;
    let mut rows = bound_rows(g, &growth, n, &[lambda], r, max_starts, seed)?;
    Ok(rows.remove(0))
}

fn bound_rows(
    g: &Graph,
    growth: &RootedGrowth,
    n: u64,
    lambdas: &[f64],
    r: u64,
    max_starts: usize,
    seed: u64,
) -> Result<Vec<TripleRow>> {
    let c = ScaleConstants::new(n)?;
    let mut bfs = Bfs::new(g);
    let ball = bfs.ball(growth.root, r.min(u32::MAX as u64) as u32).subset(g);
    let walk = RestrictedWalk::new(g, ball.clone())?;
    let mut starts: Option<StartMsd> = None;
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let report = temper_insulate_with(growth, n, lambda, r)?;
        let mut row = TripleRow {
            n,
            lambda,
            r,
            included: report.passes(),
            report,
            s_up_mass: None,
            budget: None,
            conditional_msd: None,
            budget_holds: None,
            exceedance: None,
            decay_bound: 2.0 / lambda,
        };
        if row.included {
            let k0 = c.alpha.max(1);
            let summary = growth_summary(g, &ball, k0..=c.beta.max(k0), lambda, k0)?;
            let budget = speed_bound_for_growth(n, lambda, |k| summary.bar_phi_at(k))?;
            if starts.is_none() {
                starts = Some(start_msds(&walk, 2 * n as usize, max_starts, seed)?);
            }
            let s = starts.as_ref().expect("computed");
            let up: std::collections::HashSet<u32> = summary.s_up.iter().copied().collect();
            let mut conditional = 0.0;
            let mut exceed = 0.0;
            for ((&x, &w), &m) in s.vertices.iter().zip(&s.weights).zip(&s.msd) {
                let inside = up.contains(&x);
                if inside {
                    conditional += w * m;
                }
                if !inside || m > budget {
                    exceed += w;
                }
            }
            row.s_up_mass = Some(summary.pi_s_up);
            row.budget = Some(budget);
            row.conditional_msd = Some(conditional);
            row.budget_holds = Some(conditional <= budget);
            row.exceedance = Some(exceed);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs every `(n, λ, r)` triple of the config around the root.
pub fn run_diffusive_vs_bound(config: &ExperimentConfig) -> Result<(BoundReport, Vec<CsvRow>)> {
    let spec = config.graph.as_ref().ok_or_else(|| invalid("bound needs a graph"))?;
    let built = build_graph(spec, derive_seed(config.seed, GRAPH_SEED), &config.caps)?;
    let g = &built.graph.graph;
    let b = &config.bound;
    let rho = b.root.unwrap_or(built.graph.root);
    let seed = derive_seed(config.seed, BOUND_SEED);
    let mut lambdas = b.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut monotone = true;
    for &n in &b.n_values {
        let c = ScaleConstants::new(n)?;
        for &r in &b.radii {
            let growth = RootedGrowth::new(g, rho, r, c.beta.max(1))?;
            let group = bound_rows(g, &growth, n, &lambdas, r, b.max_starts, derive_seed(seed, n ^ (r << 32)))?;
            let ex: Vec<f64> = group.iter().filter_map(|t| t.exceedance).collect();
            monotone &= ex.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            rows.extend(group);
        }
    }
    let csv = rows
        .iter()
        .flat_map(|t| {
            let tag = format!("n{}_r{}_lambda{}", t.n, t.r, t.lambda);
            let mut v = vec![CsvRow::exact(t.n as f64, format!("included_{tag}"), t.included as u8 as f64, seed)];
            if let (Some(e), Some(m), Some(bu)) = (t.exceedance, t.conditional_msd, t.budget) {
                v.push(CsvRow::exact(t.n as f64, format!("exceedance_{tag}"), e, seed));
                v.push(CsvRow::exact(t.n as f64, format!("conditional_msd_{tag}"), m, seed));
                v.push(CsvRow::exact(t.n as f64, format!("budget_{tag}"), bu, seed));
            }
            v
        })
        .collect();
    Ok((BoundReport { rows, monotone }, csv))
}

// ---------------------------------------------------------------- manifests

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    /// `"ok"` or `"failed: <reason>"`.
    pub status: String,
}

impl Manifest {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs the configured experiment into `config.output_dir`. A manifest is
/// written whether or not the run succeeds.
pub fn execute(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let out = &config.output_dir;
    fs::create_dir_all(out)?;
    let clock = Instant::now();
    let mut outputs = Vec::new();
    let result = run_into(config, out, &mut outputs);
    let manifest = Manifest {
        name: config.name.clone(),
        experiment: config.experiment,
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        outputs,
        status: match &result {
            Ok(()) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        },
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    result.map(|()| manifest)
}

fn run_into(config: &ExperimentConfig, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let name = &config.name;
    let emit = |summary: serde_json::Value, rows: &[CsvRow], outputs: &mut Vec<String>| -> Result<()> {
        let csv = format!("{name}.csv");
        write_csv(&out.join(&csv), rows)?;
        outputs.push(csv);
        let json = format!("{name}.json");
        fs::write(out.join(&json), serde_json::to_string_pretty(&summary)?)?;
        outputs.push(json);
        Ok(())
    };
    fs::write(out.join(format!("{name}.config.toml")), config.to_toml()?)?;
    outputs.push(format!("{name}.config.toml"));
    match config.experiment {
        ExperimentKind::Gen => {
            let spec = config.graph.as_ref().ok_or_else(|| invalid("gen needs a graph"))?;
            let built = build_graph(spec, derive_seed(config.seed, GRAPH_SEED), &config.caps)?;
            let file = format!("{name}.graph");
            crate::io::save_graph(&out.join(&file), &built.graph.graph, &built.meta)?;
            outputs.push(file.clone());
            outputs.push(format!("{file}.json"));
            Ok(())
        }
        ExperimentKind::Walk => {
            let (report, rows) = run_walk(config)?;
            emit(serde_json::to_value(&report)?, &rows, outputs)
        }
        ExperimentKind::Embed => {
            let (scales, rows, files) = run_embed(config, out)?;
            outputs.extend(files);
            emit(serde_json::to_value(&scales)?, &rows, outputs)
        }
        ExperimentKind::Scan => {
            let (result, rows) = run_scan(config)?;
            let summands = format!("{name}_summands.csv");
            write_csv(&out.join(&summands), &result.summands)?;
            outputs.push(summands);
            emit(serde_json::to_value(&result)?, &rows, outputs)
        }
        ExperimentKind::Exceptional => {
            let (report, rows) = run_exceptional(config)?;
            emit(serde_json::to_value(&report)?, &rows, outputs)
        }
        ExperimentKind::Planar => {
            let (report, rows) = run_planar_dichotomy(config)?;
            emit(serde_json::to_value(&report)?, &rows, outputs)
        }
        ExperimentKind::DiffusiveVsBound => {
            let (report, rows) = run_diffusive_vs_bound(config)?;
            emit(serde_json::to_value(&report)?, &rows, outputs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_config(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::new("t", kind);
        c.graph = Some(GraphSpec::Standard {
            family: StandardKind::Torus,
            dims: vec![8, 8],
        });
        c
    }

    #[test]
    fn config_toml_round_trip() {
        let mut c = torus_config(ExperimentKind::Walk);
        c.embed.taus = vec![0.1, 1.0 / 3.0];
        c.bound.lambdas = vec![std::f64::consts::PI];
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut c = ExperimentConfig::new("t", ExperimentKind::Walk);
        assert!(c.validate().is_err());
        c = torus_config(ExperimentKind::Walk);
        c.walk.t_grid = vec![0];
        assert!(c.validate().is_err());
        c = torus_config(ExperimentKind::Exceptional);
        c.exceptional.n_values = vec![64, 32];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("name = \"x\"\nexperiment = \"walk\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn box_expansion_matches_graph() {
        let l = 9;
        let g = standard_graph(StandardKind::Grid, &[l, l]).unwrap();
        for side in 1..=l {
            for b in [GridBox::centered(l, side), GridBox::corner(l, side)] {
                let s = b.subset(&g).unwrap();
                assert_eq!(b.measure(), s.measure());
                assert!((b.expansion_closed_form() - edge_expansion(&g, &s).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn slow_function_defaults() {
        assert!((SlowFunction::LogLog.eval(0.0) - 1.0).abs() < 1e-15);
        assert!(SlowFunction::LogLog.eval(1e6) > SlowFunction::LogLog.eval(1e3));
    }

    #[test]
    fn torus_control_is_near_diffusive() {
        let e = torus_msd_monte_carlo(64, 64, 4000, 1).unwrap();
        // E(|x| + |y|)² ≈ t (1 + 2/π) for the planar walk
        assert!(e.agrees_with(64.0 * (1.0 + 2.0 / std::f64::consts::PI), 4.0), "{e:?}");
    }

    #[test]
    fn bound_gate_excludes_non_insulated() {
        let g = standard_graph(StandardKind::Torus, &[16, 16]).unwrap();
        let row = bound_check_triple(&g, 0, 4, 8.0, 6, 100, 1).unwrap();
        assert!(!row.included && row.exceedance.is_none());
        let row = bound_check_triple(&g, 0, 4, 8.0, 24, 100, 1).unwrap();
        assert!(row.included);
        assert_eq!(row.budget_holds, Some(true));
    }
}
