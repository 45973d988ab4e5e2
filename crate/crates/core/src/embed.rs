//! CKR ball-carving partitions and the random threshold maps built on them.
//!
//! A partition at scale `τ` carves balls of a common radius `R ~ U[τ/4, τ/2)`
//! around the points of the ground set in uniformly random order. Each block
//! then gets a fair bit `α`, and the coordinate map is
//! `F(x) = α_{P(x)} · d(x, X \ P(x))`. Averaging `m` independent maps with
//! `1/√m` scaling gives a 1-Lipschitz map into `R^m`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::graph::{growth_profile, pow8, Bfs, Graph, VertexSubset};
use crate::rng;
use crate::stats::{Estimate, Running};

pub const ORACLE_CAP: usize = 6;
pub const MAX_EPSILON: f64 = 0.125;

const NO_POINT: u32 = u32::MAX;

/// A finite metric on points `0..len()` with integer distances.
pub trait Metric: Clone + Send {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points within `radius` of `i`, `i` included.
    fn ball(&mut self, i: usize, radius: u32, out: &mut Vec<u32>);

    /// `out[j] = d(i, j)`, `None` when unreachable.
    fn distances_from(&mut self, i: usize, out: &mut Vec<Option<u32>>);

    /// `(j, d(i, j))` for every point within `radius` of `i`.
    fn distances_within(&mut self, i: usize, radius: u32, out: &mut Vec<(u32, u32)>) {
        let mut all = Vec::new();
        self.distances_from(i, &mut all);
        out.clear();
        out.extend(
            all.iter()
                .enumerate()
                .filter_map(|(j, d)| d.filter(|&d| d <= radius).map(|d| (j as u32, d))),
        );
    }

    /// For every point, the distance to the nearest point carrying a different
    /// label, `None` if every point shares its label.
    fn distance_to_other_labels(&mut self, labels: &[u32]) -> Vec<Option<u32>>;
}

/// Shortest-path metric of a graph restricted to a ground subset.
#[derive(Clone)]
pub struct GraphMetric<'g> {
    graph: &'g Graph,
    ground: Vec<u32>,
    index: Vec<u32>,
    bfs: Bfs<'g>,
}

impl<'g> GraphMetric<'g> {
    pub fn new(graph: &'g Graph, ground: &VertexSubset) -> Result<Self> {
        if ground.universe_size() != graph.vertex_count() {
            return Err(invalid("ground set does not belong to this graph"));
        }
        let mut index = vec![NO_POINT; graph.vertex_count()];
        for (i, &v) in ground.members().iter().enumerate() {
            index[v as usize] = i as u32;
        }
        Ok(Self {
            graph,
            ground: ground.members().to_vec(),
            index,
            bfs: Bfs::new(graph),
        })
    }

    pub fn full(graph: &'g Graph) -> Self {
        Self::new(graph, &VertexSubset::full(graph)).expect("full subset")
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn vertex(&self, i: usize) -> usize {
        self.ground[i] as usize
    }

    pub fn point_of(&self, v: usize) -> Option<usize> {
        self.index
            .get(v)
            .filter(|&&i| i != NO_POINT)
            .map(|&i| i as usize)
    }
}

impl Metric for GraphMetric<'_> {
    fn len(&self) -> usize {
        self.ground.len()
    }

    fn ball(&mut self, i: usize, radius: u32, out: &mut Vec<u32>) {
        out.clear();
        let index = &self.index;
        out.extend(
            self.bfs
                .explore(self.ground[i] as usize, radius, |_, _| false)
                .iter()
                .map(|&v| index[v as usize])
                .filter(|&p| p != NO_POINT),
        );
    }

    fn distances_from(&mut self, i: usize, out: &mut Vec<Option<u32>>) {
        self.bfs.explore(self.ground[i] as usize, u32::MAX, |_, _| false);
        out.clear();
        out.extend(self.ground.iter().map(|&v| self.bfs.dist_of(v as usize)));
    }

    fn distances_within(&mut self, i: usize, radius: u32, out: &mut Vec<(u32, u32)>) {
        out.clear();
        let reached = self.bfs.explore(self.ground[i] as usize, radius, |_, _| false).to_vec();
        for &v in &reached {
            let p = self.index[v as usize];
            if p != NO_POINT {
                out.push((p, self.bfs.dist_of(v as usize).expect("reached")));
            }
        }
    }

    fn distance_to_other_labels(&mut self, labels: &[u32]) -> Vec<Option<u32>> {
        // multi-source BFS keeping the two nearest distinct labels per vertex
        let n = self.graph.vertex_count();
        let mut first: Vec<(u32, u32)> = vec![(NO_POINT, 0); n];
        let mut second: Vec<(u32, u32)> = vec![(NO_POINT, 0); n];
        let mut queue: Vec<(u32, u32, u32)> = Vec::with_capacity(2 * n);
        for (i, &v) in self.ground.iter().enumerate() {
            first[v as usize] = (labels[i], 0);
            queue.push((v, labels[i], 0));
        }
        let mut head = 0;
        while head < queue.len() {
            let (v, label, d) = queue[head];
            head += 1;
            for &u in self.graph.neighbors(v as usize) {
                let u = u as usize;
                if first[u].0 == NO_POINT {
                    first[u] = (label, d + 1);
                } else if second[u].0 == NO_POINT && first[u].0 != label {
                    second[u] = (label, d + 1);
                } else {
                    continue;
                }
                queue.push((u as u32, label, d + 1));
            }
        }
        self.ground
            .iter()
            .map(|&v| {
                let s = second[v as usize];
                (s.0 != NO_POINT).then_some(s.1)
            })
            .collect()
    }
}

/// Explicit distance matrix; intended for tiny fixtures.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMetric {
    n: usize,
    dist: Vec<u32>,
}

impl MatrixMetric {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("distance matrix must be square"));
        }
        for i in 0..n {
            if rows[i][i] != 0 {
                return Err(invalid("distance matrix needs a zero diagonal"));
            }
            for j in 0..n {
                if rows[i][j] != rows[j][i] || (i != j && rows[i][j] == 0) {
                    return Err(invalid("distance matrix must be symmetric and positive off the diagonal"));
                }
            }
        }
        Ok(Self {
            n,
            dist: rows.into_iter().flatten().collect(),
        })
    }

    /// Unit path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i.abs_diff(j) as u32).collect())
            .collect();
        Self::new(rows).expect("path metric")
    }

    pub fn from_graph(g: &Graph) -> Result<Self> {
        g.require_connected("distance matrix")?;
        let mut bfs = Bfs::new(g);
        let rows = (0..g.vertex_count())
            .map(|x| {
                bfs.explore(x, u32::MAX, |_, _| false);
                (0..g.vertex_count())
                    .map(|y| bfs.dist_of(y).expect("connected"))
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.n + j]
    }
}

impl Metric for MatrixMetric {
    fn len(&self) -> usize {
        self.n
    }

    fn ball(&mut self, i: usize, radius: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..self.n as u32).filter(|&j| self.get(i, j as usize) <= radius));
    }

    fn distances_from(&mut self, i: usize, out: &mut Vec<Option<u32>>) {
        out.clear();
        out.extend((0..self.n).map(|j| Some(self.get(i, j))));
    }

    fn distance_to_other_labels(&mut self, labels: &[u32]) -> Vec<Option<u32>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| labels[j] != labels[i])
                    .map(|j| self.get(i, j))
                    .min()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    /// Ground points of each nonempty block, in carving order.
    pub blocks: Vec<Vec<u32>>,
    pub assignment: Vec<u32>,
    /// The carving center of each block.
    pub centers: Vec<u32>,
    pub tau: f64,
    pub radius: f64,
}

impl Partition {
    pub fn block_of(&self, i: usize) -> usize {
        self.assignment[i] as usize
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Largest block diameter. Blocks sit inside balls of radius `⌊R⌋`, so
    /// distances are searched up to `2⌊R⌋` first, with an exhaustive
    /// fallback for blocks that do not fit.
    pub fn max_block_diameter<M: Metric>(&self, metric: &mut M) -> u32 {
        let cap = 2 * self.radius.floor() as u32;
        let mut near = Vec::new();
        let mut dist = Vec::new();
        let mut best = 0;
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                metric.distances_within(x as usize, cap, &mut near);
                let mut found = 0;
                for &(y, d) in &near {
                    if self.assignment[y as usize] == b as u32 {
                        found += 1;
                        best = best.max(d);
                    }
                }
                if found < block.len() {
                    metric.distances_from(x as usize, &mut dist);
                    for &y in block {
                        best = best.max(dist[y as usize].unwrap_or(u32::MAX));
                    }
                }
            }
        }
        best
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau must be positive and finite"));
    }
    Ok(())
}

/// Carves the ground set along `order` with a common radius.
pub fn carve<M: Metric>(metric: &mut M, order: &[u32], tau: f64, radius: f64) -> Partition {
    let n = metric.len();
    let r = radius.floor().max(0.0) as u32;
    let mut assignment = vec![NO_POINT; n];
    let mut blocks = Vec::new();
    let mut centers = Vec::new();
    let mut ball = Vec::new();
    let mut left = n;
    for &c in order {
        if left == 0 {
            break;
        }
        metric.ball(c as usize, r, &mut ball);
        let block: Vec<u32> = ball
            .iter()
            .copied()
            .filter(|&p| assignment[p as usize] == NO_POINT)
            .collect();
        if block.is_empty() {
            continue;
        }
        let id = blocks.len() as u32;
        for &p in &block {
            assignment[p as usize] = id;
        }
        left -= block.len();
        let mut block = block;
        block.sort_unstable();
        blocks.push(block);
        centers.push(c);
    }
    Partition {
        blocks,
        assignment,
        centers,
        tau,
        radius,
    }
}

struct PartitionDraw {
    partition: Partition,
    permutation_digest: String,
}

fn draw_partition<M: Metric, R: Rng>(metric: &mut M, tau: f64, rng: &mut R) -> PartitionDraw {
    let mut order: Vec<u32> = (0..metric.len() as u32).collect();
    order.shuffle(rng);
    let radius = rng.gen_range(tau / 4.0..tau / 2.0);
    let permutation_digest = digest(order.iter().flat_map(|p| p.to_le_bytes()));
    PartitionDraw {
        partition: carve(metric, &order, tau, radius),
        permutation_digest,
    }
}

fn digest(bytes: impl IntoIterator<Item = u8>) -> String {
    let mut h = Sha256::new();
    let bytes: Vec<u8> = bytes.into_iter().collect();
    h.update(&bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// One random CKR partition at scale `tau`, drawn from stream `(seed, 0)`.
pub fn ckr_partition<M: Metric>(metric: &mut M, tau: f64, seed: u64) -> Result<Partition> {
    check_tau(tau)?;
    if metric.is_empty() {
        return Err(invalid("ground set is empty"));
    }
    Ok(draw_partition(metric, tau, &mut rng::stream(seed, 0)).partition)
}

/// Number of ground points within `radius` (real) of `i`.
pub fn ball_count<M: Metric>(metric: &mut M, i: usize, radius: f64) -> usize {
    let mut out = Vec::new();
    metric.ball(i, radius.floor().max(0.0) as u32, &mut out);
    out.len()
}

/// `ln(e |B(x, 5τ/8)| / |B(x, τ/8)|)`.
pub fn local_log_ratio<M: Metric>(metric: &mut M, x: usize, tau: f64) -> f64 {
    let outer = ball_count(metric, x, 5.0 * tau / 8.0) as f64;
    let inner = ball_count(metric, x, tau / 8.0) as f64;
    1.0 + (outer / inner).ln()
}

/// The padding scale giving padding probability at least one half:
/// `ε(x) = 1 / (32 ln(e |B(x, 5τ/8)| / |B(x, τ/8)|))`.
pub fn padding_epsilon<M: Metric>(metric: &mut M, x: usize, tau: f64) -> f64 {
    1.0 / (32.0 * local_log_ratio(metric, x, tau))
}

/// Analytic upper bound `16 ε ln(e |B(x, 5τ/8)| / |B(x, τ/8)|)` on the
/// probability that `B(x, ετ)` is split.
pub fn padding_bound<M: Metric>(metric: &mut M, x: usize, tau: f64, eps: f64) -> f64 {
    16.0 * eps * local_log_ratio(metric, x, tau)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddingEstimate {
    pub point: usize,
    pub epsilon: f64,
    /// Frequency of `B(x, ετ) ⊄ P(x)`.
    pub failure: Estimate,
    pub bound: f64,
}

impl PaddingEstimate {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.failure.mean <= self.bound + sigmas * self.failure.stderr.max(binomial_floor(self))
    }
}

// stderr of a zero count is zero; use the bound's own binomial spread instead
fn binomial_floor(e: &PaddingEstimate) -> f64 {
    let p = e.bound.clamp(0.0, 1.0);
    (p * (1.0 - p) / e.failure.samples.max(1) as f64).sqrt()
}

/// Padding failure frequencies for several points, sharing each sampled
/// partition across all of them. Sample `i` uses stream `(seed, i)`.
pub fn padding_profile<M: Metric>(
    metric: &mut M,
    tau: f64,
    points: &[(usize, f64)],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PaddingEstimate>> {
    check_tau(tau)?;
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut padded_balls = Vec::with_capacity(points.len());
    for &(x, eps) in points {
        if x >= metric.len() {
            return Err(invalid(format!("point {x} outside the ground set")));
        }
        if !(eps > 0.0 && eps <= MAX_EPSILON) {
            return Err(invalid(format!("epsilon {eps} must lie in (0, 1/8]")));
        }
        let mut ball = Vec::new();
        metric.ball(x, (eps * tau).floor() as u32, &mut ball);
        padded_balls.push(ball);
    }
    let mut counts = vec![Running::default(); points.len()];
    for i in 0..n_samples as u64 {
        let p = draw_partition(metric, tau, &mut rng::stream(seed, i)).partition;
        for ((&(x, _), ball), c) in points.iter().zip(&padded_balls).zip(&mut counts) {
            let home = p.assignment[x];
            let split = ball.iter().any(|&y| p.assignment[y as usize] != home);
            c.push(if split { 1.0 } else { 0.0 });
        }
    }
    Ok(points
        .iter()
        .zip(counts)
        .map(|(&(x, eps), c)| PaddingEstimate {
            point: x,
            epsilon: eps,
            failure: c.estimate(),
            bound: padding_bound(metric, x, tau, eps),
        })
        .collect())
}

pub fn padding_probability<M: Metric>(
    metric: &mut M,
    tau: f64,
    x: usize,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<PaddingEstimate> {
    Ok(padding_profile(metric, tau, &[(x, eps)], n_samples, seed)?.remove(0))
}

/// `F(x) = α_{P(x)} · d(x, X \ P(x))`, taking the distance as 0 when the
/// block is the whole ground set.
pub fn coordinate_values<M: Metric>(metric: &mut M, p: &Partition, alphas: &[bool]) -> Vec<f64> {
    let gap = if p.blocks.len() <= 1 {
        vec![None; p.assignment.len()]
    } else {
        metric.distance_to_other_labels(&p.assignment)
    };
    p.assignment
        .iter()
        .zip(gap)
        .map(|(&b, g)| {
            if alphas[b as usize] {
                g.unwrap_or(0) as f64
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub values: Vec<f64>,
    pub alphas: Vec<bool>,
}

/// Draws the block bits from stream `(bernoulli_seed, 0)` and evaluates `F`.
pub fn coordinate_map<M: Metric>(metric: &mut M, p: &Partition, bernoulli_seed: u64) -> CoordinateMap {
    let mut rng = rng::stream(bernoulli_seed, 0);
    let alphas: Vec<bool> = (0..p.blocks.len()).map(|_| rng.gen()).collect();
    CoordinateMap {
        values: coordinate_values(metric, p, &alphas),
        alphas,
    }
}

/// Largest `|F(x) − F(y)| − d(x, y)` over all pairs; at most 0 for a
/// 1-Lipschitz map.
pub fn lipschitz_excess<M: Metric>(metric: &mut M, values: &[f64]) -> f64 {
    let mut dist = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for x in 0..metric.len() {
        metric.distances_from(x, &mut dist);
        for (y, d) in dist.iter().enumerate() {
            if let Some(d) = d {
                worst = worst.max((values[x] - values[y]).abs() - *d as f64);
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleProvenance {
    pub seed: u64,
    pub index: u64,
    pub permutation_digest: String,
    pub bernoulli_digest: String,
    /// Carving radius, stored as raw bits so that it round-trips exactly.
    pub radius_bits: u64,
}

impl SampleProvenance {
    pub fn radius(&self) -> f64 {
        f64::from_bits(self.radius_bits)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EnsembleHeader {
    ground: Vec<u32>,
    m: usize,
    tau: f64,
    provenance: Vec<SampleProvenance>,
}

/// `m` coordinate maps on a common ground set; `coords` is sample-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingEnsemble {
    pub ground: Vec<u32>,
    pub m: usize,
    pub tau: f64,
    pub coords: Vec<f64>,
    pub provenance: Vec<SampleProvenance>,
}

impl EmbeddingEnsemble {
    pub fn points(&self) -> usize {
        self.ground.len()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let n = self.points();
        &self.coords[i * n..(i + 1) * n]
    }

    /// `(1/m) Σ_i (F_i(x) − F_i(y))^2`.
    pub fn squared_distance(&self, x: usize, y: usize) -> f64 {
        let n = self.points();
        let total: f64 = (0..self.m)
            .map(|i| {
                let d = self.coords[i * n + x] - self.coords[i * n + y];
                d * d
            })
            .sum();
        total / self.m as f64
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.squared_distance(x, y).sqrt()
    }

    /// Per-sample values of `(F_i(x) − F_i(y))^2`, for standard errors.
    pub fn squared_differences(&self, x: usize, y: usize) -> Running {
        let n = self.points();
        (0..self.m)
            .map(|i| (self.coords[i * n + x] - self.coords[i * n + y]).powi(2))
            .collect()
    }

    /// Writes `<path>.json` (metadata) and `<path>.bin` (little-endian f64
    /// coordinates).
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = EnsembleHeader {
            ground: self.ground.clone(),
            m: self.m,
            tau: self.tau,
            provenance: self.provenance.clone(),
        };
        fs::write(sidecar(path, "json"), serde_json::to_vec_pretty(&header)?)?;
        let mut f = fs::File::create(sidecar(path, "bin"))?;
        let bytes: Vec<u8> = self.coords.iter().flat_map(|c| c.to_le_bytes()).collect();
        f.write_all(&bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let header: EnsembleHeader = serde_json::from_slice(&fs::read(sidecar(path, "json"))?)?;
        let mut bytes = Vec::new();
        fs::File::open(sidecar(path, "bin"))?.read_to_end(&mut bytes)?;
        let expected = header.m * header.ground.len() * 8;
        if bytes.len() != expected {
            return Err(invalid(format!(
                "coordinate file has {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let coords = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            ground: header.ground,
            m: header.m,
            tau: header.tau,
            coords,
            provenance: header.provenance,
        })
    }
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".");
    p.push(ext);
    PathBuf::from(p)
}

/// `m` independent (partition, bits) samples at scale `tau`; sample `i` uses
/// stream `(seed, i)` for both.
pub fn threshold_map(metric: &mut GraphMetric, tau: f64, m: usize, seed: u64) -> Result<EmbeddingEnsemble> {
    let ground = metric.ground.clone();
    threshold_map_with(metric, ground, tau, m, seed)
}

pub fn threshold_map_with<M: Metric>(
    metric: &mut M,
    ground: Vec<u32>,
    tau: f64,
    m: usize,
    seed: u64,
) -> Result<EmbeddingEnsemble> {
    check_tau(tau)?;
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    if metric.is_empty() || ground.len() != metric.len() {
        return Err(invalid("ground labels must match a nonempty metric"));
    }
    let mut coords = Vec::with_capacity(m * metric.len());
    let mut provenance = Vec::with_capacity(m);
    for i in 0..m as u64 {
        let mut rng = rng::stream(seed, i);
        let draw = draw_partition(metric, tau, &mut rng);
        let alphas: Vec<bool> = (0..draw.partition.len()).map(|_| rng.gen()).collect();
        coords.extend(coordinate_values(metric, &draw.partition, &alphas));
        provenance.push(SampleProvenance {
            seed,
            index: i,
            permutation_digest: draw.permutation_digest,
            bernoulli_digest: digest(alphas.iter().map(|&a| a as u8)),
            radius_bits: draw.partition.radius.to_bits(),
        });
    }
    Ok(EmbeddingEnsemble {
        ground,
        m,
        tau,
        coords,
        provenance,
    })
}

/// Co-Lipschitz target `8^k / (128 (1 + φ_x(k)))` for pairs at distance at
/// least `8^k`.
pub fn colipschitz_target(g: &Graph, x: usize, k: u32) -> Result<f64> {
    Ok(pow8(k) as f64 / (128.0 * (1.0 + growth_profile(g, x, k)?)))
}

/// Threshold maps at `τ = 8^k` for `k = 1..=k_max`.
pub fn scale_family(
    g: &Graph,
    ground: &VertexSubset,
    k_max: u32,
    m: usize,
    seed: u64,
) -> Result<Vec<EmbeddingEnsemble>> {
    if k_max == 0 || k_max > crate::graph::MAX_SCALE {
        return Err(invalid("k_max must lie in 1..=10"));
    }
    let mut metric = GraphMetric::new(g, ground)?;
    (1..=k_max)
        .map(|k| threshold_map(&mut metric, pow8(k) as f64, m, rng::derive_seed(seed, k as u64)))
        .collect()
}

pub type Rational = Ratio<i64>;

/// Exact `E|F(x) − F(y)|^2` over the joint law of the permutation, the radius
/// and the block bits, on at most six points.
pub fn brute_force_oracle(metric: &MatrixMetric, tau: Rational, x: usize, y: usize) -> Result<Rational> {
    let n = metric.len();
    if n > ORACLE_CAP {
        return Err(Error::CapExceeded {
            operation: "brute-force oracle",
            size: n,
            cap: ORACLE_CAP,
        });
    }
    if n == 0 || x >= n || y >= n {
        return Err(invalid("oracle points must lie in a nonempty ground set"));
    }
    if tau <= Rational::from_integer(0) {
        return Err(invalid("tau must be positive"));
    }
    let lo = tau / 4;
    let hi = tau / 2;
    // the partition changes only when R crosses an integer distance
    let mut cuts: Vec<Rational> = vec![lo];
    let mut ds: Vec<u32> = metric.dist.clone();
    ds.sort_unstable();
    ds.dedup();
    for d in ds {
        let d = Rational::from_integer(d as i64);
        if d > lo && d < hi {
            cuts.push(d);
        }
    }
    cuts.push(hi);
    let mut perms = Vec::new();
    permutations(&mut (0..n as u32).collect(), 0, &mut perms);
    let perm_weight = Rational::new(1, perms.len() as i64);
    let width = hi - lo;
    let mut total = Rational::from_integer(0);
    let mut m = metric.clone();
    for w in cuts.windows(2) {
        let interval_weight = (w[1] - w[0]) / width;
        let radius = w[0].floor().to_integer() as f64;
        for order in &perms {
            let p = carve(&mut m, order, 0.0, radius);
            let gaps = m.distance_to_other_labels(&p.assignment);
            let gap = |i: usize| -> i64 {
                if p.len() <= 1 {
                    0
                } else {
                    gaps[i].expect("more than one block") as i64
                }
            };
            let (bx, by) = (p.block_of(x), p.block_of(y));
            let blocks = p.len();
            let mut sum = Rational::from_integer(0);
            for bits in 0u32..(1 << blocks) {
                let fx = if bits >> bx & 1 == 1 { gap(x) } else { 0 };
                let fy = if bits >> by & 1 == 1 { gap(y) } else { 0 };
                sum += Rational::from_integer((fx - fy) * (fx - fy));
            }
            total += sum / (1i64 << blocks) * perm_weight * interval_weight;
        }
    }
    Ok(total)
}

fn permutations(items: &mut Vec<u32>, k: usize, out: &mut Vec<Vec<u32>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}
