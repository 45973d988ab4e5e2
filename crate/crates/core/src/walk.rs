//! Simple and restricted random walks.
//!
//! A [`RestrictedWalk`] on `S ⊆ V` moves from `x` to a uniformly chosen
//! neighbor when that neighbor lies in `S` and otherwise stays put, so it
//! holds with probability `|N(x) \ S| / deg(x)`. With `S = V` it is the simple
//! random walk. Its stationary measure is `deg(x) / μ(S)`.
//!
//! Exact laws are computed by sparse pushforward; many starting points are
//! evolved together in fixed-width lanes so that all-starts quantities
//! (stationary MSD, mixing, joint entropy) stay affordable.

use std::ops::ControlFlow;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::sample_stationary_vertex;
use crate::graph::{Bfs, Graph, RootedGraph, VertexSubset};
use crate::rng::{self, StreamRng};
use crate::stats::{Estimate, Running};

/// Largest state space for single-start exact pushforward.
pub const PUSHFORWARD_CAP: usize = 200_000;
/// Largest state space for all-starts exact quantities (stationary MSD).
pub const STATIONARY_EXACT_CAP: usize = 20_000;
pub const JOINT_ENTROPY_CAP: usize = 5_000;
/// Largest graph for hitting-time solves and exhaustive mixing times.
pub const SOLVE_CAP: usize = 5_000;
pub const MIXING_STEP_LIMIT: usize = 1_000_000;

pub const LANES: usize = 32;
type Lanes = [f64; LANES];

const NOT_IN_SUBSET: u32 = u32::MAX;
const MASS_TOLERANCE: f64 = 1e-9;

/// Probability vector on a sorted vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionVector {
    vertices: Vec<u32>,
    probs: Vec<f64>,
}

impl DistributionVector {
    pub fn new(vertices: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        if vertices.len() != probs.len() || vertices.is_empty() {
            return Err(invalid("distribution needs matching, nonempty support and weights"));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("distribution support must be strictly increasing"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("negative or NaN probability"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { vertices, probs })
    }

    pub fn point_mass(v: usize) -> Self {
        Self {
            vertices: vec![v as u32],
            probs: vec![1.0],
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn prob(&self, v: usize) -> f64 {
        self.vertices
            .binary_search(&(v as u32))
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.vertices
            .iter()
            .zip(&self.probs)
            .map(|(&v, &p)| (v as usize, p))
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(dist: &DistributionVector) -> f64 {
    entropy_of(dist.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Vertex(usize),
    Stationary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub vertices: Vec<u32>,
    pub master_seed: u64,
    pub index: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

pub struct RestrictedWalk<'g> {
    graph: &'g Graph,
    subset: VertexSubset,
    full: bool,
    local: Vec<u32>,
    inner_offsets: Vec<usize>,
    inner: Vec<u32>,
    hold: Vec<f64>,
    inv_degree: Vec<f64>,
    cumulative_degree: Vec<u64>,
}

impl<'g> RestrictedWalk<'g> {
    pub fn new(graph: &'g Graph, subset: VertexSubset) -> Result<Self> {
        if subset.is_empty() {
            return Err(invalid("restricted walk needs a nonempty subset"));
        }
        if subset.universe_size() != graph.vertex_count() || !subset.check_measure(graph) {
            return Err(invalid("subset does not belong to this graph"));
        }
        let full = subset.len() == graph.vertex_count();
        let members = subset.members();
        let mut local = Vec::new();
        let mut inner_offsets = Vec::new();
        let mut inner = Vec::new();
        if !full {
            local = vec![NOT_IN_SUBSET; graph.vertex_count()];
            for (i, &v) in members.iter().enumerate() {
                local[v as usize] = i as u32;
            }
            inner_offsets.reserve(members.len() + 1);
            inner_offsets.push(0);
            for &v in members {
                inner.extend(
                    graph
                        .neighbors(v as usize)
                        .iter()
                        .map(|&y| local[y as usize])
                        .filter(|&l| l != NOT_IN_SUBSET),
                );
                inner_offsets.push(inner.len());
            }
        }
        let mut hold = Vec::with_capacity(members.len());
        let mut inv_degree = Vec::with_capacity(members.len());
        let mut cumulative_degree = Vec::with_capacity(if full { 0 } else { members.len() });
        let mut acc = 0u64;
        for (i, &v) in members.iter().enumerate() {
            let d = graph.degree(v as usize);
            let inside = if full {
                d
            } else {
                inner_offsets[i + 1] - inner_offsets[i]
            };
            if d == 0 {
                hold.push(1.0);
                inv_degree.push(0.0);
            } else {
                hold.push((d - inside) as f64 / d as f64);
                inv_degree.push(1.0 / d as f64);
            }
            if !full {
                acc += d as u64;
                cumulative_degree.push(acc);
            }
        }
        Ok(Self {
            graph,
            subset,
            full,
            local,
            inner_offsets,
            inner,
            hold,
            inv_degree,
            cumulative_degree,
        })
    }

    /// Simple random walk on the whole graph.
    pub fn simple(graph: &'g Graph) -> Self {
        Self::new(graph, VertexSubset::full(graph)).expect("nonempty graph")
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn subset(&self) -> &VertexSubset {
        &self.subset
    }

    /// Number of states `|S|`.
    pub fn len(&self) -> usize {
        self.hold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hold.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.graph.vertex_count() && (self.full || self.local[v] != NOT_IN_SUBSET)
    }

    pub(crate) fn local_index(&self, v: usize) -> Option<usize> {
        if !self.contains(v) {
            None
        } else if self.full {
            Some(v)
        } else {
            Some(self.local[v] as usize)
        }
    }

    pub(crate) fn vertex_of(&self, l: usize) -> usize {
        if self.full {
            l
        } else {
            self.subset.members()[l] as usize
        }
    }

    fn require_member(&self, v: usize) -> Result<usize> {
        self.graph.check_vertex(v)?;
        self.local_index(v)
            .ok_or_else(|| invalid(format!("vertex {v} is not in the walk's subset")))
    }

    #[inline]
    fn inner_neighbors(&self, l: usize) -> &[u32] {
        if self.full {
            self.graph.neighbors(l)
        } else {
            &self.inner[self.inner_offsets[l]..self.inner_offsets[l + 1]]
        }
    }

    /// Exact one-step law from `x`.
    pub fn transition(&self, x: usize) -> Result<DistributionVector> {
        let l = self.require_member(x)?;
        let mut entries: Vec<(u32, f64)> = self
            .inner_neighbors(l)
            .iter()
            .map(|&y| (self.vertex_of(y as usize) as u32, self.inv_degree[l]))
            .collect();
        if self.hold[l] > 0.0 {
            entries.push((x as u32, self.hold[l]));
        }
        entries.sort_unstable_by_key(|e| e.0);
        let (vertices, probs) = entries.into_iter().unzip();
        DistributionVector::new(vertices, probs)
    }

    /// `π(x) = deg(x) / μ(S)`; uniform when `S` has no edges at all.
    pub fn stationary(&self) -> DistributionVector {
        let vertices = self.subset.members().to_vec();
        let probs = self.stationary_local();
        DistributionVector { vertices, probs }
    }

    pub(crate) fn stationary_local(&self) -> Vec<f64> {
        let mu = self.subset.measure();
        if mu == 0 {
            return vec![1.0 / self.len() as f64; self.len()];
        }
        (0..self.len())
            .map(|l| self.graph.degree(self.vertex_of(l)) as f64 / mu as f64)
            .collect()
    }

    /// Largest `|π(x)P(x,y) − π(y)P(y,x)|` over pairs in `S`.
    pub fn detailed_balance_violation(&self) -> f64 {
        let pi = self.stationary_local();
        let mut worst: f64 = 0.0;
        for x in 0..self.len() {
            for &y in self.inner_neighbors(x) {
                let y = y as usize;
                let forward = pi[x] * self.inv_degree[x];
                let backward = pi[y] * self.inv_degree[y];
                worst = worst.max((forward - backward).abs());
            }
        }
        worst
    }

    /// One step in local coordinates: `dst = src P` (or the lazy version).
    pub(crate) fn apply(&self, src: &[f64], dst: &mut [f64], lazy: bool) {
        for y in 0..self.len() {
            let mut acc = self.hold[y] * src[y];
            for &x in self.inner_neighbors(y) {
                acc += src[x as usize] * self.inv_degree[x as usize];
            }
            dst[y] = if lazy { 0.5 * (src[y] + acc) } else { acc };
        }
    }

    fn apply_lanes(&self, src: &[Lanes], scaled: &mut [Lanes], dst: &mut [Lanes], lazy: bool) {
        for ((s, out), &w) in src.iter().zip(scaled.iter_mut()).zip(&self.inv_degree) {
            for k in 0..LANES {
                out[k] = s[k] * w;
            }
        }
        for y in 0..self.len() {
            let h = self.hold[y];
            let mut acc = [0.0; LANES];
            for k in 0..LANES {
                acc[k] = h * src[y][k];
            }
            for &x in self.inner_neighbors(y) {
                let row = &scaled[x as usize];
                for k in 0..LANES {
                    acc[k] += row[k];
                }
            }
            if lazy {
                for k in 0..LANES {
                    acc[k] = 0.5 * (acc[k] + src[y][k]);
                }
            }
            dst[y] = acc;
        }
    }

    /// Evolves point masses at up to [`LANES`] local starts together, calling
    /// `visit(t, state)` for `t = 0..=t_max`; `state[y][lane]` is the
    /// probability of being at local state `y`.
    pub(crate) fn evolve_lanes<F>(&self, starts: &[usize], t_max: usize, lazy: bool, mut visit: F)
    where
        F: FnMut(usize, &[Lanes]) -> ControlFlow<()>,
    {
        assert!(starts.len() <= LANES);
        let mut cur = vec![[0.0; LANES]; self.len()];
        for (lane, &s) in starts.iter().enumerate() {
            cur[s][lane] = 1.0;
        }
        let mut next = vec![[0.0; LANES]; self.len()];
        let mut scaled = vec![[0.0; LANES]; self.len()];
        if visit(0, &cur).is_break() {
            return;
        }
        for t in 1..=t_max {
            self.apply_lanes(&cur, &mut scaled, &mut next, lazy);
            std::mem::swap(&mut cur, &mut next);
            if visit(t, &cur).is_break() {
                return;
            }
        }
    }

    /// Law of `Z_t` given `Z_0 ~ init`.
    pub fn pushforward(&self, init: &DistributionVector, t: usize) -> Result<DistributionVector> {
        if self.len() > PUSHFORWARD_CAP {
            return Err(Error::CapExceeded {
                operation: "exact pushforward",
                size: self.len(),
                cap: PUSHFORWARD_CAP,
            });
        }
        let mut cur = vec![0.0; self.len()];
        for (v, p) in init.iter() {
            cur[self.require_member(v)?] += p;
        }
        let mut next = vec![0.0; self.len()];
        for _ in 0..t {
            self.apply(&cur, &mut next, false);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(DistributionVector {
            vertices: self.subset.members().to_vec(),
            probs: cur,
        })
    }

    #[inline]
    pub(crate) fn step<R: Rng>(&self, v: usize, rng: &mut R) -> usize {
        let d = self.graph.degree(v);
        if d == 0 {
            return v;
        }
        let y = self.graph.neighbors(v)[rng.gen_range(0..d)] as usize;
        if self.full || self.local[y] != NOT_IN_SUBSET {
            y
        } else {
            v
        }
    }

    pub(crate) fn sample_start<R: Rng>(&self, start: Start, rng: &mut R) -> usize {
        match start {
            Start::Vertex(v) => v,
            Start::Stationary if self.full => sample_stationary_vertex(self.graph, rng),
            Start::Stationary => {
                let total = *self.cumulative_degree.last().expect("nonempty subset");
                if total == 0 {
                    return self.vertex_of(rng.gen_range(0..self.len()));
                }
                let draw = rng.gen_range(0..total);
                let l = self.cumulative_degree.partition_point(|&c| c <= draw);
                self.vertex_of(l)
            }
        }
    }

    fn check_start(&self, start: Start) -> Result<()> {
        if let Start::Vertex(v) = start {
            self.require_member(v)?;
        }
        Ok(())
    }

    /// Trajectory `index` of the stream keyed by `master_seed`; `t + 1`
    /// vertices.
    pub fn sample_trajectory(
        &self,
        start: Start,
        t: usize,
        master_seed: u64,
        index: u64,
    ) -> Result<Trajectory> {
        self.check_start(start)?;
        let mut rng = rng::stream(master_seed, index);
        let mut v = self.sample_start(start, &mut rng);
        let mut vertices = Vec::with_capacity(t + 1);
        vertices.push(v as u32);
        for _ in 0..t {
            v = self.step(v, &mut rng);
            vertices.push(v as u32);
        }
        Ok(Trajectory {
            vertices,
            master_seed,
            index,
        })
    }

    pub fn sample_trajectories(
        &self,
        start: Start,
        t: usize,
        count: usize,
        master_seed: u64,
    ) -> Result<impl Iterator<Item = Trajectory> + '_> {
        self.check_start(start)?;
        Ok((0..count as u64).map(move |i| {
            self.sample_trajectory(start, t, master_seed, i)
                .expect("start validated")
        }))
    }
}

/// Source of exact graph distances for Monte Carlo displacement estimates.
pub trait DistanceOracle {
    /// Fills `out[i]` with `d(source, targets[i])`.
    fn distances_from(&mut self, source: usize, targets: &[u32], out: &mut Vec<u32>);
}

/// BFS from the source, stopping once every target is reached.
pub struct BfsOracle<'g> {
    bfs: Bfs<'g>,
}

impl<'g> BfsOracle<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            bfs: Bfs::new(graph),
        }
    }
}

impl DistanceOracle for BfsOracle<'_> {
    fn distances_from(&mut self, source: usize, targets: &[u32], out: &mut Vec<u32>) {
        let mut remaining = targets.iter().filter(|&&t| t as usize != source).count();
        if remaining > 0 {
            let mut pending: Vec<u32> = targets.to_vec();
            pending.sort_unstable();
            pending.dedup();
            remaining = pending.iter().filter(|&&t| t as usize != source).count();
            self.bfs.explore(source, u32::MAX, |v, _| {
                if v != source && pending.binary_search(&(v as u32)).is_ok() {
                    remaining -= 1;
                }
                remaining == 0
            });
        } else {
            self.bfs.explore(source, 0, |_, _| false);
        }
        out.clear();
        out.extend(
            targets
                .iter()
                .map(|&t| self.bfs.dist_of(t as usize).expect("walk stays in its component")),
        );
    }
}

/// Closed-form wrap-around L1 distance on a `rows × cols` torus laid out as
/// [`crate::generators::standard_graph`] does.
pub struct TorusOracle {
    pub rows: usize,
    pub cols: usize,
}

impl TorusOracle {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn distance(&self, x: usize, y: usize) -> u32 {
        let (rx, cx) = (x / self.cols, x % self.cols);
        let (ry, cy) = (y / self.cols, y % self.cols);
        let dr = rx.abs_diff(ry);
        let dc = cx.abs_diff(cy);
        (dr.min(self.rows - dr) + dc.min(self.cols - dc)) as u32
    }
}

impl DistanceOracle for TorusOracle {
    fn distances_from(&mut self, source: usize, targets: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.extend(targets.iter().map(|&t| self.distance(source, t as usize)));
    }
}

fn check_grid(t_grid: &[usize]) -> Result<usize> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    Ok(t_grid.last().copied().unwrap_or(0))
}

/// Exact `E[d(Z_0, Z_t)^2]` for each `t` in the (increasing) grid, with `d`
/// the metric of the full graph.
pub fn msd_exact(walk: &RestrictedWalk, start: Start, t_grid: &[usize]) -> Result<Vec<f64>> {
    let t_max = check_grid(t_grid)?;
    let radius = t_max.min(u32::MAX as usize) as u32;
    match start {
        Start::Vertex(x) => {
            let l0 = walk.require_member(x)?;
            if walk.len() > PUSHFORWARD_CAP {
                return Err(Error::CapExceeded {
                    operation: "exact MSD",
                    size: walk.len(),
                    cap: PUSHFORWARD_CAP,
                });
            }
            let d2 = squared_distances_from(walk, &mut Bfs::new(walk.graph), x, radius);
            let mut cur = vec![0.0; walk.len()];
            cur[l0] = 1.0;
            let mut next = vec![0.0; walk.len()];
            let mut out = Vec::with_capacity(t_grid.len());
            let mut t = 0;
            for &target in t_grid {
                while t < target {
                    walk.apply(&cur, &mut next, false);
                    std::mem::swap(&mut cur, &mut next);
                    t += 1;
                }
                out.push(cur.iter().zip(&d2).map(|(p, d)| p * d).sum());
            }
            Ok(out)
        }
        Start::Stationary => {
            if walk.len() > STATIONARY_EXACT_CAP {
                return Err(Error::CapExceeded {
                    operation: "exact stationary MSD",
                    size: walk.len(),
                    cap: STATIONARY_EXACT_CAP,
                });
            }
            let pi = walk.stationary_local();
            let starts: Vec<usize> = (0..walk.len()).collect();
            let partials: Vec<Vec<f64>> = starts
                .par_chunks(LANES)
                .map(|chunk| {
                    let mut bfs = Bfs::new(walk.graph);
                    let mut d2 = vec![[0.0; LANES]; walk.len()];
                    for (lane, &l) in chunk.iter().enumerate() {
                        let row = squared_distances_from(walk, &mut bfs, walk.vertex_of(l), radius);
                        for (y, v) in row.into_iter().enumerate() {
                            d2[y][lane] = v;
                        }
                    }
                    let mut sums = vec![0.0; t_grid.len()];
                    let mut next_grid = 0;
                    walk.evolve_lanes(chunk, t_max, false, |t, state| {
                        while next_grid < t_grid.len() && t_grid[next_grid] == t {
                            let mut total = 0.0;
                            for (y, probs) in state.iter().enumerate() {
                                for (lane, &l) in chunk.iter().enumerate() {
                                    total += pi[l] * probs[lane] * d2[y][lane];
                                }
                            }
                            sums[next_grid] = total;
                            next_grid += 1;
                        }
                        ControlFlow::Continue(())
                    });
                    sums
                })
                .collect();
            let mut out = vec![0.0; t_grid.len()];
            for p in partials {
                out.iter_mut().zip(p).for_each(|(o, v)| *o += v);
            }
            Ok(out)
        }
    }
}

/// `d(x, ·)^2` on the walk's local states, zero beyond `radius`.
fn squared_distances_from(walk: &RestrictedWalk, bfs: &mut Bfs, x: usize, radius: u32) -> Vec<f64> {
    let mut d2 = vec![0.0; walk.len()];
    let reached = bfs.explore(x, radius, |_, _| false).to_vec();
    for v in reached {
        if let Some(l) = walk.local_index(v as usize) {
            let d = bfs.dist_of(v as usize).expect("reached") as f64;
            d2[l] = d * d;
        }
    }
    d2
}

/// Monte Carlo `E[d(Z_0, Z_t)^2]` for each grid time, trajectory `i` drawn
/// from stream `(master_seed, i)`.
pub fn msd_monte_carlo<O: DistanceOracle>(
    walk: &RestrictedWalk,
    start: Start,
    t_grid: &[usize],
    count: usize,
    master_seed: u64,
    oracle: &mut O,
) -> Result<Vec<Estimate>> {
    let t_max = check_grid(t_grid)?;
    walk.check_start(start)?;
    if count == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let mut acc = vec![Running::default(); t_grid.len()];
    let mut positions = vec![0u32; t_grid.len()];
    let mut dists = Vec::new();
    for i in 0..count as u64 {
        let mut rng = rng::stream(master_seed, i);
        let x0 = walk.sample_start(start, &mut rng);
        let mut v = x0;
        let mut next_grid = 0;
        for t in 0..=t_max {
            if t > 0 {
                v = walk.step(v, &mut rng);
            }
            while next_grid < t_grid.len() && t_grid[next_grid] == t {
                positions[next_grid] = v as u32;
                next_grid += 1;
            }
        }
        oracle.distances_from(x0, &positions, &mut dists);
        for (a, &d) in acc.iter_mut().zip(&dists) {
            a.push((d as f64) * (d as f64));
        }
    }
    Ok(acc.iter().map(Running::estimate).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointEntropy {
    /// `H(Z_1, Z_t)` with `Z_0 ~ π`.
    pub joint: f64,
    /// `H(Z_1)`.
    pub first: f64,
    /// `H_{t-1} = Σ_x π(x) H(Z_{t-1} | Z_0 = x)`.
    pub conditional: f64,
}

/// Joint entropy of `(Z_1, Z_t)` for the stationary restricted walk, summed
/// over all pairs, alongside `H(Z_1)` and the averaged entropy `H_{t-1}`.
pub fn joint_entropy(walk: &RestrictedWalk, t: usize) -> Result<JointEntropy> {
    if t == 0 {
        return Err(invalid("joint entropy needs t >= 1"));
    }
    if walk.len() > JOINT_ENTROPY_CAP {
        return Err(Error::CapExceeded {
            operation: "joint entropy",
            size: walk.len(),
            cap: JOINT_ENTROPY_CAP,
        });
    }
    let pi = walk.stationary_local();
    let mut first = vec![0.0; walk.len()];
    walk.apply(&pi, &mut first, false);
    let starts: Vec<usize> = (0..walk.len()).collect();
    let mut joint = 0.0;
    let mut conditional = 0.0;
    for chunk in starts.chunks(LANES) {
        walk.evolve_lanes(chunk, t - 1, false, |step, state| {
            if step < t - 1 {
                return ControlFlow::Continue(());
            }
            for (lane, &y) in chunk.iter().enumerate() {
                let mut h = 0.0;
                for row in state {
                    let p = row[lane];
                    if p > 0.0 {
                        h -= p * p.ln();
                        let q = first[y] * p;
                        if q > 0.0 {
                            joint -= q * q.ln();
                        }
                    }
                }
                conditional += pi[y] * h;
            }
            ControlFlow::Break(())
        });
    }
    Ok(JointEntropy {
        joint,
        first: entropy_of(&first),
        conditional,
    })
}

/// `H(X_m | X_0 = start)` for `m = 0..=t_max`.
pub fn entropy_series(walk: &RestrictedWalk, start: usize, t_max: usize) -> Result<Vec<f64>> {
    let l0 = walk.require_member(start)?;
    if walk.len() > PUSHFORWARD_CAP {
        return Err(Error::CapExceeded {
            operation: "entropy series",
            size: walk.len(),
            cap: PUSHFORWARD_CAP,
        });
    }
    let mut cur = vec![0.0; walk.len()];
    cur[l0] = 1.0;
    let mut next = vec![0.0; walk.len()];
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(0.0);
    for _ in 0..t_max {
        walk.apply(&cur, &mut next, false);
        std::mem::swap(&mut cur, &mut next);
        out.push(entropy_of(&cur));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub max: f64,
    pub from: usize,
    pub to: usize,
    /// `2 Δ |V|^2`.
    pub bound: f64,
}

/// `max_{x,y} E_x[T_y]` for the simple random walk, from the fundamental
/// matrix `Z = (I − P + 1π^T)^{-1}` via `E_x[T_y] = (Z_yy − Z_xy) / π(y)`;
/// the LU factorization is shared by the per-target solves.
pub fn hitting_time_max(g: &Graph) -> Result<HittingTimes> {
    let n = g.vertex_count();
    if n > SOLVE_CAP {
        return Err(Error::CapExceeded {
            operation: "hitting times",
            size: n,
            cap: SOLVE_CAP,
        });
    }
    if n == 0 {
        return Err(invalid("empty graph"));
    }
    g.require_connected("hitting times")?;
    let bound = 2.0 * g.max_degree() as f64 * (n * n) as f64;
    if n == 1 {
        return Ok(HittingTimes {
            max: 0.0,
            from: 0,
            to: 0,
            bound,
        });
    }
    let mu = g.total_degree() as f64;
    let pi: Vec<f64> = (0..n).map(|v| g.degree(v) as f64 / mu).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            m[(x, y)] = pi[y];
        }
        m[(x, x)] += 1.0;
        let w = 1.0 / g.degree(x) as f64;
        for &y in g.neighbors(x) {
            m[(x, y as usize)] -= w;
        }
    }
    let z = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NonConvergent("fundamental matrix is singular".into()))?;
    let mut best = (0.0, 0, 0);
    for y in 0..n {
        for x in 0..n {
            if x != y {
                let h = (z[(y, y)] - z[(x, y)]) / pi[y];
                if h > best.0 {
                    best = (h, x, y);
                }
            }
        }
    }
    debug_assert!(best.0 <= bound * (1.0 + 1e-9));
    Ok(HittingTimes {
        max: best.0,
        from: best.1,
        to: best.2,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub t: usize,
    /// False when only sampled starts were examined; `t` is then a lower bound.
    pub exhaustive: bool,
}

/// Least `t` with `max_x ‖P^t(x, ·) − π‖_TV ≤ eps`, by exact pushforward
/// from every start (or from `starts` when given).
pub fn mixing_time_tv(
    g: &Graph,
    eps: f64,
    lazy: bool,
    starts: Option<&[usize]>,
) -> Result<MixingTime> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps must lie in (0,1)"));
    }
    g.require_connected("mixing time")?;
    if !lazy && g.vertex_count() > 1 && g.is_bipartite() {
        return Err(Error::NonConvergent(
            "bipartite graph: the non-lazy walk is periodic".into(),
        ));
    }
    let walk = RestrictedWalk::simple(g);
    let exhaustive = starts.is_none();
    let all: Vec<usize>;
    let starts = match starts {
        Some(s) => {
            for &v in s {
                g.check_vertex(v)?;
            }
            s
        }
        None => {
            if g.vertex_count() > SOLVE_CAP {
                return Err(Error::CapExceeded {
                    operation: "exhaustive mixing time",
                    size: g.vertex_count(),
                    cap: SOLVE_CAP,
                });
            }
            all = (0..g.vertex_count()).collect();
            &all
        }
    };
    let pi = walk.stationary_local();
    let mut worst = 0usize;
    for chunk in starts.chunks(LANES) {
        let mut reached = None;
        walk.evolve_lanes(chunk, MIXING_STEP_LIMIT, lazy, |t, state| {
            let mut tv = [0.0; LANES];
            for (row, &p) in state.iter().zip(&pi) {
                for k in 0..chunk.len() {
                    tv[k] += (row[k] - p).abs();
                }
            }
            let max_tv = tv[..chunk.len()].iter().fold(0.0f64, |a, &b| a.max(0.5 * b));
            if max_tv <= eps + 1e-12 {
                reached = Some(t);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        match reached {
            Some(t) => worst = worst.max(t),
            None => {
                return Err(Error::NonConvergent(format!(
                    "total variation still above {eps} after {MIXING_STEP_LIMIT} steps"
                )))
            }
        }
    }
    Ok(MixingTime {
        t: worst,
        exhaustive,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeStats {
    /// `E[d(X_0, X_t)^2 · 1{root not visited}]`.
    pub displacement_avoiding_root: Estimate,
    /// `Pr[root ∈ {X_0, …, X_t}]`.
    pub root_visit: Estimate,
}

fn escape_run(
    walk: &RestrictedWalk,
    root: usize,
    x0: usize,
    t: usize,
    rng: &mut StreamRng,
    oracle: &mut BfsOracle,
    dist: &mut Vec<u32>,
) -> (f64, bool) {
    let mut v = x0;
    let mut visited = v == root;
    for _ in 0..t {
        v = walk.step(v, rng);
        visited |= v == root;
    }
    if visited {
        return (0.0, true);
    }
    oracle.distances_from(x0, &[v as u32], dist);
    let d = dist[0] as f64;
    (d * d, false)
}

/// Monte Carlo escape statistics of the simple walk on `g` from stationary
/// starts.
pub fn escape_statistics(g: &RootedGraph, t: usize, count: usize, seed: u64) -> Result<EscapeStats> {
    if count == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let walk = RestrictedWalk::simple(&g.graph);
    let mut oracle = BfsOracle::new(&g.graph);
    let mut dist = Vec::new();
    let mut disp = Running::default();
    let mut visit = Running::default();
    for i in 0..count as u64 {
        let mut rng = rng::stream(seed, i);
        let x0 = walk.sample_start(Start::Stationary, &mut rng);
        let (d2, visited) = escape_run(&walk, g.root, x0, t, &mut rng, &mut oracle, &mut dist);
        disp.push(d2);
        visit.push(if visited { 1.0 } else { 0.0 });
    }
    Ok(EscapeStats {
        displacement_avoiding_root: disp.estimate(),
        root_visit: visit.estimate(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartEscape {
    pub start: usize,
    pub stats: EscapeStats,
}

/// Escape statistics conditioned on each of `starts` stationary-sampled
/// starting points, `per_start` trajectories each.
pub fn escape_profile(
    g: &RootedGraph,
    t: usize,
    starts: usize,
    per_start: usize,
    seed: u64,
) -> Result<Vec<StartEscape>> {
    if per_start == 0 {
        return Err(invalid("need at least one trajectory per start"));
    }
    let walk = RestrictedWalk::simple(&g.graph);
    let mut oracle = BfsOracle::new(&g.graph);
    let mut dist = Vec::new();
    let mut start_rng = rng::stream(seed, u64::MAX);
    let mut out = Vec::with_capacity(starts);
    for s in 0..starts as u64 {
        let x0 = walk.sample_start(Start::Stationary, &mut start_rng);
        let mut disp = Running::default();
        let mut visit = Running::default();
        for i in 0..per_start as u64 {
            let mut rng = rng::stream(rng::derive_seed(seed, s), i);
            let (d2, visited) = escape_run(&walk, g.root, x0, t, &mut rng, &mut oracle, &mut dist);
            disp.push(d2);
            visit.push(if visited { 1.0 } else { 0.0 });
        }
        out.push(StartEscape {
            start: x0,
            stats: EscapeStats {
                displacement_avoiding_root: disp.estimate(),
                root_visit: visit.estimate(),
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_regular_expander, standard_graph, ExpanderSpec, StandardKind};

    fn std_graph(kind: StandardKind, dims: &[usize]) -> Graph {
        standard_graph(kind, dims).unwrap()
    }

    #[test]
    fn restricted_transition_examples() {
        let p3 = std_graph(StandardKind::Path, &[3]);
        let single = RestrictedWalk::new(&p3, VertexSubset::from_vertices(&p3, [1]).unwrap()).unwrap();
        assert_eq!(single.transition(1).unwrap(), DistributionVector::point_mass(1));

        let simple = RestrictedWalk::simple(&p3);
        let row = simple.transition(1).unwrap();
        assert_eq!(row.vertices(), &[0, 2]);
        assert_eq!(row.probs(), &[0.5, 0.5]);

        let ab = RestrictedWalk::new(&p3, VertexSubset::from_vertices(&p3, [0, 1]).unwrap()).unwrap();
        let row = ab.transition(1).unwrap();
        assert_eq!(row.prob(1), 0.5);
        assert_eq!(row.prob(0), 0.5);
        assert!(ab.transition(2).is_err());
    }

    #[test]
    fn stationary_examples() {
        let p3 = std_graph(StandardKind::Path, &[3]);
        let pi = RestrictedWalk::simple(&p3).stationary();
        assert_eq!(pi.probs(), &[0.25, 0.5, 0.25]);

        let c8 = std_graph(StandardKind::Cycle, &[8]);
        let arc = VertexSubset::from_vertices(&c8, [2, 3, 4, 5, 6]).unwrap();
        let walk = RestrictedWalk::new(&c8, arc).unwrap();
        let pi = walk.stationary();
        let stepped = walk.pushforward(&pi, 1).unwrap();
        for (a, b) in pi.probs().iter().zip(stepped.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(walk.detailed_balance_violation() < 1e-15);
    }

    #[test]
    fn pushforward_on_c4() {
        let c4 = std_graph(StandardKind::Cycle, &[4]);
        let walk = RestrictedWalk::simple(&c4);
        let start = DistributionVector::point_mass(0);
        assert_eq!(walk.pushforward(&start, 0).unwrap().prob(0), 1.0);
        let two = walk.pushforward(&start, 2).unwrap();
        assert!((two.prob(0) - 0.5).abs() < 1e-15);
        assert!((two.prob(2) - 0.5).abs() < 1e-15);
        assert_eq!(two.prob(1), 0.0);
        assert!((two.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectories_are_reproducible_and_valid() {
        let g = std_graph(StandardKind::Grid, &[6, 6]);
        let s = VertexSubset::from_vertices(&g, [7, 8, 9, 13, 14, 15]).unwrap();
        let walk = RestrictedWalk::new(&g, s).unwrap();
        let a = walk.sample_trajectory(Start::Stationary, 50, 3, 17).unwrap();
        let b = walk.sample_trajectory(Start::Stationary, 50, 3, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 51);
        for w in a.vertices.windows(2) {
            assert!(w[0] == w[1] || g.has_edge(w[0] as usize, w[1] as usize));
            assert!(walk.contains(w[1] as usize));
        }
        let single = RestrictedWalk::new(&g, VertexSubset::from_vertices(&g, [20]).unwrap()).unwrap();
        let t = single.sample_trajectory(Start::Stationary, 10, 1, 0).unwrap();
        assert!(t.vertices.iter().all(|&v| v == 20));
    }

    #[test]
    fn c4_empirical_return_probability() {
        let c4 = std_graph(StandardKind::Cycle, &[4]);
        let walk = RestrictedWalk::simple(&c4);
        let n = 100_000;
        let returns = walk
            .sample_trajectories(Start::Stationary, 2, n, 5)
            .unwrap()
            .filter(|t| t.vertices[0] == t.vertices[2])
            .count() as f64
            / n as f64;
        assert!((returns - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn msd_exact_examples() {
        let c4 = std_graph(StandardKind::Cycle, &[4]);
        let walk = RestrictedWalk::simple(&c4);
        assert_eq!(msd_exact(&walk, Start::Vertex(1), &[0, 2]).unwrap(), vec![0.0, 2.0]);
        let s = msd_exact(&walk, Start::Stationary, &[0, 1, 2]).unwrap();
        assert!((s[1] - 1.0).abs() < 1e-12 && (s[2] - 2.0).abs() < 1e-12);
        assert!(msd_exact(&walk, Start::Vertex(0), &[2, 1]).is_err());
    }

    #[test]
    fn msd_exact_matches_monte_carlo_on_torus() {
        let g = std_graph(StandardKind::Torus, &[16, 16]);
        let walk = RestrictedWalk::simple(&g);
        let exact = msd_exact(&walk, Start::Stationary, &[32]).unwrap()[0];
        let mc = msd_monte_carlo(
            &walk,
            Start::Stationary,
            &[32],
            100_000,
            21,
            &mut TorusOracle { rows: 16, cols: 16 },
        )
        .unwrap()[0];
        assert!(mc.agrees_with(exact, 3.0), "exact {exact} vs {mc:?}");
        assert!(exact <= 32.0 * 32.0);
    }

    #[test]
    fn torus_oracle_matches_bfs() {
        let g = std_graph(StandardKind::Torus, &[5, 7]);
        let torus = TorusOracle { rows: 5, cols: 7 };
        let mut bfs = BfsOracle::new(&g);
        let targets: Vec<u32> = (0..35).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for x in 0..35 {
            bfs.distances_from(x, &targets, &mut a);
            assert_eq!(torus.distance(x, x), 0);
            TorusOracle { rows: 5, cols: 7 }.distances_from(x, &targets, &mut b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&DistributionVector::point_mass(3)), 0.0);
        let u = DistributionVector::new((0..5).collect(), vec![0.2; 5]).unwrap();
        assert!((entropy(&u) - 5f64.ln()).abs() < 1e-12);
        let c8 = std_graph(StandardKind::Cycle, &[8]);
        let walk = RestrictedWalk::simple(&c8);
        for t in 2..=6 {
            let j = joint_entropy(&walk, t).unwrap();
            assert!((j.joint - j.first - j.conditional).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_series_starts_at_zero() {
        let c8 = std_graph(StandardKind::Cycle, &[8]);
        let walk = RestrictedWalk::simple(&c8);
        let h = entropy_series(&walk, 0, 3).unwrap();
        assert_eq!(h[0], 0.0);
        assert!((h[1] - 2f64.ln()).abs() < 1e-12);
    }

    /// Per-target linear solves `(I − P_{-y}) h = 1`, by Gaussian elimination.
    fn hitting_oracle(g: &Graph) -> f64 {
        let n = g.vertex_count();
        let mut best: f64 = 0.0;
        for y in 0..n {
            let idx: Vec<usize> = (0..n).filter(|&v| v != y).collect();
            let m = idx.len();
            let mut a = vec![vec![0.0; m + 1]; m];
            for (i, &x) in idx.iter().enumerate() {
                a[i][i] = 1.0;
                a[i][m] = 1.0;
                for &z in g.neighbors(x) {
                    if let Some(j) = idx.iter().position(|&w| w == z as usize) {
                        a[i][j] -= 1.0 / g.degree(x) as f64;
                    }
                }
            }
            for c in 0..m {
                let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
                a.swap(c, p);
                for r in 0..m {
                    if r != c {
                        let f = a[r][c] / a[c][c];
                        for k in c..=m {
                            a[r][k] -= f * a[c][k];
                        }
                    }
                }
            }
            for i in 0..m {
                best = best.max(a[i][m] / a[i][i]);
            }
        }
        best
    }

    #[test]
    fn hitting_time_examples() {
        let p2 = std_graph(StandardKind::Path, &[2]);
        assert!((hitting_time_max(&p2).unwrap().max - 1.0).abs() < 1e-9);
        let c4 = std_graph(StandardKind::Cycle, &[4]);
        assert!((hitting_time_max(&c4).unwrap().max - 4.0).abs() < 1e-9);
        let k4 = random_regular_expander(&ExpanderSpec::new(4, 1)).unwrap().graph;
        assert!((hitting_time_max(&k4).unwrap().max - 3.0).abs() < 1e-9);
        for g in [std_graph(StandardKind::Grid, &[4, 5]), std_graph(StandardKind::Path, &[9])] {
            let h = hitting_time_max(&g).unwrap();
            assert!((h.max - hitting_oracle(&g)).abs() < 1e-7);
            assert!(h.max <= h.bound);
        }
    }

    #[test]
    fn mixing_time_examples() {
        let k4 = random_regular_expander(&ExpanderSpec::new(4, 1)).unwrap().graph;
        assert_eq!(mixing_time_tv(&k4, 0.25, false, None).unwrap().t, 1);
        let c4 = std_graph(StandardKind::Cycle, &[4]);
        assert!(matches!(
            mixing_time_tv(&c4, 0.25, false, None),
            Err(Error::NonConvergent(_))
        ));
        assert!(mixing_time_tv(&c4, 0.25, true, None).unwrap().t >= 1);
        let sampled = mixing_time_tv(&c4, 0.25, true, Some(&[0])).unwrap();
        assert!(!sampled.exhaustive);
    }

    #[test]
    fn escape_trivial_cases() {
        let dot = RootedGraph::new(Graph::from_edges(1, []).unwrap(), 0).unwrap();
        let s = escape_statistics(&dot, 5, 20, 1).unwrap();
        assert_eq!(s.root_visit.mean, 1.0);
        assert_eq!(s.displacement_avoiding_root.mean, 0.0);

        let c = RootedGraph::new(std_graph(StandardKind::Cycle, &[200]), 0).unwrap();
        let walk = RestrictedWalk::simple(&c.graph);
        let mut oracle = BfsOracle::new(&c.graph);
        let mut dist = Vec::new();
        for i in 0..200 {
            let mut rng = rng::stream(4, i);
            let x0 = 90 + (i as usize % 20);
            let (_, visited) = escape_run(&walk, 0, x0, 10, &mut rng, &mut oracle, &mut dist);
            assert!(!visited);
        }
    }
}
