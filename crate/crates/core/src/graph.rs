//! Immutable undirected graphs and the metric primitives built on them.
//!
//! Vertices are dense ids `0..vertex_count`. Adjacency is stored in compressed
//! form (one offset array plus one flat neighbor array, each list sorted), which
//! keeps the multi-million vertex graphs of the recursive construction cheap to
//! walk on.

use std::collections::VecDeque;

use bitvec::vec::BitVec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default vertex-count cap for all-sources exact diameter.
pub const EXACT_DIAMETER_CAP: usize = 50_000;

/// Largest `k` for which `8^k` fits comfortably in a `u32` radius.
pub const MAX_SCALE: u32 = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Builds a simple graph. Self-loops, parallel edges and out-of-range
    /// endpoints are rejected.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if vertex_count > u32::MAX as usize {
            return Err(invalid("vertex count exceeds u32 range"));
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidVertex {
                    vertex: u.max(v),
                    vertex_count,
                });
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            pairs.push((u as u32, v as u32));
            pairs.push((v as u32, u as u32));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!(
                "parallel edge between {} and {}",
                w[0].0, w[0].1
            )));
        }
        let mut offsets = vec![0usize; vertex_count + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Self { offsets, neighbors })
    }

    /// Builds from adjacency lists produced by a trusted generator. Lists are
    /// sorted here; symmetry and simplicity are checked in debug builds.
    pub(crate) fn from_adjacency(mut adjacency: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0);
        let total: usize = adjacency.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        for list in &mut adjacency {
            list.sort_unstable();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        let g = Self { offsets, neighbors };
        debug_assert!(g.check_invariants().is_ok());
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Degree measure of the whole vertex set, `2|E|`.
    pub fn total_degree(&self) -> usize {
        self.neighbors.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        }
    }

    /// Verifies symmetry, sortedness and simplicity of the adjacency.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.vertex_count();
        for u in 0..n {
            let list = self.neighbors(u);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(invalid(format!("adjacency of {u} not strictly sorted")));
                }
            }
            for &v in list {
                let v = v as usize;
                if v >= n || v == u || !self.has_edge(v, u) {
                    return Err(invalid(format!("asymmetric or invalid edge {u}-{v}")));
                }
            }
        }
        Ok(())
    }

    /// Component label per vertex and the number of components.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let n = self.vertex_count();
        let mut label = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v as usize] == u32::MAX {
                        label[v as usize] = count;
                        queue.push_back(v as usize);
                    }
                }
            }
            count += 1;
        }
        (label, count as usize)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.components().1 == 1
    }

    pub(crate) fn require_connected(&self, operation: &'static str) -> Result<()> {
        let (_, components) = self.components();
        if components > 1 {
            return Err(Error::Disconnected {
                operation,
                components,
            });
        }
        Ok(())
    }

    /// Proper 2-coloring if one exists.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let n = self.vertex_count();
        let mut color = vec![u8::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }
}

/// A vertex set with its cached degree measure `μ(S) = Σ deg(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSubset {
    mask: BitVec,
    members: Vec<u32>,
    measure: usize,
}

impl VertexSubset {
    pub fn from_vertices<I>(g: &Graph, vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut mask = BitVec::repeat(false, g.vertex_count());
        for v in vertices {
            g.check_vertex(v)?;
            mask.set(v, true);
        }
        Ok(Self::from_mask(g, mask))
    }

    pub fn from_mask(g: &Graph, mask: BitVec) -> Self {
        assert_eq!(mask.len(), g.vertex_count(), "mask length mismatch");
        let members: Vec<u32> = mask.iter_ones().map(|v| v as u32).collect();
        let measure = members.iter().map(|&v| g.degree(v as usize)).sum();
        Self {
            mask,
            members,
            measure,
        }
    }

    pub fn full(g: &Graph) -> Self {
        Self::from_mask(g, BitVec::repeat(true, g.vertex_count()))
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.mask.len() && self.mask[v]
    }

    /// Members in increasing order.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Degree measure `μ_G(S)`.
    pub fn measure(&self) -> usize {
        self.measure
    }

    pub fn universe_size(&self) -> usize {
        self.mask.len()
    }

    /// Re-derives the cached measure against `g`.
    pub fn check_measure(&self, g: &Graph) -> bool {
        self.members
            .iter()
            .map(|&v| g.degree(v as usize))
            .sum::<usize>()
            == self.measure
    }
}

/// Per-vertex position in the recursive construction: the level `ℓ` of the
/// stretched-expander copy a vertex belongs to and whether it is internal to a
/// tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMap {
    pub level: Vec<u8>,
    pub in_tail: Vec<bool>,
}

impl LevelMap {
    pub fn uniform(vertex_count: usize, level: u8) -> Self {
        Self {
            level: vec![level; vertex_count],
            in_tail: vec![false; vertex_count],
        }
    }

    /// Vertex counts of the classes `V_ℓ` (core) and `T_ℓ` (tail), indexed by level.
    pub fn histogram(&self) -> Vec<LevelCount> {
        let top = self.level.iter().copied().max().unwrap_or(0) as usize;
        let mut out: Vec<LevelCount> = (0..=top)
            .map(|l| LevelCount {
                level: l as u8,
                core: 0,
                tail: 0,
            })
            .collect();
        for (&l, &t) in self.level.iter().zip(&self.in_tail) {
            if t {
                out[l as usize].tail += 1;
            } else {
                out[l as usize].core += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: u8,
    pub core: usize,
    pub tail: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedGraph {
    pub graph: Graph,
    pub root: usize,
    pub levels: Option<LevelMap>,
}

impl RootedGraph {
    pub fn new(graph: Graph, root: usize) -> Result<Self> {
        graph.check_vertex(root)?;
        Ok(Self {
            graph,
            root,
            levels: None,
        })
    }

    pub fn with_levels(mut self, levels: LevelMap) -> Result<Self> {
        let n = self.graph.vertex_count();
        if levels.level.len() != n || levels.in_tail.len() != n {
            return Err(invalid("level map does not cover every vertex"));
        }
        self.levels = Some(levels);
        Ok(self)
    }
}

/// A closed ball with exact hop distances, in BFS order.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: usize,
    pub radius: u32,
    pub vertices: Vec<u32>,
    pub distances: Vec<u32>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn subset(&self, g: &Graph) -> VertexSubset {
        VertexSubset::from_vertices(g, self.vertices.iter().map(|&v| v as usize))
            .expect("ball vertices are valid")
    }

    pub fn distance_to(&self, v: usize) -> Option<u32> {
        self.vertices
            .iter()
            .position(|&u| u as usize == v)
            .map(|i| self.distances[i])
    }

    pub fn measure(&self, g: &Graph) -> usize {
        self.vertices.iter().map(|&v| g.degree(v as usize)).sum()
    }
}

/// Reusable BFS state. Visited marks are epoch-stamped so repeated searches on
/// a large graph do not pay for clearing.
#[derive(Clone)]
pub struct Bfs<'g> {
    graph: &'g Graph,
    stamp: Vec<u32>,
    dist: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl<'g> Bfs<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let n = graph.vertex_count();
        Self {
            graph,
            stamp: vec![0; n],
            dist: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    /// Runs BFS from `source`, stopping after the layer at distance `radius`
    /// or as soon as `stop` returns true for a newly reached vertex. Returns the
    /// visited vertices in BFS order (distances via [`Bfs::dist_of`]).
    pub fn explore<F>(&mut self, source: usize, radius: u32, mut stop: F) -> &[u32]
    where
        F: FnMut(usize, u32) -> bool,
    {
        self.next_epoch();
        self.queue.clear();
        let epoch = self.epoch;
        self.stamp[source] = epoch;
        self.dist[source] = 0;
        self.queue.push(source as u32);
        if stop(source, 0) {
            return &self.queue;
        }
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head] as usize;
            head += 1;
            let du = self.dist[u];
            if du >= radius {
                continue;
            }
            for &v in self.graph.neighbors(u) {
                let vi = v as usize;
                if self.stamp[vi] != epoch {
                    self.stamp[vi] = epoch;
                    self.dist[vi] = du + 1;
                    self.queue.push(v);
                    if stop(vi, du + 1) {
                        return &self.queue;
                    }
                }
            }
        }
        &self.queue
    }

    /// Distance of `v` in the most recent search, if it was reached.
    #[inline]
    pub fn dist_of(&self, v: usize) -> Option<u32> {
        (self.stamp[v] == self.epoch).then(|| self.dist[v])
    }

    pub fn ball(&mut self, center: usize, radius: u32) -> Ball {
        let vertices = self.explore(center, radius, |_, _| false).to_vec();
        let distances = vertices.iter().map(|&v| self.dist[v as usize]).collect();
        Ball {
            center,
            radius,
            vertices,
            distances,
        }
    }

    /// `counts[r] = |B(center, r)|` for `r = 0..=max_radius`, or up to the
    /// eccentricity when the component is exhausted first (the last entry then
    /// holds the component size).
    pub fn cumulative_ball_sizes(&mut self, center: usize, max_radius: u32) -> Vec<usize> {
        self.explore(center, max_radius, |_, _| false);
        let mut counts: Vec<usize> = Vec::new();
        for &v in &self.queue {
            let d = self.dist[v as usize] as usize;
            if counts.len() <= d {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        counts
    }

    /// Like [`Bfs::cumulative_ball_sizes`] but accumulating degree measure.
    pub fn cumulative_ball_measures(&mut self, center: usize, max_radius: u32) -> Vec<usize> {
        self.explore(center, max_radius, |_, _| false);
        let mut acc: Vec<usize> = Vec::new();
        for &v in &self.queue {
            let d = self.dist[v as usize] as usize;
            if acc.len() <= d {
                acc.resize(d + 1, 0);
            }
            acc[d] += self.graph.degree(v as usize);
        }
        for i in 1..acc.len() {
            acc[i] += acc[i - 1];
        }
        acc
    }

    pub fn distance(&mut self, x: usize, y: usize) -> Option<u32> {
        self.explore(x, u32::MAX, |v, _| v == y);
        self.dist_of(y)
    }

    pub fn eccentricity(&mut self, x: usize) -> u32 {
        let order = self.explore(x, u32::MAX, |_, _| false);
        let last = *order.last().expect("source is always visited") as usize;
        self.dist[last]
    }

    /// Farthest vertex from `x` and its distance.
    pub fn farthest(&mut self, x: usize) -> (usize, u32) {
        let order = self.explore(x, u32::MAX, |_, _| false);
        let last = *order.last().expect("source is always visited") as usize;
        (last, self.dist[last])
    }
}

/// Lookup of `|B(x, r)|` from a cumulative table, saturating past the end.
#[inline]
pub fn ball_size_at(cumulative: &[usize], radius: u64) -> usize {
    let last = cumulative.len() - 1;
    cumulative[(radius.min(last as u64)) as usize]
}

pub fn bfs_ball(g: &Graph, x: usize, r: u32) -> Result<Ball> {
    g.check_vertex(x)?;
    Ok(Bfs::new(g).ball(x, r))
}

/// Exact hop distance; `None` when `y` is unreachable from `x`.
pub fn distance(g: &Graph, x: usize, y: usize) -> Result<Option<u32>> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    Ok(Bfs::new(g).distance(x, y))
}

pub fn pow8(k: u32) -> u64 {
    8u64.pow(k)
}

/// `φ_x(k) = ln(|B(x, 8^k)| / |B(x, 8^{k-1})|)`.
pub fn growth_profile(g: &Graph, x: usize, k: u32) -> Result<f64> {
    g.check_vertex(x)?;
    if k == 0 || k > MAX_SCALE {
        return Err(invalid(format!("scale k={k} outside 1..={MAX_SCALE}")));
    }
    let sizes = Bfs::new(g).cumulative_ball_sizes(x, pow8(k) as u32);
    Ok(growth_from_sizes(&sizes, k))
}

/// `φ_x(k)` from a cumulative ball-size table.
pub fn growth_from_sizes(cumulative: &[usize], k: u32) -> f64 {
    let outer = ball_size_at(cumulative, pow8(k)) as f64;
    let inner = ball_size_at(cumulative, pow8(k - 1)) as f64;
    (outer / inner).ln()
}

/// Number of edges with exactly one endpoint in `s`.
pub fn edge_boundary(g: &Graph, s: &VertexSubset) -> usize {
    s.members()
        .iter()
        .map(|&u| {
            g.neighbors(u as usize)
                .iter()
                .filter(|&&v| !s.contains(v as usize))
                .count()
        })
        .sum()
}

/// `|∂_E S| / μ(S)`.
pub fn edge_expansion(g: &Graph, s: &VertexSubset) -> Result<f64> {
    if s.is_empty() {
        return Err(invalid("edge expansion of an empty set"));
    }
    if s.universe_size() != g.vertex_count() {
        return Err(invalid("subset does not belong to this graph"));
    }
    if s.measure() == 0 {
        return Ok(0.0);
    }
    Ok(edge_boundary(g, s) as f64 / s.measure() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMode {
    Exact,
    TwoSweepLowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: u32,
    pub mode: DiameterMode,
}

pub fn diameter(g: &Graph, mode: DiameterMode) -> Result<Diameter> {
    diameter_with_cap(g, mode, EXACT_DIAMETER_CAP)
}

pub fn diameter_with_cap(g: &Graph, mode: DiameterMode, cap: usize) -> Result<Diameter> {
    if g.vertex_count() == 0 {
        return Err(invalid("diameter of an empty graph"));
    }
    g.require_connected("diameter")?;
    let mut bfs = Bfs::new(g);
    let value = match mode {
        DiameterMode::Exact => {
            if g.vertex_count() > cap {
                return Err(Error::CapExceeded {
                    operation: "exact diameter",
                    size: g.vertex_count(),
                    cap,
                });
            }
            (0..g.vertex_count())
                .map(|x| bfs.eccentricity(x))
                .max()
                .unwrap_or(0)
        }
        DiameterMode::TwoSweepLowerBound => {
            let (far, _) = bfs.farthest(0);
            bfs.farthest(far).1
        }
    };
    Ok(Diameter { value, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{standard_graph, StandardKind};

    fn path(n: usize) -> Graph {
        standard_graph(StandardKind::Path, &[n]).unwrap()
    }

    #[test]
    fn rejects_loops_and_parallel_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        let g = Graph::from_edges(3, [(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(1), &[0, 2]);
        g.check_invariants().unwrap();
    }

    #[test]
    fn ball_on_long_path() {
        let g = path(100);
        assert_eq!(bfs_ball(&g, 50, 3).unwrap().len(), 7);
        let b = bfs_ball(&g, 50, 0).unwrap();
        assert_eq!(b.vertices, vec![50]);
        assert_eq!(b.distance_to(50), Some(0));
        assert!(bfs_ball(&g, 100, 1).is_err());
    }

    #[test]
    fn ball_on_torus_is_a_diamond() {
        let g = standard_graph(StandardKind::Torus, &[32, 32]).unwrap();
        for r in 0..6u32 {
            let expected = 2 * r * r + 2 * r + 1;
            assert_eq!(bfs_ball(&g, 500, r).unwrap().len(), expected as usize);
        }
    }

    #[test]
    fn distances() {
        let c8 = standard_graph(StandardKind::Cycle, &[8]).unwrap();
        assert_eq!(distance(&c8, 3, 3).unwrap(), Some(0));
        assert_eq!(distance(&c8, 0, 4).unwrap(), Some(4));
        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(distance(&two, 0, 3).unwrap(), None);
    }

    #[test]
    fn growth_profile_examples() {
        let g = path(1000);
        let phi = growth_profile(&g, 500, 1).unwrap();
        assert!((phi - (17.0f64 / 3.0).ln()).abs() < 1e-12);
        let t = standard_graph(StandardKind::Torus, &[64, 64]).unwrap();
        let phi = growth_profile(&t, 64 * 32 + 32, 1).unwrap();
        assert!((phi - (145.0f64 / 5.0).ln()).abs() < 1e-12);
        // radius 8 already covers a 6-vertex path
        assert_eq!(growth_profile(&path(6), 2, 2).unwrap(), 0.0);
        assert!(growth_profile(&g, 0, 0).is_err());
    }

    #[test]
    fn edge_expansion_examples() {
        let g = standard_graph(StandardKind::Grid, &[20, 20]).unwrap();
        let all = VertexSubset::full(&g);
        assert_eq!(edge_expansion(&g, &all).unwrap(), 0.0);
        let single = VertexSubset::from_vertices(&g, [21]).unwrap();
        assert_eq!(edge_expansion(&g, &single).unwrap(), 1.0);
        for k in [2usize, 4, 7] {
            let box_ = VertexSubset::from_vertices(
                &g,
                (5..5 + k).flat_map(|r| (5..5 + k).map(move |c| r * 20 + c)),
            )
            .unwrap();
            let phi = edge_expansion(&g, &box_).unwrap();
            assert!((phi - 1.0 / k as f64).abs() < 1e-12);
        }
        let empty = VertexSubset::from_vertices(&g, []).unwrap();
        assert!(edge_expansion(&g, &empty).is_err());
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&path(17), DiameterMode::Exact).unwrap().value, 16);
        let c10 = standard_graph(StandardKind::Cycle, &[10]).unwrap();
        assert_eq!(diameter(&c10, DiameterMode::Exact).unwrap().value, 5);
        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            diameter(&two, DiameterMode::Exact),
            Err(Error::Disconnected { .. })
        ));
        assert!(matches!(
            diameter_with_cap(&path(10), DiameterMode::Exact, 5),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn subset_measure() {
        let g = path(5);
        let s = VertexSubset::from_vertices(&g, [0, 2, 4]).unwrap();
        assert_eq!(s.measure(), 1 + 2 + 1);
        assert!(s.check_measure(&g));
        assert_eq!(s.members(), &[0, 2, 4]);
    }
}
