//! Graph families: standard test graphs, random regular expanders, edge
//! subdivision, the tree-of-graphs composition and the recursive stretched
//! expander `H_k`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{diameter, DiameterMode, Graph, LevelMap, RootedGraph};
use crate::rng::{self, StreamRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardKind {
    Path,
    Cycle,
    Grid,
    Torus,
}

impl std::str::FromStr for StandardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Self::Path),
            "cycle" => Ok(Self::Cycle),
            "grid" => Ok(Self::Grid),
            "torus" => Ok(Self::Torus),
            other => Err(invalid(format!("unknown graph kind `{other}`"))),
        }
    }
}

/// Path/cycle take one dimension (vertex count); grid/torus take
/// `[rows, cols]` with vertex id `row * cols + col`.
pub fn standard_graph(kind: StandardKind, dims: &[usize]) -> Result<Graph> {
    let want = match kind {
        StandardKind::Path | StandardKind::Cycle => 1,
        StandardKind::Grid | StandardKind::Torus => 2,
    };
    if dims.len() != want || dims.contains(&0) {
        return Err(invalid(format!(
            "{kind:?} needs {want} positive dimension(s), got {dims:?}"
        )));
    }
    match kind {
        StandardKind::Path => {
            let n = dims[0];
            Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
        }
        StandardKind::Cycle => {
            let n = dims[0];
            if n < 3 {
                return Err(invalid("a simple cycle needs at least 3 vertices"));
            }
            Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        StandardKind::Grid => {
            let (rows, cols) = (dims[0], dims[1]);
            let mut edges = Vec::with_capacity(2 * rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            Graph::from_edges(rows * cols, edges)
        }
        StandardKind::Torus => {
            let (rows, cols) = (dims[0], dims[1]);
            if rows < 3 || cols < 3 {
                return Err(invalid("torus sides must be at least 3 to stay simple"));
            }
            let mut adjacency = vec![Vec::with_capacity(4); rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    adjacency[v].extend([
                        (r * cols + (c + 1) % cols) as u32,
                        (r * cols + (c + cols - 1) % cols) as u32,
                        (((r + 1) % rows) * cols + c) as u32,
                        (((r + rows - 1) % rows) * cols + c) as u32,
                    ]);
                }
            }
            Ok(Graph::from_adjacency(adjacency))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderSpec {
    pub n: usize,
    pub degree: usize,
    /// Upper limit on the second eigenvalue of the lazy walk.
    pub spectral_gap_threshold: f64,
    pub max_resample_attempts: usize,
    pub seed: u64,
}

impl ExpanderSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            degree: 3,
            spectral_gap_threshold: 0.95,
            max_resample_attempts: 10_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(invalid(format!("expander size must be even and positive, got {}", self.n)));
        }
        if self.degree == 0 || self.degree >= self.n {
            return Err(invalid(format!(
                "degree {} impossible on {} vertices",
                self.degree, self.n
            )));
        }
        if !(self.spectral_gap_threshold > 0.0 && self.spectral_gap_threshold < 1.0) {
            return Err(invalid("spectral gap threshold must lie in (0,1)"));
        }
        if self.max_resample_attempts == 0 {
            return Err(invalid("max_resample_attempts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Expander {
    pub graph: Graph,
    /// Second eigenvalue of the lazy walk `(I + P) / 2`.
    pub lazy_second_eigenvalue: f64,
    pub attempts: usize,
}

const POWER_TOLERANCE: f64 = 1e-8;
const POWER_MAX_ITERATIONS: usize = 200_000;

/// Random `d`-regular graph from the pairing model, resampled until it is
/// simple, connected, non-bipartite and its lazy walk has second eigenvalue at
/// most the configured threshold.
pub fn random_regular_expander(spec: &ExpanderSpec) -> Result<Expander> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, 0);
    let mut best: Option<f64> = None;
    let points = spec.n * spec.degree;
    let mut stubs: Vec<u32> = (0..points as u32).collect();
    for attempt in 1..=spec.max_resample_attempts {
        stubs.sort_unstable();
        stubs.shuffle(&mut rng);
        let Some(graph) = pair_stubs(&stubs, spec.degree, spec.n) else {
            continue;
        };
        if !graph.is_connected() || graph.is_bipartite() {
            continue;
        }
        let lambda = lazy_second_eigenvalue(&graph, &mut rng);
        if best.is_none_or(|b| lambda < b) {
            best = Some(lambda);
        }
        if lambda <= spec.spectral_gap_threshold {
            return Ok(Expander {
                graph,
                lazy_second_eigenvalue: lambda,
                attempts: attempt,
            });
        }
    }
    Err(Error::Generation {
        attempts: spec.max_resample_attempts,
        best_gap: best,
    })
}

fn pair_stubs(stubs: &[u32], degree: usize, n: usize) -> Option<Graph> {
    let mut adjacency = vec![Vec::with_capacity(degree); n];
    for pair in stubs.chunks_exact(2) {
        let u = pair[0] as usize / degree;
        let v = pair[1] as usize / degree;
        if u == v || adjacency[u].contains(&(v as u32)) {
            return None;
        }
        adjacency[u].push(v as u32);
        adjacency[v].push(u as u32);
    }
    Some(Graph::from_adjacency(adjacency))
}

/// Second-largest eigenvalue of the lazy simple random walk, by power
/// iteration on the symmetrized operator with the top eigenvector
/// `√deg` projected out. The lazy operator is positive semidefinite, so this
/// is also the second-largest eigenvalue modulus.
pub fn lazy_second_eigenvalue(g: &Graph, rng: &mut StreamRng) -> f64 {
    let n = g.vertex_count();
    if n <= 1 {
        return 0.0;
    }
    let sqrt_deg: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    let top_norm = sqrt_deg.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top: Vec<f64> = sqrt_deg.iter().map(|x| x / top_norm).collect();
    let deflate = |v: &mut [f64]| {
        let dot: f64 = v.iter().zip(&top).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&top).for_each(|(a, b)| *a -= dot * b);
    };
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    deflate(&mut v);
    let mut norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    let mut estimate = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        for x in 0..n {
            let mut acc = 0.0;
            for &y in g.neighbors(x) {
                acc += v[y as usize] / sqrt_deg[y as usize];
            }
            w[x] = 0.5 * v[x] + 0.5 * acc / sqrt_deg[x];
        }
        deflate(&mut w);
        norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        v.iter_mut().for_each(|x| *x /= norm);
        if (norm - estimate).abs() < POWER_TOLERANCE {
            return norm;
        }
        estimate = norm;
    }
    estimate
}

/// Replaces every edge by a path of `l` edges. Original vertices keep their
/// ids; the `l - 1` internal vertices of the `e`-th edge (in
/// [`Graph::edges`] order) are `n + e(l-1) .. n + (e+1)(l-1)`, ordered from
/// the smaller endpoint.
pub fn subdivide(g: &Graph, l: usize) -> Result<Graph> {
    if l == 0 {
        return Err(invalid("subdivision length must be at least 1"));
    }
    let n = g.vertex_count();
    let total = n + g.edge_count() * (l - 1);
    let mut adjacency: Vec<Vec<u32>> = Vec::with_capacity(total);
    adjacency.extend((0..n).map(|v| Vec::with_capacity(g.degree(v))));
    adjacency.resize_with(total, || Vec::with_capacity(2));
    for (e, (u, v)) in g.edges().enumerate() {
        let base = n + e * (l - 1);
        let mut prev = u;
        for i in 0..l - 1 {
            let cur = base + i;
            adjacency[prev].push(cur as u32);
            adjacency[cur].push(prev as u32);
            prev = cur;
        }
        adjacency[prev].push(v as u32);
        adjacency[v].push(prev as u32);
    }
    Ok(Graph::from_adjacency(adjacency))
}

#[derive(Clone, Debug)]
pub struct TreeComposition {
    pub graph: RootedGraph,
    pub tail_length: usize,
    pub h_diameter: u32,
    pub tail_internal: Vec<bool>,
}

/// Vertex count of the composition under the path convention used here
/// (a tail of length `T` has `T - 1` internal vertices).
pub fn composed_size(g_vertices: usize, h_vertices: usize, tail_length: usize) -> usize {
    g_vertices + (g_vertices - 1) * (h_vertices + tail_length - 1)
}

pub fn tail_length_for(h_diameter: u32, min_tail_length: usize) -> usize {
    min_tail_length.max(2 * h_diameter as usize)
}

/// Hangs a fresh copy of `h` below every non-root vertex `u` of `g`, joined by
/// a tail path of length `max(min_tail_length, 2 diam(h))` from `u` to the
/// copy's root.
///
/// Layout: `g`'s vertices first, then for each non-root `u` in increasing
/// order a block holding the tail's internal vertices followed by the copy.
/// When both inputs carry level maps the output does too: `g`'s vertices and
/// tails keep `g`'s levels, copies keep `h`'s.
pub fn tree_compose(
    g: &RootedGraph,
    h: &RootedGraph,
    min_tail_length: usize,
) -> Result<TreeComposition> {
    if min_tail_length == 0 {
        return Err(invalid("min_tail_length must be positive"));
    }
    g.graph.require_connected("tree composition")?;
    let h_diameter = diameter(&h.graph, DiameterMode::Exact)?.value;
    let tail_length = tail_length_for(h_diameter, min_tail_length);
    Ok(compose_with_tail(g, h, tail_length, h_diameter))
}

fn compose_with_tail(
    g: &RootedGraph,
    h: &RootedGraph,
    tail_length: usize,
    h_diameter: u32,
) -> TreeComposition {
    let gn = g.graph.vertex_count();
    let hn = h.graph.vertex_count();
    let block = tail_length - 1 + hn;
    let total = composed_size(gn, hn, tail_length);
    let mut adjacency: Vec<Vec<u32>> = Vec::with_capacity(total);
    for u in 0..gn {
        adjacency.push(g.graph.neighbors(u).to_vec());
    }
    adjacency.resize_with(total, Vec::new);
    let mut tail_internal = vec![false; total];
    let link = |adj: &mut Vec<Vec<u32>>, a: usize, b: usize| {
        adj[a].push(b as u32);
        adj[b].push(a as u32);
    };
    let hanging = (0..gn).filter(|&u| u != g.root);
    for (i, u) in hanging.clone().enumerate() {
        let start = gn + i * block;
        let copy = start + tail_length - 1;
        let mut prev = u;
        for j in 0..tail_length - 1 {
            tail_internal[start + j] = true;
            link(&mut adjacency, prev, start + j);
            prev = start + j;
        }
        link(&mut adjacency, prev, copy + h.root);
        for (a, b) in h.graph.edges() {
            link(&mut adjacency, copy + a, copy + b);
        }
    }
    let graph = Graph::from_adjacency(adjacency);
    let levels = match (&g.levels, &h.levels) {
        (Some(gl), Some(hl)) => {
            let mut level = Vec::with_capacity(total);
            let mut in_tail = Vec::with_capacity(total);
            level.extend_from_slice(&gl.level);
            in_tail.extend_from_slice(&gl.in_tail);
            for u in hanging {
                level.extend(std::iter::repeat_n(gl.level[u], tail_length - 1));
                in_tail.extend(std::iter::repeat_n(true, tail_length - 1));
                level.extend_from_slice(&hl.level);
                in_tail.extend_from_slice(&hl.in_tail);
            }
            Some(LevelMap { level, in_tail })
        }
        _ => None,
    };
    TreeComposition {
        graph: RootedGraph {
            graph,
            root: g.root,
            levels,
        },
        tail_length,
        h_diameter,
        tail_internal,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HkParams {
    pub n_sequence: Vec<usize>,
    pub enforce_growth_condition: bool,
    pub min_tail_length: usize,
    pub vertex_budget: usize,
}

pub const DEFAULT_VERTEX_BUDGET: usize = 5_000_000;

impl HkParams {
    pub fn new(n_sequence: Vec<usize>) -> Self {
        Self {
            n_sequence,
            enforce_growth_condition: false,
            min_tail_length: 1,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_tail_length == 0 {
            return Err(invalid("min_tail_length must be positive"));
        }
        let mut prev: Option<usize> = None;
        for &n in &self.n_sequence {
            if n == 0 || n % 2 != 0 {
                return Err(invalid(format!("n-sequence entries must be even, got {n}")));
            }
            if prev.is_some_and(|p| n <= p) {
                return Err(invalid("n-sequence must be strictly increasing"));
            }
            // n_0 = 10 seeds the growth condition
            let base = prev.unwrap_or(10);
            if self.enforce_growth_condition && n < 2 * base * base {
                return Err(invalid(format!(
                    "growth condition n_k >= 2 n_(k-1)^2 fails at n_k = {n} (previous {base})"
                )));
            }
            prev = Some(n);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub expander_seed: u64,
    pub lazy_second_eigenvalue: f64,
    pub expander_diameter: u32,
    pub tail_length: usize,
    pub vertices: usize,
}

#[derive(Clone, Debug)]
pub struct Hk {
    pub graph: RootedGraph,
    pub records: Vec<LevelRecord>,
    /// `max_j diam(G_{n_j}) / ln n_j` over the expanders used.
    pub diameter_constant: f64,
}

/// The recursive graph `H_k`, with `H_0` a single vertex and
/// `H_j = tree_compose(G_{n_j}[n_j], H_{j-1})`.
pub fn build_hk(params: &HkParams, template: &ExpanderSpec) -> Result<Hk> {
    params.validate()?;
    let single = Graph::from_edges(1, [])?;
    let mut current = RootedGraph::new(single, 0)?.with_levels(LevelMap::uniform(1, 0))?;
    let mut records = Vec::new();
    let mut diameter_constant: f64 = 0.0;
    for (j, &n) in params.n_sequence.iter().enumerate() {
        let level = j + 1;
        let spec = ExpanderSpec {
            n,
            seed: rng::derive_seed(template.seed, level as u64),
            ..template.clone()
        };
        let stretched_size = n + (n * spec.degree / 2) * (n - 1);
        let h_diameter = diameter(&current.graph, DiameterMode::Exact)?.value;
        let tail_length = tail_length_for(h_diameter, params.min_tail_length);
        let predicted = composed_size(stretched_size, current.graph.vertex_count(), tail_length);
        if predicted > params.vertex_budget {
            return Err(Error::CapExceeded {
                operation: "build_hk",
                size: predicted,
                cap: params.vertex_budget,
            });
        }
        let expander = random_regular_expander(&spec)?;
        let expander_diameter = diameter(&expander.graph, DiameterMode::Exact)?.value;
        if n >= 4 {
            diameter_constant = diameter_constant.max(expander_diameter as f64 / (n as f64).ln());
        }
        let stretched = subdivide(&expander.graph, n)?;
        let top = RootedGraph::new(stretched, 0)?
            .with_levels(LevelMap::uniform(stretched_size, level as u8))?;
        let composed = compose_with_tail(&top, &current, tail_length, h_diameter);
        debug_assert_eq!(composed.graph.graph.vertex_count(), predicted);
        if spec.degree == 3 {
            assert!(composed.graph.graph.max_degree() <= 4, "H_k degree bound violated");
        }
        records.push(LevelRecord {
            level,
            n,
            expander_seed: spec.seed,
            lazy_second_eigenvalue: expander.lazy_second_eigenvalue,
            expander_diameter,
            tail_length,
            vertices: predicted,
        });
        current = composed.graph;
    }
    Ok(Hk {
        graph: current,
        records,
        diameter_constant,
    })
}

/// `G_n[L]` rooted at vertex 0.
pub fn stretched_expander(spec: &ExpanderSpec, stretch: usize) -> Result<(RootedGraph, Expander)> {
    let expander = random_regular_expander(spec)?;
    let graph = subdivide(&expander.graph, stretch)?;
    Ok((RootedGraph::new(graph, 0)?, expander))
}

/// `G[L]` with a tail of length `root_tail` hanging from the root and tails
/// of length `leaf_tail` hanging from every other original vertex.
pub fn stretched_with_tails(
    g: &Graph,
    root: usize,
    stretch: usize,
    root_tail: usize,
    leaf_tail: usize,
) -> Result<Graph> {
    let base = subdivide(g, stretch)?;
    let n0 = g.vertex_count();
    let mut adjacency: Vec<Vec<u32>> = (0..base.vertex_count())
        .map(|v| base.neighbors(v).to_vec())
        .collect();
    for u in 0..n0 {
        let len = if u == root { root_tail } else { leaf_tail };
        let mut prev = u;
        for _ in 0..len {
            let cur = adjacency.len();
            adjacency.push(vec![prev as u32]);
            adjacency[prev].push(cur as u32);
            prev = cur;
        }
    }
    Ok(Graph::from_adjacency(adjacency))
}

/// Draws a vertex with probability `deg(v) / 2|E|` by picking a uniform
/// adjacency slot.
pub fn sample_stationary_vertex<R: Rng>(g: &Graph, rng: &mut R) -> usize {
    let slots = g.total_degree();
    if slots == 0 {
        return rng.gen_range(0..g.vertex_count());
    }
    let slot = rng.gen_range(0..slots);
    g.offsets().partition_point(|&o| o <= slot) - 1
}

/// Root of the finite-`k` approximation to the local weak limit: a vertex of
/// `h` drawn from its stationary measure.
pub fn root_sampler_local_limit(h: &RootedGraph, seed: u64) -> Result<usize> {
    h.graph.require_connected("local-limit root sampling")?;
    Ok(sample_stationary_vertex(&h.graph, &mut rng::stream(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{distance, Bfs};

    #[test]
    fn standard_graphs() {
        let c = standard_graph(StandardKind::Cycle, &[8]).unwrap();
        assert_eq!(c.vertex_count(), 8);
        assert!((0..8).all(|v| c.degree(v) == 2));
        let t = standard_graph(StandardKind::Torus, &[4, 4]).unwrap();
        assert_eq!(t.vertex_count(), 16);
        assert!((0..16).all(|v| t.degree(v) == 4));
        let g = standard_graph(StandardKind::Grid, &[3, 3]).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.degree(4), 4);
        assert!(standard_graph(StandardKind::Grid, &[3]).is_err());
        assert!(standard_graph(StandardKind::Torus, &[2, 5]).is_err());
    }

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        let e = random_regular_expander(&ExpanderSpec::new(4, 11)).unwrap();
        assert_eq!(e.graph.edge_count(), 6);
        assert!((e.lazy_second_eigenvalue - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn expander_rejects_bad_specs() {
        assert!(random_regular_expander(&ExpanderSpec::new(7, 1)).is_err());
        let mut spec = ExpanderSpec::new(8, 1);
        spec.spectral_gap_threshold = 1.5;
        assert!(random_regular_expander(&spec).is_err());
        spec.spectral_gap_threshold = 0.01;
        spec.max_resample_attempts = 5;
        match random_regular_expander(&spec) {
            Err(Error::Generation { attempts, .. }) => assert_eq!(attempts, 5),
            other => panic!("expected generation failure, got {other:?}"),
        }
    }

    #[test]
    fn subdivision_counts_and_stretch() {
        let c3 = standard_graph(StandardKind::Cycle, &[3]).unwrap();
        let c6 = subdivide(&c3, 2).unwrap();
        assert_eq!(c6.vertex_count(), 6);
        assert!((0..6).all(|v| c6.degree(v) == 2));
        assert_eq!(subdivide(&c3, 1).unwrap(), c3);
        let k4 = random_regular_expander(&ExpanderSpec::new(4, 3)).unwrap().graph;
        let s = subdivide(&k4, 5).unwrap();
        assert_eq!(s.vertex_count(), 28);
        assert!((0..4).all(|v| s.degree(v) == 3));
        assert!((4..28).all(|v| s.degree(v) == 2));
        for u in 0..4 {
            for v in 0..4 {
                let d = distance(&k4, u, v).unwrap().unwrap();
                assert_eq!(distance(&s, u, v).unwrap(), Some(5 * d));
            }
        }
    }

    #[test]
    fn tree_compose_small_cases() {
        let p2 = RootedGraph::new(standard_graph(StandardKind::Path, &[2]).unwrap(), 0).unwrap();
        let dot = RootedGraph::new(Graph::from_edges(1, []).unwrap(), 0).unwrap();
        let out = tree_compose(&p2, &dot, 1).unwrap();
        assert_eq!(out.graph.graph.vertex_count(), 3);
        assert_eq!(out.graph.graph.edge_count(), 2);
        assert!(out.graph.graph.max_degree() <= 2);

        let c5 = RootedGraph::new(standard_graph(StandardKind::Cycle, &[5]).unwrap(), 2).unwrap();
        let p3 = RootedGraph::new(standard_graph(StandardKind::Path, &[3]).unwrap(), 1).unwrap();
        let out = tree_compose(&c5, &p3, 1).unwrap();
        assert_eq!(out.tail_length, 4);
        assert_eq!(out.graph.graph.vertex_count(), composed_size(5, 3, 4));
        assert_eq!(out.graph.graph.degree(out.graph.root), 2);
        assert_eq!(out.tail_internal.iter().filter(|&&t| t).count(), 4 * 3);
        // max{Δ_H, Δ_G + 1, deg_H(ρ_H) + 1}
        assert!(out.graph.graph.max_degree() <= 3);
    }

    #[test]
    fn hk_levels() {
        let template = ExpanderSpec::new(0, 5);
        let h0 = build_hk(&HkParams::new(vec![]), &template).unwrap();
        assert_eq!(h0.graph.graph.vertex_count(), 1);
        assert_eq!(h0.graph.levels.as_ref().unwrap().level, vec![0]);

        let h1 = build_hk(&HkParams::new(vec![16]), &template).unwrap();
        let g = &h1.graph.graph;
        let levels = h1.graph.levels.as_ref().unwrap();
        let stretched = 16 + 24 * 15;
        assert_eq!(g.vertex_count(), composed_size(stretched, 1, 1));
        assert!(levels.level.iter().all(|&l| l <= 1));
        for v in 0..g.vertex_count() {
            if levels.level[v] == 0 {
                // copies of H_0 are leaves on length-1 tails
                assert_eq!(g.degree(v), 1);
                assert!(!levels.in_tail[v]);
            }
        }
        assert_eq!(g.degree(h1.graph.root), 3);
    }

    #[test]
    fn hk_budget_refusal() {
        let mut params = HkParams::new(vec![16, 64]);
        params.vertex_budget = 10_000;
        match build_hk(&params, &ExpanderSpec::new(0, 1)) {
            Err(Error::CapExceeded { size, .. }) => assert!(size > 10_000),
            other => panic!("expected refusal, got {:?}", other.map(|h| h.records)),
        }
        let mut params = HkParams::new(vec![16]);
        params.enforce_growth_condition = true;
        assert!(params.validate().is_err());
        params.n_sequence = vec![200];
        assert!(params.validate().is_ok());
        assert!(HkParams::new(vec![16, 8]).validate().is_err());
        assert!(HkParams::new(vec![15]).validate().is_err());
    }

    #[test]
    fn stationary_sampler_on_path() {
        let p3 = RootedGraph::new(standard_graph(StandardKind::Path, &[3]).unwrap(), 0).unwrap();
        let mut rng = rng::stream(9, 0);
        let trials = 100_000;
        let middle = (0..trials)
            .filter(|_| sample_stationary_vertex(&p3.graph, &mut rng) == 1)
            .count() as f64
            / trials as f64;
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!((middle - 0.5).abs() < 3.0 * sigma);
        assert!(root_sampler_local_limit(&p3, 1).unwrap() < 3);
    }

    #[test]
    fn gtilde_volume_bound() {
        let e = random_regular_expander(&ExpanderSpec::new(16, 2)).unwrap();
        let gt = stretched_with_tails(&e.graph, 0, 16, 30, 12).unwrap();
        let mut bfs = Bfs::new(&gt);
        // radius 1 around an expander vertex already holds its neighbors and its tail
        assert!(bfs.cumulative_ball_sizes(0, 1)[1] > 3);
        for v in (0..gt.vertex_count()).step_by(37) {
            let sizes = bfs.cumulative_ball_sizes(v, u32::MAX);
            for (r, &s) in sizes.iter().enumerate().skip(2) {
                assert!(s as f64 <= 3.0 * (r as f64).powi(3), "v={v} r={r} s={s}");
            }
        }
    }
}
