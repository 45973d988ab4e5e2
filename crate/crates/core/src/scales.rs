//! Multi-scale speed control: martingale decomposition of `f(Z_t)`, Azuma
//! tails, the speed bound, π-averaged growth, tempered/insulated triples, the
//! θ functional, the Ψ scale scanner, mass transport, and Markov type probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingEnsemble;
use crate::error::{invalid, Error, Result};
use crate::graph::{growth_from_sizes, pow8, Bfs, Graph, VertexSubset, MAX_SCALE};
use crate::stats::{Estimate, Running};
use crate::walk::{self, entropy_series, msd_exact, RestrictedWalk, Start, Trajectory};

/// Scale window `[α_n, β_n]` of a time horizon `n`: the least integers with
/// `8^α ≥ √(2n)` and `8^β ≥ 2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleConstants {
    pub n: u64,
    pub alpha: u32,
    pub beta: u32,
}

impl ScaleConstants {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("time horizon must be at least 1"));
        }
        let two_n = 2 * n as u128;
        // 8^α ≥ √(2n)  ⇔  64^α ≥ 2n
        let alpha = (0..).find(|&a| 64u128.pow(a) >= two_n).expect("finite");
        let beta = (0..).find(|&b| 8u128.pow(b) >= two_n).expect("finite");
        Ok(Self { n, alpha, beta })
    }
}

/// A map from graph vertices into `R^dim`, stored vertex-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    dim: usize,
    values: Vec<f64>,
}

impl PointMap {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(invalid("values must hold a whole number of points"));
        }
        Ok(Self { dim, values })
    }

    pub fn scalar(values: Vec<f64>) -> Self {
        Self { dim: 1, values }
    }

    pub fn constant(vertices: usize, dim: usize, value: f64) -> Self {
        Self {
            dim,
            values: vec![value; vertices * dim],
        }
    }

    /// The ensemble map `x ↦ (F_1(x), …, F_m(x)) / √m`; the ensemble must
    /// cover every vertex in order.
    pub fn from_ensemble(e: &EmbeddingEnsemble) -> Result<Self> {
        if e.ground.iter().enumerate().any(|(i, &v)| v as usize != i) {
            return Err(invalid("ensemble ground must be the full vertex set"));
        }
        let n = e.points();
        let scale = 1.0 / (e.m as f64).sqrt();
        let mut values = vec![0.0; n * e.m];
        for i in 0..e.m {
            for (x, &c) in e.sample(i).iter().enumerate() {
                values[x * e.m + i] = c * scale;
            }
        }
        Self::new(e.m, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }
}

fn norm_of_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lipschitz constant of `f` for the path metric of `g`: the largest jump
/// across an edge.
pub fn edge_lipschitz(g: &Graph, f: &PointMap) -> f64 {
    g.edges()
        .map(|(u, v)| norm_of_difference(f.point(u), f.point(v)))
        .fold(0.0, f64::max)
}

/// `(Pf)(x) = E[f(Z_1) | Z_0 = x]`.
fn conditional_mean(walk: &RestrictedWalk, f: &PointMap, x: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.dim()];
    for (y, p) in walk.transition(x)?.iter() {
        for (o, v) in out.iter_mut().zip(f.point(y)) {
            *o += p * v;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleDecomposition {
    /// `A_t − A_{t−1}` for `t = 1..=n`.
    pub forward: Vec<Vec<f64>>,
    /// `B_t − B_{t−1}` for `t = 1..=n`.
    pub backward: Vec<Vec<f64>>,
    /// `‖(A_n − B_n) − (f(Z_{2n}) − f(Z_0))‖`.
    pub identity_error: f64,
    pub max_increment: f64,
}

/// Splits `f(Z_{2n}) − f(Z_0)` into a forward martingale `A` with increments
/// `f(Z_{2t}) − Pf(Z_{2t−1})` and a backward martingale `B` with increments
/// `f(Z_{2n−2t}) − Pf(Z_{2n−2t+1})`, using exact one-step laws.
pub fn martingale_decompose(
    traj: &Trajectory,
    f: &PointMap,
    walk: &RestrictedWalk,
) -> Result<MartingaleDecomposition> {
    let len = traj.vertices.len();
    if len < 3 || len.is_multiple_of(2) {
        return Err(invalid("trajectory must have 2n + 1 vertices with n >= 1"));
    }
    let n = (len - 1) / 2;
    let z = |s: usize| traj.vertices[s] as usize;
    let mut forward = Vec::with_capacity(n);
    let mut backward = Vec::with_capacity(n);
    let mut sum = vec![0.0; f.dim()];
    let mut max_increment: f64 = 0.0;
    for t in 1..=n {
        let s = 2 * t;
        let pf = conditional_mean(walk, f, z(s - 1))?;
        let a: Vec<f64> = f.point(z(s)).iter().zip(&pf).map(|(x, m)| x - m).collect();
        let r = 2 * n - s;
        let pf = conditional_mean(walk, f, z(r + 1))?;
        let b: Vec<f64> = f.point(z(r)).iter().zip(&pf).map(|(x, m)| x - m).collect();
        for ((acc, x), y) in sum.iter_mut().zip(&a).zip(&b) {
            *acc += x - y;
        }
        max_increment = max_increment.max(norm(&a)).max(norm(&b));
        forward.push(a);
        backward.push(b);
    }
    let target: Vec<f64> = f
        .point(z(2 * n))
        .iter()
        .zip(f.point(z(0)))
        .map(|(x, y)| x - y)
        .collect();
    Ok(MartingaleDecomposition {
        forward,
        backward,
        identity_error: norm_of_difference(&sum, &target),
        max_increment,
    })
}

/// `4 exp(−λ² / (32 n Lip²))`.
pub fn azuma_bound(lambda: f64, n: u64, lip: f64) -> f64 {
    if lip == 0.0 {
        return if lambda > 0.0 { 0.0 } else { 4.0 };
    }
    4.0 * (-lambda * lambda / (32.0 * n as f64 * lip * lip)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AzumaRow {
    pub lambda: f64,
    pub exceedance: Estimate,
    pub bound: f64,
}

impl AzumaRow {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.exceedance.mean <= self.bound + sigmas * self.exceedance.stderr
    }
}

/// Empirical `Pr(‖f(Z_{2n}) − f(Z_0)‖ ≥ λ)` for the stationary walk against
/// the Azuma bound, with `Lip(f)` taken over the graph's edges.
pub fn azuma_tail_check(
    walk: &RestrictedWalk,
    f: &PointMap,
    n: u64,
    lambdas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<AzumaRow>> {
    if n == 0 || n_samples == 0 {
        return Err(invalid("need n >= 1 and at least one sample"));
    }
    let lip = edge_lipschitz(walk.graph(), f);
    let mut counts = vec![Running::default(); lambdas.len()];
    for traj in walk.sample_trajectories(Start::Stationary, 2 * n as usize, n_samples, seed)? {
        let first = traj.vertices[0] as usize;
        let last = *traj.vertices.last().expect("nonempty") as usize;
        let d = norm_of_difference(f.point(last), f.point(first));
        for (c, &l) in counts.iter_mut().zip(lambdas) {
            c.push(if d >= l { 1.0 } else { 0.0 });
        }
    }
    Ok(lambdas
        .iter()
        .zip(counts)
        .map(|(&lambda, c)| AzumaRow {
            lambda,
            exceedance: c.estimate(),
            bound: azuma_bound(lambda, n, lip),
        })
        .collect())
}

/// `2n + 256 Σ_{k=α_n}^{β_n} 8^{2k} exp(−8^{2k} / (32 n f(k)²))`.
pub fn speed_bound_rhs(n: u64, f: impl Fn(u32) -> f64) -> Result<f64> {
    let c = ScaleConstants::new(n)?;
    let mut total = 2.0 * n as f64;
    for k in c.alpha..=c.beta {
        let scale = 64f64.powi(k as i32);
        let fk = f(k);
        if fk > 0.0 {
            total += 256.0 * scale * (-scale / (32.0 * n as f64 * fk * fk)).exp();
        }
    }
    Ok(total)
}

/// The speed bound with `f(k) = 128 (1 + λ φ̄(k))`.
pub fn speed_bound_for_growth(n: u64, lambda: f64, bar_phi: impl Fn(u32) -> f64) -> Result<f64> {
    speed_bound_rhs(n, |k| 128.0 * (1.0 + lambda * bar_phi(k)))
}

/// `φ_x(k)` for `k = 1..=k_max` and every listed vertex, row-major by vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable {
    pub vertices: Vec<u32>,
    pub k_max: u32,
    values: Vec<f64>,
}

impl PhiTable {
    pub fn compute(g: &Graph, vertices: &[u32], k_max: u32) -> Result<Self> {
        if k_max == 0 || k_max > MAX_SCALE {
            return Err(invalid(format!("scales must lie in 1..={MAX_SCALE}")));
        }
        for &v in vertices {
            g.check_vertex(v as usize)?;
        }
        let radius = pow8(k_max).min(u32::MAX as u64) as u32;
        let rows: Vec<Vec<f64>> = vertices
            .par_iter()
            .map_init(
                || Bfs::new(g),
                |bfs, &v| {
                    let sizes = bfs.cumulative_ball_sizes(v as usize, radius);
                    (1..=k_max).map(|k| growth_from_sizes(&sizes, k)).collect()
                },
            )
            .collect();
        Ok(Self {
            vertices: vertices.to_vec(),
            k_max,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// `φ` of the `i`-th listed vertex at scale `k`.
    pub fn get(&self, i: usize, k: u32) -> f64 {
        self.values[i * self.k_max as usize + (k as usize - 1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSummary {
    pub members: Vec<u32>,
    pub pi: Vec<f64>,
    pub k_min: u32,
    pub k_max: u32,
    /// `φ_x(k)` indexed `[k − k_min][member]`.
    pub phi: Vec<Vec<f64>>,
    pub bar_phi: Vec<f64>,
    pub lambda: f64,
    pub k0: u32,
    /// `S↑_λ(k0)` over the computed scale range.
    pub s_up: Vec<u32>,
    pub pi_s_up: f64,
}

impl GrowthSummary {
    pub fn bar_phi_at(&self, k: u32) -> f64 {
        self.bar_phi[(k - self.k_min) as usize]
    }

    /// `S_λ(k) = {x ∈ S : φ_x(k) ≤ λ φ̄(k)}`.
    pub fn s_lambda(&self, k: u32, lambda: f64) -> Vec<u32> {
        let i = (k - self.k_min) as usize;
        self.members
            .iter()
            .zip(&self.phi[i])
            .filter(|(_, &p)| p <= lambda * self.bar_phi[i])
            .map(|(&v, _)| v)
            .collect()
    }

    /// `π(S↑_λ(k0)) ≥ 1 − 2/λ`.
    pub fn upbound_holds(&self) -> bool {
        self.pi_s_up >= 1.0 - 2.0 / self.lambda - 1e-12
    }
}

/// π-weighted growth averages over `S` for `k ∈ k_range`, with the sets
/// `S_λ(k)` and `S↑_λ(k0)`.
pub fn growth_summary(
    g: &Graph,
    s: &VertexSubset,
    k_range: std::ops::RangeInclusive<u32>,
    lambda: f64,
    k0: u32,
) -> Result<GrowthSummary> {
    let (k_min, k_max) = (*k_range.start(), *k_range.end());
    if k_min == 0 || k_min > k_max || !(k_min..=k_max).contains(&k0) {
        return Err(invalid("need 1 <= k_min <= k0 <= k_max"));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    if s.is_empty() {
        return Err(invalid("growth summary needs a nonempty subset"));
    }
    let walk = RestrictedWalk::new(g, s.clone())?;
    let pi = walk.stationary().probs().to_vec();
    let table = PhiTable::compute(g, s.members(), k_max)?;
    let ks = k_min..=k_max;
    let phi: Vec<Vec<f64>> = ks
        .clone()
        .map(|k| (0..s.len()).map(|i| table.get(i, k)).collect())
        .collect();
    let bar_phi: Vec<f64> = phi
        .iter()
        .map(|row| row.iter().zip(&pi).map(|(p, w)| p * w).sum())
        .collect();
    let mut keep = vec![true; s.len()];
    for k in k0..=k_max {
        let i = (k - k_min) as usize;
        let threshold = lambda * 2f64.powi((k - k0) as i32) * bar_phi[i];
        for (kp, &p) in keep.iter_mut().zip(&phi[i]) {
            *kp &= p <= threshold;
        }
    }
    let s_up: Vec<u32> = s
        .members()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(&v, _)| v)
        .collect();
    let pi_s_up = pi.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p).sum();
    let summary = GrowthSummary {
        members: s.members().to_vec(),
        pi,
        k_min,
        k_max,
        phi,
        bar_phi,
        lambda,
        k0,
        s_up,
        pi_s_up,
    };
    debug_assert!(summary.upbound_holds());
    Ok(summary)
}

/// `θ(ℓ) = Σ_{k=ℓ}^{3ℓ} φ(k) 2^{ℓ−k}`.
pub fn theta_from_profile(phi: impl Fn(u32) -> f64, ell: u32) -> f64 {
    (ell..=3 * ell)
        .map(|k| phi(k) * 2f64.powi(ell as i32 - k as i32))
        .sum()
}

/// Both sides of `Σ_{ℓ=h}^{2h} θ(ℓ) ≤ 2 Σ_{k=h}^{5h} φ(k)`.
pub fn sumbound_sides(phi: impl Fn(u32) -> f64, h: u32) -> (f64, f64) {
    let lhs = (h..=2 * h).map(|l| theta_from_profile(&phi, l)).sum();
    let rhs = 2.0 * (h..=5 * h).map(&phi).sum::<f64>();
    (lhs, rhs)
}

/// π-averaged growth of the balls `B_ρ(r)` around a fixed root: vertices in
/// BFS order with prefix sums of `deg(x) φ_x(k)`, so that `φ̄_{B(r)}(k)` is a
/// lookup for every `r`.
pub struct RootedGrowth<'g> {
    graph: &'g Graph,
    pub root: usize,
    /// `|B(r)|` and `μ(B(r))` for `r = 0..=ecc`.
    sizes: Vec<usize>,
    measures: Vec<usize>,
    k_max: u32,
    /// `[k − 1][i]`: sum of `deg φ_·(k)` over the first `i` vertices in BFS order.
    prefix: Vec<Vec<f64>>,
}

impl<'g> RootedGrowth<'g> {
    /// Covers every radius up to `r_max` and scales up to `k_max`.
    pub fn new(g: &'g Graph, root: usize, r_max: u64, k_max: u32) -> Result<Self> {
        g.check_vertex(root)?;
        let mut bfs = Bfs::new(g);
        let radius = r_max.min(u32::MAX as u64) as u32;
        let order = bfs.explore(root, radius, |_, _| false).to_vec();
        let sizes = bfs.cumulative_ball_sizes(root, u32::MAX);
        let measures = bfs.cumulative_ball_measures(root, u32::MAX);
        let table = PhiTable::compute(g, &order, k_max)?;
        let prefix = (1..=k_max)
            .map(|k| {
                let mut acc = 0.0;
                let mut row = Vec::with_capacity(order.len() + 1);
                row.push(0.0);
                for (i, &v) in order.iter().enumerate() {
                    acc += g.degree(v as usize) as f64 * table.get(i, k);
                    row.push(acc);
                }
                row
            })
            .collect();
        Ok(Self {
            graph: g,
            root,
            sizes,
            measures,
            k_max,
            prefix,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn ball_size(&self, r: u64) -> usize {
        self.sizes[(r as usize).min(self.sizes.len() - 1)]
    }

    pub fn ball_measure(&self, r: u64) -> usize {
        self.measures[(r as usize).min(self.measures.len() - 1)]
    }

    pub fn eccentricity(&self) -> u64 {
        (self.sizes.len() - 1) as u64
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// `φ̄_{B(r)}(k)`; a ball with no edges averages uniformly, which only
    /// happens for the isolated root where every `φ` is zero.
    pub fn bar_phi(&self, r: u64, k: u32) -> Result<f64> {
        if k == 0 || k > self.k_max {
            return Err(invalid(format!("scale {k} outside 1..={}", self.k_max)));
        }
        let count = self.ball_size(r);
        let row = &self.prefix[k as usize - 1];
        if count >= row.len() {
            return Err(invalid(format!("radius {r} beyond the precomputed range")));
        }
        let mu = self.ball_measure(r);
        Ok(if mu == 0 { 0.0 } else { row[count] / mu as f64 })
    }

    pub fn theta(&self, r: u64, ell: u32) -> Result<f64> {
        check_theta_scale(ell, self.k_max)?;
        let mut total = 0.0;
        for k in ell..=3 * ell {
            total += self.bar_phi(r, k)? * 2f64.powi(ell as i32 - k as i32);
        }
        Ok(total)
    }

    /// `μ(B(r) \ B(r − w)) / μ(B(r))`, `None` when `r < w`.
    pub fn shell_ratio(&self, r: u64, w: u64) -> Option<f64> {
        (r >= w).then(|| {
            let outer = self.ball_measure(r) as f64;
            let inner = self.ball_measure(r - w) as f64;
            if outer == 0.0 {
                0.0
            } else {
                (outer - inner) / outer
            }
        })
    }
}

fn check_theta_scale(ell: u32, k_max: u32) -> Result<()> {
    if ell == 0 || 3 * ell > k_max.min(MAX_SCALE) {
        return Err(invalid(format!(
            "theta at ell = {ell} needs scales up to {} (available {})",
            3 * ell,
            k_max.min(MAX_SCALE)
        )));
    }
    Ok(())
}

/// `θ_{ρ,r}(ℓ)` on the ball `B_ρ(r)`.
pub fn theta(g: &Graph, rho: usize, r: u64, ell: u32) -> Result<f64> {
    check_theta_scale(ell, MAX_SCALE)?;
    RootedGrowth::new(g, rho, r, 3 * ell)?.theta(r, ell)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleMargin {
    pub k: u32,
    pub bar_phi: f64,
    /// `λ 2^{k−α_n} − φ̄(k)`; negative where temperedness fails.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperReport {
    pub n: u64,
    pub lambda: f64,
    pub r: u64,
    pub alpha: u32,
    pub beta: u32,
    pub margins: Vec<ScaleMargin>,
    pub tempered: bool,
    pub shell_ratio: Option<f64>,
    pub insulated: bool,
    pub reason: Option<String>,
    /// Stationary mass of the shell under the walk restricted to `B(r)`.
    pub pi_shell: Option<f64>,
    pub good2_holds: Option<bool>,
}

impl TemperReport {
    pub fn passes(&self) -> bool {
        self.tempered && self.insulated
    }
}

/// Checks `φ̄_{B(r)}(k) ≤ λ 2^{k−α_n}` on `[α_n, β_n]` and
/// `μ(B(r) \ B(r−2n)) / μ(B(r)) ≤ 1/(4λ)`.
pub fn temper_insulate_check(g: &Graph, rho: usize, n: u64, lambda: f64, r: u64) -> Result<TemperReport> {
    let c = ScaleConstants::new(n)?;
    if c.beta > MAX_SCALE {
        return Err(invalid(format!("n = {n} needs scales beyond {MAX_SCALE}")));
    }
    let growth = RootedGrowth::new(g, rho, r, c.beta.max(1))?;
    temper_insulate_with(&growth, n, lambda, r)
}

pub fn temper_insulate_with(growth: &RootedGrowth, n: u64, lambda: f64, r: u64) -> Result<TemperReport> {
    let c = ScaleConstants::new(n)?;
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    let mut margins = Vec::new();
    for k in c.alpha.max(1)..=c.beta {
        let bar = growth.bar_phi(r, k)?;
        margins.push(ScaleMargin {
            k,
            bar_phi: bar,
            margin: lambda * 2f64.powi(k as i32 - c.alpha as i32) - bar,
        });
    }
    let tempered = margins.iter().all(|m| m.margin >= 0.0);
    let (shell_ratio, insulated, reason) = if r <= 2 * n {
        (
            None,
            false,
            Some(format!("r = {r} does not exceed 2n = {}", 2 * n)),
        )
    } else {
        let ratio = growth.shell_ratio(r, 2 * n).expect("r > 2n");
        (Some(ratio), ratio <= 1.0 / (4.0 * lambda), None)
    };
    let pi_shell = shell_ratio;
    let good2_holds = insulated.then(|| lambda >= 1.0 && pi_shell.unwrap_or(0.0) <= 1.0 / (2.0 * lambda));
    Ok(TemperReport {
        n,
        lambda,
        r,
        alpha: c.alpha,
        beta: c.beta,
        margins,
        tempered,
        shell_ratio,
        insulated,
        reason,
        pi_shell,
        good2_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleWindow {
    pub k: u32,
    /// Radii of the doubling term `ln(μB(outer) / μB(inner))`.
    pub inner: u64,
    pub outer: u64,
    /// Candidate radii `r` for the shell and θ terms.
    pub radii: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllWindow {
    pub ell: u32,
    pub n_values: Vec<u64>,
}

/// The `(k, r, ℓ, n)` grid over which Ψ is summed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub k0: u32,
    pub scales: Vec<ScaleWindow>,
    pub shell_width: u64,
    pub ells: Vec<EllWindow>,
}

pub const SCAN_POINT_CAP: u64 = 100_000;
pub const SCAN_TIME_CAP: u64 = 200_000;

impl ScanGrid {
    /// The full grid: `k ∈ [9k0, 10k0]`, `r ∈ I(k)` spaced by `8^{4k0+3}`,
    /// `ℓ ∈ [k0, 2k0]`, `n ∈ [8^{2ℓ}, 8^{2ℓ+2}]`. Refused when it cannot be
    /// evaluated; use [`ScanGrid::geometric`] instead.
    pub fn full(k0: u32) -> Result<Self> {
        if k0 == 0 {
            return Err(invalid("k0 must be positive"));
        }
        let infeasible = |what: String| {
            Error::InvalidArgument(format!(
                "radius grid infeasible at k0 = {k0}: {what}; override it with ScanGrid::geometric"
            ))
        };
        let k_hi = 10 * k0 + 2;
        if 3 * 2 * k0 > MAX_SCALE || k_hi > 20 {
            return Err(infeasible(format!("radii reach 8^{k_hi}")));
        }
        let width = 8u64
            .checked_pow(4 * k0 + 3)
            .ok_or_else(|| infeasible("shell width overflows".into()))?;
        let n_max = pow8(2 * (2 * k0) + 2);
        if 2 * n_max > SCAN_TIME_CAP {
            return Err(infeasible(format!("entropy increments up to time {}", 2 * n_max)));
        }
        let mut points = 0u64;
        let mut scales = Vec::new();
        for k in 9 * k0..=10 * k0 {
            let (lo, hi) = (pow8(k), pow8(k + 1));
            let count = (hi - lo) / width;
            points += count;
            if points > SCAN_POINT_CAP {
                return Err(infeasible(format!("more than {SCAN_POINT_CAP} radii")));
            }
            let radii = (1..count).map(|j| lo + j * width).collect();
            scales.push(ScaleWindow {
                k,
                inner: lo,
                outer: pow8(k + 2),
                radii,
            });
        }
        let ells = (k0..=2 * k0)
            .map(|ell| EllWindow {
                ell,
                n_values: (pow8(2 * ell)..=pow8(2 * ell + 2)).collect(),
            })
            .collect();
        let grid = Self {
            k0,
            scales,
            shell_width: width,
            ells,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// A desk-sized grid keeping the summand structure: doubling windows
    /// `[8^k, 8^{k+2}]` for the given `k`, `radii_per_scale` evenly spaced radii
    /// in `[8^k, 8^{k+1}]` shifted outward by the shell width, and `n_per_ell` geometrically spaced `n` in
    /// `[8^{2ℓ}, 8^{2ℓ+2}]`. The shell width is `2 max n`, so a vanishing shell
    /// term implies insulation for every scanned `n`.
    pub fn geometric(k0: u32, ks: &[u32], radii_per_scale: usize, ells: &[u32], n_per_ell: usize) -> Result<Self> {
        if ks.is_empty() || ells.is_empty() || radii_per_scale == 0 || n_per_ell == 0 {
            return Err(invalid("geometric grid needs scales, radii, ells and n values"));
        }
        let ells: Vec<EllWindow> = ells
            .iter()
            .map(|&ell| {
                let (lo, hi) = (pow8(2 * ell) as f64, pow8(2 * ell + 2) as f64);
                let mut n_values: Vec<u64> = (0..n_per_ell)
                    .map(|i| {
                        let t = if n_per_ell == 1 { 0.0 } else { i as f64 / (n_per_ell - 1) as f64 };
                        (lo * (hi / lo).powf(t)).round() as u64
                    })
                    .collect();
                n_values.dedup();
                EllWindow { ell, n_values }
            })
            .collect();
        let n_max = ells.iter().flat_map(|e| e.n_values.iter()).copied().max().unwrap_or(1);
        let shell_width = 2 * n_max;
        let scales = ks
            .iter()
            .map(|&k| {
                let (lo, hi) = (pow8(k), pow8(k + 1));
                let radii = (1..=radii_per_scale as u64)
                    .map(|j| shell_width + lo + (hi - lo) * j / radii_per_scale as u64)
                    .collect();
                ScaleWindow {
                    k,
                    inner: lo,
                    outer: pow8(k + 2),
                    radii,
                }
            })
            .collect();
        let grid = Self {
            k0,
            scales,
            shell_width,
            ells,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 || self.shell_width == 0 {
            return Err(invalid("k0 and the shell width must be positive"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| s.radii.is_empty() || s.inner > s.outer) {
            return Err(invalid("every scale window needs radii and inner <= outer"));
        }
        if self.scales.iter().flat_map(|s| &s.radii).any(|&r| r < self.shell_width) {
            return Err(invalid("every radius must be at least the shell width"));
        }
        if self.ells.is_empty() || self.ells.iter().any(|e| e.n_values.is_empty() || e.n_values.contains(&0)) {
            return Err(invalid("every ell window needs positive n values"));
        }
        for e in &self.ells {
            check_theta_scale(e.ell, MAX_SCALE)?;
        }
        let n_max = self.n_max();
        if 2 * n_max > SCAN_TIME_CAP {
            return Err(invalid(format!(
                "entropy increments up to time {} exceed {SCAN_TIME_CAP}",
                2 * n_max
            )));
        }
        Ok(())
    }

    fn n_max(&self) -> u64 {
        self.ells.iter().flat_map(|e| e.n_values.iter()).copied().max().unwrap_or(0)
    }

    fn r_max(&self) -> u64 {
        self.scales.iter().flat_map(|s| s.radii.iter()).copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summand {
    Doubling,
    Shell,
    Theta,
    Entropy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummandRow {
    pub term: Summand,
    pub k: Option<u32>,
    pub r: Option<u64>,
    pub ell: Option<u32>,
    pub n: Option<u64>,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleTuple {
    pub k: u32,
    pub r: u64,
    pub ell: u32,
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub best: ScaleTuple,
    pub summands: Vec<SummandRow>,
    /// The per-instance Ψ: the grid sum of all summands with Ψ's weights.
    pub psi: f64,
    /// `c` slightly above `θ_{ρ,r}(ℓ)` at the selected tuple.
    pub c: f64,
    /// Check of `(n, 128c, r)` at the selected tuple.
    pub report: TemperReport,
}

fn argmin_with_mean(values: &[f64]) -> (usize, f64, f64) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (best, values[best], mean)
}

/// Evaluates every Ψ summand over `grid` for the root `rho` and selects the
/// tuple lexicographically: `k` minimizing the doubling term, then `r`
/// minimizing the shell term, then `ℓ` minimizing θ, then `n` minimizing
/// the entropy increment `H(2n) − H(2n−1)` of the walk from the root.
pub fn scan_good_scales(g: &Graph, rho: usize, grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    g.check_vertex(rho)?;
    let k_needed = grid
        .ells
        .iter()
        .map(|e| 3 * e.ell)
        .chain(grid.ells.iter().flat_map(|e| e.n_values.iter()).map(|&n| {
            ScaleConstants::new(n).map(|c| c.beta).unwrap_or(1)
        }))
        .max()
        .unwrap_or(1);
    if k_needed > MAX_SCALE {
        return Err(invalid("grid needs growth scales beyond 10"));
    }
    let growth = RootedGrowth::new(g, rho, grid.r_max(), k_needed)?;

    let two_n_max = 2 * grid.n_max();
    let ball = VertexSubset::from_vertices(g, Bfs::new(g).explore(rho, two_n_max.min(u32::MAX as u64) as u32, |_, _| false).iter().map(|&v| v as usize))?;
    let local = RestrictedWalk::new(g, ball)?;
    let entropy = entropy_series(&local, rho, two_n_max as usize)?;
    let g4 = |n: u64| entropy[2 * n as usize] - entropy[2 * n as usize - 1];

    let mut summands = Vec::new();
    let mut psi = 0.0;
    let mut g1 = Vec::with_capacity(grid.scales.len());
    for s in &grid.scales {
        let value = (growth.ball_measure(s.outer) as f64 / growth.ball_measure(s.inner) as f64).ln();
        g1.push(value);
        summands.push(SummandRow {
            term: Summand::Doubling,
            k: Some(s.k),
            r: None,
            ell: None,
            n: None,
            value,
        });
        psi += value;
        let weight = 1.0 / (grid.k0 as f64 * s.radii.len() as f64);
        for &r in &s.radii {
            let shell = (growth.ball_measure(r) as f64 / growth.ball_measure(r - grid.shell_width) as f64).ln();
            summands.push(SummandRow {
                term: Summand::Shell,
                k: Some(s.k),
                r: Some(r),
                ell: None,
                n: None,
                value: shell,
            });
            psi += shell;
            for e in &grid.ells {
                let th = growth.theta(r, e.ell)?;
                summands.push(SummandRow {
                    term: Summand::Theta,
                    k: Some(s.k),
                    r: Some(r),
                    ell: Some(e.ell),
                    n: None,
                    value: th,
                });
                let entropy_sum: f64 = e.n_values.iter().map(|&n| g4(n)).sum();
                psi += weight * (th + entropy_sum);
            }
        }
    }
    for e in &grid.ells {
        for &n in &e.n_values {
            summands.push(SummandRow {
                term: Summand::Entropy,
                k: None,
                r: None,
                ell: Some(e.ell),
                n: Some(n),
                value: g4(n),
            });
        }
    }

    let (ki, min, mean) = argmin_with_mean(&g1);
    assert!(min <= mean + 1e-12);
    let window = &grid.scales[ki];
    let shells: Vec<f64> = window
        .radii
        .iter()
        .map(|&r| (growth.ball_measure(r) as f64 / growth.ball_measure(r - grid.shell_width) as f64).ln())
        .collect();
    let (ri, min, mean) = argmin_with_mean(&shells);
    assert!(min <= mean + 1e-12);
    let r = window.radii[ri];
    let thetas = grid
        .ells
        .iter()
        .map(|e| growth.theta(r, e.ell))
        .collect::<Result<Vec<f64>>>()?;
    let (li, min, mean) = argmin_with_mean(&thetas);
    assert!(min <= mean + 1e-12);
    let ell_window = &grid.ells[li];
    let incs: Vec<f64> = ell_window.n_values.iter().map(|&n| g4(n)).collect();
    let (ni, min, mean) = argmin_with_mean(&incs);
    assert!(min <= mean + 1e-12);
    let best = ScaleTuple {
        k: window.k,
        r,
        ell: ell_window.ell,
        n: ell_window.n_values[ni],
    };
    let c = thetas[li] * (1.0 + 1e-9) + 1e-12;
    let report = temper_insulate_with(&growth, best.n, 128.0 * c, r)?;
    Ok(ScanResult {
        best,
        summands,
        psi,
        c,
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassTransport {
    pub lhs: f64,
    pub rhs: f64,
}

impl MassTransport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12
    }
}

/// Ball data for evaluating the transport inequality under many predicates.
pub struct MassTransportBalls {
    weights: Vec<f64>,
    ratio: Vec<f64>,
    balls: Vec<Vec<u32>>,
    ball_measure: Vec<f64>,
    degrees: Vec<f64>,
}

impl MassTransportBalls {
    pub fn new(g: &Graph, radius: u32) -> Result<Self> {
        if radius == 0 || g.vertex_count() == 0 {
            return Err(invalid("need R >= 1 and a nonempty graph"));
        }
        let mu = g.total_degree() as f64;
        if mu == 0.0 {
            return Err(invalid("degree-biased root needs at least one edge"));
        }
        let mut bfs = Bfs::new(g);
        let mut ratio = Vec::with_capacity(g.vertex_count());
        let mut balls = Vec::with_capacity(g.vertex_count());
        let mut ball_measure = Vec::with_capacity(g.vertex_count());
        for rho in 0..g.vertex_count() {
            let measures = bfs.cumulative_ball_measures(rho, 2 * radius);
            let inner = measures[(radius as usize).min(measures.len() - 1)] as f64;
            let outer = *measures.last().expect("nonempty") as f64;
            ratio.push(if outer == 0.0 { 1.0 } else { inner / outer });
            balls.push(bfs.explore(rho, radius, |_, _| false).to_vec());
            ball_measure.push(inner);
        }
        Ok(Self {
            weights: (0..g.vertex_count()).map(|v| g.degree(v) as f64 / mu).collect(),
            ratio,
            balls,
            ball_measure,
            degrees: (0..g.vertex_count()).map(|v| g.degree(v) as f64).collect(),
        })
    }

    /// `E[μB(R)/μB(2R) · 1_A(ρ)]` and `E[μ{x ∈ B_ρ(R) : A(x)} / μB_ρ(R)]` with
    /// `ρ` degree-biased.
    pub fn evaluate(&self, predicate: &[bool]) -> MassTransport {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for rho in 0..self.weights.len() {
            let w = self.weights[rho];
            if w == 0.0 {
                continue;
            }
            if predicate[rho] {
                lhs += w * self.ratio[rho];
            }
            let hit: f64 = self.balls[rho]
                .iter()
                .filter(|&&x| predicate[x as usize])
                .map(|&x| self.degrees[x as usize])
                .sum();
            rhs += w * hit / self.ball_measure[rho];
        }
        MassTransport { lhs, rhs }
    }
}

pub fn mass_transport_check(g: &Graph, radius: u32, predicate: &[bool]) -> Result<MassTransport> {
    if predicate.len() != g.vertex_count() {
        return Err(invalid("predicate must cover every vertex"));
    }
    Ok(MassTransportBalls::new(g, radius)?.evaluate(predicate))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovTypeSample {
    pub subset: usize,
    pub t: usize,
    pub msd: f64,
    /// `√(MSD / t)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovTypeProbe {
    pub m: f64,
    pub samples: Vec<MarkovTypeSample>,
}

/// Lower estimate of the graphic Markov type constant: the largest
/// `√(E d(Z_0, Z_t)² / t)` over the given subsets and times, with exact
/// stationary MSD of each restricted walk.
pub fn graphic_markov_type_probe(g: &Graph, subsets: &[VertexSubset], t_grid: &[usize]) -> Result<MarkovTypeProbe> {
    if t_grid.contains(&0) {
        return Err(invalid("times must be positive"));
    }
    let mut samples = Vec::new();
    for (i, s) in subsets.iter().enumerate() {
        let w = RestrictedWalk::new(g, s.clone())?;
        let msd = msd_exact(&w, Start::Stationary, t_grid)?;
        for (&t, &m) in t_grid.iter().zip(&msd) {
            samples.push(MarkovTypeSample {
                subset: i,
                t,
                msd: m,
                ratio: (m / t as f64).sqrt(),
            });
        }
    }
    let m = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(MarkovTypeProbe { m, samples })
}

/// Exact stationary MSD at `2n` restricted to starts in `starts`:
/// `E[d(Z_0, Z_{2n})² 1_{starts}(Z_0)]`.
pub fn restricted_msd_on(walk: &RestrictedWalk, starts: &[u32], t: usize) -> Result<f64> {
    let pi = walk.stationary();
    let mut bfs = Bfs::new(walk.graph());
    let mut total = 0.0;
    for &x in starts {
        let law = walk.pushforward(&walk::DistributionVector::point_mass(x as usize), t)?;
        bfs.explore(x as usize, t as u32, |_, _| false);
        let m: f64 = law
            .iter()
            .map(|(y, p)| {
                let d = bfs.dist_of(y).unwrap_or(0) as f64;
                p * d * d
            })
            .sum();
        total += pi.prob(x as usize) * m;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{ckr_partition, coordinate_map, GraphMetric};
    use crate::generators::{standard_graph, StandardKind};
    use rand::{Rng, SeedableRng};

    fn std_graph(kind: StandardKind, dims: &[usize]) -> Graph {
        standard_graph(kind, dims).unwrap()
    }

    #[test]
    fn scale_constants() {
        let c = ScaleConstants::new(1).unwrap();
        assert_eq!((c.alpha, c.beta), (1, 1));
        let c = ScaleConstants::new(32).unwrap();
        assert_eq!((c.alpha, c.beta), (1, 2));
        let c = ScaleConstants::new(33).unwrap();
        assert_eq!((c.alpha, c.beta), (2, 3));
        for n in 1..5000u64 {
            let c = ScaleConstants::new(n).unwrap();
            assert!(c.alpha <= c.beta);
            assert!(64f64.powi(c.alpha as i32) >= 2.0 * n as f64);
            assert!(8f64.powi(c.beta as i32) >= 2.0 * n as f64);
        }
    }

    #[test]
    fn speed_bound_fixture() {
        let v = speed_bound_rhs(1, |_| 128.0).unwrap();
        let expected = 2.0 + 256.0 * 64.0 * (-64.0f64 / (32.0 * 128.0 * 128.0)).exp();
        assert!((v - expected).abs() < 1e-9);
        assert!((v - 16_384.0).abs() < 0.01);
        assert!((speed_bound_rhs(10, |_| 1e-9).unwrap() - 20.0).abs() < 1e-12);
        let lo = speed_bound_for_growth(100, 2.0, |_| 0.5).unwrap();
        let hi = speed_bound_for_growth(100, 2.0, |_| 0.7).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn martingale_examples() {
        let c8 = std_graph(StandardKind::Cycle, &[8]);
        let walk = RestrictedWalk::simple(&c8);
        let constant = PointMap::constant(8, 2, 3.0);
        let traj = walk.sample_trajectory(Start::Stationary, 8, 1, 0).unwrap();
        let d = martingale_decompose(&traj, &constant, &walk).unwrap();
        assert_eq!(d.max_increment, 0.0);
        assert_eq!(d.identity_error, 0.0);

        let mut metric = GraphMetric::full(&c8);
        let p = ckr_partition(&mut metric, 4.0, 3).unwrap();
        let f = PointMap::scalar(coordinate_map(&mut metric, &p, 5).values);
        let lip = edge_lipschitz(&c8, &f);
        for traj in walk.sample_trajectories(Start::Stationary, 8, 200, 9).unwrap() {
            let d = martingale_decompose(&traj, &f, &walk).unwrap();
            assert!(d.identity_error < 1e-12);
            assert!(d.max_increment <= 2.0 * lip + 1e-12);
        }

        // the cycle on a circle of circumference 8, chord-Lipschitz with constant < 1
        let radius = 8.0 / (2.0 * std::f64::consts::PI);
        let circle: Vec<f64> = (0..8)
            .flat_map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 8.0;
                [radius * a.cos(), radius * a.sin()]
            })
            .collect();
        let f = PointMap::new(2, circle).unwrap();
        assert!(edge_lipschitz(&c8, &f) <= 1.0);
        for start in 0..8u64 {
            for traj in walk.sample_trajectories(Start::Vertex(start as usize), 6, 50, start).unwrap() {
                assert!(martingale_decompose(&traj, &f, &walk).unwrap().max_increment <= 2.0);
            }
        }
        let even = Trajectory {
            vertices: vec![0, 1],
            master_seed: 0,
            index: 0,
        };
        assert!(martingale_decompose(&even, &f, &walk).is_err());
    }

    #[test]
    fn azuma_trivial_cases() {
        assert!(azuma_bound(0.0, 4, 1.0) >= 1.0);
        let c = std_graph(StandardKind::Cycle, &[12]);
        let walk = RestrictedWalk::simple(&c);
        let f = PointMap::scalar((0..12).map(|v| v.min(12 - v) as f64).collect());
        let rows = azuma_tail_check(&walk, &f, 2, &[0.0, 5.0], 500, 3).unwrap();
        assert_eq!(rows[0].exceedance.mean, 1.0);
        assert_eq!(rows[1].exceedance.mean, 0.0);
    }

    #[test]
    fn theta_closed_forms() {
        assert_eq!(theta_from_profile(|_| 0.0, 3), 0.0);
        for ell in 1..20 {
            let direct = theta_from_profile(|_| 1.0, ell);
            assert!((direct - (2.0 - 2f64.powi(-2 * ell as i32))).abs() < 1e-12);
        }
    }

    #[test]
    fn sumbound_random_profiles_and_its_reach() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let h = rng.gen_range(1..6u32);
            let profile: Vec<f64> = (0..=6 * h).map(|_| rng.gen_range(0.0..5.0)).collect();
            let (lhs, rhs) = sumbound_sides(|k| profile[k as usize], h);
            assert!(lhs <= rhs + 1e-12);
        }
        // θ(2h) reaches scale 6h, beyond the right-hand window
        let (lhs, rhs) = sumbound_sides(|k| if k == 6 { 1.0 } else { 0.0 }, 1);
        assert!(lhs > rhs);
    }

    #[test]
    fn growth_summary_examples() {
        let c = std_graph(StandardKind::Cycle, &[200]);
        let s = VertexSubset::full(&c);
        let summary = growth_summary(&c, &s, 1..=2, 1.0, 1).unwrap();
        assert_eq!(summary.s_lambda(1, 1.0).len(), 200);
        assert_eq!(summary.s_up.len(), 200);

        let torus = std_graph(StandardKind::Torus, &[64, 64]);
        let ball = crate::graph::bfs_ball(&torus, 32 * 64 + 32, 24).unwrap().subset(&torus);
        let summary = growth_summary(&torus, &ball, 1..=2, 4.0, 1).unwrap();
        let mu: f64 = ball.measure() as f64;
        let mut oracle = 0.0;
        for &x in ball.members() {
            let inner = crate::graph::bfs_ball(&torus, x as usize, 1).unwrap().len() as f64;
            let outer = crate::graph::bfs_ball(&torus, x as usize, 8).unwrap().len() as f64;
            oracle += 4.0 / mu * (outer / inner).ln();
        }
        assert!((summary.bar_phi_at(1) - oracle).abs() < 1e-12);
        assert!(summary.upbound_holds());
    }

    #[test]
    fn cycle_insulation_closed_form() {
        let c = std_graph(StandardKind::Cycle, &[400]);
        for (n, r) in [(1u64, 10u64), (3, 40), (10, 150), (5, 11)] {
            let rep = temper_insulate_check(&c, 0, n, 2.0, r).unwrap();
            let expected = 4.0 * n as f64 / (2.0 * r as f64 + 1.0);
            assert_eq!(rep.shell_ratio.unwrap(), expected);
            assert_eq!(rep.insulated, expected <= 1.0 / 8.0);
        }
        let rep = temper_insulate_check(&c, 0, 10, 2.0, 20).unwrap();
        assert!(!rep.insulated && rep.reason.is_some());
    }

    #[test]
    fn temper_examples() {
        let torus = std_graph(StandardKind::Torus, &[64, 64]);
        let growth = RootedGrowth::new(&torus, 0, 32, 3).unwrap();
        let n = 100;
        let c = ScaleConstants::new(n).unwrap();
        let top = (c.alpha..=c.beta).map(|k| growth.bar_phi(32, k).unwrap()).fold(0.0, f64::max);
        assert!(temper_insulate_with(&growth, n, top, 32).unwrap().tempered);
        let first = growth.bar_phi(32, c.alpha).unwrap();
        assert!(!temper_insulate_with(&growth, n, 0.99 * first, 32).unwrap().tempered);
    }

    #[test]
    fn mass_transport_trivial_predicates() {
        let torus = std_graph(StandardKind::Torus, &[9, 9]);
        let balls = MassTransportBalls::new(&torus, 2).unwrap();
        let all = balls.evaluate(&[true; 81]);
        assert!((all.rhs - 1.0).abs() < 1e-12);
        assert!((all.lhs - 13.0 / 41.0).abs() < 1e-12);
        let none = balls.evaluate(&[false; 81]);
        assert_eq!((none.lhs, none.rhs), (0.0, 0.0));
    }

    #[test]
    fn markov_probe_singletons() {
        let g = std_graph(StandardKind::Grid, &[6, 6]);
        let single = VertexSubset::from_vertices(&g, [7]).unwrap();
        let probe = graphic_markov_type_probe(&g, &[single], &[1, 4]).unwrap();
        assert_eq!(probe.m, 0.0);
    }

    #[test]
    fn full_grid_is_refused() {
        let err = ScanGrid::full(1).unwrap_err().to_string();
        assert!(err.contains("override"));
    }

    #[test]
    fn torus_scan_has_uniform_doubling() {
        let torus = std_graph(StandardKind::Torus, &[40, 40]);
        let grid = ScanGrid::geometric(1, &[1], 3, &[1], 3).unwrap();
        let a = scan_good_scales(&torus, 0, &grid).unwrap();
        let b = scan_good_scales(&torus, 17 * 40 + 5, &grid).unwrap();
        let doubling = |s: &ScanResult| {
            s.summands
                .iter()
                .filter(|r| r.term == Summand::Doubling)
                .map(|r| r.value)
                .collect::<Vec<_>>()
        };
        assert_eq!(doubling(&a), doubling(&b));
        assert!(a.report.tempered);
    }
}
