use proptest::prelude::*;

use walklab::generators::{
    random_regular_expander, standard_graph, stretched_expander, ExpanderSpec, StandardKind,
};
use walklab::graph::{bfs_ball, Graph, VertexSubset};
use walklab::walk::{
    escape_statistics, joint_entropy, mixing_time_tv, msd_exact, DistributionVector, RestrictedWalk, Start,
};

/// Random connected graph: a random tree plus a few chords.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (3usize..14).prop_flat_map(|n| {
        let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
        let chords = prop::collection::vec((0..n, 0..n), 0..n);
        (Just(n), parents, chords).prop_map(|(n, parents, chords)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            for (u, v) in chords {
                let e = (u.min(v), u.max(v));
                if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == e) {
                    edges.push(e);
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn close(a: &DistributionVector, b: &DistributionVector) -> bool {
    a.vertices()
        .iter()
        .chain(b.vertices())
        .all(|&v| (a.prob(v as usize) - b.prob(v as usize)).abs() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_walk_is_reversible(g in connected_graph(), center in 0usize..14, r in 0u32..4) {
        let center = center % g.vertex_count();
        let s = bfs_ball(&g, center, r).unwrap().subset(&g);
        let walk = RestrictedWalk::new(&g, s).unwrap();
        prop_assert!(walk.detailed_balance_violation() < 1e-12);
        let pi = walk.stationary();
        prop_assert!((pi.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(close(&walk.pushforward(&pi, 3).unwrap(), &pi));
    }

    #[test]
    fn restricted_and_simple_walks_agree_away_from_the_boundary(
        g in connected_graph(), x in 0usize..14, r in 1u32..4,
    ) {
        let x = x % g.vertex_count();
        let s = bfs_ball(&g, x, r).unwrap().subset(&g);
        let restricted = RestrictedWalk::new(&g, s).unwrap();
        let simple = RestrictedWalk::simple(&g);
        let start = DistributionVector::point_mass(x);
        for t in 0..=r as usize {
            prop_assert!(close(
                &restricted.pushforward(&start, t).unwrap(),
                &simple.pushforward(&start, t).unwrap(),
            ));
        }
    }

    #[test]
    fn msd_is_at_most_t_squared_and_odd_times_compare(g in connected_graph(), x in 0usize..14) {
        let x = x % g.vertex_count();
        let walk = RestrictedWalk::simple(&g);
        let grid: Vec<usize> = (0..=9).collect();
        for start in [Start::Vertex(x), Start::Stationary] {
            let msd = msd_exact(&walk, start, &grid).unwrap();
            for (t, &m) in msd.iter().enumerate() {
                prop_assert!(m <= (t * t) as f64 + 1e-9);
            }
            for n in (1..9).step_by(2) {
                prop_assert!(msd[n] <= (msd[n + 1].sqrt() + 1.0).powi(2) + 1e-9);
            }
        }
    }

    #[test]
    fn entropy_chain_rule(g in connected_graph(), t in 2usize..6) {
        let walk = RestrictedWalk::simple(&g);
        let j = joint_entropy(&walk, t).unwrap();
        prop_assert!((j.joint - j.first - j.conditional).abs() < 1e-9);
    }
}

#[test]
fn trajectories_are_schedule_independent() {
    let g = standard_graph(StandardKind::Torus, &[9, 9]).unwrap();
    let walk = RestrictedWalk::simple(&g);
    let forward: Vec<_> = walk.sample_trajectories(Start::Stationary, 40, 20, 5).unwrap().collect();
    for i in (0..20u64).rev() {
        let again = walk.sample_trajectory(Start::Stationary, 40, 5, i).unwrap();
        assert_eq!(again, forward[i as usize]);
    }
}

#[test]
fn expander_mixing_is_logarithmic() {
    let mut ratios = Vec::new();
    for (n, seed) in [(64usize, 1u64), (128, 2), (256, 3)] {
        let mut spec = ExpanderSpec::new(n, seed);
        spec.spectral_gap_threshold = 0.99;
        let g = random_regular_expander(&spec).unwrap().graph;
        let t = mixing_time_tv(&g, 0.25, true, None).unwrap();
        assert!(t.exhaustive);
        ratios.push(t.t as f64 / (n as f64).ln());
    }
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    // t_mix ≤ c ln n with one c across sizes; a linear trend would double it
    assert!(ratios.iter().all(|&q| q >= c / 2.0), "t_mix / ln n = {ratios:?}");
    assert!(c < 10.0, "fitted c = {c}");
}

#[test]
fn restricted_subset_must_belong_to_the_graph() {
    let g = standard_graph(StandardKind::Path, &[5]).unwrap();
    let other = standard_graph(StandardKind::Path, &[6]).unwrap();
    let s = VertexSubset::from_vertices(&other, [0, 1]).unwrap();
    assert!(RestrictedWalk::new(&g, s).is_err());
}

#[test]
fn stretched_expander_escapes_diffusively_far() {
    let (h, _) = stretched_expander(&ExpanderSpec::new(64, 17), 64).unwrap();
    let t = (64.0f64 * 64.0 * 64f64.ln()).ceil() as usize;
    let target = (64.0 * 64f64.ln()).powi(2) / 72.0;
    let stats = escape_statistics(&h, t, 400, 18).unwrap();
    let est = stats.displacement_avoiding_root;
    assert!(est.mean - 3.0 * est.stderr > target, "{est:?} vs {target}");
}
