use proptest::prelude::*;

use walklab::experiments::{bound_check_triple, build_graph, run_scan, ExperimentConfig, ExperimentKind, GraphSpec};
use walklab::generators::{standard_graph, StandardKind};
use walklab::graph::{bfs_ball, Bfs, Graph};
use walklab::rng::derive_seed;
use walklab::scales::{
    azuma_tail_check, edge_lipschitz, martingale_decompose, speed_bound_rhs, theta_from_profile, MassTransportBalls,
    PointMap, ScaleTuple,
};
use walklab::walk::{RestrictedWalk, Start};

fn connected_graph() -> impl Strategy<Value = Graph> {
    (3usize..30).prop_flat_map(|n| {
        let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
        let chords = prop::collection::vec((0..n, 0..n), 0..6);
        (Just(n), parents, chords).prop_map(|(n, parents, chords)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            edges.extend(chords.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))));
            edges.sort_unstable();
            edges.dedup();
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

/// Two-dimensional map: distances to two anchors, scaled.
fn distance_map(g: &Graph, a: usize, b: usize, scale: f64) -> PointMap {
    let mut bfs = Bfs::new(g);
    let mut values = Vec::with_capacity(2 * g.vertex_count());
    let da: Vec<u32> = (0..g.vertex_count()).map(|v| bfs.distance(a, v).unwrap()).collect();
    for v in 0..g.vertex_count() {
        values.push(scale * da[v] as f64);
        values.push(scale * bfs.distance(b, v).unwrap() as f64);
    }
    PointMap::new(2, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn martingale_identity_on_restricted_walks(
        g in connected_graph(),
        anchors in (0usize..30, 0usize..30, 0usize..30),
        r in 1u32..5,
        scale in 0.1f64..3.0,
        n in 1usize..12,
        seed in any::<u64>(),
    ) {
        let v = g.vertex_count();
        let (c, a, b) = (anchors.0 % v, anchors.1 % v, anchors.2 % v);
        let walk = RestrictedWalk::new(&g, bfs_ball(&g, c, r).unwrap().subset(&g)).unwrap();
        let f = distance_map(&g, a, b, scale);
        let lip = edge_lipschitz(&g, &f);
        for traj in walk.sample_trajectories(Start::Stationary, 2 * n, 8, seed).unwrap() {
            let d = martingale_decompose(&traj, &f, &walk).unwrap();
            prop_assert!(d.identity_error <= 1e-9);
            prop_assert!(d.max_increment <= 2.0 * lip + 1e-9);
            prop_assert_eq!(d.forward.len(), n);
            prop_assert_eq!(d.backward.len(), n);
        }
    }

    #[test]
    fn mass_transport_holds_for_any_predicate(
        g in connected_graph(),
        bits in prop::collection::vec(any::<bool>(), 30),
        radius in 1u32..4,
    ) {
        let balls = MassTransportBalls::new(&g, radius).unwrap();
        let mt = balls.evaluate(&bits[..g.vertex_count()]);
        prop_assert!(mt.holds(), "{:?}", mt);
    }

    #[test]
    fn speed_bound_is_monotone_in_f(n in 1u64..5000, a in 1.0f64..500.0, b in 1.0f64..500.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let small = speed_bound_rhs(n, |_| lo).unwrap();
        let large = speed_bound_rhs(n, |_| hi).unwrap();
        prop_assert!(small >= 2.0 * n as f64);
        prop_assert!(small <= large * (1.0 + 1e-12));
    }

    #[test]
    fn theta_is_a_weighted_window(phi in prop::collection::vec(0.0f64..3.0, 31), ell in 1u32..10) {
        let th = theta_from_profile(|k| phi[k as usize], ell);
        let window = (ell..=3 * ell).map(|k| phi[k as usize]);
        let max = window.clone().fold(0.0, f64::max);
        prop_assert!(th >= phi[ell as usize] - 1e-12);
        prop_assert!(th <= 2.0 * max + 1e-12);
    }
}

#[test]
fn azuma_tails_on_a_restricted_torus_ball() {
    let g = standard_graph(StandardKind::Torus, &[24, 24]).unwrap();
    let walk = RestrictedWalk::new(&g, bfs_ball(&g, 0, 8).unwrap().subset(&g)).unwrap();
    let f = distance_map(&g, 0, 300, 1.0);
    let rows = azuma_tail_check(&walk, &f, 20, &[20.0, 40.0, 60.0], 20_000, 4).unwrap();
    for row in &rows {
        assert!(row.within_bound(3.0), "{row:?}");
    }
}

#[test]
fn desk_hk_scan_is_frozen() {
    let mut config = ExperimentConfig::new("desk", ExperimentKind::Scan);
    config.graph = Some(GraphSpec::Hk { n_sequence: vec![4, 16] });
    config.seed = 81;
    let (scan, _) = run_scan(&config).unwrap();
    assert_eq!(
        scan.best,
        ScaleTuple {
            k: 2,
            r: 8405,
            ell: 1,
            n: 4096
        }
    );
    assert!(scan.report.passes(), "{:?}", scan.report);
    assert!((scan.c - 5.3342649).abs() < 1e-6, "c = {}", scan.c);

    // same graph the scan saw
    let built = build_graph(config.graph.as_ref().unwrap(), derive_seed(81, 1), &config.caps).unwrap();
    assert_eq!(built.graph.graph.vertex_count(), 23_626);
    let b = scan.best;
    let row = bound_check_triple(&built.graph.graph, built.graph.root, b.n, 128.0 * scan.c, b.r, 4, 5).unwrap();
    assert!(row.included);
    let (msd, budget) = (row.conditional_msd.unwrap(), row.budget.unwrap());
    assert!(msd <= budget, "{msd} > {budget}");
}
