use pagrow::analytics::{run_replica_range, run_replicas};
use pagrow::{grow_kneighbour, grow_lcd, GrowthConfig, RngStream, SeedGraph};
use proptest::prelude::*;

#[test]
fn streams_reproduce_and_differ() {
    let cfg = GrowthConfig::new(3, 3000, 42);
    let a = grow_kneighbour(&cfg.clone().with_stream(1)).unwrap().graph;
    let b = grow_kneighbour(&cfg.clone().with_stream(1)).unwrap().graph;
    let c = grow_kneighbour(&cfg.with_stream(2)).unwrap().graph;
    assert!(a.edges().eq(b.edges()));
    assert!(!a.edges().eq(c.edges()));
    let l1 = grow_lcd(3, 3000, RngStream::new(42, 1)).unwrap();
    let l2 = grow_lcd(3, 3000, RngStream::new(42, 1)).unwrap();
    assert!(l1.edges().eq(l2.edges()));
}

#[test]
fn replica_ranges_merge_to_the_full_run() {
    let cfg = GrowthConfig::new(2, 200, 5).with_trace(4);
    let full = run_replicas(&cfg, 60, 2).unwrap();
    let left = run_replica_range(&cfg, 0..25, 1).unwrap();
    let right = run_replica_range(&cfg, 25..60, 3).unwrap();
    let merged = left.merge(right).unwrap();
    assert_eq!(merged.degrees(), full.degrees());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn edge_count_and_degree_sum(k in 1u32..6, n in 1usize..300, seed in any::<u64>()) {
        let g = grow_kneighbour(&GrowthConfig::new(k, n, seed)).unwrap().graph;
        prop_assert_eq!(g.vertex_count(), n);
        prop_assert_eq!(g.edge_count(), k as usize * n);
        let total: u64 = g.degree_histogram().iter().map(|(&d, &c)| u64::from(d) * c).sum();
        prop_assert_eq!(total, 2 * k as u64 * n as u64);
        prop_assert!(g.degree_histogram().keys().next().is_none_or(|&d| u64::from(d) >= u64::from(k)));
    }

    #[test]
    fn complete_seed_edge_count(k in 1u32..4, extra in 1u32..4, n_extra in 0usize..100, seed in any::<u64>()) {
        let j = k + extra;
        let n = j as usize + n_extra;
        let g = grow_kneighbour(&GrowthConfig::new(k, n, seed).with_seed_graph(SeedGraph::CompleteKj(j))).unwrap().graph;
        prop_assert_eq!(g.edge_count(), (j * (j - 1) / 2) as usize + k as usize * n_extra);
    }
}
