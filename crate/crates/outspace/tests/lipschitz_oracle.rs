mod common;

use common::lp_oracle::rose_lipschitz_oracle;
use outspace::optimal_maps::lipschitz_distance;
use outspace::random::{random_marked_graph, random_rose, rng};
use outspace::{MarkedGraph, Scalar, Q};
use rand::Rng;

#[test]
fn oracle_on_fixed_examples() {
    let g = MarkedGraph::<Q>::standard_rose(3);
    assert_eq!(rose_lipschitz_oracle(&g, &g), Q::int(1));
    let h = g.with_lengths(vec![Q::ratio(1, 2), Q::ratio(1, 4), Q::ratio(1, 4)]);
    assert_eq!(rose_lipschitz_oracle(&g, &h), Q::ratio(3, 2));
    assert_eq!(rose_lipschitz_oracle(&h, &g), Q::ratio(4, 3));
}

#[test]
fn candidates_match_oracle() {
    let mut r = rng(2024);
    for k in 0..50 {
        let rank = r.gen_range(2..=3);
        let g = random_rose(rank, 3, &mut r);
        let h = if r.gen_bool(0.5) { random_rose(rank, 3, &mut r) } else { random_marked_graph(rank, 3, &mut r) };
        let cand = lipschitz_distance(&g, &h).ratio;
        let oracle = rose_lipschitz_oracle(&g, &h);
        assert!((cand.to_f64().ln() - oracle.to_f64().ln()).abs() < 1e-9, "pair {k}: {cand} vs {oracle}");
        assert_eq!(cand, oracle, "pair {k}");
    }
}
