use outspace::baseline::Baseline;
use outspace::par::Mode;
use outspace::subfactor::{
    behrstock, bgi_proxy, finiteness, hamenstadt_demo, natural_path, polynomial_growth_demo, projection_stability,
    rank3_panel, same_color_groups, BehrstockConfig, StabilityConfig, SurrogateConfig,
};
use outspace::{Automorphism, SubgroupGraph, Word};

fn sub(gens: &[&str]) -> SubgroupGraph {
    let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
    SubgroupGraph::new(3, &ws).unwrap()
}

fn behrstock_config(b: &Baseline) -> BehrstockConfig {
    let r = &b.behrstock;
    BehrstockConfig {
        rank: r.rank,
        samples: r.samples,
        seed: r.seed,
        moves: r.moves,
        pool: r.pool,
        quantile: r.quantile,
        ..BehrstockConfig::default()
    }
}

#[test]
fn behrstock_matches_baseline() {
    let b = Baseline::current().unwrap();
    let rep = behrstock(&behrstock_config(&b), Mode::default_mode()).unwrap();
    assert_eq!(rep.triples.len(), b.behrstock.samples);
    assert_eq!(rep.xi_hat, b.behrstock.xi_hat);
    let mut counts = std::collections::BTreeMap::new();
    for t in &rep.triples {
        for d in t.distances {
            *counts.entry(d.expect("rank-two factors use the Farey graph")).or_insert(0) += 1;
        }
    }
    assert_eq!(counts.into_iter().collect::<Vec<_>>(), b.behrstock.distance_counts);
    assert!(rep.violations_at(b.behrstock.xi_hat).is_empty());
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let cfg = BehrstockConfig { samples: 10, pool: 400, ..BehrstockConfig::default() };
    let a = serde_json::to_string(&behrstock(&cfg, Mode::Sequential).unwrap()).unwrap();
    let b = serde_json::to_string(&behrstock(&cfg, Mode::Parallel).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn projection_is_stable_across_embeddings() {
    let b = Baseline::current().unwrap();
    let s = &b.projection_stability;
    let cfg = StabilityConfig {
        seed: s.seed,
        pairs: s.pairs,
        graphs: s.graphs,
        moves: s.moves,
        ..StabilityConfig::default()
    };
    let rep = projection_stability(&cfg, Mode::default_mode()).unwrap();
    assert_eq!(rep.rows.len(), s.pairs);
    assert_eq!(rep.max_diameter, Some(s.max_diameter));
    // Distinct same-colored factors are never pinched in a graph where the other is embedded.
    assert_eq!(rep.pinched, 0);
}

#[test]
fn hamenstadt_matches_baseline() {
    let b = Baseline::current().unwrap();
    let h = &b.hamenstadt;
    let rep = hamenstadt_demo(&h.lengths, h.seed, &SurrogateConfig::default(), Mode::default_mode()).unwrap();
    let got: Vec<u32> = rep.rows.iter().map(|r| r.max_diameter.unwrap()).collect();
    assert_eq!(got, h.max_diameters);
    let bound = *h.max_diameters.iter().max().unwrap();
    assert!(got.iter().all(|&d| d <= bound));
}

#[test]
fn polynomial_growth_stays_bounded() {
    let phi = Automorphism::parse(3, &["a", "ba", "cb"], "abc").unwrap();
    let rows =
        polynomial_growth_demo(&phi, &[1, 2, 4, 8], &rank3_panel(), &SurrogateConfig::default(), Mode::default_mode())
            .unwrap();
    let diam: Vec<u32> = rows.iter().map(|r| r.max_diameter.unwrap()).collect();
    assert!(rows.windows(2).all(|w| w[0].events <= w[1].events));
    assert!(diam.iter().all(|&d| d <= 2), "{diam:?}");
}

#[test]
fn bgi_proxy_reports_intervals() {
    let phi = Automorphism::parse(3, &["a", "b", "cabba"], "abc").unwrap();
    let path = natural_path(&phi).unwrap();
    let rep = bgi_proxy(&path, &sub(&["a", "b"]), &SurrogateConfig::default()).unwrap();
    assert!(rep.interval_violations.is_empty(), "{:?}", rep.interval_violations);
    assert_eq!(rep.sample_diameters.len(), rep.samples);
    // The factor stays embedded as the a, b petals, so every sample projects to the same set.
    assert_eq!(rep.diameter, rep.sample_diameters[0]);
}

#[test]
fn finiteness_within_a_color() {
    let cfg = BehrstockConfig { pool: 2000, ..BehrstockConfig::default() };
    let group = same_color_groups(&cfg).into_iter().max_by_key(|g| g.len()).unwrap();
    assert!(group.len() >= 6);
    let rep = finiteness(&group[0], &group[1], &group[2..], 2, &cfg.surrogate, Mode::Sequential).unwrap();
    assert_eq!(rep.skipped, 0);
    assert!(rep.above.is_empty(), "{:?}", rep.above);
}
