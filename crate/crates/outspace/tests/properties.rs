use outspace::folding::greedy_folding_path;
use outspace::free_group::{fiber_product, Letter, Word};
use outspace::marked_graph::one_edge_splittings;
use outspace::optimal_maps::lipschitz_distance;
use outspace::random::{random_automorphism, random_marked_graph, random_optimal_map, rng};
use outspace::subfactor::farey_distance;
use outspace::whitehead::{complement, image, is_free_factor_bool};
use outspace::{Automorphism, SubgroupGraph, Q};
use proptest::prelude::*;

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    let letters: Vec<Letter> = (1..=rank as Letter).flat_map(|g| [g, -g]).collect();
    prop::collection::vec(prop::sample::select(letters), 0..=max_len).prop_map(|v| Word::new(&v))
}

fn basis_factor(rank: usize, k: usize, seed: u64) -> SubgroupGraph {
    let mut r = rng(seed);
    let gens: Vec<Word> = (0..k).map(Word::generator).collect();
    image(&random_automorphism(rank, 4, &mut r), &SubgroupGraph::new(rank, &gens).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn words_form_a_group(u in word(3, 12), v in word(3, 12)) {
        prop_assert!(u.mul(&u.inverse()).is_empty());
        prop_assert_eq!(u.inverse().inverse(), u.clone());
        prop_assert_eq!(u.mul(&v).inverse(), v.inverse().mul(&u.inverse()));
    }

    #[test]
    fn cyclic_reduction_is_a_conjugate(u in word(3, 14)) {
        let (c, g) = u.cyclic_reduce();
        prop_assert_eq!(c.conjugate_by(&g), u);
        let l = c.letters();
        prop_assert!(l.len() < 2 || l[0] != -l[l.len() - 1]);
    }

    #[test]
    fn subgroup_contains_its_products(gens in prop::collection::vec(word(3, 6), 1..4), picks in prop::collection::vec((0usize..4, any::<bool>()), 0..6)) {
        let h = SubgroupGraph::new(3, &gens).unwrap();
        let mut w = Word::identity();
        for (i, inv) in picks {
            let g = &gens[i % gens.len()];
            w = w.mul(&if inv { g.inverse() } else { g.clone() });
        }
        prop_assert!(h.contains(&w));
        for b in h.basis() {
            prop_assert!(h.contains(&b));
        }
        prop_assert_eq!(SubgroupGraph::new(3, &h.basis()).unwrap(), h);
    }

    #[test]
    fn fiber_product_with_itself_has_the_diagonal(gens in prop::collection::vec(word(2, 6), 1..3)) {
        let h = SubgroupGraph::new(2, &gens).unwrap();
        let comps = fiber_product(&h, &h).unwrap();
        let based: Vec<_> = comps.iter().filter(|c| c.based).collect();
        prop_assert_eq!(based.len(), 1);
        prop_assert_eq!(based[0].rank, h.rank());
    }

    #[test]
    fn automorphisms_invert(seed in any::<u64>(), rank in 2usize..=4) {
        let mut r = rng(seed);
        let phi = random_automorphism(rank, 6, &mut r);
        prop_assert!(phi.compose(&phi.inverse()).is_identity());
        prop_assert!(phi.pow(3).compose(&phi.pow(-3)).is_identity());
    }

    #[test]
    fn random_factors_have_complements(seed in any::<u64>(), rank in 2usize..=4) {
        let k = 1 + (seed as usize) % (rank - 1);
        let a = basis_factor(rank, k, seed);
        prop_assert!(is_free_factor_bool(&a));
        let c = complement(&a).unwrap();
        prop_assert_eq!(a.rank() + c.rank(), rank);
        prop_assert_eq!(a.join(&c), SubgroupGraph::full(rank));
    }

    #[test]
    fn farey_distance_is_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = random_automorphism(2, 3, &mut r).image(0).clone();
        let v = random_automorphism(2, 3, &mut r).image(1).clone();
        let phi: Automorphism = random_automorphism(2, 3, &mut r);
        let d = farey_distance(&u, &v).unwrap();
        prop_assert_eq!(farey_distance(&v, &u).unwrap(), d);
        prop_assert_eq!(farey_distance(&phi.apply(&u), &phi.apply(&v)).unwrap(), d);
        prop_assert_eq!(d == 0, SubgroupGraph::new(2, &[u]).unwrap().is_conjugate_to(&SubgroupGraph::new(2, &[v]).unwrap()));
    }

    #[test]
    fn splittings_account_for_rank(seed in any::<u64>(), rank in 2usize..=4) {
        let g = random_marked_graph(rank, 3, &mut rng(seed));
        for s in one_edge_splittings(&g) {
            prop_assert!(s.rank_accounting());
        }
    }

    #[test]
    fn lipschitz_distance_is_a_distance(seed in any::<u64>(), rank in 2usize..=3) {
        let mut r = rng(seed);
        let g = random_marked_graph(rank, 3, &mut r);
        let h = random_marked_graph(rank, 3, &mut r);
        let k = random_marked_graph(rank, 3, &mut r);
        prop_assert_eq!(lipschitz_distance(&g, &g).ratio, Q::int(1));
        let gh = lipschitz_distance(&g, &h).ratio;
        prop_assert!(gh >= Q::int(1));
        prop_assert!(lipschitz_distance(&g, &k).ratio <= gh * lipschitz_distance(&h, &k).ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn greedy_paths_satisfy_invariants(seed in any::<u64>(), rank in 2usize..=4) {
        let guide = random_optimal_map(rank, 4, &mut rng(seed));
        let path = greedy_folding_path(&guide).unwrap();
        let rep = path.check_invariants(4).unwrap();
        prop_assert!(rep.max_arclength_error < 1e-9);
    }
}
