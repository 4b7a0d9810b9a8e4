//! Acceptance criteria. Each criterion prints one PASS/FAIL line with its runtime; the test
//! fails if any criterion fails.

mod common;

use common::lp_oracle::rose_lipschitz_oracle;
use common::suite::run_suite;
use outspace::baseline::Baseline;
use outspace::folding::{hanging_tree_classify, vanishing_path, HangingCase};
use outspace::free_group::fiber_product;
use outspace::marked_graph::{classify_attachment, color, core_cover, edge_of, same_color};
use outspace::optimal_maps::{
    difference_of_markings, dilatation, eigenvector_exact, lipschitz_distance, transition_matrix,
};
use outspace::par::Mode;
use outspace::random::{random_marked_graph, random_rose, rng};
use outspace::subfactor::{
    axis_map, axis_subgroup, behrstock, distance4_chain, hamenstadt_demo, Axis, BehrstockConfig, SurrogateConfig,
};
use outspace::{MarkedGraph, Scalar, SubgroupGraph, Word, Q, QL};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Check + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn sub(rank: usize, gens: &[&str], alphabet: &str) -> SubgroupGraph {
    let ws: Vec<Word> = gens.iter().map(|s| Word::parse_with(s, alphabet).unwrap()).collect();
    SubgroupGraph::new(rank, &ws).unwrap()
}

fn figure1() -> Check {
    let rows = Axis::new().rows(&axis_subgroup(), -5..=7).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 13, "{} covers", rows.len());
    let at = |k: i64| &rows[(k + 5) as usize];
    ensure!(at(2).subgroup == sub(3, &["x", "z"], "xyz"), "phi^2(A) differs");
    ensure!(at(6).subgroup == sub(3, &["zxy", "zzx"], "xyz"), "phi^6(A) differs");
    Ok("13 covers, phi^2(A) = <x,z>, phi^6(A) = <zxy,zzx>".into())
}

fn predicate_table() -> Check {
    let rows = Axis::new().rows(&axis_subgroup(), -6..=11).map_err(|e| e.to_string())?;
    let row = |k: i64| rows.iter().find(|r| r.k == k).unwrap();
    ensure!(row(-1).flags.p1, "P1 fails at k=-1");
    ensure!(row(9).flags.p3, "P3 fails at k=9");
    ensure!(row(7).doubly_covered, "not doubly covered at k=7");
    let first_p1 = rows.iter().rev().find(|r| r.flags.p1).map(|r| r.k);
    let first_p3 = rows.iter().find(|r| r.flags.p3).map(|r| r.k);
    let first_double = rows.iter().find(|r| r.k >= 0 && r.doubly_covered).map(|r| r.k);
    ensure!(
        first_p1 == Some(-1) && first_p3 == Some(9) && first_double == Some(7),
        "thresholds {first_p1:?} {first_p3:?} {first_double:?}"
    );
    Ok("P1 from k=-1 down, P3 from k=9, doubly covered from k=7".into())
}

fn dilatation_check() -> Check {
    let l = QL::lambda();
    ensure!(l.pow(3) - l.pow(2) - QL::one() == QL::zero(), "lambda^3 - lambda^2 - 1 != 0");
    let t = transition_matrix(&axis_map()).map_err(|e| e.to_string())?;
    let d = dilatation(&t);
    ensure!((d.estimate - 1.46557).abs() < 1e-5, "lambda ~ {}", d.estimate);
    ensure!((l.to_f64() - 1.46557).abs() < 1e-5, "exact lambda ~ {}", l.to_f64());
    let v = eigenvector_exact(&t, &l).map_err(|e| e.to_string())?;
    ensure!(v == vec![QL::one(), l.clone(), l.pow(2)], "eigenvector not 1:lambda:lambda^2");
    Ok(format!("lambda = {:.8}, eigenvector 1:lambda:lambda^2", d.estimate))
}

fn four_generator_example() -> Check {
    let g = MarkedGraph::<Q>::standard_rose(4);
    let a = sub(4, &["abaab", "cb", "abd"], "abcd");
    let b = sub(4, &["a", "c", "d"], "abcd");
    let cb = core_cover(&b, &g).map_err(|e| e.to_string())?;
    let ca = core_cover(&a, &g).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    if !classify_attachment(&cb).embedded {
        notes.push("B is not embedded".to_string());
    }
    if !classify_attachment(&ca).adjoined {
        notes.push("A is not adjoined".to_string());
    }
    let comps = fiber_product(&a, &b).map_err(|e| e.to_string())?;
    let ranks: Vec<usize> = comps.iter().map(|c| c.rank).collect();
    if ranks.iter().any(|&r| r != 0) {
        notes.push(format!("fiber product component ranks {ranks:?}, not all 0"));
    }
    match distance4_chain(&a, &b, &g) {
        Ok(w) if w.len() == 4 && w.verify().is_ok() => {}
        Ok(w) => notes.push(format!("chain of length {} (verified: {:?})", w.len(), w.verify())),
        Err(e) => notes.push(format!("no chain: {e}")),
    }
    if notes.is_empty() {
        Ok("B embedded, A adjoined, fiber product rank 0, certified chain of length 4".into())
    } else {
        Err(notes.join("; "))
    }
}

fn colors() -> Check {
    ensure!(
        !same_color(&sub(3, &["a", "cbC"], "abc"), &sub(3, &["a", "b"], "abc")),
        "<a,cbc^-1> and <a,b> share a color"
    );
    ensure!(same_color(&sub(3, &["cabABabAB"], "abc"), &sub(3, &["c"], "abc")), "<c[a,b]^2> and <c> differ in color");
    let n = color(&sub(3, &["a"], "abc")).covers.len();
    ensure!(n == 7, "{n} double covers");
    Ok("colors separate and agree as expected over 7 double covers".into())
}

fn folding_suite() -> Check {
    let outcomes = run_suite(200);
    let bad = outcomes.iter().filter(|o| o.violations() > 0).count();
    ensure!(bad == 0, "{bad} of {} paths violate an invariant", outcomes.len());
    for rank in 2..=4 {
        ensure!(outcomes.iter().any(|o| o.rank == rank), "no paths of rank {rank}");
    }
    let err = outcomes.iter().map(|o| o.arclength_error).fold(0.0, f64::max);
    ensure!(err <= 1e-9, "arclength error {err}");
    let events: usize = outcomes.iter().map(|o| o.events).sum();
    Ok(format!("{} paths, {events} events, zero violations", outcomes.len()))
}

fn lipschitz_oracle() -> Check {
    let mut r = rng(2024);
    for k in 0..50 {
        let rank = r.gen_range(2..=3);
        let g = random_rose(rank, 3, &mut r);
        let h = if r.gen_bool(0.5) { random_rose(rank, 3, &mut r) } else { random_marked_graph(rank, 3, &mut r) };
        let cand = lipschitz_distance(&g, &h).ratio;
        let oracle = rose_lipschitz_oracle(&g, &h);
        ensure!((cand.to_f64().ln() - oracle.to_f64().ln()).abs() < 1e-9, "pair {k}: {cand} vs {oracle}");
    }
    Ok("50 pairs agree with the tree-minimization oracle".into())
}

fn behrstock_check(b: &Baseline) -> Check {
    let r = &b.behrstock;
    let cfg = BehrstockConfig {
        rank: r.rank,
        samples: r.samples,
        seed: r.seed,
        moves: r.moves,
        pool: r.pool,
        quantile: r.quantile,
        ..BehrstockConfig::default()
    };
    let rep = behrstock(&cfg, Mode::default_mode()).map_err(|e| e.to_string())?;
    ensure!(rep.triples.len() == r.samples, "{} triples", rep.triples.len());
    ensure!(rep.xi_hat == r.xi_hat, "xi_hat {} vs baseline {}", rep.xi_hat, r.xi_hat);
    let mut counts = BTreeMap::new();
    for t in &rep.triples {
        for d in t.distances {
            *counts.entry(d.ok_or("undefined distance")?).or_insert(0usize) += 1;
        }
    }
    let counts: Vec<(u32, usize)> = counts.into_iter().collect();
    ensure!(counts == r.distance_counts, "distance counts {counts:?} vs baseline {:?}", r.distance_counts);
    let v = rep.violations_at(r.xi_hat);
    ensure!(v.is_empty(), "{} triples with two coordinates above xi_hat", v.len());
    Ok(format!("{} triples, xi_hat = {}, no violations", rep.triples.len(), rep.xi_hat))
}

fn hamenstadt_check(b: &Baseline) -> Check {
    let h = &b.hamenstadt;
    let rep = hamenstadt_demo(&h.lengths, h.seed, &SurrogateConfig::default(), Mode::default_mode())
        .map_err(|e| e.to_string())?;
    let got: Vec<Option<u32>> = rep.rows.iter().map(|r| r.max_diameter).collect();
    let want: Vec<Option<u32>> = h.max_diameters.iter().map(|&d| Some(d)).collect();
    ensure!(got == want, "diameters {got:?} vs baseline {want:?}");
    let distinct: BTreeSet<_> = got.iter().collect();
    ensure!(distinct.len() == 1, "diameters {got:?} match the baseline but are not constant in |w_i|");
    Ok(format!("diameter {:?} for every |w_i|", got[0]))
}

fn hanging_tree() -> Check {
    let w = |s: &str| Word::parse_with(s, "xyz").unwrap();
    let k = 3;
    let (p, m) = ("x".repeat(k), "X".repeat(k));
    let n = (1 + 2 * (2 * k + 1)) as i64;
    let src = MarkedGraph::rose_with_words(
        vec![w("x"), w(&format!("{p}y{m}")), w(&format!("{p}z{m}"))],
        vec![Q::ratio(1, n), Q::ratio(2 * k as i64 + 1, n), Q::ratio(2 * k as i64 + 1, n)],
    )
    .map_err(|e| e.to_string())?;
    let phi = difference_of_markings(&src, &MarkedGraph::<Q>::standard_rose(3)).map_err(|e| e.to_string())?;
    let HangingCase::Tree { tree, .. } = hanging_tree_classify(&phi, 0, 0).map_err(|e| e.to_string())? else {
        return Err("appendix example is not case (ii)".into());
    };
    let allowed: BTreeSet<usize> = tree.tree.iter().copied().chain(tree.e_chain.iter().map(|&d| edge_of(d))).collect();
    let pts = tree.preimage_points(&phi);
    for q in &pts[1..] {
        let v = vanishing_path(&phi, &pts[0], q).map_err(|e| e.to_string())?;
        ensure!(v.edgelets().is_subset(&allowed), "vanishing path leaves H and e");
        ensure!(v.illegal_turns == 1, "vanishing path with {} illegal turns", v.illegal_turns);
    }

    let src = MarkedGraph::rose_with_words(
        vec![Word::parse("a").unwrap(), Word::parse("ab").unwrap()],
        vec![Q::ratio(1, 3), Q::ratio(2, 3)],
    )
    .map_err(|e| e.to_string())?;
    let tgt = MarkedGraph::<Q>::rose(2, vec![Q::ratio(1, 3), Q::ratio(1, 3)]).map_err(|e| e.to_string())?;
    let phi = difference_of_markings(&src, &tgt).map_err(|e| e.to_string())?;
    match hanging_tree_classify(&phi, 1, 1).map_err(|e| e.to_string())? {
        HangingCase::Bounded { count, .. } if count <= 2 => {}
        c => return Err(format!("monogon gives {c:?}")),
    }
    Ok(format!("case (ii) with {} preimages in the tree; monogon is case (i)", pts.len()))
}

#[test]
fn acceptance() {
    let baseline = Baseline::current().expect("baseline");
    let criteria: Vec<Criterion> = vec![
        ("figure 1 covers", Duration::from_secs(5), Box::new(figure1)),
        ("predicate table", Duration::from_secs(30), Box::new(predicate_table)),
        ("dilatation", Duration::from_secs(5), Box::new(dilatation_check)),
        ("F4 example", Duration::from_secs(10), Box::new(four_generator_example)),
        ("colors", Duration::from_secs(5), Box::new(colors)),
        ("folding invariants", Duration::from_secs(300), Box::new(folding_suite)),
        ("Lipschitz oracle", Duration::from_secs(120), Box::new(lipschitz_oracle)),
        ("Behrstock", Duration::from_secs(600), Box::new(|| behrstock_check(&baseline))),
        ("Hamenstadt", Duration::from_secs(300), Box::new(|| hamenstadt_check(&baseline))),
        ("hanging tree", Duration::from_secs(5), Box::new(hanging_tree)),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if result.is_ok() && took > *budget {
            result = Err(format!("took {took:.2?}, budget {budget:?}"));
        }
        match &result {
            Ok(msg) => println!("criterion {:2} {name}: PASS ({took:.2?}) {msg}", i + 1),
            Err(msg) => {
                println!("criterion {:2} {name}: FAIL ({took:.2?}) {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
