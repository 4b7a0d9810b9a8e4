mod common;

use common::suite::run_suite;

#[test]
fn random_paths_have_no_violations() {
    let outcomes = run_suite(200);
    let bad: Vec<_> = outcomes.iter().filter(|o| o.violations() > 0).collect();
    for o in &bad {
        eprintln!("{o:?}");
    }
    assert!(bad.is_empty(), "{} of {} paths violate an invariant", bad.len(), outcomes.len());
    let events: usize = outcomes.iter().map(|o| o.events).sum();
    let with_middle = outcomes.iter().filter(|o| o.interval_sizes.1 > 0).count();
    let with_three = outcomes.iter().filter(|o| o.interval_sizes.0 > 0 && o.interval_sizes.2 > 0).count();
    eprintln!("{events} events; {with_middle} paths with a middle interval; {with_three} with nonempty first and last");
    for rank in 2..=4 {
        assert!(outcomes.iter().filter(|o| o.rank == rank).count() >= 60);
    }
}
