//! Seeded random greedy folding paths with their invariant checks.

use outspace::folding::{collapse_path, greedy_folding_path};
use outspace::free_group::Word;
use outspace::par::{self, Mode};
use outspace::random::{random_automorphism, random_optimal_map, rng};
use outspace::subfactor::{classify_intervals, induced_path};
use outspace::whitehead::image;
use outspace::{SubgroupGraph, Q};
use rand::Rng;

#[derive(Debug, Default, Clone)]
pub struct PathOutcome {
    pub seed: u64,
    pub rank: usize,
    pub events: usize,
    pub samples: usize,
    /// Samples in the first, middle and last interval.
    pub interval_sizes: (usize, usize, usize),
    pub segment_violations: Vec<String>,
    pub monotonicity_violations: Vec<String>,
    pub volume_violations: usize,
    pub arclength_error: f64,
    pub invariant_error: Option<String>,
    pub gate_error: Option<String>,
}

impl PathOutcome {
    pub fn violations(&self) -> usize {
        self.segment_violations.len()
            + self.monotonicity_violations.len()
            + self.volume_violations
            + usize::from(self.arclength_error > 1e-9)
            + usize::from(self.invariant_error.is_some())
            + usize::from(self.gate_error.is_some())
    }
}

pub fn run_path(seed: u64) -> PathOutcome {
    let mut r = rng(seed);
    let rank = 2 + (seed % 3) as usize;
    let guide = random_optimal_map(rank, 6, &mut r);
    let mut out = PathOutcome { seed, rank, ..PathOutcome::default() };
    let path = match greedy_folding_path(&guide) {
        Ok(p) => p,
        Err(e) => {
            out.invariant_error = Some(format!("path: {e}"));
            return out;
        }
    };
    out.events = path.events().len();
    match path.check_invariants(6) {
        Ok(rep) => out.arclength_error = rep.max_arclength_error,
        Err(e) => out.invariant_error = Some(e.to_string()),
    }
    // Normalized to initial volume one: vol(τ) ≤ 1 − τ with τ = t / vol(0).
    let v0 = path.initial_volume();
    for t in path.sample_times() {
        let tau = t.clone() / v0.clone();
        if t < path.end_time() && path.volume_at(&t) / v0.clone() > Q::int(1) - tau {
            out.volume_violations += 1;
        }
    }
    let k = r.gen_range(1..rank);
    let gens: Vec<Word> = (0..k).map(Word::generator).collect();
    let a = image(&random_automorphism(rank, 4, &mut r), &SubgroupGraph::new(rank, &gens).unwrap());
    match induced_path(&a, &path) {
        Ok(ip) => {
            out.samples = ip.samples.len();
            let cls = classify_intervals(&ip);
            out.segment_violations = cls.violations.clone();
            let m = cls.middle();
            out.interval_sizes = (m.start, m.len(), ip.samples.len() - m.end);
            out.monotonicity_violations = ip.monotonicity_violations(&cls);
        }
        Err(e) => out.invariant_error = Some(format!("induced path: {e}")),
    }
    let target = guide.target().labeled();
    let tree = target.spanning_tree();
    let forest: Vec<usize> = tree.iter().flatten().map(|&(_, l)| (l.unsigned_abs() - 1) as usize).collect();
    match collapse_path(&path, &forest).and_then(|c| c.check_gates()) {
        Ok(()) => {}
        Err(e) => out.gate_error = Some(e.to_string()),
    }
    out
}

/// Run seeds `0..n`.
pub fn run_suite(n: u64) -> Vec<PathOutcome> {
    let seeds: Vec<u64> = (0..n).collect();
    par::map(Mode::default_mode(), &seeds, |&s| run_path(s))
}
