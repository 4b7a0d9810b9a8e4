//! Seeded samplers for words, automorphisms, marked graphs and optimal maps.

use crate::free_group::{Automorphism, LabeledGraph, Letter, Word};
use crate::marked_graph::MarkedGraph;
use crate::optimal_maps::{difference_of_markings, make_optimal, GraphMorphism};
use crate::scalar::Q;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_letter<R: Rng>(rank: usize, rng: &mut R) -> Letter {
    let g = rng.gen_range(1..=rank as Letter);
    if rng.gen_bool(0.5) {
        g
    } else {
        -g
    }
}

/// Uniformly random reduced word of length `len`.
pub fn random_word<R: Rng>(rank: usize, len: usize, rng: &mut R) -> Word {
    let mut v: Vec<Letter> = Vec::with_capacity(len);
    while v.len() < len {
        let l = random_letter(rank, rng);
        if v.last() != Some(&-l) {
            v.push(l);
        }
    }
    Word::new(&v)
}

/// Product of `moves` random elementary Nielsen moves and a random signed permutation.
pub fn random_automorphism<R: Rng>(rank: usize, moves: usize, rng: &mut R) -> Automorphism {
    let mut phi = Automorphism::identity(rank);
    if rank >= 2 {
        for _ in 0..moves {
            let i = rng.gen_range(0..rank);
            let mut j = rng.gen_range(0..rank - 1);
            if j >= i {
                j += 1;
            }
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            let m = Automorphism::nielsen(rank, i, sign * (j as Letter + 1), rng.gen_bool(0.5));
            phi = m.compose(&phi);
        }
    }
    let mut perm: Vec<Letter> = (1..=rank as Letter).collect();
    perm.shuffle(rng);
    for p in perm.iter_mut() {
        if rng.gen_bool(0.5) {
            *p = -*p;
        }
    }
    Automorphism::permutation(rank, &perm).unwrap().compose(&phi)
}

/// Random positive lengths with denominators up to `den`, normalized to volume 1.
pub fn random_lengths<R: Rng>(k: usize, den: i64, rng: &mut R) -> Vec<Q> {
    let raw: Vec<Q> = (0..k).map(|_| Q::int(rng.gen_range(1..=den))).collect();
    let total = raw.iter().fold(Q::int(0), |a, b| a + b.clone());
    raw.into_iter().map(|x| x / total.clone()).collect()
}

/// Random rose with a random marking.
pub fn random_rose<R: Rng>(rank: usize, moves: usize, rng: &mut R) -> MarkedGraph<Q> {
    let alpha = random_automorphism(rank, moves, rng);
    let lengths = random_lengths(rank, 8, rng);
    MarkedGraph::rose_with_words(alpha.images().to_vec(), lengths).unwrap()
}

/// Random connected core graph of the given rank with all vertices of valence at least 3,
/// random lengths and a random marking.
pub fn random_marked_graph<R: Rng>(rank: usize, moves: usize, rng: &mut R) -> MarkedGraph<Q> {
    loop {
        let nv = rng.gen_range(1..=(2 * rank - 2).max(1));
        let ne = nv + rank - 1;
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(ne);
        for v in 1..nv {
            edges.push((rng.gen_range(0..v), v));
        }
        while edges.len() < ne {
            edges.push((rng.gen_range(0..nv), rng.gen_range(0..nv)));
        }
        edges.shuffle(rng);
        for e in edges.iter_mut() {
            if rng.gen_bool(0.5) {
                *e = (e.1, e.0);
            }
        }
        let mut val = vec![0; nv];
        for &(u, v) in &edges {
            val[u] += 1;
            val[v] += 1;
        }
        if val.iter().any(|&k| k < 3) {
            continue;
        }
        let labeled: Vec<(usize, Letter, usize)> =
            edges.iter().enumerate().map(|(e, &(u, v))| (u, e as Letter + 1, v)).collect();
        let lg = LabeledGraph::fold_edges(ne, nv, 0, &labeled).0;
        if lg.components().len() != 1 {
            continue;
        }
        let tree = lg.spanning_tree();
        let alpha = random_automorphism(rank, moves, rng);
        let mut words = vec![Word::identity(); ne];
        for (i, (_, l, _)) in lg.non_tree_edges(&tree).into_iter().enumerate() {
            words[(l - 1) as usize] = alpha.image(i).clone();
        }
        let lengths = random_lengths(ne, 8, rng);
        return MarkedGraph::new(rank, nv, edges, lengths, words).expect("valid random graph");
    }
}

/// Random optimal map between random marked graphs; retries on degenerate samples.
pub fn random_optimal_map<R: Rng>(rank: usize, moves: usize, rng: &mut R) -> GraphMorphism<Q> {
    loop {
        let g = if rng.gen_bool(0.5) { random_rose(rank, 0, rng) } else { random_marked_graph(rank, 0, rng) };
        let h = random_marked_graph(rank, moves, rng);
        let phi = difference_of_markings(&g, &h).expect("same rank");
        if let Ok(m) = make_optimal(&phi) {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_are_valid() {
        let mut r = rng(7);
        for rank in 2..=4 {
            for _ in 0..10 {
                let g = random_marked_graph(rank, 6, &mut r);
                assert!(g.validate_marking());
                assert!(g.is_natural());
                let m = random_optimal_map(rank, 6, &mut r);
                assert!(m.is_optimal());
                assert!(m.verify().is_ok());
            }
        }
    }
}
