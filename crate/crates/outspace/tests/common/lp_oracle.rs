//! Brute-force optimal Lipschitz constant from a rose.
//!
//! A map from a rose sends the vertex to a point `p` of the universal cover `T` of the target
//! and each petal to the geodesic from `p` to `γ_i p`, so the optimal constant is
//! `min_p max_i d(p, γ_i p) / ℓ(petal_i)`. On each edge of `T` every displacement is a
//! minimum of four affine functions of the position, so the minimum over the edge is attained
//! at an endpoint or at a crossing of two such functions. Edges are enumerated over the
//! sublevel set around the base vertex, which is convex and bounded; a vertex is explored when
//! its value is within twice the longest target edge (normalized) of the best value so far.

use outspace::free_group::{free_reduce, Letter};
use outspace::marked_graph::edge_of;
use outspace::{MarkedGraph, Q};
use std::collections::{BTreeSet, VecDeque};

struct Tree<'a> {
    h: &'a MarkedGraph<Q>,
    gammas: Vec<Vec<Letter>>,
    petals: Vec<Q>,
}

fn inverse(p: &[Letter]) -> Vec<Letter> {
    p.iter().rev().map(|&l| -l).collect()
}

fn concat(a: &[Letter], b: &[Letter]) -> Vec<Letter> {
    free_reduce(&[a, b].concat())
}

impl Tree<'_> {
    fn dist(&self, p: &[Letter], q: &[Letter]) -> Q {
        self.h.path_length(&concat(&inverse(p), q))
    }

    fn act(&self, i: usize, p: &[Letter]) -> Vec<Letter> {
        concat(&self.gammas[i], p)
    }

    fn end(&self, p: &[Letter]) -> usize {
        p.last().map_or(0, |&l| self.h.end(l))
    }

    /// Largest normalized displacement at a vertex.
    fn vertex_value(&self, p: &[Letter]) -> Q {
        (0..self.gammas.len())
            .map(|i| self.dist(p, &self.act(i, p)) / self.petals[i].clone())
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap()
    }

    /// Affine pieces `(c, s)`, value `c + s t`, of the normalized displacement of petal `i`
    /// on the edge leaving the vertex `p` along `l`.
    fn pieces(&self, i: usize, p: &[Letter], l: Letter) -> Vec<(Q, Q)> {
        let len = self.h.length(edge_of(l)).clone();
        let q = concat(p, &[l]);
        let ends = [(p.to_vec(), Q::int(0), Q::int(1)), (q, len, Q::int(-1))];
        let mut out = Vec::new();
        for (a, ca, sa) in &ends {
            for (b, cb, sb) in &ends {
                let c = ca.clone() + self.dist(a, &self.act(i, b)) + cb.clone();
                let s = sa.clone() + sb.clone();
                out.push((c / self.petals[i].clone(), s / self.petals[i].clone()));
            }
        }
        out
    }

    fn edge_minimum(&self, p: &[Letter], l: Letter) -> Q {
        let len = self.h.length(edge_of(l)).clone();
        let pieces: Vec<Vec<(Q, Q)>> = (0..self.gammas.len()).map(|i| self.pieces(i, p, l)).collect();
        let value = |t: &Q| {
            pieces
                .iter()
                .map(|ps| {
                    ps.iter()
                        .map(|(c, s)| c.clone() + s.clone() * t.clone())
                        .min_by(|a, b| a.partial_cmp(b).unwrap())
                        .unwrap()
                })
                .max_by(|a, b| a.partial_cmp(b).unwrap())
                .unwrap()
        };
        let lines: Vec<&(Q, Q)> = pieces.iter().flatten().collect();
        let mut ts = vec![Q::int(0), len.clone()];
        for (j, a) in lines.iter().enumerate() {
            for b in &lines[j + 1..] {
                if a.1 != b.1 {
                    let t = (b.0.clone() - a.0.clone()) / (a.1.clone() - b.1.clone());
                    if t > Q::int(0) && t < len {
                        ts.push(t);
                    }
                }
            }
        }
        ts.iter().map(value).min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap()
    }
}

/// Optimal Lipschitz constant of a map from the rose `g` to `h` in the homotopy class of the
/// difference of markings.
pub fn rose_lipschitz_oracle(g: &MarkedGraph<Q>, h: &MarkedGraph<Q>) -> Q {
    assert_eq!(g.num_vertices(), 1, "source must be a rose");
    let gammas = (0..g.num_edges()).map(|e| h.loop_of(&g.inverse_marking()[e]).letters().to_vec()).collect();
    let tree = Tree { h, gammas, petals: g.lengths().to_vec() };
    let max_h = h.lengths().iter().cloned().max_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
    let min_g = g.lengths().iter().cloned().min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
    let slack = Q::int(2) * max_h / min_g;
    let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::from([Vec::new()]);
    let mut queue = VecDeque::from([Vec::new()]);
    let mut best = tree.vertex_value(&[]);
    while let Some(p) = queue.pop_front() {
        assert!(seen.len() < 200_000, "sublevel set too large");
        for l in h.directions(tree.end(&p)) {
            let m = tree.edge_minimum(&p, l);
            if m < best {
                best = m;
            }
            let q = concat(&p, &[l]);
            if !seen.contains(&q) && tree.vertex_value(&q) <= best.clone() + slack.clone() {
                seen.insert(q.clone());
                queue.push_back(q);
            }
        }
    }
    best
}
