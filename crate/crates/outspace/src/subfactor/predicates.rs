use crate::free_group::Letter;
use crate::marked_graph::{edge_of, CoreCover};
use crate::optimal_maps::GateStructure;
use crate::scalar::Scalar;
use serde::Serialize;

/// Flags of the three-interval dichotomy at one sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PredicateFlags {
    /// A natural vertex with one gate, or an interior illegal turn.
    pub p1: bool,
    /// Topological edges of length at most 2, at least two gates everywhere, no interior
    /// illegal turns.
    pub p2: bool,
    /// A legal segment of length at least 2 inside a topological edge.
    pub p3: bool,
}

/// A topological edge of a cover: carrier edges (as letters read along it) between natural
/// vertices, with the indices of interior vertices where the turn is illegal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopEdge {
    pub start: usize,
    pub letters: Vec<Letter>,
    pub illegal_after: Vec<usize>,
}

impl TopEdge {
    /// Maximal legal subpaths as letter ranges.
    pub fn legal_segments(&self) -> Vec<&[Letter]> {
        let mut out = Vec::new();
        let mut from = 0;
        for &i in &self.illegal_after {
            out.push(&self.letters[from..=i]);
            from = i + 1;
        }
        out.push(&self.letters[from..]);
        out
    }
}

/// Cover together with the gate structure of its base, seen through the immersion.
pub struct GatedCover<'a, S: Scalar> {
    pub cover: &'a CoreCover<S>,
    pub gates: &'a GateStructure,
}

impl<S: Scalar> GatedCover<'_, S> {
    fn gate(&self, d: Letter) -> Option<usize> {
        let g = self.cover.base();
        self.gates.gate_of(g.start(d), d)
    }

    /// Number of gates at a carrier vertex.
    pub fn num_gates(&self, v: usize) -> usize {
        let mut gs: Vec<Option<usize>> = self.cover.carrier().out(v).keys().map(|&d| self.gate(d)).collect();
        gs.sort();
        gs.dedup();
        gs.len()
    }

    /// Whether the turn at a valence-two carrier vertex is illegal.
    pub fn illegal_interior(&self, v: usize) -> bool {
        let out: Vec<Letter> = self.cover.carrier().out(v).keys().copied().collect();
        out.len() == 2 && self.gate(out[0]).is_some() && self.gate(out[0]) == self.gate(out[1])
    }

    pub fn natural_vertices(&self) -> Vec<usize> {
        let c = self.cover.carrier();
        (0..c.num_vertices()).filter(|&v| c.valence(v) >= 3).collect()
    }

    /// Topological edges, each listed once. Empty when the cover is a circle.
    pub fn topological_edges(&self) -> Vec<TopEdge> {
        let c = self.cover.carrier();
        let mut used = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for v in self.natural_vertices() {
            for &d0 in c.out(v).keys() {
                let mut letters = vec![d0];
                let mut illegal_after = Vec::new();
                let mut w = c.step(v, d0).unwrap();
                let mut last = d0;
                while c.valence(w) == 2 {
                    if self.illegal_interior(w) {
                        illegal_after.push(letters.len() - 1);
                    }
                    let next = *c.out(w).keys().find(|&&d| d != -last).unwrap();
                    letters.push(next);
                    last = next;
                    w = c.step(w, next).unwrap();
                }
                let key = |u: usize, l: Letter| (u, l);
                if used.contains(&key(w, -last)) {
                    continue;
                }
                used.insert(key(v, d0));
                out.push(TopEdge { start: v, letters, illegal_after });
            }
        }
        out
    }

    pub fn path_length(&self, letters: &[Letter]) -> S {
        letters.iter().fold(S::zero(), |a, &l| a + self.cover.edge_length(l))
    }

    /// Flags with lengths measured in units of `unit` (the base volume for normalized
    /// comparisons).
    pub fn flags(&self, unit: &S) -> PredicateFlags {
        let c = self.cover.carrier();
        let two = unit.times(2);
        let illegal_turn = (0..c.num_vertices()).any(|v| c.valence(v) == 2 && self.illegal_interior(v));
        let one_gate = self.natural_vertices().into_iter().any(|v| self.num_gates(v) == 1);
        let tops = self.topological_edges();
        let p3 = tops.iter().any(|t| t.legal_segments().iter().any(|s| self.path_length(s) >= two));
        let short = tops.iter().all(|t| self.path_length(&t.letters) <= two);
        let two_gates = (0..c.num_vertices()).all(|v| self.num_gates(v) >= 2);
        PredicateFlags { p1: one_gate || illegal_turn, p2: short && two_gates && !illegal_turn, p3 }
    }

    /// Carrier edge letters (positive) of each legal segment and of each topological edge;
    /// used to locate threshold crossings.
    pub fn measured_paths(&self) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        for t in self.topological_edges() {
            for s in t.legal_segments() {
                out.push(s.to_vec());
            }
            out.push(t.letters.clone());
        }
        out
    }
}

/// Base edge multiset of a path, for length bookkeeping under a changing metric.
pub fn edge_counts(letters: &[Letter], num_edges: usize) -> Vec<i64> {
    let mut v = vec![0; num_edges];
    for &l in letters {
        v[edge_of(l)] += 1;
    }
    v
}
