use super::graph::LabeledGraph;
use super::subgroup::SubgroupGraph;
use super::word::{Letter, DEFAULT_ALPHABET};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;

/// Subspace of (Z/2)^dim stored as a reduced row echelon basis of bitmasks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mod2Subspace {
    dim: usize,
    rows: Vec<u64>,
}

impl Mod2Subspace {
    pub fn zero(dim: usize) -> Mod2Subspace {
        Mod2Subspace { dim, rows: Vec::new() }
    }

    pub fn span<I: IntoIterator<Item = u64>>(dim: usize, vectors: I) -> Mod2Subspace {
        assert!(dim <= 64);
        let mut rows: Vec<u64> = Vec::new();
        for mut v in vectors {
            for r in &rows {
                let p = 63 - r.leading_zeros();
                if v >> p & 1 == 1 {
                    v ^= r;
                }
            }
            if v == 0 {
                continue;
            }
            let p = 63 - v.leading_zeros();
            for r in rows.iter_mut() {
                if *r >> p & 1 == 1 {
                    *r ^= v;
                }
            }
            rows.push(v);
        }
        rows.sort_unstable_by(|a, b| b.cmp(a));
        Mod2Subspace { dim, rows }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }
    pub fn dimension(&self) -> usize {
        self.rows.len()
    }
    pub fn basis(&self) -> &[u64] {
        &self.rows
    }

    pub fn contains(&self, v: u64) -> bool {
        let mut v = v;
        for r in &self.rows {
            let p = 63 - r.leading_zeros();
            if v >> p & 1 == 1 {
                v ^= r;
            }
        }
        v == 0
    }

    pub fn is_subspace_of(&self, other: &Mod2Subspace) -> bool {
        self.rows.iter().all(|&r| other.contains(r))
    }
}

impl fmt::Display for Mod2Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<char> = DEFAULT_ALPHABET.chars().collect();
        let parts: Vec<String> = self
            .rows
            .iter()
            .map(|&r| {
                (0..self.dim)
                    .filter(|&i| r >> i & 1 == 1)
                    .map(|i| if i < names.len() { names[i].to_string() } else { format!("e{i}") })
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        write!(f, "span{{{}}}", parts.join(", "))
    }
}

/// Classes of a cycle basis of a connected labeled graph, where every edge `(u, l, v)`
/// contributes the vector `weight(u, l, v)`.
pub fn cycle_classes<F: Fn(usize, Letter, usize) -> u64>(g: &LabeledGraph, weight: F) -> Vec<u64> {
    let n = g.num_vertices();
    if n == 0 {
        return Vec::new();
    }
    let mut pot: Vec<Option<u64>> = vec![None; n];
    let start = g.base().min(n - 1);
    pot[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let pv = pot[v].unwrap();
        for (&l, &t) in g.out(v) {
            if pot[t].is_none() {
                let w = if l > 0 { weight(v, l, t) } else { weight(t, -l, v) };
                pot[t] = Some(pv ^ w);
                queue.push_back(t);
            }
        }
    }
    g.edges()
        .into_iter()
        .map(|(u, l, v)| pot[u].unwrap() ^ weight(u, l, v) ^ pot[v].unwrap())
        .filter(|&c| c != 0)
        .collect()
}

/// Image of H₁(H; Z/2) → H₁(F_n; Z/2).
pub fn homology_mod2(h: &SubgroupGraph) -> Mod2Subspace {
    let g = h.graph();
    Mod2Subspace::span(h.ambient_rank(), cycle_classes(g, |_, l, _| 1u64 << (l - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::Word;

    fn sub(gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
        SubgroupGraph::new(3, &ws).unwrap()
    }

    #[test]
    fn examples() {
        let ab = Mod2Subspace::span(3, [0b001, 0b010]);
        assert_eq!(homology_mod2(&sub(&["a", "cbC"])), ab);
        assert_eq!(homology_mod2(&sub(&["a", "b"])), ab);
        assert_eq!(homology_mod2(&sub(&["cabABabAB"])), Mod2Subspace::span(3, [0b100]));
        assert_eq!(homology_mod2(&sub(&["aa"])).dimension(), 0);
    }
}
