//! Labeled graphs over a signed alphabet with Stallings folding.
//!
//! A graph stores, for every vertex, the map from outgoing signed labels to target vertices.
//! An edge `u --l--> v` with `l > 0` appears as `out[u][l] = v` and `out[v][-l] = u`.

use super::word::{Letter, Word};
use std::collections::{BTreeMap, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledGraph {
    alphabet: usize,
    base: usize,
    out: Vec<BTreeMap<Letter, usize>>,
}

/// Union-find with the smallest id as representative.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }
    pub fn len(&self) -> usize {
        self.parent.len()
    }
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
    pub fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }
    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let n = self.parent[y];
            self.parent[y] = r;
            y = n;
        }
        r
    }
    /// Union; returns `(kept, absorbed)` or `None` if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return None;
        }
        let (k, g) = if a < b { (a, b) } else { (b, a) };
        self.parent[g] = k;
        Some((k, g))
    }
}

/// Label order used for canonical traversals: 1, -1, 2, -2, ...
pub fn label_order(alphabet: usize) -> impl Iterator<Item = Letter> {
    (1..=alphabet as Letter).flat_map(|l| [l, -l])
}

impl LabeledGraph {
    /// Graph with a single vertex and no edges.
    pub fn point(alphabet: usize) -> LabeledGraph {
        LabeledGraph { alphabet, base: 0, out: vec![BTreeMap::new()] }
    }

    pub fn empty(alphabet: usize) -> LabeledGraph {
        LabeledGraph { alphabet, base: 0, out: Vec::new() }
    }

    /// Fold the graph with the given raw edges. Returns the folded graph and the map from
    /// raw vertices to folded vertices. Labels may be negative (reversed edges).
    pub fn fold_edges(
        alphabet: usize,
        nv: usize,
        base: usize,
        edges: &[(usize, Letter, usize)],
    ) -> (LabeledGraph, Vec<usize>) {
        let mut uf = UnionFind::new(nv);
        let mut out: Vec<BTreeMap<Letter, usize>> = vec![BTreeMap::new(); nv];
        let mut pending: VecDeque<(usize, usize)> = VecDeque::new();
        let add = |out: &mut Vec<BTreeMap<Letter, usize>>,
                   uf: &mut UnionFind,
                   pending: &mut VecDeque<(usize, usize)>,
                   u: usize,
                   l: Letter,
                   v: usize| {
            let u = uf.find(u);
            match out[u].get(&l) {
                Some(&t) => pending.push_back((t, v)),
                None => {
                    out[u].insert(l, v);
                }
            }
        };
        for &(u, l, v) in edges {
            debug_assert!(l != 0 && l.unsigned_abs() as usize <= alphabet);
            add(&mut out, &mut uf, &mut pending, u, l, v);
            add(&mut out, &mut uf, &mut pending, v, -l, u);
            Self::drain(&mut out, &mut uf, &mut pending);
        }
        let roots: Vec<usize> = (0..nv).filter(|&v| uf.find(v) == v).collect();
        let mut index = vec![usize::MAX; nv];
        for (i, &r) in roots.iter().enumerate() {
            index[r] = i;
        }
        let vmap: Vec<usize> = (0..nv).map(|v| index[uf.find(v)]).collect();
        let new_out = roots.iter().map(|&r| out[r].iter().map(|(&l, &t)| (l, vmap[t])).collect()).collect();
        let g = LabeledGraph { alphabet, base: vmap[base], out: new_out };
        (g, vmap)
    }

    fn drain(out: &mut [BTreeMap<Letter, usize>], uf: &mut UnionFind, pending: &mut VecDeque<(usize, usize)>) {
        while let Some((a, b)) = pending.pop_front() {
            let Some((keep, gone)) = uf.union(a, b) else { continue };
            let moved = std::mem::take(&mut out[gone]);
            for (l, t) in moved {
                match out[keep].get(&l) {
                    Some(&t2) => {
                        if uf.find(t2) != uf.find(t) {
                            pending.push_back((t2, t));
                        }
                    }
                    None => {
                        out[keep].insert(l, t);
                    }
                }
            }
        }
    }

    /// Folded graph of a wedge of loops read from a basepoint, with hairs kept at the base.
    pub fn from_loops(alphabet: usize, loops: &[Vec<Letter>]) -> LabeledGraph {
        let mut nv = 1;
        let mut edges = Vec::new();
        for w in loops {
            if w.is_empty() {
                continue;
            }
            let mut cur = 0;
            for (i, &l) in w.iter().enumerate() {
                let next = if i + 1 == w.len() {
                    0
                } else {
                    nv += 1;
                    nv - 1
                };
                edges.push((cur, l, next));
                cur = next;
            }
        }
        let (g, _) = LabeledGraph::fold_edges(alphabet, nv, 0, &edges);
        g.core(true).0
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }
    pub fn base(&self) -> usize {
        self.base
    }
    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }
    pub fn num_edges(&self) -> usize {
        self.out.iter().map(|m| m.len()).sum::<usize>() / 2
    }
    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }
    /// Rank of the fundamental group of a connected graph.
    pub fn rank(&self) -> usize {
        if self.out.is_empty() {
            return 0;
        }
        self.num_edges() + 1 - self.num_vertices()
    }
    pub fn out(&self, v: usize) -> &BTreeMap<Letter, usize> {
        &self.out[v]
    }
    pub fn valence(&self, v: usize) -> usize {
        self.out[v].len()
    }
    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.out[v].get(&l).copied()
    }
    pub fn with_base(&self, base: usize) -> LabeledGraph {
        LabeledGraph { alphabet: self.alphabet, base, out: self.out.clone() }
    }

    /// Edges `(u, l, v)` with `l > 0`, sorted by `(u, l)`.
    pub fn edges(&self) -> Vec<(usize, Letter, usize)> {
        let mut e = Vec::with_capacity(self.num_edges());
        for (u, m) in self.out.iter().enumerate() {
            for (&l, &v) in m.range(1..) {
                e.push((u, l, v));
            }
        }
        e
    }

    /// Number of edges carrying each positive label.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.alphabet + 1];
        for (_, l, _) in self.edges() {
            c[l as usize] += 1;
        }
        c
    }

    /// Endpoint of reading `letters` from `start`, if the path exists.
    pub fn read(&self, start: usize, letters: &[Letter]) -> Option<usize> {
        let mut v = start;
        for &l in letters {
            v = self.step(v, l)?;
        }
        Some(v)
    }

    /// Remove valence ≤ 1 vertices repeatedly; the base is kept if `keep_base`.
    /// Returns the pruned graph and the old-to-new vertex map.
    pub fn core(&self, keep_base: bool) -> (LabeledGraph, Vec<Option<usize>>) {
        let n = self.out.len();
        let mut out = self.out.clone();
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| out[v].len() <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] || (keep_base && v == self.base) || out[v].len() > 1 {
                continue;
            }
            alive[v] = false;
            if let Some((&l, &t)) = out[v].iter().next() {
                out[t].remove(&-l);
                if out[t].len() <= 1 {
                    queue.push_back(t);
                }
            }
            out[v].clear();
        }
        let mut map = vec![None; n];
        let mut k = 0;
        for v in 0..n {
            if alive[v] {
                map[v] = Some(k);
                k += 1;
            }
        }
        let new_out: Vec<BTreeMap<Letter, usize>> = (0..n)
            .filter(|&v| alive[v])
            .map(|v| out[v].iter().map(|(&l, &t)| (l, map[t].unwrap())).collect())
            .collect();
        let base = map.get(self.base).copied().flatten().unwrap_or(0);
        (LabeledGraph { alphabet: self.alphabet, base, out: new_out }, map)
    }

    /// Renumber vertices by breadth-first search from the base in label order, dropping
    /// unreachable vertices. Returns the graph and the old-to-new map.
    pub fn canonical(&self) -> (LabeledGraph, Vec<Option<usize>>) {
        let n = self.out.len();
        if n == 0 {
            return (self.clone(), Vec::new());
        }
        let mut map: Vec<Option<usize>> = vec![None; n];
        let mut order = vec![self.base];
        map[self.base] = Some(0);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for l in label_order(self.alphabet) {
                if let Some(&t) = self.out[v].get(&l) {
                    if map[t].is_none() {
                        map[t] = Some(order.len());
                        order.push(t);
                    }
                }
            }
            i += 1;
        }
        let new_out =
            order.iter().map(|&v| self.out[v].iter().map(|(&l, &t)| (l, map[t].unwrap())).collect()).collect();
        (LabeledGraph { alphabet: self.alphabet, base: 0, out: new_out }, map)
    }

    /// Canonical form of the unbased core: the least canonical form over all basepoints.
    pub fn conjugacy_canonical(&self) -> LabeledGraph {
        let (core, _) = self.core(false);
        (0..core.num_vertices())
            .map(|v| core.with_base(v).canonical().0)
            .min()
            .unwrap_or_else(|| LabeledGraph::empty(self.alphabet))
    }

    /// Breadth-first spanning tree from the base: parent edge `(parent, label)` per vertex,
    /// where `out[parent][label] = v`.
    pub fn spanning_tree(&self) -> Vec<Option<(usize, Letter)>> {
        let n = self.out.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        if n == 0 {
            return parent;
        }
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        while let Some(v) = queue.pop_front() {
            for l in label_order(self.alphabet) {
                if let Some(&t) = self.out[v].get(&l) {
                    if !seen[t] {
                        seen[t] = true;
                        parent[t] = Some((v, l));
                        queue.push_back(t);
                    }
                }
            }
        }
        parent
    }

    /// Label path from the base to `v` along the spanning tree.
    pub fn tree_path(&self, tree: &[Option<(usize, Letter)>], v: usize) -> Vec<Letter> {
        let mut path = Vec::new();
        let mut x = v;
        while let Some((p, l)) = tree[x] {
            path.push(l);
            x = p;
        }
        path.reverse();
        path
    }

    /// Non-tree edges in `edges()` order; each gives one free generator.
    pub fn non_tree_edges(&self, tree: &[Option<(usize, Letter)>]) -> Vec<(usize, Letter, usize)> {
        self.edges().into_iter().filter(|&(u, l, v)| tree[v] != Some((u, l)) && tree[u] != Some((v, -l))).collect()
    }

    /// Free basis of the based fundamental group read off a spanning tree.
    pub fn basis(&self) -> Vec<Word> {
        let tree = self.spanning_tree();
        self.non_tree_edges(&tree)
            .into_iter()
            .map(|(u, l, v)| {
                let mut w = self.tree_path(&tree, u);
                w.push(l);
                w.extend(Word::new(&self.tree_path(&tree, v)).inverse().letters());
                Word::new(&w)
            })
            .collect()
    }

    /// Coordinates of a based loop in the basis returned by [`LabeledGraph::basis`].
    pub fn coordinates(&self, letters: &[Letter]) -> Option<Word> {
        let tree = self.spanning_tree();
        let nt = self.non_tree_edges(&tree);
        let index: BTreeMap<(usize, Letter), usize> =
            nt.iter().enumerate().map(|(i, &(u, l, _))| ((u, l), i)).collect();
        let mut v = self.base;
        let mut out = Vec::new();
        for &l in letters {
            let t = self.step(v, l)?;
            if let Some(&i) = index.get(&(v, l)) {
                out.push(i as Letter + 1);
            } else if let Some(&i) = index.get(&(t, -l)) {
                out.push(-(i as Letter + 1));
            }
            v = t;
        }
        (v == self.base).then(|| Word::new(&out))
    }

    /// Connected components as lists of vertices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.out.len();
        let mut uf = UnionFind::new(n);
        for (u, _, v) in self.edges() {
            uf.union(u, v);
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = uf.find(v);
            comps.entry(r).or_default().push(v);
        }
        comps.into_values().collect()
    }

    /// Induced subgraph on `vertices` (given in increasing order), based at `base`.
    pub fn subgraph(&self, vertices: &[usize], base: usize) -> LabeledGraph {
        let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let out = vertices
            .iter()
            .map(|&v| self.out[v].iter().filter_map(|(&l, t)| index.get(t).map(|&j| (l, j))).collect())
            .collect();
        LabeledGraph { alphabet: self.alphabet, base: index[&base], out }
    }

    /// Whether every vertex has at most one outgoing edge per signed label. Always true for
    /// graphs produced by folding; exposed for invariant checks.
    pub fn is_folded(&self) -> bool {
        self.out.iter().enumerate().all(|(u, m)| m.iter().all(|(&l, &v)| self.out[v].get(&-l) == Some(&u)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_collapses_parallel_edges() {
        let (g, vmap) = LabeledGraph::fold_edges(2, 3, 0, &[(0, 1, 1), (0, 1, 2), (1, 2, 2)]);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(vmap[1], vmap[2]);
        assert_eq!(g.num_edges(), 2);
        assert!(g.is_folded());
    }

    #[test]
    fn core_prunes_hairs() {
        // base --a--> v, loop b at v: based core keeps the hair, unbased core drops it.
        let (g, _) = LabeledGraph::fold_edges(2, 2, 0, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(g.core(true).0.num_vertices(), 2);
        assert_eq!(g.core(false).0.num_vertices(), 1);
    }
}
