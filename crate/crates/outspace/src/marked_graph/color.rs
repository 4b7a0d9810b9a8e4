use super::{MarkedGraph, MarkedGraphError};
use crate::free_group::{homology_mod2, Mod2Subspace, SubgroupGraph, UnionFind};
use crate::scalar::Scalar;
use std::collections::VecDeque;

/// Connected double cover of a marked graph determined by a nonzero class `x` in
/// `H¹(F_n; Z/2)`, given by its values on the generators as a bitmask. Lift `(v, s)` of a
/// vertex has index `2v + s`; lift `(e, s)` of an edge has index `2e + s` and starts at sheet `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCover {
    pub x: u64,
    pub parity: Vec<bool>,
    pub edges: Vec<(usize, usize)>,
    pub num_vertices: usize,
}

pub fn double_cover<S: Scalar>(g: &MarkedGraph<S>, x: u64) -> Result<DoubleCover, MarkedGraphError> {
    if x == 0 || (g.rank() < 64 && x >> g.rank() != 0) {
        return Err(MarkedGraphError::ZeroClass);
    }
    let parity: Vec<bool> = g.inverse_marking().iter().map(|w| (w.mod2() & x).count_ones() % 2 == 1).collect();
    let mut edges = Vec::with_capacity(2 * g.num_edges());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        for s in 0..2 {
            edges.push((2 * u + s, 2 * v + (s ^ parity[e] as usize)));
        }
    }
    Ok(DoubleCover { x, parity, edges, num_vertices: 2 * g.num_vertices() })
}

impl DoubleCover {
    /// Deck involution on vertex or edge indices.
    pub fn deck(i: usize) -> usize {
        i ^ 1
    }

    /// Image of a class in the edge-chain space under the deck involution.
    pub fn mirror(class: &Mod2Subspace) -> Mod2Subspace {
        let swap = |v: u64| ((v & 0x5555_5555_5555_5555) << 1) | ((v >> 1) & 0x5555_5555_5555_5555);
        Mod2Subspace::span(class.ambient_dim(), class.basis().iter().map(|&v| swap(v)))
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        (0..self.num_vertices).all(|v| uf.find(v) == 0)
    }

    /// First Betti number of the cover.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }
}

/// Components of a graph with chain-valued edges, each with the span of its cycle chains.
fn cycle_spans(nv: usize, edges: &[(usize, usize, u64)], dim: usize) -> Vec<Mod2Subspace> {
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); nv];
    for &(u, v, w) in edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let mut pot: Vec<Option<u64>> = vec![None; nv];
    let mut comp = vec![usize::MAX; nv];
    let mut ncomp = 0;
    for s in 0..nv {
        if pot[s].is_some() {
            continue;
        }
        pot[s] = Some(0);
        comp[s] = ncomp;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &(t, w) in &adj[v] {
                if pot[t].is_none() {
                    pot[t] = Some(pot[v].unwrap() ^ w);
                    comp[t] = ncomp;
                    q.push_back(t);
                }
            }
        }
        ncomp += 1;
    }
    let mut vecs: Vec<Vec<u64>> = vec![Vec::new(); ncomp];
    for &(u, v, w) in edges {
        let c = pot[u].unwrap() ^ w ^ pot[v].unwrap();
        if c != 0 {
            vecs[comp[u]].push(c);
        }
    }
    vecs.into_iter().map(|vs| Mod2Subspace::span(dim, vs)).collect()
}

/// Color of a subgroup: its mod-2 homology class, and for every nonzero `x` the classes of
/// the components of its preimage in the double cover of the rose, as a sorted list. Classes in
/// the cover live in the chain space with bit `2g + s` for the lift of petal `g` starting on sheet `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Color {
    pub rank: usize,
    pub base: Mod2Subspace,
    pub covers: Vec<Vec<Mod2Subspace>>,
}

impl Color {
    /// Classes for the cover determined by `x`.
    pub fn classes(&self, x: u64) -> &[Mod2Subspace] {
        &self.covers[x as usize - 1]
    }
}

/// Preimage classes of `a` in the double cover of the rose determined by `x`.
pub fn lift_classes(a: &SubgroupGraph, x: u64) -> Vec<Mod2Subspace> {
    let n = a.ambient_rank();
    let core = a.conjugacy_core();
    let nv = core.num_vertices();
    let mut edges = Vec::new();
    for (u, l, v) in core.edges() {
        let g = (l - 1) as usize;
        let flip = (x >> g & 1) as usize;
        for s in 0..2 {
            edges.push((2 * u + s, 2 * v + (s ^ flip), 1u64 << (2 * g + s)));
        }
    }
    let mut classes = cycle_spans(2 * nv, &edges, 2 * n);
    classes.sort();
    classes
}

pub fn color(a: &SubgroupGraph) -> Color {
    let n = a.ambient_rank();
    assert!(n <= 16, "color enumerates 2^n - 1 covers");
    let covers = (1..1u64 << n).map(|x| lift_classes(a, x)).collect();
    Color { rank: a.rank(), base: homology_mod2(a), covers }
}

pub fn same_color(a: &SubgroupGraph, b: &SubgroupGraph) -> bool {
    a.ambient_rank() == b.ambient_rank() && color(a) == color(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::Word;
    use crate::scalar::Q;

    fn sub(gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
        SubgroupGraph::new(3, &ws).unwrap()
    }

    #[test]
    fn unwrap_c() {
        let rose = MarkedGraph::<Q>::standard_rose(3);
        let dc = double_cover(&rose, 0b100).unwrap();
        assert_eq!(dc.num_vertices, 2);
        assert!(dc.is_connected());
        assert_eq!(dc.rank(), 5);
        assert!(double_cover(&rose, 0).is_err());

        let a = lift_classes(&sub(&["a", "cbC"]), 0b100);
        assert_eq!(a.len(), 2);
        assert_ne!(a[0], a[1]);
        let a0b1 = Mod2Subspace::span(6, [1 << 0, 1 << 3]);
        assert!(a.contains(&a0b1));

        let b = lift_classes(&sub(&["a", "b"]), 0b100);
        assert_eq!(b.len(), 2);
        assert_eq!(DoubleCover::mirror(&b[0]), b[1]);
        assert!(b.contains(&Mod2Subspace::span(6, [1 << 0, 1 << 2])));
    }

    #[test]
    fn color_examples() {
        assert!(!same_color(&sub(&["a", "cbC"]), &sub(&["a", "b"])));
        assert!(same_color(&sub(&["cabABabAB"]), &sub(&["c"])));
        let a = sub(&["a", "cbC"]);
        assert!(same_color(&a, &a.conjugate(&Word::parse("bc").unwrap())));
        assert_eq!(color(&a).covers.len(), 7);
    }
}
