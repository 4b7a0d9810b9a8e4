use super::MarkedGraph;
use crate::free_group::{LabeledGraph, Letter, SubgroupGraph, UnionFind, Word};
use crate::scalar::Scalar;

/// Free splitting obtained by collapsing every edge outside `kept`. Quotient vertices are the
/// collapsed components, numbered by their least original vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    rank: usize,
    kept: Vec<usize>,
    edges: Vec<(usize, usize)>,
    vertex_groups: Vec<SubgroupGraph>,
}

/// Conjugacy-level identity of a one-edge free splitting: whether the edge separates, and the
/// sorted conjugacy classes of the vertex groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplittingId {
    pub separating: bool,
    pub vertex_classes: Vec<LabeledGraph>,
}

pub fn collapse<S: Scalar>(g: &MarkedGraph<S>, keep: &[usize]) -> Splitting {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let nv = g.num_vertices();
    let mut uf = UnionFind::new(nv);
    for e in 0..g.num_edges() {
        if kept.binary_search(&e).is_err() {
            let (u, v) = g.edge(e);
            uf.union(u, v);
        }
    }
    let roots: Vec<usize> = (0..nv).filter(|&v| uf.find(v) == v).collect();
    let comp = |uf: &mut UnionFind, v: usize| roots.binary_search(&uf.find(v)).unwrap();
    let edges = kept
        .iter()
        .map(|&e| {
            let (u, v) = g.edge(e);
            (comp(&mut uf, u), comp(&mut uf, v))
        })
        .collect();
    let lg = g.labeled();
    let tree = lg.spanning_tree();
    let vertex_groups = roots
        .iter()
        .map(|&r| {
            let members: Vec<usize> = (0..nv).filter(|&v| uf.find(v) == r).collect();
            let index = |v: usize| members.binary_search(&v).unwrap();
            let local: Vec<(usize, Letter, usize)> = (0..g.num_edges())
                .filter(|e| kept.binary_search(e).is_err())
                .filter(|&e| uf.find(g.edge(e).0) == r)
                .map(|e| {
                    let (u, v) = g.edge(e);
                    (index(u), e as Letter + 1, index(v))
                })
                .collect();
            let (cg, _) = LabeledGraph::fold_edges(g.num_edges(), members.len(), 0, &local);
            let to_root = lg.tree_path(&tree, r);
            let back = Word::new(&to_root).inverse();
            let gens: Vec<Word> = cg
                .basis()
                .iter()
                .map(|w| {
                    let mut p = to_root.clone();
                    p.extend_from_slice(w.letters());
                    p.extend_from_slice(back.letters());
                    g.h_word(&p)
                })
                .collect();
            SubgroupGraph::new(g.rank(), &gens).expect("ranks agree")
        })
        .collect();
    let s = Splitting { rank: g.rank(), kept, edges, vertex_groups };
    debug_assert!(s.rank_accounting());
    s
}

/// The one-edge collapses of `g`, one per edge, in edge order.
pub fn one_edge_splittings<S: Scalar>(g: &MarkedGraph<S>) -> Vec<Splitting> {
    (0..g.num_edges()).map(|e| collapse(g, &[e])).collect()
}

impl Splitting {
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn num_vertices(&self) -> usize {
        self.vertex_groups.len()
    }
    pub fn vertex_groups(&self) -> &[SubgroupGraph] {
        &self.vertex_groups
    }

    /// Vertex group ranks plus the quotient's first Betti number equal the ambient rank.
    pub fn rank_accounting(&self) -> bool {
        let b1 = self.edges.len() + 1 - self.num_vertices();
        self.vertex_groups.iter().map(|h| h.rank()).sum::<usize>() + b1 == self.rank
    }

    pub fn id(&self) -> Option<SplittingId> {
        if self.edges.len() != 1 {
            return None;
        }
        let (u, v) = self.edges[0];
        let mut vertex_classes: Vec<LabeledGraph> = self.vertex_groups.iter().map(|h| h.conjugacy_core()).collect();
        vertex_classes.sort();
        Some(SplittingId { separating: u != v, vertex_classes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn rose_collapse() {
        let rose = MarkedGraph::<Q>::standard_rose(3);
        let s = collapse(&rose, &[0]);
        assert_eq!(s.num_vertices(), 1);
        let bc = SubgroupGraph::new(3, &[Word::parse("b").unwrap(), Word::parse("c").unwrap()]).unwrap();
        assert_eq!(s.vertex_groups()[0], bc);
        assert!(!s.id().unwrap().separating);
        let all = collapse(&rose, &[0, 1, 2]);
        assert!(all.vertex_groups().iter().all(|h| h.is_trivial()));
        assert!(all.rank_accounting());
    }

    #[test]
    fn theta_collapse() {
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (0, 1), (0, 1)],
            vec![Q::ratio(1, 3); 3],
            vec![Word::identity(), Word::parse("a").unwrap(), Word::parse("b").unwrap()],
        )
        .unwrap();
        let s = collapse(&g, &[0]);
        assert_eq!(s.num_vertices(), 1);
        assert_eq!(s.vertex_groups()[0].rank(), 1);
        assert!(s.rank_accounting());
    }
}
