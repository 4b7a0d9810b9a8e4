use super::graph::{LabeledGraph, UnionFind};
use super::word::{Letter, Word};
use super::FreeGroupError;
use std::collections::BTreeMap;
use std::fmt;

/// Stallings graph of a finitely generated subgroup of F_n: folded, based, no valence-one
/// vertex other than the base. Stored in canonical vertex order, so `==` is subgroup equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupGraph {
    graph: LabeledGraph,
}

impl SubgroupGraph {
    /// Stallings graph of the subgroup generated by `gens` in F_rank. Trivial words are ignored.
    pub fn new(rank: usize, gens: &[Word]) -> Result<SubgroupGraph, FreeGroupError> {
        for g in gens {
            Word::checked(rank, g.letters())?;
        }
        let loops: Vec<Vec<Letter>> = gens.iter().map(|g| g.letters().to_vec()).collect();
        Ok(SubgroupGraph::from_graph(LabeledGraph::from_loops(rank, &loops)))
    }

    /// Wrap a folded based graph, pruning hairs away from the base and canonicalizing.
    pub fn from_graph(g: LabeledGraph) -> SubgroupGraph {
        let (core, _) = g.core(true);
        SubgroupGraph { graph: core.canonical().0 }
    }

    pub fn full(rank: usize) -> SubgroupGraph {
        SubgroupGraph::new(rank, &(0..rank).map(Word::generator).collect::<Vec<_>>()).unwrap()
    }

    pub fn trivial(rank: usize) -> SubgroupGraph {
        SubgroupGraph { graph: LabeledGraph::point(rank) }
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }
    pub fn ambient_rank(&self) -> usize {
        self.graph.alphabet()
    }
    pub fn rank(&self) -> usize {
        self.graph.rank()
    }
    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    /// Membership by reading `w` as a loop at the base.
    pub fn contains(&self, w: &Word) -> bool {
        self.graph.read(self.graph.base(), w.letters()) == Some(self.graph.base())
    }

    pub fn contains_all(&self, ws: &[Word]) -> bool {
        ws.iter().all(|w| self.contains(w))
    }

    /// Whether `other ≤ self` as based subgroups.
    pub fn contains_subgroup(&self, other: &SubgroupGraph) -> bool {
        self.contains_all(&other.basis())
    }

    /// Free basis read from the breadth-first spanning tree.
    pub fn basis(&self) -> Vec<Word> {
        self.graph.basis()
    }

    /// Express an element of the subgroup in the basis of [`SubgroupGraph::basis`].
    pub fn coordinates(&self, w: &Word) -> Option<Word> {
        self.graph.coordinates(w.letters())
    }

    /// Canonical unbased core; equal iff the subgroups are conjugate.
    pub fn conjugacy_core(&self) -> LabeledGraph {
        self.graph.conjugacy_canonical()
    }

    pub fn is_conjugate_to(&self, other: &SubgroupGraph) -> bool {
        self.conjugacy_core() == other.conjugacy_core()
    }

    /// Number of edges of the unbased core.
    pub fn size(&self) -> usize {
        self.graph.core(false).0.num_edges()
    }

    /// Word `g` with `self = g K g⁻¹` where `K` is based on the unbased core.
    pub fn hair(&self) -> Word {
        let (core, map) = self.graph.core(false);
        if core.is_empty() {
            return Word::identity();
        }
        let tree = self.graph.spanning_tree();
        let target =
            (0..map.len()).filter(|&v| map[v].is_some()).min_by_key(|&v| self.graph.tree_path(&tree, v).len()).unwrap();
        Word::new(&self.graph.tree_path(&tree, target))
    }

    /// Conjugate subgroup `g H g⁻¹`.
    pub fn conjugate(&self, g: &Word) -> SubgroupGraph {
        let gens: Vec<Word> = self.basis().iter().map(|w| w.conjugate_by(g)).collect();
        SubgroupGraph::new(self.ambient_rank(), &gens).unwrap()
    }

    /// Subgroup generated by `self` and `other`.
    pub fn join(&self, other: &SubgroupGraph) -> SubgroupGraph {
        let mut gens = self.basis();
        gens.extend(other.basis());
        SubgroupGraph::new(self.ambient_rank(), &gens).unwrap()
    }

    pub fn display_with(&self, alphabet: &str) -> String {
        let b: Vec<String> = self.basis().iter().map(|w| w.display_with(alphabet)).collect();
        format!("<{}>", b.join(","))
    }
}

impl fmt::Display for SubgroupGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(super::word::DEFAULT_ALPHABET))
    }
}

/// Stallings graph of ⟨gens⟩.
pub fn stallings_graph(gens: &[Word], rank: usize) -> Result<SubgroupGraph, FreeGroupError> {
    SubgroupGraph::new(rank, gens)
}

/// One component of the pullback of two Stallings graphs over the rose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberComponent {
    /// Whether the component contains the pair of basepoints.
    pub based: bool,
    /// Vertex pairs of the component.
    pub vertices: Vec<(usize, usize)>,
    /// Core of the component (based core for the based component, unbased otherwise).
    pub core: LabeledGraph,
    pub rank: usize,
}

/// Pullback of `h` and `k` over the rose, split into connected components. The based
/// component represents `H ∩ K`; the others represent `H ∩ gKg⁻¹` up to conjugacy.
pub fn fiber_product(h: &SubgroupGraph, k: &SubgroupGraph) -> Result<Vec<FiberComponent>, FreeGroupError> {
    let n = h.ambient_rank();
    if k.ambient_rank() != n {
        return Err(FreeGroupError::RankMismatch { expected: n, found: k.ambient_rank() });
    }
    let (gh, gk) = (h.graph(), k.graph());
    let (nh, nk) = (gh.num_vertices(), gk.num_vertices());
    let id = |a: usize, b: usize| a * nk + b;
    let mut edges = Vec::new();
    for (u, l, v) in gh.edges() {
        for (u2, l2, v2) in gk.edges() {
            if l == l2 {
                edges.push((id(u, u2), l, id(v, v2)));
            }
        }
    }
    let mut uf = UnionFind::new(nh * nk);
    for &(a, _, b) in &edges {
        uf.union(a, b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..nh * nk {
        let r = uf.find(v);
        groups.entry(r).or_default().push(v);
    }
    let base_pair = id(gh.base(), gk.base());
    let mut comps = Vec::new();
    for (_, verts) in groups {
        let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let local: Vec<(usize, Letter, usize)> = edges
            .iter()
            .filter(|(a, _, _)| index.contains_key(a))
            .map(|&(a, l, b)| (index[&a], l, index[&b]))
            .collect();
        let based = index.contains_key(&base_pair);
        let base = if based { index[&base_pair] } else { 0 };
        let (g, _) = LabeledGraph::fold_edges(n, verts.len(), base, &local);
        let core = if based { g.core(true).0.canonical().0 } else { g.core(false).0 };
        let rank = core.rank();
        comps.push(FiberComponent { based, vertices: verts.iter().map(|&v| (v / nk, v % nk)).collect(), core, rank });
    }
    comps.sort_by_key(|c| !c.based);
    Ok(comps)
}

/// `H ∩ K` as a based subgroup.
pub fn intersection(h: &SubgroupGraph, k: &SubgroupGraph) -> Result<SubgroupGraph, FreeGroupError> {
    let comps = fiber_product(h, k)?;
    Ok(SubgroupGraph::from_graph(comps[0].core.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn rose_from_z_xz() {
        let h = SubgroupGraph::new(3, &[w("c"), w("ac")]).unwrap();
        assert_eq!(h, SubgroupGraph::new(3, &[w("a"), w("c")]).unwrap());
        assert!(h.contains(&w("a")));
        assert_eq!(h.graph().num_vertices(), 1);
    }

    #[test]
    fn membership() {
        let h = SubgroupGraph::new(2, &[w("b")]).unwrap();
        assert!(!h.contains(&w("a")));
        let h = SubgroupGraph::new(2, &[w("aab"), w("ab")]).unwrap();
        assert!(h.contains(&w("a")));
    }

    #[test]
    fn intersection_of_powers() {
        let h = SubgroupGraph::new(1, &[w("a")]).unwrap();
        let k = SubgroupGraph::new(1, &[w("aa")]).unwrap();
        let i = intersection(&h, &k).unwrap();
        assert_eq!(i, k);
        let comps = fiber_product(&h, &k).unwrap();
        assert_eq!(comps.iter().filter(|c| c.rank == 1).count(), 1);
    }

    #[test]
    fn hair_and_coordinates() {
        let h = SubgroupGraph::new(3, &[w("caC"), w("cbC")]).unwrap();
        let g = h.hair();
        assert_eq!(g, w("c"));
        for b in h.basis() {
            let c = h.coordinates(&b).unwrap();
            assert_eq!(c.len(), 1);
        }
        assert!(h.coordinates(&w("a")).is_none());
    }
}
