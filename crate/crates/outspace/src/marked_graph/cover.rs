use super::{edge_of, MarkedGraph, MarkedGraphError};
use crate::free_group::{LabeledGraph, Letter, SubgroupGraph, UnionFind, Word};
use crate::scalar::Scalar;
use serde::Serialize;

/// Core of the cover of a marked graph corresponding to a subgroup. The carrier is a labeled
/// graph over the edge alphabet of the base graph, so every carrier edge maps onto one base
/// edge and the immersion is read off the labels.
#[derive(Clone, Debug)]
pub struct CoreCover<S: Scalar> {
    subgroup: SubgroupGraph,
    base: MarkedGraph<S>,
    based: LabeledGraph,
    carrier: LabeledGraph,
    carrier_to_based: Vec<usize>,
    vertex_map: Vec<usize>,
}

/// Carrier edges `(u, label, v)` with positive label, in [`LabeledGraph::edges`] order.
pub type CarrierEdge = (usize, Letter, usize);

pub fn core_cover<S: Scalar>(a: &SubgroupGraph, g: &MarkedGraph<S>) -> Result<CoreCover<S>, MarkedGraphError> {
    if a.is_trivial() {
        return Err(MarkedGraphError::TrivialSubgroup);
    }
    if a.ambient_rank() != g.rank() {
        return Err(MarkedGraphError::WrongRank { expected: g.rank(), found: a.ambient_rank() });
    }
    let loops: Vec<Vec<Letter>> = a.basis().iter().map(|w| g.loop_of(w).letters().to_vec()).collect();
    let based = LabeledGraph::from_loops(g.num_edges(), &loops);
    let (carrier, map) = based.core(false);
    let mut carrier_to_based = vec![0; carrier.num_vertices()];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            carrier_to_based[*n] = old;
        }
    }
    let vertex_map = (0..carrier.num_vertices())
        .map(|v| {
            let (&l, _) = carrier.out(v).iter().next().expect("core vertex has an edge");
            g.start(l)
        })
        .collect();
    Ok(CoreCover { subgroup: a.clone(), base: g.clone(), based, carrier, carrier_to_based, vertex_map })
}

impl<S: Scalar> CoreCover<S> {
    pub fn subgroup(&self) -> &SubgroupGraph {
        &self.subgroup
    }
    pub fn base(&self) -> &MarkedGraph<S> {
        &self.base
    }
    /// Based cover core (hair to the lift of the base vertex kept).
    pub fn based(&self) -> &LabeledGraph {
        &self.based
    }
    pub fn carrier(&self) -> &LabeledGraph {
        &self.carrier
    }
    pub fn rank(&self) -> usize {
        self.carrier.rank()
    }
    /// Base vertex under each carrier vertex.
    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }
    pub fn edges(&self) -> Vec<CarrierEdge> {
        self.carrier.edges()
    }
    pub fn edge_length(&self, label: Letter) -> S {
        self.base.length(edge_of(label)).clone()
    }
    pub fn volume(&self) -> S {
        self.edges().iter().fold(S::zero(), |acc, &(_, l, _)| acc + self.edge_length(l))
    }

    /// Label path in the based cover from its base to carrier vertex `v`.
    pub fn hair_path(&self, v: usize) -> Vec<Letter> {
        let tree = self.based.spanning_tree();
        self.based.tree_path(&tree, self.carrier_to_based[v])
    }

    /// Element of `F_n` represented by a carrier path from `u`, conjugated to the base.
    pub fn element(&self, u: usize, path: &[Letter]) -> Word {
        let v = self.carrier.read(u, path).expect("path in carrier");
        let mut p = self.hair_path(u);
        p.extend_from_slice(path);
        p.extend(Word::new(&self.hair_path(v)).inverse().letters());
        self.base.h_word(&p)
    }

    /// Subgroup of `F_n` carried by a connected carrier subgraph given by its vertices and
    /// edges (indices into [`CoreCover::edges`]), based at its least vertex.
    pub fn subgraph_group(&self, vertices: &[usize], edge_ids: &[usize]) -> SubgroupGraph {
        let n = self.base.rank();
        let Some(&root) = vertices.iter().min() else { return SubgroupGraph::trivial(n) };
        let edges = self.edges();
        let index: std::collections::BTreeMap<usize, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let local: Vec<(usize, Letter, usize)> = edge_ids
            .iter()
            .map(|&i| {
                let (u, l, v) = edges[i];
                (index[&u], l, index[&v])
            })
            .collect();
        let (lg, _) = LabeledGraph::fold_edges(self.base.num_edges(), vertices.len(), index[&root], &local);
        let gens: Vec<Word> = lg.basis().iter().map(|w| self.element(root, w.letters())).collect();
        SubgroupGraph::new(n, &gens).expect("ranks agree")
    }

    /// The carrier as a marked metric graph of `A`, with the inverse marking written in the
    /// basis of `A` returned by [`SubgroupGraph::basis`]. Lengths are the induced ones.
    pub fn as_marked_graph(&self) -> MarkedGraph<S> {
        let edges = self.edges();
        let words: Vec<Word> = edges
            .iter()
            .map(|&(u, l, _)| {
                let w = self.element(u, &[l]);
                self.subgroup.coordinates(&w).expect("carrier element lies in the subgroup")
            })
            .collect();
        MarkedGraph::new(
            self.rank(),
            self.carrier.num_vertices(),
            edges.iter().map(|&(u, _, v)| (u, v)).collect(),
            edges.iter().map(|&(_, l, _)| self.edge_length(l)).collect(),
            words,
        )
        .expect("carrier is a marked graph of the subgroup")
    }
}

/// The image Θ, the doubly covered locus Ω and its preimage Ω̃. Base edges are indexed as in
/// the marked graph; carrier edges as in [`CoreCover::edges`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaData {
    pub edge_counts: Vec<usize>,
    pub vertex_counts: Vec<usize>,
    pub theta_edges: Vec<bool>,
    pub theta_vertices: Vec<bool>,
    pub omega_edges: Vec<bool>,
    pub omega_vertices: Vec<bool>,
    pub omega_tilde_edges: Vec<bool>,
    pub omega_tilde_vertices: Vec<bool>,
}

pub fn omega_data<S: Scalar>(c: &CoreCover<S>) -> OmegaData {
    let g = &c.base;
    let counts = c.carrier.label_counts();
    let edge_counts: Vec<usize> = (0..g.num_edges()).map(|e| counts[e + 1]).collect();
    let mut vertex_counts = vec![0; g.num_vertices()];
    for &v in &c.vertex_map {
        vertex_counts[v] += 1;
    }
    let theta_edges = edge_counts.iter().map(|&k| k >= 1).collect();
    let theta_vertices = vertex_counts.iter().map(|&k| k >= 1).collect();
    let omega_edges: Vec<bool> = edge_counts.iter().map(|&k| k >= 2).collect();
    let omega_vertices: Vec<bool> = vertex_counts.iter().map(|&k| k >= 2).collect();
    let omega_tilde_edges = c.edges().iter().map(|&(_, l, _)| omega_edges[edge_of(l)]).collect();
    let omega_tilde_vertices = c.vertex_map.iter().map(|&v| omega_vertices[v]).collect();
    OmegaData {
        edge_counts,
        vertex_counts,
        theta_edges,
        theta_vertices,
        omega_edges,
        omega_vertices,
        omega_tilde_edges,
        omega_tilde_vertices,
    }
}

impl OmegaData {
    pub fn omega_is_empty(&self) -> bool {
        !self.omega_vertices.iter().any(|&b| b) && !self.omega_edges.iter().any(|&b| b)
    }
    pub fn omega_is_everything(&self) -> bool {
        self.omega_edges.iter().all(|&b| b)
    }
    pub fn omega_tilde_edge_ids(&self) -> Vec<usize> {
        (0..self.omega_tilde_edges.len()).filter(|&i| self.omega_tilde_edges[i]).collect()
    }

    /// Connected components of Ω̃ as (vertices, carrier edge ids).
    pub fn omega_tilde_components(&self, edges: &[CarrierEdge]) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.omega_tilde_vertices.len();
        let mut uf = UnionFind::new(n);
        for (i, &(u, _, v)) in edges.iter().enumerate() {
            if self.omega_tilde_edges[i] {
                uf.union(u, v);
            }
        }
        let mut comps: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
        for v in 0..n {
            if self.omega_tilde_vertices[v] {
                comps.entry(uf.find(v)).or_default().0.push(v);
            }
        }
        for (i, &(u, _, _)) in edges.iter().enumerate() {
            if self.omega_tilde_edges[i] {
                comps.get_mut(&uf.find(u)).unwrap().1.push(i);
            }
        }
        comps.into_values().collect()
    }

    /// Whether the Ω̃ subgraph has no cycles.
    pub fn omega_tilde_is_forest(&self, edges: &[CarrierEdge]) -> bool {
        let mut uf = UnionFind::new(self.omega_tilde_vertices.len());
        edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.omega_tilde_edges[i])
            .all(|(_, &(u, _, v))| uf.union(u, v).is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachmentLabel {
    Embedded,
    Pinched,
    NearlyEmbedded,
    Adjoined,
    None,
}

/// All attachment properties that hold; they are nested in the listed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Attachment {
    pub embedded: bool,
    pub pinched: bool,
    pub nearly_embedded: bool,
    pub adjoined: bool,
}

impl Attachment {
    pub fn finest(&self) -> AttachmentLabel {
        if self.embedded {
            AttachmentLabel::Embedded
        } else if self.pinched {
            AttachmentLabel::Pinched
        } else if self.nearly_embedded {
            AttachmentLabel::NearlyEmbedded
        } else if self.adjoined {
            AttachmentLabel::Adjoined
        } else {
            AttachmentLabel::None
        }
    }
    pub fn labels(&self) -> Vec<AttachmentLabel> {
        let mut v = Vec::new();
        for (b, l) in [
            (self.embedded, AttachmentLabel::Embedded),
            (self.pinched, AttachmentLabel::Pinched),
            (self.nearly_embedded, AttachmentLabel::NearlyEmbedded),
            (self.adjoined, AttachmentLabel::Adjoined),
        ] {
            if b {
                v.push(l);
            }
        }
        v
    }
}

pub fn classify_attachment<S: Scalar>(c: &CoreCover<S>) -> Attachment {
    let om = omega_data(c);
    let edges = c.edges();
    let embedded = !om.omega_tilde_vertices.iter().any(|&b| b);
    let pinched = !om.omega_tilde_edges.iter().any(|&b| b);
    let nearly_embedded = om.omega_tilde_is_forest(&edges);
    let adjoined = om.omega_tilde_edges.iter().any(|&b| !b);
    Attachment { embedded, pinched, nearly_embedded, adjoined }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn sub(n: usize, gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
        SubgroupGraph::new(n, &ws).unwrap()
    }

    #[test]
    fn figure_five_cover() {
        let rose = MarkedGraph::<Q>::standard_rose(4);
        let a = sub(4, &["abaab", "cb", "abd"]);
        let c = core_cover(&a, &rose).unwrap();
        assert_eq!(c.rank(), 3);
        assert_eq!(c.carrier().num_vertices(), 5);
        assert_eq!(c.edges().len(), 7);
        let om = omega_data(&c);
        assert_eq!(om.edge_counts, vec![3, 2, 1, 1]);
        let edges = c.edges();
        let comps = om.omega_tilde_components(&edges);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].0.len(), 5);
        assert_eq!(comps[0].1.len(), 5);
        let att = classify_attachment(&c);
        assert_eq!(att.finest(), AttachmentLabel::Adjoined);
        let b = core_cover(&sub(4, &["a", "c", "d"]), &rose).unwrap();
        assert_eq!(classify_attachment(&b).finest(), AttachmentLabel::Embedded);
    }

    #[test]
    fn pinched_and_nearly_embedded() {
        let rose = MarkedGraph::<Q>::standard_rose(3);
        let a = core_cover(&sub(3, &["a", "cbC"]), &rose).unwrap();
        assert_eq!(classify_attachment(&a).finest(), AttachmentLabel::Pinched);
        let a = core_cover(&sub(3, &["cabABabAB"]), &rose).unwrap();
        assert_eq!(classify_attachment(&a).finest(), AttachmentLabel::NearlyEmbedded);
    }

    #[test]
    fn cover_as_marked_graph() {
        let rose = MarkedGraph::<Q>::standard_rose(3);
        let a = sub(3, &["a", "cbC"]);
        let c = core_cover(&a, &rose).unwrap();
        let m = c.as_marked_graph();
        assert_eq!(m.rank(), 2);
        assert!(m.validate_marking());
        assert_eq!(m.volume(), Q::int(1));
    }
}
