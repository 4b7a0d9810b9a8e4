use super::FoldingError;
use crate::free_group::{Letter, UnionFind, Word};
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Segment of a target edge, mapped isometrically and monotonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seg<S: Scalar> {
    pub u: usize,
    pub v: usize,
    pub target_edge: usize,
    /// Target direction at `u`; the direction at `v` is its inverse.
    pub start_germ: Letter,
    pub start_pos: S,
    pub end_pos: S,
    /// Target edge path after snapping interior points to initial vertices.
    pub path: Word,
}

/// A graph together with its map to the target, as target-edge segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegGraph<S: Scalar> {
    pub num_vertices: usize,
    pub segs: Vec<Seg<S>>,
}

/// Paths that can be sampled as a sequence of segment graphs over a common target.
pub trait SegView<S: Scalar> {
    fn seg_graphs(&self) -> Vec<SegGraph<S>>;
    fn target_edges(&self) -> usize;
}

/// Quotient of a segment graph by the preimage of a target forest: a graph of groups whose
/// vertices are the collapsed components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedStage {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub target_edges: Vec<usize>,
    /// Rank of the fundamental group of each collapsed component.
    pub vertex_rank: Vec<usize>,
    /// Number of surviving directions at each vertex.
    pub valence: Vec<usize>,
    /// Number of gates at vertices with trivial group (`None` when the group is
    /// nontrivial, where distinct translates of a direction are already distinct gates).
    pub gates: Vec<Option<usize>>,
}

impl CollapsedStage {
    /// Whether every vertex has at least two gates in the tree sense.
    pub fn has_two_gates(&self) -> bool {
        (0..self.num_vertices).all(|v| match self.gates[v] {
            Some(k) => k >= 2,
            None => self.valence[v] >= 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedPath {
    pub forest: Vec<usize>,
    pub stages: Vec<CollapsedStage>,
}

impl CollapsedPath {
    /// Certify the two-gate condition at every vertex of every stage.
    pub fn check_gates(&self) -> Result<(), FoldingError> {
        for (i, s) in self.stages.iter().enumerate() {
            if !s.has_two_gates() {
                return Err(FoldingError::Invariant(format!("stage {i} has a vertex with one gate")));
            }
        }
        Ok(())
    }

    /// Indices `i` where stage `i + 1` has the same combinatorics as stage `i`.
    pub fn constant_steps(&self) -> Vec<usize> {
        (0..self.stages.len().saturating_sub(1))
            .filter(|&i| {
                let (a, b) = (&self.stages[i], &self.stages[i + 1]);
                let mut x = a.target_edges.clone();
                let mut y = b.target_edges.clone();
                x.sort_unstable();
                y.sort_unstable();
                a.num_vertices == b.num_vertices
                    && x == y
                    && a.vertex_rank.iter().sum::<usize>() == b.vertex_rank.iter().sum::<usize>()
            })
            .collect()
    }
}

/// Collapse the preimage of the target edges `forest` in one segment graph.
pub fn collapse_stage<S: Scalar>(g: &SegGraph<S>, forest: &[usize]) -> CollapsedStage {
    let fset: BTreeSet<usize> = forest.iter().copied().collect();
    let in_f = |i: usize| fset.contains(&g.segs[i].target_edge);
    let mut uf = UnionFind::new(g.num_vertices);
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); g.num_vertices];
    for (i, s) in g.segs.iter().enumerate() {
        if in_f(i) {
            uf.union(s.u, s.v);
            adj[s.u].push((i, true));
            adj[s.v].push((i, false));
        }
    }
    let mut comp_id = BTreeMap::new();
    let roots: Vec<usize> = (0..g.num_vertices).map(|v| uf.find(v)).collect();
    for &r in &roots {
        let k = comp_id.len();
        comp_id.entry(r).or_insert(k);
    }
    let nc = comp_id.len();
    let cid: Vec<usize> = roots.iter().map(|r| comp_id[r]).collect();
    let mut fedges = vec![0i64; nc];
    let mut verts = vec![0i64; nc];
    for v in 0..g.num_vertices {
        verts[cid[v]] += 1;
    }
    for (i, s) in g.segs.iter().enumerate() {
        if in_f(i) {
            fedges[cid[s.u]] += 1;
        }
    }
    let vertex_rank: Vec<usize> = (0..nc).map(|c| (fedges[c] - verts[c] + 1) as usize).collect();
    // Image paths from each component root inside the forest.
    let mut image: Vec<Option<Word>> = vec![None; g.num_vertices];
    for v in 0..g.num_vertices {
        if image[v].is_some() || roots[v] != v {
            continue;
        }
        image[v] = Some(Word::identity());
        let mut q = VecDeque::from([v]);
        while let Some(x) = q.pop_front() {
            for &(i, fwd) in &adj[x] {
                let s = &g.segs[i];
                let (y, step) = if fwd { (s.v, s.path.clone()) } else { (s.u, s.path.inverse()) };
                if image[y].is_none() {
                    image[y] = Some(image[x].as_ref().unwrap().mul(&step));
                    q.push_back(y);
                }
            }
        }
    }
    let mut edges = Vec::new();
    let mut target_edges = Vec::new();
    let mut valence = vec![0usize; nc];
    let mut keys: Vec<BTreeSet<(Letter, S, Word)>> = vec![BTreeSet::new(); nc];
    for (i, s) in g.segs.iter().enumerate() {
        if in_f(i) {
            continue;
        }
        edges.push((cid[s.u], cid[s.v]));
        target_edges.push(s.target_edge);
        for (x, germ, pos) in [(s.u, s.start_germ, &s.start_pos), (s.v, -s.start_germ, &s.end_pos)] {
            let c = cid[x];
            valence[c] += 1;
            keys[c].insert((germ, pos.clone(), image[x].clone().unwrap()));
        }
    }
    let gates = (0..nc).map(|c| if vertex_rank[c] > 0 { None } else { Some(keys[c].len()) }).collect();
    CollapsedStage { num_vertices: nc, edges, target_edges, vertex_rank, valence, gates }
}

/// Collapse the preimage of a proper set of target edges along every sampled stage of a
/// path.
pub fn collapse_path<S: Scalar, P: SegView<S>>(path: &P, forest: &[usize]) -> Result<CollapsedPath, FoldingError> {
    let mut f: Vec<usize> = forest.to_vec();
    f.sort_unstable();
    f.dedup();
    if f.iter().any(|&e| e >= path.target_edges()) {
        return Err(FoldingError::Invariant("forest edge out of range".into()));
    }
    if f.len() == path.target_edges() {
        return Err(FoldingError::CollapseAll);
    }
    let stages = path.seg_graphs().iter().map(|g| collapse_stage(g, &f)).collect();
    Ok(CollapsedPath { forest: f, stages })
}
