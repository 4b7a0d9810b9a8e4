use super::collapse::{Seg, SegGraph, SegView};
use super::FoldingError;
use crate::free_group::{Letter, UnionFind, Word};
use crate::marked_graph::{edge_of, MarkedGraph};
use crate::optimal_maps::GraphMorphism;
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet};

/// Graph subdivided so that every edge (edgelet) maps onto one target edge. Edge `i` is
/// `(u, l, v)` with `l > 0` the target edge letter crossed from `u` to `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeletGraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, Letter, usize)>,
}

/// How one stage of a liberal path maps to the next.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Identification of the edgelets of two directions at one vertex with the same germ.
    Fold(Letter, Letter),
    /// A fold inserted by an expansion to identify copies of a blown-up tree.
    Inserted(Letter, Letter),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LiberalStep {
    pub kind: StepKind,
    pub vertex_map: Vec<usize>,
    /// Image of each edgelet as a signed edgelet letter of the next stage.
    pub edge_map: Vec<Letter>,
}

/// Discrete folding path: stages joined by single folds, ending at the target.
#[derive(Clone, Debug)]
pub struct LiberalPath<S: Scalar> {
    target: MarkedGraph<S>,
    stages: Vec<EdgeletGraph>,
    steps: Vec<LiberalStep>,
    /// Edgelet letters of stage 0 along each source edge.
    chains: Vec<Vec<Letter>>,
    /// Expected target edge path of each chain.
    images: Vec<Word>,
}

/// Point of a target edge at the given distance from its initial vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetPoint<S: Scalar> {
    pub edge: usize,
    pub pos: S,
}

fn signed(i: usize, fwd: bool) -> Letter {
    if fwd {
        i as Letter + 1
    } else {
        -(i as Letter + 1)
    }
}

impl EdgeletGraph {
    /// Build with labels normalized to be positive.
    pub fn new(num_vertices: usize, edges: Vec<(usize, Letter, usize)>) -> EdgeletGraph {
        let edges = edges.into_iter().map(|(u, l, v)| if l > 0 { (u, l, v) } else { (v, -l, u) }).collect();
        EdgeletGraph { num_vertices, edges }
    }

    /// Subdivision of the source of a morphism, with the edgelet chain of each source edge.
    pub fn subdivide<S: Scalar>(phi: &GraphMorphism<S>) -> Result<(EdgeletGraph, Vec<Vec<Letter>>), FoldingError> {
        let src = phi.source();
        let mut nv = src.num_vertices();
        let mut edges = Vec::new();
        let mut chains = Vec::new();
        for e in 0..src.num_edges() {
            let (u, v) = src.edge(e);
            let w = phi.image(e).letters();
            if w.is_empty() {
                return Err(FoldingError::Invariant(format!("edge {e} has an empty image")));
            }
            let mut cur = u;
            let mut chain = Vec::new();
            for (i, &l) in w.iter().enumerate() {
                let next = if i + 1 == w.len() {
                    v
                } else {
                    nv += 1;
                    nv - 1
                };
                chain.push(signed(edges.len(), l > 0));
                edges.push(if l > 0 { (cur, l, next) } else { (next, -l, cur) });
                cur = next;
            }
            chains.push(chain);
        }
        Ok((EdgeletGraph { num_vertices: nv, edges }, chains))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Target direction of a signed edgelet direction.
    pub fn germ(&self, d: Letter) -> Letter {
        let l = self.edges[edge_of(d)].1;
        if d > 0 {
            l
        } else {
            -l
        }
    }

    pub fn start(&self, d: Letter) -> usize {
        let (u, _, v) = self.edges[edge_of(d)];
        if d > 0 {
            u
        } else {
            v
        }
    }

    pub fn end(&self, d: Letter) -> usize {
        self.start(-d)
    }

    /// Outgoing directions at each vertex.
    pub fn directions(&self) -> Vec<Vec<Letter>> {
        let mut d = vec![Vec::new(); self.num_vertices];
        for (i, &(u, _, v)) in self.edges.iter().enumerate() {
            d[u].push(signed(i, true));
            d[v].push(signed(i, false));
        }
        d
    }

    /// Pairs of distinct directions at one vertex with the same germ, in canonical order.
    pub fn foldable_pairs(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::new();
        for dirs in self.directions() {
            let mut by: BTreeMap<Letter, Vec<Letter>> = BTreeMap::new();
            for d in dirs {
                by.entry(self.germ(d)).or_default().push(d);
            }
            for g in by.values() {
                for (i, &a) in g.iter().enumerate() {
                    for &b in &g[i + 1..] {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    /// Every vertex has at least two distinct germs.
    pub fn has_two_gates(&self) -> bool {
        self.directions().iter().all(|dirs| dirs.iter().map(|&d| self.germ(d)).collect::<BTreeSet<_>>().len() >= 2)
    }

    /// Target vertex hit by each vertex.
    pub fn vertex_images<S: Scalar>(&self, target: &MarkedGraph<S>) -> Vec<usize> {
        let mut img = vec![0; self.num_vertices];
        for &(u, l, v) in &self.edges {
            img[u] = target.start(l);
            img[v] = target.end(l);
        }
        img
    }

    /// Identify the edgelets of two directions leaving one vertex with the same germ.
    pub fn fold(
        &self,
        d1: Letter,
        d2: Letter,
        kind_inserted: bool,
    ) -> Result<(EdgeletGraph, LiberalStep), FoldingError> {
        let (e1, e2) = (edge_of(d1), edge_of(d2));
        if e1 == e2 || self.start(d1) != self.start(d2) || self.germ(d1) != self.germ(d2) {
            return Err(FoldingError::Invariant("not a foldable pair".into()));
        }
        let (f1, f2) = (self.end(d1), self.end(d2));
        if f1 == f2 {
            return Err(FoldingError::LoopCollapsed);
        }
        let mut uf = UnionFind::new(self.num_vertices);
        uf.union(f1, f2);
        let roots: Vec<usize> = (0..self.num_vertices).map(|v| uf.find(v)).collect();
        let mut idx = vec![usize::MAX; self.num_vertices];
        let mut k = 0;
        for v in 0..self.num_vertices {
            if roots[v] == v {
                idx[v] = k;
                k += 1;
            }
        }
        let vertex_map: Vec<usize> = roots.iter().map(|&r| idx[r]).collect();
        let mut edges = Vec::new();
        let mut new_id = vec![0; self.num_edges()];
        for (i, &(u, l, v)) in self.edges.iter().enumerate() {
            if i == e2 {
                continue;
            }
            new_id[i] = edges.len();
            edges.push((vertex_map[u], l, vertex_map[v]));
        }
        let same = (d1 > 0) == (d2 > 0);
        let edge_map = (0..self.num_edges())
            .map(|i| if i == e2 { signed(new_id[e1], same) } else { signed(new_id[i], true) })
            .collect();
        let kind = if kind_inserted { StepKind::Inserted(d1, d2) } else { StepKind::Fold(d1, d2) };
        Ok((EdgeletGraph { num_vertices: k, edges }, LiberalStep { kind, vertex_map, edge_map }))
    }

    /// Marked graph with target edge lengths and the pulled-back marking.
    pub fn marked_graph<S: Scalar>(&self, target: &MarkedGraph<S>) -> Result<MarkedGraph<S>, FoldingError> {
        Ok(MarkedGraph::new(
            target.rank(),
            self.num_vertices,
            self.edges.iter().map(|&(u, _, v)| (u, v)).collect(),
            self.edges.iter().map(|&(_, l, _)| target.length(edge_of(l)).clone()).collect(),
            self.edges.iter().map(|&(_, l, _)| target.h_word(&[l])).collect(),
        )?)
    }

    pub fn seg_graph<S: Scalar>(&self, target: &MarkedGraph<S>) -> SegGraph<S> {
        SegGraph {
            num_vertices: self.num_vertices,
            segs: self
                .edges
                .iter()
                .map(|&(u, l, v)| Seg {
                    u,
                    v,
                    target_edge: edge_of(l),
                    start_germ: l,
                    start_pos: S::zero(),
                    end_pos: target.length(edge_of(l)).clone(),
                    path: Word::new(&[l]),
                })
                .collect(),
        }
    }

    /// Whether the map to the target is an isomorphism.
    pub fn is_target<S: Scalar>(&self, target: &MarkedGraph<S>) -> bool {
        if self.num_edges() != target.num_edges() || self.num_vertices != target.num_vertices() {
            return false;
        }
        let img = self.vertex_images(target);
        let distinct: BTreeSet<usize> = img.iter().copied().collect();
        let labels: BTreeSet<Letter> = self.edges.iter().map(|e| e.1).collect();
        distinct.len() == self.num_vertices && labels.len() == self.num_edges()
    }
}

/// Fold repeatedly with the pair chosen by `pick` until it returns `None`.
pub(crate) fn fold_while(
    start: EdgeletGraph,
    mut pick: impl FnMut(&EdgeletGraph) -> Option<(Letter, Letter)>,
) -> Result<(Vec<EdgeletGraph>, Vec<LiberalStep>), FoldingError> {
    let mut stages = vec![start];
    let mut steps = Vec::new();
    while let Some((d1, d2)) = pick(stages.last().unwrap()) {
        let (g, s) = stages.last().unwrap().fold(d1, d2, false)?;
        stages.push(g);
        steps.push(s);
    }
    Ok((stages, steps))
}

/// Stallings folding path of a morphism: one edgelet pair at a time, always the first
/// foldable pair in canonical order.
pub fn stallings_path<S: Scalar>(phi: &GraphMorphism<S>) -> Result<LiberalPath<S>, FoldingError> {
    let (g0, chains) = EdgeletGraph::subdivide(phi)?;
    let (stages, steps) = fold_while(g0, |g| g.foldable_pairs().first().copied())?;
    let path = LiberalPath { target: phi.target().clone(), stages, steps, chains, images: phi.images().to_vec() };
    Ok(path)
}

/// Stallings folding path from an edgelet graph labelled by target edges to its folded
/// image. Each edgelet is its own chain.
pub fn fold_to_target<S: Scalar>(start: EdgeletGraph, target: &MarkedGraph<S>) -> Result<LiberalPath<S>, FoldingError> {
    let chains = (0..start.num_edges()).map(|i| vec![signed(i, true)]).collect();
    let images = start.edges.iter().map(|&(_, l, _)| Word::new(&[l])).collect();
    let (stages, steps) = fold_while(start, |g| g.foldable_pairs().first().copied())?;
    if !stages.last().unwrap().is_target(target) {
        return Err(FoldingError::TargetMismatch);
    }
    Ok(LiberalPath { target: target.clone(), stages, steps, chains, images })
}

fn apply_map(map: &[Letter], d: Letter) -> Letter {
    let m = map[edge_of(d)];
    if d > 0 {
        m
    } else {
        -m
    }
}

impl<S: Scalar> LiberalPath<S> {
    pub(crate) fn from_parts(
        target: MarkedGraph<S>,
        stages: Vec<EdgeletGraph>,
        steps: Vec<LiberalStep>,
        chains: Vec<Vec<Letter>>,
        images: Vec<Word>,
    ) -> LiberalPath<S> {
        LiberalPath { target, stages, steps, chains, images }
    }

    pub fn target(&self) -> &MarkedGraph<S> {
        &self.target
    }
    pub fn stages(&self) -> &[EdgeletGraph] {
        &self.stages
    }
    pub fn steps(&self) -> &[LiberalStep] {
        &self.steps
    }
    pub fn chains(&self) -> &[Vec<Letter>] {
        &self.chains
    }
    pub fn num_folds(&self) -> usize {
        self.steps.len()
    }

    /// Composite edge map from stage `i` to stage `j ≥ i`.
    pub fn composite(&self, i: usize, j: usize) -> Vec<Letter> {
        let mut m: Vec<Letter> = (0..self.stages[i].num_edges()).map(|e| signed(e, true)).collect();
        for s in &self.steps[i..j] {
            m = m.iter().map(|&d| apply_map(&s.edge_map, d)).collect();
        }
        m
    }

    /// Composite vertex map from stage `i` to stage `j ≥ i`.
    pub fn composite_vertices(&self, i: usize, j: usize) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.stages[i].num_vertices).collect();
        for s in &self.steps[i..j] {
            m = m.iter().map(|&v| s.vertex_map[v]).collect();
        }
        m
    }

    /// Marked graph of stage `i`.
    pub fn stage_graph(&self, i: usize) -> Result<MarkedGraph<S>, FoldingError> {
        self.stages[i].marked_graph(&self.target)
    }

    /// Check that every step is a label-preserving graph map, that every stage has at least
    /// two gates at each vertex, that the composite reads the guide's edge images, that the
    /// last stage is the target, and that factorizations through intermediate stages agree.
    pub fn check(&self) -> Result<(), FoldingError> {
        let bad = |m: String| Err(FoldingError::Invariant(m));
        for (i, s) in self.steps.iter().enumerate() {
            let (a, b) = (&self.stages[i], &self.stages[i + 1]);
            for (e, &(u, l, v)) in a.edges.iter().enumerate() {
                let d = s.edge_map[e];
                if b.germ(d) != l || b.start(d) != s.vertex_map[u] || b.end(d) != s.vertex_map[v] {
                    return bad(format!("step {i} is not a graph map at edgelet {e}"));
                }
            }
        }
        for (i, g) in self.stages.iter().enumerate() {
            if !g.has_two_gates() {
                return bad(format!("stage {i} has a vertex with one gate"));
            }
        }
        let last = self.stages.len() - 1;
        if !self.stages[last].is_target(&self.target) {
            return bad("last stage is not the target".into());
        }
        let full = self.composite(0, last);
        for (c, w) in self.chains.iter().zip(&self.images) {
            let read: Vec<Letter> = c.iter().map(|&d| self.stages[last].germ(apply_map(&full, d))).collect();
            if Word::new(&read) != *w || read.len() != w.len() {
                return bad("composite differs from the guide".into());
            }
        }
        let mids = [last / 3, last / 2, (2 * last) / 3];
        for &k in &mids {
            let a = self.composite(0, k);
            let b = self.composite(k, last);
            let ab: Vec<Letter> = a.iter().map(|&d| apply_map(&b, d)).collect();
            if ab != full {
                return bad(format!("factorization through stage {k} fails"));
            }
        }
        Ok(())
    }
}

impl<S: Scalar> SegView<S> for LiberalPath<S> {
    fn seg_graphs(&self) -> Vec<SegGraph<S>> {
        self.stages.iter().map(|g| g.seg_graph(&self.target)).collect()
    }
    fn target_edges(&self) -> usize {
        self.target.num_edges()
    }
}

/// Blow-up of target vertex `vertex` into a tree on `tree_vertices` local vertices (local
/// vertex 0 keeps the old id). Each target direction at the vertex is attached to a local
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blowup<S: Scalar> {
    pub vertex: usize,
    pub tree_vertices: usize,
    pub tree_edges: Vec<(usize, usize)>,
    pub tree_lengths: Vec<S>,
    pub attach: Vec<(Letter, usize)>,
}

/// Expansion of a liberal path along a blow-up of its target.
#[derive(Clone, Debug)]
pub struct ExpandedPath<S: Scalar> {
    pub path: LiberalPath<S>,
    /// For each expanded stage, the original stage it lies over, if it is not an inserted
    /// intermediate stage.
    pub original_stage: Vec<Option<usize>>,
    /// Collapse of each non-inserted expanded stage onto its original stage: vertex map
    /// and, for non-tree edgelets, the original edgelet.
    pub projection: Vec<Option<(Vec<usize>, Vec<Option<usize>>)>>,
    /// Number of inserted identification intervals.
    pub insertions: usize,
}

impl<S: Scalar> Blowup<S> {
    fn validate(&self, target: &MarkedGraph<S>) -> Result<(), FoldingError> {
        let bad = |m: &str| Err(FoldingError::InvalidBlowup(m.into()));
        let m = self.tree_vertices;
        if m == 0 || self.tree_edges.len() + 1 != m || self.tree_lengths.len() != self.tree_edges.len() {
            return bad("not a tree");
        }
        if self.tree_lengths.iter().any(|l| !l.is_positive()) {
            return bad("nonpositive length");
        }
        let mut uf = UnionFind::new(m);
        for &(a, b) in &self.tree_edges {
            if a >= m || b >= m || uf.union(a, b).is_none() {
                return bad("not a tree");
            }
        }
        let mut dirs = target.directions(self.vertex);
        dirs.sort_unstable();
        let mut att: Vec<Letter> = self.attach.iter().map(|a| a.0).collect();
        att.sort_unstable();
        if dirs != att || self.attach.iter().any(|a| a.1 >= m) {
            return bad("attachment does not match the directions at the vertex");
        }
        let mut deg = vec![0; m];
        for &(a, b) in &self.tree_edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        for a in &self.attach {
            deg[a.1] += 1;
        }
        if deg.iter().any(|&d| d < 2) {
            return bad("a tree vertex has valence one");
        }
        Ok(())
    }

    fn attach_of(&self, d: Letter) -> usize {
        self.attach.iter().find(|a| a.0 == d).unwrap().1
    }

    /// The blown-up target.
    pub fn expanded_target(&self, target: &MarkedGraph<S>) -> Result<MarkedGraph<S>, FoldingError> {
        self.validate(target)?;
        let nv = target.num_vertices();
        let local = |i: usize| if i == 0 { self.vertex } else { nv + i - 1 };
        let mut edges = Vec::new();
        for e in 0..target.num_edges() {
            let (a, b) = target.edge(e);
            let l = e as Letter + 1;
            let a2 = if a == self.vertex { local(self.attach_of(l)) } else { a };
            let b2 = if b == self.vertex { local(self.attach_of(-l)) } else { b };
            edges.push((a2, b2));
        }
        for &(a, b) in &self.tree_edges {
            edges.push((local(a), local(b)));
        }
        let mut lengths = target.lengths().to_vec();
        lengths.extend(self.tree_lengths.iter().cloned());
        let mut words = target.inverse_marking().to_vec();
        words.extend(self.tree_edges.iter().map(|_| Word::identity()));
        Ok(MarkedGraph::new(target.rank(), nv + self.tree_vertices - 1, edges, lengths, words)?)
    }

    /// Pullback of a stage: copies of the tree at every vertex over the blown-up vertex.
    fn pullback(&self, g: &EdgeletGraph, target: &MarkedGraph<S>) -> (EdgeletGraph, Vec<usize>) {
        let img = g.vertex_images(target);
        let ne = target.num_edges();
        let mut nv = g.num_vertices;
        let mut copy: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices];
        let mut proj: Vec<usize> = (0..g.num_vertices).collect();
        for x in 0..g.num_vertices {
            if img[x] == self.vertex {
                copy[x].push(x);
                for _ in 1..self.tree_vertices {
                    copy[x].push(nv);
                    proj.push(x);
                    nv += 1;
                }
            }
        }
        let at = |x: usize, d: Letter| if img[x] == self.vertex { copy[x][self.attach_of(d)] } else { x };
        let mut edges: Vec<(usize, Letter, usize)> =
            g.edges.iter().map(|&(u, l, v)| (at(u, l), l, at(v, -l))).collect();
        for x in 0..g.num_vertices {
            if img[x] == self.vertex {
                for (j, &(a, b)) in self.tree_edges.iter().enumerate() {
                    edges.push((copy[x][a], (ne + j) as Letter + 1, copy[x][b]));
                }
            }
        }
        (EdgeletGraph { num_vertices: nv, edges }, proj)
    }
}

/// Expansion of a path along a blow-up of its final graph. Whenever a fold identifies
/// vertices carrying distinct tree copies, the copies are identified right away by folding
/// tree edgelets.
pub fn expand_path<S: Scalar>(path: &LiberalPath<S>, blowup: &Blowup<S>) -> Result<ExpandedPath<S>, FoldingError> {
    let target = path.target();
    let big = blowup.expanded_target(target)?;
    let ne = target.num_edges();
    let (g0, mut vproj) = blowup.pullback(&path.stages[0], target);
    let n0 = path.stages[0].num_edges();
    let mut eproj: Vec<Option<usize>> = (0..g0.num_edges()).map(|e| (e < n0).then_some(e)).collect();
    let mut stages = vec![g0.clone()];
    let mut steps = Vec::new();
    let mut original_stage = vec![Some(0)];
    let mut projection = vec![Some((vproj.clone(), eproj.clone()))];
    let mut insertions = 0;
    for (i, step) in path.steps.iter().enumerate() {
        let StepKind::Fold(d1, d2) = step.kind else {
            return Err(FoldingError::Invariant("expansion expects fold steps".into()));
        };
        let lift = |d: Letter| {
            let e = eproj.iter().position(|&p| p == Some(edge_of(d))).unwrap();
            signed(e, d > 0)
        };
        let (mut g, s) = stages.last().unwrap().fold(lift(d1), lift(d2), false)?;
        let mut map_e = s.edge_map.clone();
        let mut map_v = s.vertex_map.clone();
        stages.push(g.clone());
        steps.push(s);
        original_stage.push(None);
        projection.push(None);
        let mut inserted = false;
        while let Some((a, b)) = g.foldable_pairs().into_iter().find(|&(a, _)| edge_of(g.germ(a)) >= ne) {
            let (h, s) = g.fold(a, b, true)?;
            map_e = map_e.iter().map(|&d| apply_map(&s.edge_map, d)).collect();
            map_v = map_v.iter().map(|&v| s.vertex_map[v]).collect();
            stages.push(h.clone());
            steps.push(s);
            original_stage.push(None);
            projection.push(None);
            g = h;
            inserted = true;
        }
        if inserted {
            insertions += 1;
        }
        let mut e_new = vec![None; g.num_edges()];
        for (e, p) in eproj.iter().enumerate() {
            if let Some(pe) = *p {
                e_new[edge_of(map_e[e])] = Some(edge_of(step.edge_map[pe]));
            }
        }
        let mut v_new = vec![usize::MAX; g.num_vertices];
        for (x, &px) in vproj.iter().enumerate() {
            v_new[map_v[x]] = step.vertex_map[px];
        }
        let (pb, _) = blowup.pullback(&path.stages[i + 1], target);
        if v_new.contains(&usize::MAX) || pb.num_vertices != g.num_vertices || pb.num_edges() != g.num_edges() {
            return Err(FoldingError::Invariant(format!("expanded stage over {} is not a pullback", i + 1)));
        }
        vproj = v_new;
        eproj = e_new;
        *original_stage.last_mut().unwrap() = Some(i + 1);
        *projection.last_mut().unwrap() = Some((vproj.clone(), eproj.clone()));
    }
    let chains: Vec<Vec<Letter>> = (0..g0.num_edges()).map(|e| vec![signed(e, true)]).collect();
    let images: Vec<Word> = g0.edges.iter().map(|&(_, l, _)| Word::new(&[l])).collect();
    Ok(ExpandedPath {
        path: LiberalPath::from_parts(big, stages, steps, chains, images),
        original_stage,
        projection,
        insertions,
    })
}

impl<S: Scalar> ExpandedPath<S> {
    /// Collapsing the tree edgelets of every non-inserted stage gives back the original
    /// stage: the projection is a bijection on non-tree edgelets compatible with endpoints,
    /// and its vertex fibers are exactly the tree components.
    pub fn check_round_trip(&self, original: &LiberalPath<S>) -> Result<(), FoldingError> {
        let bad = |m: String| Err(FoldingError::Invariant(m));
        let ne = original.target().num_edges();
        let mut seen = 0;
        for (k, o) in self.original_stage.iter().enumerate() {
            let Some(i) = *o else { continue };
            seen += 1;
            let g = &self.path.stages()[k];
            let h = &original.stages()[i];
            let Some((vp, ep)) = &self.projection[k] else { return bad(format!("stage {k} has no projection")) };
            let mut hit = vec![false; h.num_edges()];
            let mut uf = UnionFind::new(g.num_vertices);
            for (e, &(u, l, v)) in g.edges.iter().enumerate() {
                if edge_of(l) >= ne {
                    uf.union(u, v);
                    if vp[u] != vp[v] {
                        return bad(format!("tree edgelet crosses fibers in stage {k}"));
                    }
                    continue;
                }
                let Some(pe) = ep[e] else { return bad(format!("unprojected edgelet in stage {k}")) };
                if hit[pe] || h.edges[pe] != (vp[u], l, vp[v]) {
                    return bad(format!("projection is not an isomorphism in stage {k}"));
                }
                hit[pe] = true;
            }
            if hit.iter().any(|&b| !b) {
                return bad(format!("projection misses edgelets in stage {k}"));
            }
            let mut fiber_roots: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for x in 0..g.num_vertices {
                fiber_roots.entry(vp[x]).or_default().insert(uf.find(x));
            }
            if fiber_roots.len() != h.num_vertices || fiber_roots.values().any(|r| r.len() != 1) {
                return bad(format!("vertex fibers are not tree components in stage {k}"));
            }
        }
        if seen != original.stages().len() {
            return bad("missing stages".into());
        }
        Ok(())
    }
}

fn check_coloring<S: Scalar>(
    target: &MarkedGraph<S>,
    red: &[TargetPoint<S>],
    blue: &[TargetPoint<S>],
) -> Result<(), FoldingError> {
    if red.is_empty() {
        return Err(FoldingError::EmptyColor("red"));
    }
    if blue.is_empty() {
        return Err(FoldingError::EmptyColor("blue"));
    }
    let mut all = BTreeSet::new();
    for p in red.iter().chain(blue) {
        if p.edge >= target.num_edges()
            || !p.pos.is_positive()
            || p.pos >= *target.length(p.edge)
            || !all.insert(p.clone())
        {
            return Err(FoldingError::BadColoring);
        }
    }
    Ok(())
}

/// Number of mixed regions in the source: complementary components of the pulled-back
/// colored points whose frontier meets both colors.
pub fn mixed_regions<S: Scalar>(
    phi: &GraphMorphism<S>,
    red: &[TargetPoint<S>],
    blue: &[TargetPoint<S>],
) -> Result<usize, FoldingError> {
    let target = phi.target();
    check_coloring(target, red, blue)?;
    let mut on_edge: Vec<Vec<(S, u8)>> = vec![Vec::new(); target.num_edges()];
    for p in red {
        on_edge[p.edge].push((p.pos.clone(), 1));
    }
    for p in blue {
        on_edge[p.edge].push((p.pos.clone(), 2));
    }
    for v in on_edge.iter_mut() {
        v.sort();
    }
    let (g, _) = EdgeletGraph::subdivide(phi)?;
    let mut uf = UnionFind::new(g.num_vertices);
    let mut colors: Vec<u8> = vec![0; g.num_vertices];
    for &(u, l, v) in &g.edges {
        let pts = &on_edge[edge_of(l)];
        if pts.is_empty() {
            uf.union(u, v);
            continue;
        }
        colors[u] |= pts[0].1;
        colors[v] |= pts[pts.len() - 1].1;
        for w in pts.windows(2) {
            let id = uf.push();
            colors.push(w[0].1 | w[1].1);
            debug_assert_eq!(id, colors.len() - 1);
        }
    }
    let mut acc: BTreeMap<usize, u8> = BTreeMap::new();
    for x in 0..colors.len() {
        *acc.entry(uf.find(x)).or_default() |= colors[x];
    }
    Ok(acc.values().filter(|&&c| c == 3).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum PhaseColor {
    Red,
    Blue,
}

/// Folding path that folds red (and neutral) edgelets for as long as possible, then blue
/// (and neutral), and so on, with the complexity `(N, −r)` recorded at every stage: `N`
/// mixed vertices after collapsing neutral edgelets, `r` the sum of their ranks.
#[derive(Clone, Debug)]
pub struct PhasePath<S: Scalar> {
    pub path: LiberalPath<S>,
    pub phases: Vec<(PhaseColor, usize)>,
    pub complexity: Vec<(usize, i64)>,
}

impl<S: Scalar> PhasePath<S> {
    /// Whether `(N, −r)` never increases lexicographically.
    pub fn complexity_non_increasing(&self) -> bool {
        self.complexity.windows(2).all(|w| w[1] <= w[0])
    }
}

fn complexity(g: &EdgeletGraph, color: &[u8]) -> (usize, i64) {
    let mut uf = UnionFind::new(g.num_vertices);
    for &(u, l, v) in &g.edges {
        if color[edge_of(l)] == 0 {
            uf.union(u, v);
        }
    }
    let mut verts: BTreeMap<usize, i64> = BTreeMap::new();
    let mut edges: BTreeMap<usize, i64> = BTreeMap::new();
    let mut adj: BTreeMap<usize, u8> = BTreeMap::new();
    for x in 0..g.num_vertices {
        *verts.entry(uf.find(x)).or_default() += 1;
    }
    for &(u, l, v) in &g.edges {
        let c = color[edge_of(l)];
        if c == 0 {
            *edges.entry(uf.find(u)).or_default() += 1;
        } else {
            *adj.entry(uf.find(u)).or_default() |= c;
            *adj.entry(uf.find(v)).or_default() |= c;
        }
    }
    let mut n = 0;
    let mut r = 0;
    for (root, &c) in &adj {
        if c == 3 {
            n += 1;
            r += edges.get(root).copied().unwrap_or(0) - verts[root] + 1;
        }
    }
    (n, -r)
}

/// Phase folding path for a coloring with at most one colored point per target edge.
pub fn phase_folding_path<S: Scalar>(
    phi: &GraphMorphism<S>,
    red: &[TargetPoint<S>],
    blue: &[TargetPoint<S>],
) -> Result<PhasePath<S>, FoldingError> {
    let target = phi.target();
    check_coloring(target, red, blue)?;
    let mut color = vec![0u8; target.num_edges()];
    for (pts, c) in [(red, 1u8), (blue, 2u8)] {
        for p in pts {
            if color[p.edge] != 0 {
                return Err(FoldingError::BadColoring);
            }
            color[p.edge] = c;
        }
    }
    let (g0, chains) = EdgeletGraph::subdivide(phi)?;
    let mut stages = vec![g0];
    let mut steps = Vec::new();
    let mut phases = Vec::new();
    let mut phase = PhaseColor::Red;
    let mut idle = 0;
    while idle < 2 {
        let allowed = if phase == PhaseColor::Red { 1 } else { 2 };
        let mut n = 0;
        loop {
            let g = stages.last().unwrap();
            let pick = g.foldable_pairs().into_iter().find(|&(a, _)| {
                let c = color[edge_of(g.germ(a))];
                c == 0 || c == allowed
            });
            let Some((a, b)) = pick else { break };
            let (h, s) = g.fold(a, b, false)?;
            stages.push(h);
            steps.push(s);
            n += 1;
        }
        if n == 0 {
            idle += 1;
        } else {
            idle = 0;
            phases.push((phase, n));
        }
        phase = if phase == PhaseColor::Red { PhaseColor::Blue } else { PhaseColor::Red };
    }
    let complexity = stages.iter().map(|g| complexity(g, &color)).collect();
    let path = LiberalPath::from_parts(target.clone(), stages, steps, chains, phi.images().to_vec());
    Ok(PhasePath { path, phases, complexity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_maps::difference_of_markings;
    use crate::scalar::Q;

    pub(crate) fn monogon() -> GraphMorphism<Q> {
        let src = MarkedGraph::rose_with_words(
            vec![Word::parse("a").unwrap(), Word::parse("ab").unwrap()],
            vec![Q::ratio(1, 3), Q::ratio(2, 3)],
        )
        .unwrap();
        let tgt = MarkedGraph::<Q>::rose(2, vec![Q::ratio(1, 3), Q::ratio(1, 3)]).unwrap();
        difference_of_markings(&src, &tgt).unwrap()
    }

    #[test]
    fn identity_path_is_empty() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        let p = stallings_path(&difference_of_markings(&g, &g).unwrap()).unwrap();
        assert_eq!(p.num_folds(), 0);
        p.check().unwrap();
    }

    #[test]
    fn wedge_folds_once() {
        // Wedge of loops reading z and xz, mapped to the rose on x, z.
        let w = |s: &str| Word::parse_with(s, "xz").unwrap();
        let src =
            MarkedGraph::<Q>::new(2, 2, vec![(0, 0), (0, 1), (1, 0)], vec![Q::int(1); 3], vec![w("z"), w("x"), w("z")])
                .unwrap();
        let tgt = MarkedGraph::<Q>::rose_with_words(vec![w("x"), w("z")], vec![Q::int(1); 2]).unwrap();
        let phi = GraphMorphism::from_lifts(src, tgt, vec![Word::identity(), w("x")]).unwrap();
        assert_eq!(phi.images(), &[w("z"), w("x"), w("z")]);
        let p = stallings_path(&phi).unwrap();
        p.check().unwrap();
        assert_eq!(p.num_folds(), 1);
    }

    #[test]
    fn monogon_stallings_and_collapse() {
        let m = monogon();
        let p = stallings_path(&m).unwrap();
        p.check().unwrap();
        assert_eq!(p.num_folds(), 1);
        let c = super::super::collapse_path(&p, &[0]).unwrap();
        c.check_gates().unwrap();
        assert!(c.stages.iter().all(|s| s.edges.len() == 1));
        assert!(matches!(super::super::collapse_path(&p, &[0, 1]), Err(FoldingError::CollapseAll)));
        let none = super::super::collapse_path(&p, &[]).unwrap();
        assert_eq!(none.stages.len(), p.stages().len());
        assert_eq!(none.stages[0].edges.len(), p.stages()[0].num_edges());
    }

    #[test]
    fn monogon_expansion_inserts_one_interval() {
        let m = monogon();
        let p = stallings_path(&m).unwrap();
        let blow = Blowup {
            vertex: 0,
            tree_vertices: 2,
            tree_edges: vec![(0, 1)],
            tree_lengths: vec![Q::ratio(1, 10)],
            attach: vec![(1, 0), (-1, 1), (2, 0), (-2, 1)],
        };
        let x = expand_path(&p, &blow).unwrap();
        assert_eq!(x.insertions, 1);
        x.path.check().unwrap();
        x.check_round_trip(&p).unwrap();
        let trivial = Blowup {
            vertex: 0,
            tree_vertices: 1,
            tree_edges: vec![],
            tree_lengths: vec![],
            attach: vec![(1, 0), (-1, 0), (2, 0), (-2, 0)],
        };
        let y = expand_path(&p, &trivial).unwrap();
        assert_eq!(y.insertions, 0);
        assert_eq!(y.path.stages(), p.stages());
    }

    #[test]
    fn mixed_region_counts() {
        let g = MarkedGraph::<Q>::standard_rose(2);
        let id = difference_of_markings(&g, &g).unwrap();
        let pt = |e, n, d| TargetPoint { edge: e, pos: Q::ratio(n, d) };
        assert_eq!(mixed_regions(&id, &[pt(0, 1, 6)], &[pt(0, 1, 3)]).unwrap(), 2);
        assert_eq!(mixed_regions(&id, &[pt(0, 1, 4)], &[pt(1, 1, 4)]).unwrap(), 1);
        assert!(matches!(mixed_regions(&id, &[pt(0, 1, 4)], &[]), Err(FoldingError::EmptyColor("blue"))));
        let m = monogon();
        let ph = phase_folding_path(&m, &[pt(0, 1, 6)], &[pt(1, 1, 6)]).unwrap();
        ph.path.check().unwrap();
        assert!(ph.complexity_non_increasing());
    }
}
