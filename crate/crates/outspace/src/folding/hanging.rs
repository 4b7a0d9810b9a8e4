use super::edgelet::EdgeletGraph;
use super::{snap_path, FoldingError};
use crate::free_group::{Letter, UnionFind, Word};
use crate::marked_graph::{collapse, edge_letter, edge_of, MarkedGraph};
use crate::optimal_maps::GraphMorphism;
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Point on a source edge, `offset` measured along its image from the initial vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcePoint<S: Scalar> {
    pub edge: usize,
    pub offset: S,
}

/// Hanging tree found in the subdivided source (edgelet ids refer to
/// [`EdgeletGraph::subdivide`] of the source).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HangingTree {
    pub tree: Vec<usize>,
    pub top: usize,
    /// Edgelet letters of `e` from the top vertex.
    pub e_chain: Vec<Letter>,
    /// Embedded legal loop through `e`, as edgelet letters from the top vertex.
    pub legal_loop: Vec<Letter>,
    /// Edgelets over the target edge; each carries one preimage of an interior point.
    pub preimages: Vec<usize>,
    /// Number of gates inside the tree at each of its vertices.
    pub gates: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HangingCase {
    /// Preimages are uniformly bounded. `count` is the number of preimages of an interior
    /// point of the target edge in the source, `count_at_fold` the same number in the
    /// intermediate graph reached by folding away from `e`.
    Bounded { case: u8, count: usize, count_at_fold: usize },
    /// A hanging tree with a legal loop through `e` holds every preimage.
    Tree { count: usize, tree: HangingTree },
}

/// Unique immersed path between two points with the same image, whose image tightens to a
/// point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingPath<S: Scalar> {
    /// Pieces `(edgelet, from, to)` of the subdivided source, positions along the edgelet's
    /// target edge; `from > to` means traversal against the edgelet.
    pub pieces: Vec<(usize, S, S)>,
    pub illegal_turns: usize,
}

impl<S: Scalar> VanishingPath<S> {
    pub fn edgelets(&self) -> BTreeSet<usize> {
        self.pieces.iter().map(|p| p.0).collect()
    }
}

fn natural_edge(g: &EdgeletGraph, d0: Letter) -> Vec<Letter> {
    // Walk from direction `d0` forward through valence-2 vertices, then backward.
    let dirs = g.directions();
    let walk = |d: Letter| {
        let mut out = vec![d];
        let mut cur = d;
        loop {
            let v = g.end(cur);
            if dirs[v].len() != 2 {
                break;
            }
            let next = *dirs[v].iter().find(|&&x| x != -cur).unwrap();
            if next == d || next == -d {
                break;
            }
            out.push(next);
            cur = next;
        }
        out
    };
    let fwd = walk(d0);
    if g.end(*fwd.last().unwrap()) == g.start(d0) && dirs[g.start(d0)].len() == 2 {
        return fwd;
    }
    let back = walk(-d0);
    let mut path: Vec<Letter> = back[1..].iter().rev().map(|&d| -d).collect();
    path.extend(fwd);
    path
}

fn apply(map: &[Letter], d: Letter) -> Letter {
    if d > 0 {
        map[edge_of(d)]
    } else {
        -map[edge_of(-d)]
    }
}

/// Classify a pair of edges defining the same splitting: fold without touching the image of
/// `e` until every remaining fold involves it, then inspect the natural edge through that
/// image.
pub fn hanging_tree_classify<S: Scalar>(
    phi: &GraphMorphism<S>,
    e: usize,
    e2: usize,
) -> Result<HangingCase, FoldingError> {
    let src = phi.source();
    let tgt = phi.target();
    if e >= src.num_edges() || e2 >= tgt.num_edges() {
        return Err(FoldingError::BadPoint("edge out of range".into()));
    }
    if collapse(src, &[e]).id() != collapse(tgt, &[e2]).id() {
        return Err(FoldingError::SplittingsDiffer);
    }
    let (g0, chains) = EdgeletGraph::subdivide(phi)?;
    let preimages: Vec<usize> = (0..g0.num_edges()).filter(|&i| edge_of(g0.edges[i].1) == e2).collect();
    let count = preimages.len();
    // Fold away from the image of `e`, keeping the composite edge map from the source.
    let mut es: Vec<Letter> = chains[e].clone();
    let mut full = signed_identity(g0.num_edges());
    let mut gs = g0.clone();
    loop {
        let tracked: BTreeSet<usize> = es.iter().map(|&d| edge_of(d)).collect();
        let pick = gs
            .foldable_pairs()
            .into_iter()
            .find(|&(a, b)| !tracked.contains(&edge_of(a)) && !tracked.contains(&edge_of(b)));
        let Some((a, b)) = pick else { break };
        let (h, step) = gs.fold(a, b, false)?;
        es = es.iter().map(|&d| apply(&step.edge_map, d)).collect();
        full = full.iter().map(|&d| apply(&step.edge_map, d)).collect();
        gs = h;
    }
    let count_at_fold = gs.edges.iter().filter(|x| edge_of(x.1) == e2).count();
    let bounded = |case| Ok(HangingCase::Bounded { case, count, count_at_fold });
    let pairs = gs.foldable_pairs();
    if pairs.is_empty() {
        return bounded(3);
    }
    let gs = &gs;
    let hat = natural_edge(gs, es[0]);
    let a = gs.start(hat[0]);
    let b = gs.end(*hat.last().unwrap());
    let dirs = gs.directions();
    let hat_set: BTreeSet<usize> = hat.iter().map(|&d| edge_of(d)).collect();
    // Case 1: removing the natural edge leaves no valence-one vertex.
    let valence_without = |v: usize| dirs[v].iter().filter(|&&d| !hat_set.contains(&edge_of(d))).count();
    if a != b || valence_without(a) != 1 || dirs[a].len() != 3 {
        return bounded(1);
    }
    if gs.germ(hat[0]) == gs.germ(-*hat.last().unwrap()) {
        return bounded(2);
    }
    // Case 4: the third direction at `a` starts a separating natural edge `z`.
    let zd = *dirs[a].iter().find(|&&d| !hat_set.contains(&edge_of(d))).unwrap();
    let z = natural_edge(gs, zd);
    let mut region: BTreeSet<usize> = hat_set.clone();
    region.extend(z.iter().map(|&d| edge_of(d)));
    let e_edgelets: BTreeSet<usize> = chains[e].iter().map(|&d| edge_of(d)).collect();
    let tree: Vec<usize> =
        (0..g0.num_edges()).filter(|&i| !e_edgelets.contains(&i) && region.contains(&edge_of(full[i]))).collect();
    let mut last_err = FoldingError::Invariant("no hanging tree".into());
    for chain in [chains[e].clone(), chains[e].iter().rev().map(|&d| -d).collect::<Vec<_>>()] {
        match build_tree(&g0, &tree, &chain, &preimages) {
            Ok(t) => return Ok(HangingCase::Tree { count, tree: t }),
            Err(err) => last_err = err,
        }
    }
    Err(last_err)
}

fn signed_identity(n: usize) -> Vec<Letter> {
    (0..n).map(|i| edge_letter(i, true)).collect()
}

/// Build and verify a hanging tree rooted at the start of `chain`.
fn build_tree(
    g: &EdgeletGraph,
    tree: &[usize],
    chain: &[Letter],
    preimages: &[usize],
) -> Result<HangingTree, FoldingError> {
    let bad = |m: &str| Err(FoldingError::Invariant(m.into()));
    let top = g.start(chain[0]);
    let other = g.end(*chain.last().unwrap());
    let mut verts: BTreeSet<usize> = BTreeSet::from([top]);
    for &i in tree {
        verts.insert(g.edges[i].0);
        verts.insert(g.edges[i].2);
    }
    let mut uf = UnionFind::new(g.num_vertices);
    for &i in tree {
        if uf.union(g.edges[i].0, g.edges[i].2).is_none() {
            return bad("hanging subgraph has a cycle");
        }
    }
    if verts.iter().any(|&v| uf.find(v) != uf.find(top)) || !verts.contains(&other) {
        return bad("hanging subgraph is not a tree containing both ends of e");
    }
    // Directions inside the tree and the root-ward direction of every vertex.
    let mut inside: BTreeMap<usize, Vec<Letter>> = BTreeMap::new();
    for &i in tree {
        let (u, _, v) = g.edges[i];
        inside.entry(u).or_default().push(edge_letter(i, true));
        inside.entry(v).or_default().push(edge_letter(i, false));
    }
    let mut up: BTreeMap<usize, Letter> = BTreeMap::new();
    let mut q = VecDeque::from([top]);
    let mut seen = BTreeSet::from([top]);
    while let Some(x) = q.pop_front() {
        for &d in inside.get(&x).map(|v| v.as_slice()).unwrap_or(&[]) {
            let y = g.end(d);
            if seen.insert(y) {
                up.insert(y, -d);
                q.push_back(y);
            }
        }
    }
    let mut gates = BTreeMap::new();
    for &v in &verts {
        let ds = inside.get(&v).cloned().unwrap_or_default();
        let germs: BTreeSet<Letter> = ds.iter().map(|&d| g.germ(d)).collect();
        gates.insert(v, germs.len());
        if v == top || ds.len() == 1 {
            if germs.len() != 1 {
                return bad("top or leaf of the tree has more than one gate");
            }
        } else {
            let u = g.germ(up[&v]);
            if germs.len() != 2 || ds.iter().filter(|&&d| g.germ(d) == u).count() != 1 {
                return bad("inner tree vertex does not have the root-ward gate alone");
            }
        }
    }
    // Legal loop: e followed by the tree path back to the top.
    let mut back = Vec::new();
    let mut x = other;
    while x != top {
        let d = up[&x];
        back.push(d);
        x = g.end(d);
    }
    let mut legal_loop = chain.to_vec();
    legal_loop.extend(back);
    let n = legal_loop.len();
    for i in 0..n {
        let (p, c) = (legal_loop[i], legal_loop[(i + 1) % n]);
        if g.germ(-p) == g.germ(c) {
            return bad("loop through e is not legal");
        }
    }
    let loop_verts: Vec<usize> = legal_loop.iter().map(|&d| g.start(d)).collect();
    if loop_verts.iter().collect::<BTreeSet<_>>().len() != n {
        return bad("loop through e is not embedded");
    }
    for v in [top, other] {
        let germs: BTreeSet<Letter> = g.directions()[v].iter().map(|&d| g.germ(d)).collect();
        if germs.len() < 2 {
            return bad("an endpoint of e has one gate");
        }
    }
    let tset: BTreeSet<usize> = tree.iter().copied().collect();
    let eset: BTreeSet<usize> = chain.iter().map(|&d| edge_of(d)).collect();
    let on_loop: BTreeSet<usize> = legal_loop.iter().map(|&d| edge_of(d)).collect();
    if preimages.iter().any(|i| !tset.contains(i) && !eset.contains(i)) {
        return bad("a preimage lies outside the tree and e");
    }
    if preimages.iter().filter(|i| on_loop.contains(i)).count() != 1 {
        return bad("the legal loop does not meet the preimage exactly once");
    }
    Ok(HangingTree {
        tree: tree.to_vec(),
        top,
        e_chain: chain.to_vec(),
        legal_loop,
        preimages: preimages.to_vec(),
        gates,
    })
}

impl HangingTree {
    /// Midpoints of the preimage edgelets as source points.
    pub fn preimage_points<S: Scalar>(&self, phi: &GraphMorphism<S>) -> Vec<SourcePoint<S>> {
        let tgt = phi.target();
        let mut out = Vec::new();
        let mut k = 0;
        for e in 0..phi.source().num_edges() {
            let mut off = S::zero();
            for &l in phi.image(e).letters() {
                let len = tgt.length(edge_of(l)).clone();
                if self.preimages.contains(&k) {
                    out.push(SourcePoint { edge: e, offset: off.clone() + len.clone() * S::from_ratio(1, 2) });
                }
                off = off + len;
                k += 1;
            }
        }
        out
    }
}

/// Position of a source point: the stage-0 edgelet, the position along its target edge, and
/// whether it is an endpoint of that edgelet.
fn locate<S: Scalar>(phi: &GraphMorphism<S>, g: &EdgeletGraph, x: &SourcePoint<S>) -> Result<(usize, S), FoldingError> {
    let tgt = phi.target();
    if x.edge >= phi.source().num_edges() {
        return Err(FoldingError::BadPoint(format!("edge {} out of range", x.edge)));
    }
    let base: usize = (0..x.edge).map(|e| phi.image(e).len()).sum();
    let mut off = x.offset.clone();
    if off < S::zero() {
        return Err(FoldingError::BadPoint("negative offset".into()));
    }
    for (i, &l) in phi.image(x.edge).letters().iter().enumerate() {
        let len = tgt.length(edge_of(l)).clone();
        if off <= len {
            let pos = if l > 0 { off } else { len - off };
            debug_assert_eq!(edge_of(g.edges[base + i].1), edge_of(l));
            return Ok((base + i, pos));
        }
        off = off - len;
    }
    Err(FoldingError::BadPoint("offset beyond the edge".into()))
}

/// Image of a located point: a target vertex or an interior point of a target edge.
fn image_of<S: Scalar>(tgt: &MarkedGraph<S>, g: &EdgeletGraph, at: &(usize, S)) -> (Option<usize>, usize, S) {
    let l = g.edges[at.0].1;
    let eps = edge_of(l);
    if at.1.is_zero() {
        (Some(tgt.start(l)), 0, S::zero())
    } else if at.1 == *tgt.length(eps) {
        (Some(tgt.end(l)), 0, S::zero())
    } else {
        (None, eps, at.1.clone())
    }
}

/// Vanishing path between two points of the source with the same image.
pub fn vanishing_path<S: Scalar>(
    phi: &GraphMorphism<S>,
    x1: &SourcePoint<S>,
    x2: &SourcePoint<S>,
) -> Result<VanishingPath<S>, FoldingError> {
    let tgt = phi.target();
    let (g, _) = EdgeletGraph::subdivide(phi)?;
    let p1 = locate(phi, &g, x1)?;
    let p2 = locate(phi, &g, x2)?;
    if image_of(tgt, &g, &p1) != image_of(tgt, &g, &p2) {
        return Err(FoldingError::ImagesDiffer);
    }
    // Cut edgelets at the two points.
    let mut cuts: Vec<BTreeSet<S>> = vec![BTreeSet::new(); g.num_edges()];
    for p in [&p1, &p2] {
        let len = tgt.length(edge_of(g.edges[p.0].1));
        if p.1.is_positive() && p.1 < *len {
            cuts[p.0].insert(p.1.clone());
        }
    }
    let mut nv = g.num_vertices;
    let mut pieces: Vec<(usize, S, S)> = Vec::new();
    let mut kedges = Vec::new();
    let mut point_vertex: BTreeMap<(usize, S), usize> = BTreeMap::new();
    for (i, &(u, l, v)) in g.edges.iter().enumerate() {
        let len = tgt.length(edge_of(l)).clone();
        let mut prev = (u, S::zero());
        for c in &cuts[i] {
            point_vertex.insert((i, c.clone()), nv);
            kedges.push((prev.0, nv));
            pieces.push((i, prev.1.clone(), c.clone()));
            prev = (nv, c.clone());
            nv += 1;
        }
        kedges.push((prev.0, v));
        pieces.push((i, prev.1, len));
    }
    let vertex_of = |p: &(usize, S)| -> usize {
        let (u, l, v) = g.edges[p.0];
        if p.1.is_zero() {
            u
        } else if p.1 == *tgt.length(edge_of(l)) {
            v
        } else {
            point_vertex[&(p.0, p.1.clone())]
        }
    };
    let (s1, s2) = (vertex_of(&p1), vertex_of(&p2));
    let lengths: Vec<S> = pieces.iter().map(|(_, a, b)| b.clone() - a.clone()).collect();
    let words: Vec<Word> = pieces
        .iter()
        .map(|(i, a, b)| {
            let eps = edge_of(g.edges[*i].1);
            tgt.h_word(snap_path(eps, a, b, tgt.length(eps)).letters())
        })
        .collect();
    let m = MarkedGraph::new(tgt.rank(), nv, kedges.clone(), lengths, words)?;
    let bfs = |from: usize, to: usize| -> Vec<Letter> {
        let mut prev: Vec<Option<Letter>> = vec![None; nv];
        let mut seen = vec![false; nv];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(x) = q.pop_front() {
            for (k, &(a, b)) in kedges.iter().enumerate() {
                for (s, t, d) in [(a, b, edge_letter(k, true)), (b, a, edge_letter(k, false))] {
                    if s == x && !seen[t] {
                        seen[t] = true;
                        prev[t] = Some(d);
                        q.push_back(t);
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut x = to;
        while x != from {
            let d = prev[x].unwrap();
            path.push(d);
            x = if d > 0 { kedges[edge_of(d)].0 } else { kedges[edge_of(d)].1 };
        }
        path.reverse();
        path
    };
    let q = bfs(s1, s2);
    let t = bfs(0, s2);
    let hq = m.h_word(&q);
    let ht = m.h_word(&t);
    let g_loop = m.loop_of(&ht.mul(&hq.inverse()).mul(&ht.inverse()));
    let mut letters = q.clone();
    letters.extend(t.iter().rev().map(|&d| -d));
    letters.extend_from_slice(g_loop.letters());
    letters.extend_from_slice(&t);
    let p = Word::new(&letters);
    if !m.h_word(p.letters()).is_empty() {
        return Err(FoldingError::Invariant("vanishing path image is not null".into()));
    }
    let germ = |d: Letter| {
        let l = g.edges[pieces[edge_of(d)].0].1;
        if d > 0 {
            l
        } else {
            -l
        }
    };
    let illegal_turns = p.letters().windows(2).filter(|w| germ(-w[0]) == germ(w[1])).count();
    let out = p
        .letters()
        .iter()
        .map(|&d| {
            let (i, a, b) = pieces[edge_of(d)].clone();
            if d > 0 {
                (i, a, b)
            } else {
                (i, b, a)
            }
        })
        .collect();
    Ok(VanishingPath { pieces: out, illegal_turns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_maps::difference_of_markings;
    use crate::scalar::Q;

    fn rotation(k: usize) -> GraphMorphism<Q> {
        let w = |s: &str| Word::parse_with(s, "xyz").unwrap();
        let p = "x".repeat(k);
        let m = "X".repeat(k);
        let n = (1 + 2 * (2 * k + 1)) as i64;
        let src = MarkedGraph::rose_with_words(
            vec![w("x"), w(&format!("{p}y{m}")), w(&format!("{p}z{m}"))],
            vec![Q::ratio(1, n), Q::ratio(2 * k as i64 + 1, n), Q::ratio(2 * k as i64 + 1, n)],
        )
        .unwrap();
        let tgt = MarkedGraph::<Q>::standard_rose(3);
        difference_of_markings(&src, &tgt).unwrap()
    }

    #[test]
    fn identity_is_case_three() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        let id = difference_of_markings(&g, &g).unwrap();
        assert_eq!(
            hanging_tree_classify(&id, 0, 0).unwrap(),
            HangingCase::Bounded { case: 3, count: 1, count_at_fold: 1 }
        );
        assert!(matches!(hanging_tree_classify(&id, 0, 1), Err(FoldingError::SplittingsDiffer)));
    }

    #[test]
    fn rotation_has_hanging_tree() {
        let phi = rotation(3);
        let c = hanging_tree_classify(&phi, 0, 0);
        let Ok(HangingCase::Tree { count, tree }) = c else { panic!("expected a hanging tree, got {c:?}") };
        assert_eq!(count, 13);
        assert_eq!(tree.tree.len(), 12);
        assert_eq!(tree.legal_loop.len(), 1);
        let pts = tree.preimage_points(&phi);
        assert_eq!(pts.len(), 13);
        let allowed: BTreeSet<usize> =
            tree.tree.iter().copied().chain(tree.e_chain.iter().map(|&d| edge_of(d))).collect();
        for j in 1..pts.len() {
            let v = vanishing_path(&phi, &pts[0], &pts[j]).unwrap();
            assert!(v.edgelets().is_subset(&allowed));
            assert_eq!(v.illegal_turns, 1);
        }
    }

    #[test]
    fn vanishing_path_errors_and_trivial_case() {
        let phi = rotation(1);
        let a = SourcePoint { edge: 0, offset: Q::ratio(1, 6) };
        let b = SourcePoint { edge: 0, offset: Q::ratio(1, 12) };
        assert!(matches!(vanishing_path(&phi, &a, &b), Err(FoldingError::ImagesDiffer)));
        let v = vanishing_path(&phi, &a, &a).unwrap();
        assert!(v.pieces.is_empty());
    }

    #[test]
    fn monogon_is_bounded() {
        let src = MarkedGraph::rose_with_words(
            vec![Word::parse("a").unwrap(), Word::parse("ab").unwrap()],
            vec![Q::ratio(1, 3), Q::ratio(2, 3)],
        )
        .unwrap();
        let tgt = MarkedGraph::<Q>::rose(2, vec![Q::ratio(1, 3), Q::ratio(1, 3)]).unwrap();
        let phi = difference_of_markings(&src, &tgt).unwrap();
        let c = hanging_tree_classify(&phi, 1, 1).unwrap();
        assert_eq!(c, HangingCase::Bounded { case: 1, count: 1, count_at_fold: 1 });
        assert!(matches!(hanging_tree_classify(&phi, 0, 0), Err(FoldingError::SplittingsDiffer)));
    }
}
