use super::complement::ComplementDecomposition;
use super::SubfactorError;
use crate::free_group::{Letter, SubgroupGraph, Word};
use crate::marked_graph::{classify_attachment, core_cover, omega_data, MarkedGraph};
use crate::scalar::Scalar;
use crate::whitehead::{is_free_factor, FactorCertificate, Verdict};
use serde::Serialize;
use std::collections::VecDeque;

/// `g` with `g·small·g⁻¹ ≤ big`, if one exists. Found by matching a vertex of each Stallings
/// graph and conjugating along their tree paths; every core vertex of `small` is tried.
pub fn conjugate_into(small: &SubgroupGraph, big: &SubgroupGraph) -> Option<Word> {
    let (sg, bg) = (small.graph(), big.graph());
    let (st, bt) = (sg.spanning_tree(), bg.spanning_tree());
    let basis = small.basis();
    for x in 0..sg.num_vertices() {
        let u = Word::new(&sg.tree_path(&st, x));
        for y in 0..bg.num_vertices() {
            let v = Word::new(&bg.tree_path(&bt, y));
            let g = v.mul(&u.inverse());
            if basis.iter().all(|w| big.contains(&w.conjugate_by(&g))) {
                return Some(g);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainMark {
    /// The next factor is contained in the current one.
    Down,
    /// The current factor is contained in the next one.
    Up,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub mark: ChainMark,
    /// `g` with `g·smaller·g⁻¹ ≤ larger`.
    pub conjugator: Word,
}

/// Chain of proper free factors, consecutive ones nested up to conjugacy.
#[derive(Clone, Debug)]
pub struct ChainWitness {
    pub factors: Vec<SubgroupGraph>,
    pub links: Vec<ChainLink>,
    pub certificates: Vec<FactorCertificate>,
    /// Case of the construction that produced the chain.
    pub case: u8,
}

fn nested(x: &SubgroupGraph, y: &SubgroupGraph) -> Option<ChainLink> {
    if let Some(g) = conjugate_into(y, x) {
        return Some(ChainLink { mark: ChainMark::Down, conjugator: g });
    }
    conjugate_into(x, y).map(|g| ChainLink { mark: ChainMark::Up, conjugator: g })
}

fn proper_factor(h: &SubgroupGraph) -> Option<FactorCertificate> {
    if h.is_trivial() || h.rank() >= h.ambient_rank() {
        return None;
    }
    let r = is_free_factor(h);
    match (r.verdict, r.certificate) {
        (Verdict::True, Some(c)) => Some(c),
        _ => None,
    }
}

impl ChainWitness {
    pub fn len(&self) -> usize {
        self.links.len()
    }
    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Shortest certified chain through the candidates, from the first to the last. Entries
    /// that are not proper free factors are skipped.
    pub fn certify(candidates: &[SubgroupGraph], case: u8) -> Option<ChainWitness> {
        let n = candidates.len();
        let certs: Vec<Option<FactorCertificate>> = candidates.iter().map(proper_factor).collect();
        if certs[0].is_none() || certs[n - 1].is_none() {
            return None;
        }
        let mut prev: Vec<Option<(usize, ChainLink)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if seen[j] || certs[j].is_none() {
                    continue;
                }
                if let Some(link) = nested(&candidates[i], &candidates[j]) {
                    seen[j] = true;
                    prev[j] = Some((i, link));
                    queue.push_back(j);
                }
            }
        }
        if !seen[n - 1] {
            return None;
        }
        let mut idx = vec![n - 1];
        let mut links = Vec::new();
        let mut k = n - 1;
        while let Some((i, link)) = prev[k].clone() {
            idx.push(i);
            links.push(link);
            k = i;
        }
        idx.reverse();
        links.reverse();
        Some(ChainWitness {
            factors: idx.iter().map(|&i| candidates[i].clone()).collect(),
            certificates: idx.iter().map(|&i| certs[i].clone().unwrap()).collect(),
            links,
            case,
        })
    }

    /// Replay the membership checks of every link and the Whitehead certificate of every
    /// factor.
    pub fn verify(&self) -> Result<(), String> {
        if self.factors.len() != self.links.len() + 1 || self.certificates.len() != self.factors.len() {
            return Err("malformed chain".into());
        }
        for (i, link) in self.links.iter().enumerate() {
            let (x, y) = (&self.factors[i], &self.factors[i + 1]);
            let (small, big) = match link.mark {
                ChainMark::Down => (y, x),
                ChainMark::Up => (x, y),
            };
            if !small.basis().iter().all(|w| big.contains(&w.conjugate_by(&link.conjugator))) {
                return Err(format!("link {i} is not a containment"));
            }
        }
        for (i, (h, c)) in self.factors.iter().zip(&self.certificates).enumerate() {
            if h.is_trivial() || h.rank() >= h.ambient_rank() || c.subset.len() != h.rank() || !c.verify(h) {
                return Err(format!("factor {i} is not certified"));
            }
        }
        Ok(())
    }
}

/// Embedded loops of the subgraph on `edges`: fundamental cycles of breadth-first trees
/// rooted at every vertex, as `(start vertex, letters)`.
pub(crate) fn embedded_loops<S: Scalar>(g: &MarkedGraph<S>, edges: &[usize]) -> Vec<(usize, Vec<Letter>)> {
    let nv = g.num_vertices();
    let mut adj: Vec<Vec<(Letter, usize)>> = vec![Vec::new(); nv];
    for &e in edges {
        let (u, v) = g.edge(e);
        adj[u].push((e as Letter + 1, v));
        adj[v].push((-(e as Letter + 1), u));
    }
    let mut out: Vec<(usize, Vec<Letter>)> = Vec::new();
    for r in 0..nv {
        if adj[r].is_empty() {
            continue;
        }
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; nv];
        let mut seen = vec![false; nv];
        seen[r] = true;
        let mut queue = VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            for &(l, v) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, l));
                    queue.push_back(v);
                }
            }
        }
        let path_to = |mut v: usize| {
            let mut p = Vec::new();
            while let Some((u, l)) = parent[v] {
                p.push(l);
                v = u;
            }
            p.reverse();
            p
        };
        for &e in edges {
            let (u, v) = g.edge(e);
            if !seen[u] || parent[v] == Some((u, e as Letter + 1)) || parent[u] == Some((v, -(e as Letter + 1))) {
                continue;
            }
            let mut w = path_to(u);
            w.push(e as Letter + 1);
            w.extend(Word::new(&path_to(v)).inverse().letters());
            let (core, conj) = Word::new(&w).cyclic_reduce();
            let start = conj.letters().iter().fold(r, |x, &l| step(g, x, l));
            let item = (start, core.letters().to_vec());
            if !out.contains(&item) {
                out.push(item);
            }
        }
    }
    out
}

fn step<S: Scalar>(g: &MarkedGraph<S>, x: usize, l: Letter) -> usize {
    debug_assert_eq!(g.start(l), x);
    g.end(l)
}

/// Element of `F_n` carried by a loop of `G`, conjugated to the base along a tree path.
pub(crate) fn loop_element<S: Scalar>(g: &MarkedGraph<S>, start: usize, letters: &[Letter]) -> Word {
    let lg = g.labeled();
    let tree = lg.spanning_tree();
    let t = lg.tree_path(&tree, start);
    let mut p = t.clone();
    p.extend_from_slice(letters);
    p.extend(Word::new(&t).inverse().letters());
    g.h_word(&p)
}

fn cyclic<S: Scalar>(g: &MarkedGraph<S>, lp: &(usize, Vec<Letter>)) -> SubgroupGraph {
    SubgroupGraph::new(g.rank(), &[loop_element(g, lp.0, &lp.1)]).expect("nontrivial loop")
}

fn uses(lp: &(usize, Vec<Letter>), e: usize) -> bool {
    lp.1.iter().any(|&l| crate::marked_graph::edge_of(l) == e)
}

/// Paths in `G` from `from` to `to` along breadth-first trees of `G` and of `G` minus
/// `avoid`.
fn connecting_paths<S: Scalar>(g: &MarkedGraph<S>, from: usize, to: usize, avoid: &[usize]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for skip in [avoid, &[][..]] {
        let edges: Vec<usize> = (0..g.num_edges()).filter(|e| !skip.contains(e)).collect();
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; g.num_vertices()];
        let mut seen = vec![false; g.num_vertices()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &e in &edges {
                let (a, b) = g.edge(e);
                for (x, y, l) in [(a, b, e as Letter + 1), (b, a, -(e as Letter + 1))] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        parent[y] = Some((u, l));
                        queue.push_back(y);
                    }
                }
            }
        }
        if seen[to] {
            let mut p = Vec::new();
            let mut v = to;
            while let Some((u, l)) = parent[v] {
                p.push(l);
                v = u;
            }
            p.reverse();
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// `⟨c·β·c⁻¹⟩` for a loop β at the end of `c`, with `c` starting at the root image,
/// conjugated along the hair like the carrier groups.
fn attached_loop<S: Scalar>(d: &ComplementDecomposition<S>, c: &[Letter], lp: &[Letter]) -> Word {
    let hair = d.hair();
    let mut p = hair.clone();
    p.extend_from_slice(c);
    p.extend_from_slice(lp);
    p.extend(Word::new(c).inverse().letters());
    p.extend(Word::new(&hair).inverse().letters());
    d.base().h_word(&p)
}

const MAX_CANDIDATES: usize = 400;

/// Chain of length at most four from `A` to `B` in the free factor complex, for `B` embedded
/// and `A` adjoined in `G`, following the case analysis on `E`, `E_Ω̃` and the embedded
/// loops of `B|G`.
pub fn distance4_chain<S: Scalar>(
    a: &SubgroupGraph,
    b: &SubgroupGraph,
    g: &MarkedGraph<S>,
) -> Result<ChainWitness, SubfactorError> {
    if g.rank() < 3 {
        return Err(SubfactorError::RankTooSmall(g.rank()));
    }
    let bc = core_cover(b, g)?;
    if !classify_attachment(&bc).embedded {
        return Err(SubfactorError::NotEmbedded);
    }
    let d = ComplementDecomposition::new(a, g)?;
    if !classify_attachment(&d.cover).adjoined {
        return Err(SubfactorError::NotAdjoined);
    }
    let bom = omega_data(&bc);
    let b_edges: Vec<usize> = (0..g.num_edges()).filter(|&e| bom.edge_counts[e] > 0).collect();
    let loops_b = embedded_loops(g, &b_edges);
    let pe = d.p_e();
    let root = d.root_image();
    let mut candidates: Vec<Vec<SubgroupGraph>> = Vec::new();
    let push = |c: &mut Vec<Vec<SubgroupGraph>>, v: Vec<SubgroupGraph>| {
        if c.len() < MAX_CANDIDATES {
            c.push(v);
        }
    };
    let case;
    let outside = d.base_group_without(&pe);
    let comp_edges: Vec<usize> = {
        let mut uf = crate::free_group::UnionFind::new(g.num_vertices());
        for e in (0..g.num_edges()).filter(|e| !pe.contains(e)) {
            uf.union(g.edge(e).0, g.edge(e).1);
        }
        let r = uf.find(root);
        (0..g.num_edges()).filter(|e| !pe.contains(e) && uf.find(g.edge(*e).0) == r).collect()
    };
    if !d.e_omega.is_empty() {
        case = 1;
        let x = d.carrier_group(&d.e_omega);
        for lp in &loops_b {
            if lp.1.iter().all(|&l| comp_edges.contains(&crate::marked_graph::edge_of(l))) {
                push(&mut candidates, vec![a.clone(), x.clone(), outside.clone(), cyclic(g, lp), b.clone()]);
            }
        }
        for lp in &loops_b {
            for c in connecting_paths(g, root, lp.0, &pe) {
                let z = x.join(&SubgroupGraph::new(g.rank(), &[attached_loop(&d, &c, &lp.1)])?);
                push(&mut candidates, vec![a.clone(), x.clone(), z, cyclic(g, lp), b.clone()]);
            }
        }
    } else if outside.rank() > 1 {
        case = if d.e.len() == 1 { 3 } else { 2 };
        for &f in &comp_edges {
            let mut removed = pe.clone();
            removed.push(f);
            let smaller = d.base_group_without(&removed);
            if smaller.rank() + 1 != outside.rank() {
                continue;
            }
            let w = a.join(&smaller);
            let rest: Vec<usize> = comp_edges.iter().copied().filter(|&e| e != f).collect();
            for lp in embedded_loops(g, &rest) {
                let beta = cyclic(g, &lp);
                if lp.1.iter().all(|&l| b_edges.contains(&crate::marked_graph::edge_of(l))) {
                    push(&mut candidates, vec![a.clone(), w.clone(), beta.clone(), b.clone()]);
                }
                for &f2 in &comp_edges {
                    if uses(&lp, f2) || b_edges.contains(&f2) {
                        continue;
                    }
                    let big = d.base_group_without(&[f2]);
                    push(&mut candidates, vec![a.clone(), w.clone(), beta.clone(), big, b.clone()]);
                }
            }
        }
    } else if let Some((e, lp)) =
        d.e.iter()
            .flat_map(|&e| loops_b.iter().map(move |lp| (e, lp)))
            .find(|(e, lp)| !uses(lp, crate::marked_graph::edge_of(d.carrier_edges()[*e].1)))
    {
        case = 4;
        for &e0 in std::iter::once(&e).chain(d.e.iter()) {
            let pe0 = crate::marked_graph::edge_of(d.carrier_edges()[e0].1);
            let rest: Vec<usize> = d.e.iter().copied().filter(|&x| x != e0).collect();
            for l in std::iter::once(lp).chain(loops_b.iter()) {
                if uses(l, pe0) {
                    continue;
                }
                push(
                    &mut candidates,
                    vec![a.clone(), d.carrier_group(&rest), d.base_group_without(&[pe0]), cyclic(g, l), b.clone()],
                );
            }
        }
    } else {
        case = 5;
        for &e in &d.e {
            let pe0 = crate::marked_graph::edge_of(d.carrier_edges()[e].1);
            for &e2 in d.e.iter().filter(|&&x| x != e) {
                let t = d.carrier_group(&[e2]);
                for lp in &loops_b {
                    for c in connecting_paths(g, root, lp.0, &[pe0]) {
                        let z = t.join(&SubgroupGraph::new(g.rank(), &[attached_loop(&d, &c, &lp.1)])?);
                        push(&mut candidates, vec![a.clone(), t.clone(), z, b.clone()]);
                    }
                }
            }
        }
    }
    for cand in &candidates {
        if let Some(w) = ChainWitness::certify(cand, case) {
            return Ok(w);
        }
    }
    Err(SubfactorError::NoChain(format!("case {case}: {} candidates, none certified", candidates.len())))
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
    fn four_generator_example() {
        let g = MarkedGraph::<Q>::standard_rose(4);
        let a = sub(4, &["abaab", "cb", "abd"]);
        let b = sub(4, &["a", "c", "d"]);
        let w = distance4_chain(&a, &b, &g).unwrap();
        assert_eq!(w.case, 1);
        assert_eq!(w.len(), 4);
        w.verify().unwrap();
        assert_eq!(w.factors[1], sub(4, &["abaab"]));
        assert_eq!(w.factors[2], sub(4, &["a", "b"]));
    }

    #[test]
    fn four_generator_example_meets_b() {
        let a = sub(4, &["abaab", "cb", "abd"]);
        let b = sub(4, &["a", "c", "d"]);
        let w =
            Word::parse("abd").unwrap().inverse().mul(&Word::parse("abaab").unwrap()).mul(&Word::parse("BC").unwrap());
        assert_eq!(w, Word::parse("DaaC").unwrap());
        assert!(a.contains(&w) && b.contains(&w));
    }

    #[test]
    fn disjoint_basis_factors() {
        let g = MarkedGraph::<Q>::standard_rose(4);
        let w = distance4_chain(&sub(4, &["a"]), &sub(4, &["c"]), &g).unwrap();
        assert_eq!(w.len(), 2);
        w.verify().unwrap();
        let w = distance4_chain(&sub(4, &["a", "b"]), &sub(4, &["c", "d"]), &g).unwrap();
        assert_eq!(w.len(), 3);
        w.verify().unwrap();
    }

    #[test]
    fn conjugate_containment() {
        let big = sub(3, &["a", "b"]);
        let small = sub(3, &["caC"]);
        let g = conjugate_into(&small, &big).unwrap();
        assert!(big.contains(&Word::parse("caC").unwrap().conjugate_by(&g)));
        assert!(conjugate_into(&sub(3, &["c"]), &big).is_none());
    }

    #[test]
    fn preconditions() {
        let g = MarkedGraph::<Q>::standard_rose(4);
        let a = sub(4, &["abaab", "cb", "abd"]);
        assert_eq!(distance4_chain(&sub(4, &["a", "c", "d"]), &a, &g).unwrap_err(), SubfactorError::NotEmbedded);
        let r2 = MarkedGraph::<Q>::standard_rose(2);
        assert_eq!(
            distance4_chain(&sub(2, &["a"]), &sub(2, &["b"]), &r2).unwrap_err(),
            SubfactorError::RankTooSmall(2)
        );
    }
}
