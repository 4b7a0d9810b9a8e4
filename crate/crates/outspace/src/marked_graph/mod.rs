//! Marked metric graphs, subgroup covers with their Θ/Ω/Ω̃ data, splittings and colors.

mod color;
mod cover;
mod splitting;

pub use color::{color, double_cover, same_color, Color, DoubleCover};
pub use cover::{
    classify_attachment, core_cover, omega_data, Attachment, AttachmentLabel, CarrierEdge, CoreCover, OmegaData,
};
pub use splitting::{collapse, one_edge_splittings, Splitting, SplittingId};

use crate::free_group::{label_order, Automorphism, FreeGroupError, LabeledGraph, Letter, Word};
use crate::scalar::Scalar;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarkedGraphError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge {0} has nonpositive length")]
    NonpositiveLength(usize),
    #[error("fundamental group has rank {found}, expected {expected}")]
    WrongRank { expected: usize, found: usize },
    #[error("inverse marking is not a homotopy equivalence")]
    InvalidMarking,
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("input lengths and edges disagree")]
    Shape,
    #[error("subgroup is trivial")]
    TrivialSubgroup,
    #[error("nonzero class required")]
    ZeroClass,
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// Marked metric graph. Edge `e` runs from `edges[e].0` to `edges[e].1`; as a path letter it is
/// `e+1` forward and `-(e+1)` backward. The inverse marking sends every edge to a word and every
/// vertex to the rose vertex; the marking sends generator `i` to a loop at vertex 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedGraph<S: Scalar> {
    rank: usize,
    nv: usize,
    edges: Vec<(usize, usize)>,
    lengths: Vec<S>,
    inverse_marking: Vec<Word>,
    marking: Vec<Word>,
}

/// Signed edge letter for edge `e` traversed forward or backward.
pub fn edge_letter(e: usize, forward: bool) -> Letter {
    if forward {
        e as Letter + 1
    } else {
        -(e as Letter + 1)
    }
}

/// Edge index of a signed edge letter.
pub fn edge_of(l: Letter) -> usize {
    l.unsigned_abs() as usize - 1
}

impl<S: Scalar> MarkedGraph<S> {
    pub fn new(
        rank: usize,
        nv: usize,
        edges: Vec<(usize, usize)>,
        lengths: Vec<S>,
        inverse_marking: Vec<Word>,
    ) -> Result<MarkedGraph<S>, MarkedGraphError> {
        if lengths.len() != edges.len() || inverse_marking.len() != edges.len() {
            return Err(MarkedGraphError::Shape);
        }
        for &(u, v) in &edges {
            if u >= nv {
                return Err(MarkedGraphError::BadVertex(u));
            }
            if v >= nv {
                return Err(MarkedGraphError::BadVertex(v));
            }
        }
        for (i, l) in lengths.iter().enumerate() {
            if !l.is_positive() {
                return Err(MarkedGraphError::NonpositiveLength(i));
            }
        }
        for w in &inverse_marking {
            Word::checked(rank, w.letters())?;
        }
        let found = edges.len() as i64 - nv as i64 + 1;
        if found != rank as i64 {
            return Err(MarkedGraphError::WrongRank { expected: rank, found: found.max(0) as usize });
        }
        let mut g = MarkedGraph { rank, nv, edges, lengths, inverse_marking, marking: Vec::new() };
        let lg = g.labeled();
        if lg.num_vertices() != nv || lg.components().len() != 1 {
            return Err(MarkedGraphError::Disconnected);
        }
        let loops = lg.basis();
        let images: Vec<Word> = loops.iter().map(|p| g.h_word(p.letters())).collect();
        let alpha = Automorphism::new(rank, images).map_err(|_| MarkedGraphError::InvalidMarking)?;
        let inv = alpha.inverse();
        g.marking = (0..rank).map(|i| crate::free_group::substitute(&loops, inv.image(i))).collect();
        debug_assert!(g.validate_marking());
        Ok(g)
    }

    /// Rose with the identity marking.
    pub fn rose(rank: usize, lengths: Vec<S>) -> Result<MarkedGraph<S>, MarkedGraphError> {
        let words = (0..rank).map(Word::generator).collect();
        MarkedGraph::rose_with_words(words, lengths)
    }

    /// Rose whose petal `j` is sent to `words[j]` by the inverse marking.
    pub fn rose_with_words(words: Vec<Word>, lengths: Vec<S>) -> Result<MarkedGraph<S>, MarkedGraphError> {
        let n = words.len();
        MarkedGraph::new(n, 1, vec![(0, 0); n], lengths, words)
    }

    /// Rose with all petals of length `1/n`.
    pub fn standard_rose(rank: usize) -> MarkedGraph<S> {
        MarkedGraph::rose(rank, vec![S::from_ratio(1, rank as i64); rank]).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn num_vertices(&self) -> usize {
        self.nv
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }
    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }
    pub fn length(&self, e: usize) -> &S {
        &self.lengths[e]
    }
    pub fn inverse_marking(&self) -> &[Word] {
        &self.inverse_marking
    }
    /// Loop at vertex 0 representing generator `i`, as a word in edge letters.
    pub fn marking(&self) -> &[Word] {
        &self.marking
    }

    /// Start vertex of a signed edge letter.
    pub fn start(&self, l: Letter) -> usize {
        let (u, v) = self.edges[edge_of(l)];
        if l > 0 {
            u
        } else {
            v
        }
    }
    /// End vertex of a signed edge letter.
    pub fn end(&self, l: Letter) -> usize {
        self.start(-l)
    }

    /// The graph as a labeled graph whose label alphabet is the edge set.
    pub fn labeled(&self) -> LabeledGraph {
        let edges: Vec<(usize, Letter, usize)> =
            self.edges.iter().enumerate().map(|(e, &(u, v))| (u, e as Letter + 1, v)).collect();
        LabeledGraph::fold_edges(self.edges.len(), self.nv, 0, &edges).0
    }

    /// Inverse marking applied to an edge path.
    pub fn h_word(&self, path: &[Letter]) -> Word {
        let mut v = Vec::new();
        for &l in path {
            let w = &self.inverse_marking[edge_of(l)];
            if l > 0 {
                v.extend_from_slice(w.letters());
            } else {
                v.extend(w.letters().iter().rev().map(|&x| -x));
            }
        }
        Word::new(&v)
    }

    /// Marking applied to a word: a tightened edge loop at vertex 0.
    pub fn loop_of(&self, w: &Word) -> Word {
        crate::free_group::substitute(&self.marking, w)
    }

    /// Whether the inverse marking undoes the marking on every generator.
    pub fn validate_marking(&self) -> bool {
        (0..self.rank).all(|i| self.h_word(self.marking[i].letters()) == Word::generator(i))
    }

    pub fn path_length(&self, path: &[Letter]) -> S {
        path.iter().fold(S::zero(), |acc, &l| acc + self.lengths[edge_of(l)].clone())
    }

    /// Length of the immersed loop in the conjugacy class of `w`.
    pub fn translation_length(&self, w: &Word) -> S {
        let (c, _) = self.loop_of(w).cyclic_reduce();
        self.path_length(c.letters())
    }

    pub fn volume(&self) -> S {
        S::sum(&self.lengths)
    }

    pub fn normalized(&self) -> MarkedGraph<S> {
        let v = self.volume();
        self.with_lengths(self.lengths.iter().map(|l| l.clone() / v.clone()).collect())
    }

    pub fn scaled(&self, c: &S) -> MarkedGraph<S> {
        self.with_lengths(self.lengths.iter().map(|l| l.clone() * c.clone()).collect())
    }

    pub fn with_lengths(&self, lengths: Vec<S>) -> MarkedGraph<S> {
        assert_eq!(lengths.len(), self.edges.len());
        assert!(lengths.iter().all(|l| l.is_positive()));
        MarkedGraph { lengths, ..self.clone() }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MarkedGraph<T> {
        MarkedGraph {
            rank: self.rank,
            nv: self.nv,
            edges: self.edges.clone(),
            lengths: self.lengths.iter().map(f).collect(),
            inverse_marking: self.inverse_marking.clone(),
            marking: self.marking.clone(),
        }
    }

    /// Outgoing directions at `v` as signed edge letters, in label order.
    pub fn directions(&self, v: usize) -> Vec<Letter> {
        let mut d = Vec::new();
        for l in label_order(self.edges.len()) {
            if self.start(l) == v {
                d.push(l);
            }
        }
        d
    }

    pub fn valence(&self, v: usize) -> usize {
        self.directions(v).len()
    }

    /// Every vertex has valence at least three.
    pub fn is_natural(&self) -> bool {
        (0..self.nv).all(|v| self.valence(v) >= 3)
    }

    /// Remove valence-two vertices, concatenating edges and their words. Vertex 0 is kept
    /// only if it has valence other than two; the marking is rebased accordingly.
    pub fn smoothed(&self) -> MarkedGraph<S> {
        let mut chains: Vec<(usize, usize, Vec<Letter>)> = Vec::new();
        let natural: Vec<bool> = (0..self.nv).map(|v| self.valence(v) != 2).collect();
        if !natural.iter().any(|&b| b) {
            // A circle: keep a single vertex and a single edge.
            let mut path = Vec::new();
            let mut l: Letter = 1;
            loop {
                path.push(l);
                let v = self.end(l);
                if v == self.start(1) {
                    break;
                }
                l = *self.directions(v).iter().find(|&&d| d != -l).unwrap();
            }
            let len = self.path_length(&path);
            let w = self.h_word(&path);
            return MarkedGraph::new(self.rank, 1, vec![(0, 0)], vec![len], vec![w]).unwrap();
        }
        let mut used = vec![false; self.edges.len()];
        for v in 0..self.nv {
            if !natural[v] {
                continue;
            }
            for d in self.directions(v) {
                if used[edge_of(d)] {
                    continue;
                }
                let mut path = vec![d];
                used[edge_of(d)] = true;
                let mut cur = self.end(d);
                let mut last = d;
                while !natural[cur] {
                    let next = *self.directions(cur).iter().find(|&&x| x != -last).unwrap();
                    used[edge_of(next)] = true;
                    path.push(next);
                    last = next;
                    cur = self.end(next);
                }
                chains.push((v, cur, path));
            }
        }
        let keep: Vec<usize> = (0..self.nv).filter(|&v| natural[v]).collect();
        let idx = |v: usize| keep.iter().position(|&x| x == v).unwrap();
        let edges = chains.iter().map(|(u, v, _)| (idx(*u), idx(*v))).collect();
        let lengths = chains.iter().map(|(_, _, p)| self.path_length(p)).collect();
        let words = chains.iter().map(|(_, _, p)| self.h_word(p)).collect();
        MarkedGraph::new(self.rank, keep.len(), edges, lengths, words).unwrap()
    }

    /// Breadth-first vertex distances (in edges) from `v`.
    pub fn hop_distances(&self, v: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.nv];
        d[v] = 0;
        let mut q = VecDeque::from([v]);
        while let Some(x) = q.pop_front() {
            for l in self.directions(x) {
                let y = self.end(l);
                if d[y] == usize::MAX {
                    d[y] = d[x] + 1;
                    q.push_back(y);
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn theta_graph_marking() {
        // Theta graph: three edges from vertex 0 to vertex 1.
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (0, 1), (0, 1)],
            vec![Q::ratio(1, 3); 3],
            vec![Word::identity(), Word::parse("a").unwrap(), Word::parse("b").unwrap()],
        )
        .unwrap();
        assert!(g.validate_marking());
        assert_eq!(g.translation_length(&Word::parse("ab").unwrap()), Q::ratio(4, 3));
        assert_eq!(g.translation_length(&Word::parse("aB").unwrap()), Q::ratio(2, 3));
        assert!(g.is_natural());
    }

    #[test]
    fn rejects_non_equivalence() {
        let bad = MarkedGraph::rose_with_words(
            vec![Word::parse("a").unwrap(), Word::parse("aab").unwrap().mul(&Word::parse("a").unwrap())],
            vec![Q::ratio(1, 2); 2],
        );
        assert!(bad.is_ok());
        let bad = MarkedGraph::<Q>::rose_with_words(
            vec![Word::parse("aa").unwrap(), Word::parse("b").unwrap()],
            vec![Q::ratio(1, 2); 2],
        );
        assert_eq!(bad.unwrap_err(), MarkedGraphError::InvalidMarking);
    }

    #[test]
    fn smoothing_subdivided_rose() {
        // Rose on a, b with the a-loop subdivided.
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (1, 0), (0, 0)],
            vec![Q::ratio(1, 4), Q::ratio(1, 4), Q::ratio(1, 2)],
            vec![Word::parse("a").unwrap(), Word::identity(), Word::parse("b").unwrap()],
        )
        .unwrap();
        let s = g.smoothed();
        assert_eq!(s.num_vertices(), 1);
        assert_eq!(s.num_edges(), 2);
        assert_eq!(s.volume(), Q::int(1));
    }
}
