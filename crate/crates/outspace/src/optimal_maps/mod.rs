//! Difference-of-markings maps, gates, tension graphs, optimal maps, the Lipschitz distance via
//! candidate loops, and transition matrices of self-maps.

mod candidates;
mod transition;

pub use candidates::{candidate_loops, lipschitz_distance, lipschitz_ratio, Candidate, CandidateKind, LipschitzValue};
pub use transition::{
    characteristic_polynomial, dilatation, eigenvector_exact, is_train_track_map, train_track_gates, transition_matrix,
    Dilatation, TransitionMatrix,
};

use crate::free_group::{Letter, Word};
use crate::marked_graph::{edge_of, MarkedGraph};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimalMapError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("edge {0} is collapsed to a point")]
    CollapsedEdge(usize),
    #[error("map is not a self-map of one graph")]
    NotSelfMap,
    #[error("transition matrix is reducible")]
    Reducible,
    #[error("no convergence within {0} moves")]
    Budget(usize),
    #[error("homotopy certificate failed at edge {0}")]
    Certificate(usize),
}

/// Edge-path map between marked graphs sending vertices to vertices and every edge at
/// constant speed onto a tight edge path. Vertex images are given by lifts: edge paths in the
/// target from its vertex 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMorphism<S: Scalar> {
    source: MarkedGraph<S>,
    target: MarkedGraph<S>,
    lifts: Vec<Word>,
    images: Vec<Word>,
    /// Loops at the target base representing `γ_u e γ_v⁻¹` for each source edge.
    anchors: Vec<Word>,
}

/// Partition of the directions at each vertex into gates. Directions are signed edge letters
/// leaving the vertex; gates are sorted and listed in order of their least direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateStructure {
    pub gates: Vec<Vec<Vec<Letter>>>,
}

impl GateStructure {
    pub fn from_germs<F: Fn(Letter) -> Option<Letter>>(g_dirs: Vec<Vec<Letter>>, germ: F) -> GateStructure {
        let gates = g_dirs
            .into_iter()
            .map(|dirs| {
                let mut by: BTreeMap<Option<Letter>, Vec<Letter>> = BTreeMap::new();
                let mut singles = Vec::new();
                for d in dirs {
                    match germ(d) {
                        Some(x) => by.entry(Some(x)).or_default().push(d),
                        None => singles.push(vec![d]),
                    }
                }
                let mut gs: Vec<Vec<Letter>> = by.into_values().chain(singles).collect();
                for g in gs.iter_mut() {
                    g.sort_unstable();
                }
                gs.sort_unstable_by_key(|g| g[0]);
                gs
            })
            .collect();
        GateStructure { gates }
    }

    pub fn num_gates(&self, v: usize) -> usize {
        self.gates[v].len()
    }

    /// Gate index of a direction at vertex `v`.
    pub fn gate_of(&self, v: usize, d: Letter) -> Option<usize> {
        self.gates[v].iter().position(|g| g.contains(&d))
    }

    /// Whether the turn `(d1, d2)` at `v` is illegal (both directions in one gate).
    pub fn illegal(&self, v: usize, d1: Letter, d2: Letter) -> bool {
        d1 != d2 && self.gate_of(v, d1).is_some() && self.gate_of(v, d1) == self.gate_of(v, d2)
    }

    pub fn min_gates(&self) -> usize {
        self.gates.iter().map(|g| g.len()).min().unwrap_or(0)
    }
}

/// Tighten an edge path.
fn tighten(parts: &[&[Letter]]) -> Word {
    let v: Vec<Letter> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    Word::new(&v)
}

impl<S: Scalar> GraphMorphism<S> {
    /// Build from vertex lifts; edge images are the tightened paths
    /// `lift(u)⁻¹ · f'(h(γ_u e γ_v⁻¹)) · lift(v)`.
    pub fn from_lifts(
        source: MarkedGraph<S>,
        target: MarkedGraph<S>,
        lifts: Vec<Word>,
    ) -> Result<GraphMorphism<S>, OptimalMapError> {
        if source.rank() != target.rank() {
            return Err(OptimalMapError::RankMismatch(source.rank(), target.rank()));
        }
        let lg = source.labeled();
        let tree = lg.spanning_tree();
        let paths: Vec<Word> = (0..source.num_vertices()).map(|v| Word::new(&lg.tree_path(&tree, v))).collect();
        let anchors: Vec<Word> = (0..source.num_edges())
            .map(|e| {
                let (u, v) = source.edge(e);
                let p = tighten(&[paths[u].letters(), &[e as Letter + 1], paths[v].inverse().letters()]);
                target.loop_of(&source.h_word(p.letters()))
            })
            .collect();
        let images = (0..source.num_edges())
            .map(|e| {
                let (u, v) = source.edge(e);
                tighten(&[lifts[u].inverse().letters(), anchors[e].letters(), lifts[v].letters()])
            })
            .collect();
        Ok(GraphMorphism { source, target, lifts, images, anchors })
    }

    pub fn source(&self) -> &MarkedGraph<S> {
        &self.source
    }
    pub fn target(&self) -> &MarkedGraph<S> {
        &self.target
    }
    pub fn lifts(&self) -> &[Word] {
        &self.lifts
    }
    /// Tight target edge path of each source edge.
    pub fn images(&self) -> &[Word] {
        &self.images
    }
    pub fn image(&self, e: usize) -> &Word {
        &self.images[e]
    }

    /// Target vertex hit by source vertex `v`.
    pub fn vertex_image(&self, v: usize) -> usize {
        match self.lifts[v].letters().last() {
            Some(&l) => self.target.end(l),
            None => 0,
        }
    }

    pub fn image_length(&self, e: usize) -> S {
        self.target.path_length(self.images[e].letters())
    }

    pub fn speed(&self, e: usize) -> S {
        self.image_length(e) / self.source.length(e).clone()
    }

    pub fn speeds(&self) -> Vec<S> {
        (0..self.source.num_edges()).map(|e| self.speed(e)).collect()
    }

    /// Lipschitz constant: the maximal speed.
    pub fn sigma(&self) -> S {
        self.speeds().into_iter().fold(S::zero(), S::max_of)
    }

    /// Maximally stretched edges.
    pub fn tension_graph(&self) -> Vec<usize> {
        let s = self.speeds();
        let m = s.iter().cloned().fold(S::zero(), S::max_of);
        (0..s.len()).filter(|&e| s[e] == m).collect()
    }

    /// Initial target direction of the image of source direction `d`, or `None` if the edge
    /// is collapsed.
    pub fn germ(&self, d: Letter) -> Option<Letter> {
        let w = &self.images[edge_of(d)];
        if d > 0 {
            w.letters().first().copied()
        } else {
            w.letters().last().map(|&l| -l)
        }
    }

    /// Gates: directions share a gate iff they have the same initial image direction. Only
    /// directions of tension-graph edges are grouped; the rest are singletons.
    pub fn gates(&self) -> GateStructure {
        let tension = self.tension_graph();
        let dirs = (0..self.source.num_vertices()).map(|v| self.source.directions(v)).collect();
        GateStructure::from_germs(
            dirs,
            |d| {
                if tension.binary_search(&edge_of(d)).is_ok() {
                    self.germ(d)
                } else {
                    None
                }
            },
        )
    }

    /// Tension graph is everything and every vertex has at least two gates.
    pub fn is_optimal(&self) -> bool {
        self.tension_graph().len() == self.source.num_edges() && self.gates().min_gates() >= 2
    }

    /// Check that the map is a tight edge-path map homotopic to the difference of markings:
    /// every image is a reduced path from the image of its start to the image of its end,
    /// and reads the source word of its edge up to a consistent vertex gauge.
    pub fn verify(&self) -> Result<(), OptimalMapError> {
        let lg = self.source.labeled();
        let tree = lg.spanning_tree();
        let gauge: Vec<Word> = (0..self.source.num_vertices())
            .map(|v| {
                let p = lg.tree_path(&tree, v);
                self.source.h_word(&p).inverse().mul(&self.target.h_word(self.lifts[v].letters()))
            })
            .collect();
        for e in 0..self.source.num_edges() {
            let (u, v) = self.source.edge(e);
            let w = &self.images[e];
            if Word::new(w.letters()) != *w {
                return Err(OptimalMapError::Certificate(e));
            }
            let mut cur = self.vertex_image(u);
            for &l in w.letters() {
                if self.target.start(l) != cur {
                    return Err(OptimalMapError::Certificate(e));
                }
                cur = self.target.end(l);
            }
            if cur != self.vertex_image(v) {
                return Err(OptimalMapError::Certificate(e));
            }
            let lhs = self.target.h_word(w.letters());
            let rhs = gauge[u].inverse().mul(&self.source.h_word(&[e as Letter + 1])).mul(&gauge[v]);
            if lhs != rhs {
                return Err(OptimalMapError::Certificate(e));
            }
        }
        Ok(())
    }

    /// Same map with new source lengths.
    pub fn with_source_lengths(&self, lengths: Vec<S>) -> GraphMorphism<S> {
        GraphMorphism { source: self.source.with_lengths(lengths), ..self.clone() }
    }

    /// Same map with the source rescaled by `c`.
    pub fn scale_source(&self, c: &S) -> GraphMorphism<S> {
        GraphMorphism { source: self.source.scaled(c), ..self.clone() }
    }

    /// Sum of image lengths.
    pub fn total_image_length(&self) -> S {
        (0..self.source.num_edges()).fold(S::zero(), |acc, e| acc + self.image_length(e))
    }

    /// Move the image of vertex `v` one edge along target direction `d`.
    fn moved(&self, v: usize, d: Letter) -> GraphMorphism<S> {
        let mut lifts = self.lifts.clone();
        lifts[v] = tighten(&[lifts[v].letters(), &[d]]);
        let mut images = self.images.clone();
        for (e, &(a, b)) in self.source.edges().iter().enumerate() {
            if a == v || b == v {
                images[e] = tighten(&[lifts[a].inverse().letters(), self.anchors[e].letters(), lifts[b].letters()]);
            }
        }
        GraphMorphism { lifts, images, ..self.clone() }
    }
}

/// The difference of markings from `g` to `h`. When both graphs have the same combinatorics
/// and inverse marking the identity map is returned; otherwise every vertex goes to vertex 0.
pub fn difference_of_markings<S: Scalar>(
    g: &MarkedGraph<S>,
    h: &MarkedGraph<S>,
) -> Result<GraphMorphism<S>, OptimalMapError> {
    if g.rank() != h.rank() {
        return Err(OptimalMapError::RankMismatch(g.rank(), h.rank()));
    }
    let same =
        g.num_vertices() == h.num_vertices() && g.edges() == h.edges() && g.inverse_marking() == h.inverse_marking();
    let lifts = if same {
        let lg = h.labeled();
        let tree = lg.spanning_tree();
        (0..g.num_vertices()).map(|v| Word::new(&lg.tree_path(&tree, v))).collect()
    } else {
        vec![Word::identity(); g.num_vertices()]
    };
    let m = GraphMorphism::from_lifts(g.clone(), h.clone(), lifts)?;
    debug_assert!(m.verify().is_ok());
    Ok(m)
}

/// Default move budget for [`make_optimal`].
pub const OPTIMIZE_BUDGET: usize = 100_000;

/// Homotopic optimal map. Vertex images slide one target edge at a time while the total image
/// length strictly drops; at a local minimum every vertex has at least two gates. Source
/// lengths are then rescaled proportionally to image lengths (volume kept), which makes every
/// edge maximally stretched and never increases σ. Already optimal maps are returned as is.
pub fn make_optimal<S: Scalar>(phi: &GraphMorphism<S>) -> Result<GraphMorphism<S>, OptimalMapError> {
    make_optimal_budget(phi, OPTIMIZE_BUDGET)
}

pub fn make_optimal_budget<S: Scalar>(
    phi: &GraphMorphism<S>,
    budget: usize,
) -> Result<GraphMorphism<S>, OptimalMapError> {
    if phi.is_optimal() {
        return Ok(phi.clone());
    }
    let mut cur = phi.clone();
    let mut total = cur.total_image_length();
    let mut moves = 0;
    loop {
        let mut improved = false;
        for v in 0..cur.source.num_vertices() {
            let p = cur.vertex_image(v);
            let mut best: Option<(S, GraphMorphism<S>)> = None;
            for d in cur.target.directions(p) {
                let m = cur.moved(v, d);
                let t = m.total_image_length();
                if t < total && best.as_ref().is_none_or(|(b, _)| t < *b) {
                    best = Some((t, m));
                }
            }
            if let Some((t, m)) = best {
                cur = m;
                total = t;
                improved = true;
                moves += 1;
                if moves > budget {
                    return Err(OptimalMapError::Budget(budget));
                }
            }
        }
        if !improved {
            break;
        }
    }
    let lens: Vec<S> = (0..cur.source.num_edges()).map(|e| cur.image_length(e)).collect();
    if let Some(e) = lens.iter().position(|l| l.is_zero()) {
        return Err(OptimalMapError::CollapsedEdge(e));
    }
    let vol = cur.source.volume();
    let new_lengths = lens.iter().map(|d| d.clone() * vol.clone() / total.clone()).collect();
    let out = cur.with_source_lengths(new_lengths);
    debug_assert!(out.is_optimal());
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::free_group::Automorphism;
    use crate::scalar::{Q, QL};

    pub(crate) fn example_map() -> GraphMorphism<QL> {
        let phi = Automorphism::parse(3, &["y", "z", "zx"], "xyz").unwrap();
        let l = QL::lambda();
        let lengths = vec![QL::one(), l.clone(), l.clone() * l.clone()];
        let g = MarkedGraph::rose(3, lengths.clone()).unwrap().normalized();
        let inv = phi.inverse();
        let h = MarkedGraph::rose_with_words(inv.images().to_vec(), g.lengths().to_vec()).unwrap();
        difference_of_markings(&g, &h).unwrap()
    }

    #[test]
    fn example_train_track_map() {
        let m = example_map();
        let w: Vec<String> = m.images().iter().map(|w| w.display_with("xyz")).collect();
        assert_eq!(w, vec!["y", "z", "zx"]);
        assert!(m.verify().is_ok());
        assert_eq!(m.sigma(), QL::lambda());
        assert_eq!(m.tension_graph(), vec![0, 1, 2]);
        assert!(m.is_optimal());
        assert_eq!(make_optimal(&m).unwrap(), m);
    }

    #[test]
    fn identity_map() {
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (0, 1), (0, 1)],
            vec![Q::ratio(1, 3); 3],
            vec![Word::identity(), Word::parse("a").unwrap(), Word::parse("b").unwrap()],
        )
        .unwrap();
        let m = difference_of_markings(&g, &g).unwrap();
        assert_eq!(m.sigma(), Q::int(1));
        assert!(m.is_optimal());
        assert_eq!(m.gates().gates[0].len(), 3);
    }

    #[test]
    fn slack_edge_not_optimal() {
        let g = MarkedGraph::<Q>::standard_rose(2);
        let h = g.with_lengths(vec![Q::ratio(1, 3), Q::ratio(2, 3)]);
        let m = difference_of_markings(&g, &h).unwrap();
        assert_eq!(m.tension_graph(), vec![1]);
        assert!(!m.is_optimal());
        let o = make_optimal(&m).unwrap();
        assert!(o.is_optimal());
        assert!(o.sigma() <= m.sigma());
    }

    #[test]
    fn optimizing_moves_vertex() {
        // Target rose whose petals read conjugates by a: the best vertex image is elsewhere.
        let g = MarkedGraph::<Q>::standard_rose(2);
        let h = MarkedGraph::rose_with_words(
            vec![Word::parse("a").unwrap(), Word::parse("aba").unwrap().mul(&Word::parse("AA").unwrap())],
            vec![Q::ratio(1, 2); 2],
        )
        .unwrap();
        let m = difference_of_markings(&g, &h).unwrap();
        let o = make_optimal(&m).unwrap();
        assert!(o.verify().is_ok());
        assert!(o.is_optimal());
        assert!(o.sigma() <= m.sigma());
    }
}
