use super::edgelet::{stallings_path, EdgeletGraph, LiberalPath, StepKind, TargetPoint};
use super::{snap_path, FoldingError};
use crate::free_group::Letter;
use crate::marked_graph::{collapse, edge_of, MarkedGraph, SplittingId};
use crate::optimal_maps::GraphMorphism;
use crate::scalar::Scalar;

/// Number of preimages of a target point. A point at a vertex is moved to the midpoint of
/// its edge first; the flag reports whether that happened.
pub fn preimage_count<S: Scalar>(phi: &GraphMorphism<S>, y: &TargetPoint<S>) -> Result<(usize, bool), FoldingError> {
    let target = phi.target();
    if y.edge >= target.num_edges() || y.pos < S::zero() || y.pos > *target.length(y.edge) {
        return Err(FoldingError::BadPoint(format!("edge {} position out of range", y.edge)));
    }
    let perturbed = y.pos.is_zero() || y.pos == *target.length(y.edge);
    let count = phi.images().iter().map(|w| w.letters().iter().filter(|&&l| edge_of(l) == y.edge).count()).sum();
    Ok((count, perturbed))
}

/// One fold along the Stallings path that shrinks the preimage of the tracked point. Both
/// one-edge splittings are collapses of a common refinement (the partially folded stage), so
/// they are at distance at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigZagStep {
    pub stage: usize,
    pub before: SplittingId,
    pub after: SplittingId,
    /// Edge count of the common refinement.
    pub refinement_edges: usize,
}

/// Certified bound `a·k + b` on the distance from the one-edge splittings of the source to
/// those of the target, where `k` is the preimage count of a target point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreimageBound {
    pub count: usize,
    pub a: usize,
    pub b: usize,
    pub bound: usize,
    pub witness: Vec<ZigZagStep>,
}

fn stage_splitting<S: Scalar>(path: &LiberalPath<S>, i: usize, e: usize) -> Result<SplittingId, FoldingError> {
    let g = path.stage_graph(i)?;
    collapse(&g, &[e]).id().ok_or_else(|| FoldingError::Invariant("collapse is not a one-edge splitting".into()))
}

/// Stage with the two folded edgelets identified along their first halves only. Returns the
/// graph and the indices of the shared half and of the two remaining halves.
fn partial_fold<S: Scalar>(
    g: &EdgeletGraph,
    target: &MarkedGraph<S>,
    d1: Letter,
    d2: Letter,
) -> Result<(MarkedGraph<S>, usize, usize, usize), FoldingError> {
    let (e1, e2) = (edge_of(d1), edge_of(d2));
    let x = g.start(d1);
    let w = g.num_vertices;
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut words = Vec::new();
    for (i, &(u, l, v)) in g.edges.iter().enumerate() {
        if i != e1 && i != e2 {
            edges.push((u, v));
            lengths.push(target.length(edge_of(l)).clone());
            words.push(target.h_word(&[l]));
        }
    }
    let germ = g.germ(d1);
    let eps = edge_of(germ);
    let len = target.length(eps).clone();
    let half = len.clone() * S::from_ratio(1, 2);
    let (p0, p1) = if germ > 0 { (S::zero(), len.clone()) } else { (len.clone(), S::zero()) };
    let shared = edges.len();
    edges.push((x, w));
    lengths.push(half.clone());
    words.push(target.h_word(snap_path(eps, &p0, &half, &len).letters()));
    for d in [d1, d2] {
        edges.push((w, g.end(d)));
        lengths.push(half.clone());
        words.push(target.h_word(snap_path(eps, &half, &p1, &len).letters()));
    }
    let h = MarkedGraph::new(target.rank(), w + 1, edges, lengths, words)?;
    Ok((h, shared, shared + 1, shared + 2))
}

/// Zig-zag certificate along the Stallings path: follow the edgelet over the first preimage
/// of `y` and, at every fold that merges it with another preimage, certify the move between
/// one-edge splittings by a common refinement. There are at most `k - 1` such moves, and the
/// end splittings belong to the source and the target, giving the bound `k + 1`.
pub fn preimage_bound_in_s<S: Scalar>(
    phi: &GraphMorphism<S>,
    y: &TargetPoint<S>,
) -> Result<PreimageBound, FoldingError> {
    let (count, _) = preimage_count(phi, y)?;
    if count == 0 {
        return Err(FoldingError::BadPoint("point has no preimage".into()));
    }
    let path = stallings_path(phi)?;
    let target = path.target();
    let g0 = &path.stages()[0];
    let mut tracked = (0..g0.num_edges())
        .find(|&e| edge_of(g0.edges[e].1) == y.edge)
        .ok_or_else(|| FoldingError::Invariant("no edgelet over the point".into()))?;
    let mut witness = Vec::new();
    for (i, step) in path.steps().iter().enumerate() {
        let StepKind::Fold(d1, d2) = step.kind else { unreachable!() };
        let g = &path.stages()[i];
        let next = edge_of(step.edge_map[tracked]);
        if edge_of(d1) == tracked || edge_of(d2) == tracked {
            let (h, shared, r1, r2) = partial_fold(g, target, d1, d2)?;
            let rest = if edge_of(d1) == tracked { r1 } else { r2 };
            let before = collapse(&h, &[rest]).id().unwrap();
            let after = collapse(&h, &[shared]).id().unwrap();
            if before != stage_splitting(&path, i, tracked)? || after != stage_splitting(&path, i + 1, next)? {
                return Err(FoldingError::Invariant(format!("zig-zag refinement fails at stage {i}")));
            }
            witness.push(ZigZagStep { stage: i, before, after, refinement_edges: h.num_edges() });
        }
        tracked = next;
    }
    if witness.len() + 1 > count {
        return Err(FoldingError::Invariant("more merges than preimages".into()));
    }
    Ok(PreimageBound { count, a: 1, b: 1, bound: count + 1, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_maps::tests::example_map;
    use crate::scalar::QL;

    #[test]
    fn worked_example_counts() {
        let phi = example_map();
        let len = phi.target().length(0).clone();
        let mid = TargetPoint { edge: 0, pos: len * QL::from_ratio(1, 2) };
        assert_eq!(preimage_count(&phi, &mid).unwrap(), (1, false));
        let z = TargetPoint { edge: 2, pos: QL::zero() };
        assert_eq!(preimage_count(&phi, &z).unwrap(), (2, true));
        let b = preimage_bound_in_s(
            &phi,
            &TargetPoint { edge: 2, pos: phi.target().length(2).clone() * QL::from_ratio(1, 3) },
        )
        .unwrap();
        assert_eq!(b.bound, 3);
        assert_eq!(b.witness.len(), 1);
    }
}
