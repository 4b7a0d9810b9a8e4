use super::collapse::{Seg as ViewSeg, SegGraph, SegView};
use super::{snap_path, FoldingError};
use crate::free_group::{Letter, UnionFind, Word};
use crate::marked_graph::{edge_of, MarkedGraph};
use crate::optimal_maps::{lipschitz_ratio, GateStructure, GraphMorphism};
use crate::par::Mode;
use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// Largest number of events simulated before giving up.
pub const EVENT_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum FoldEventKind {
    /// A folded segment reached the far vertex of an edge.
    SegmentReachesVertex,
    /// An edge folding from both ends vanished, joining two fold fronts.
    EdgeCollapse,
    /// Directions from distinct vertices met in one gate.
    GateMerge,
    /// The number of illegal gates dropped.
    IllegalTurnResolved,
}

/// One combinatorial change; `edge` is the index of the vanished edge in the interval frame
/// (for gate-level changes, the least interval edge involved).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct FoldDiff {
    pub edge: usize,
    pub kind: FoldEventKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldEvent<S: Scalar> {
    /// Unnormalized fold parameter.
    pub time: S,
    pub kind: FoldEventKind,
    pub diffs: Vec<FoldDiff>,
}

/// Combinatorial graph over which positions move affinely with the local parameter `τ`.
/// Edge `i` maps isometrically onto target edge `target_edge[i]` between the positions
/// `start_pos[i] + start_rate[i]·τ` and `end_pos[i] + end_rate[i]·τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldFrame<S: Scalar> {
    pub rank: usize,
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub target_edge: Vec<usize>,
    pub start_pos: Vec<S>,
    pub start_rate: Vec<i64>,
    pub end_pos: Vec<S>,
    pub end_rate: Vec<i64>,
    /// Target edge path of each edge after snapping interior points to initial vertices.
    pub paths: Vec<Word>,
    /// Inverse marking pulled back from the target.
    pub words: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldInterval<S: Scalar> {
    pub start: S,
    pub duration: S,
    pub frame: FoldFrame<S>,
}

/// Greedy folding path guided by an optimal morphism. `states[i]` is the graph right after
/// event `i − 1` (`states[0]` is the subdivided source), and `intervals[i]` runs from
/// `states[i]` to `states[i + 1]`.
#[derive(Clone, Debug)]
pub struct GreedyFoldingPath<S: Scalar> {
    guide: GraphMorphism<S>,
    states: Vec<FoldFrame<S>>,
    intervals: Vec<FoldInterval<S>>,
    events: Vec<FoldEvent<S>>,
    initial_volume: S,
}

/// Outcome of [`GreedyFoldingPath::check_invariants`].
#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    pub events: usize,
    pub lipschitz_pairs: usize,
    pub max_arclength_error: f64,
}

#[derive(Clone, Debug)]
struct Seg<S> {
    u: usize,
    v: usize,
    eps: usize,
    a: S,
    b: S,
    /// Interval edge id and interval vertices of the two ends, for event bookkeeping.
    origin: (usize, usize, usize),
}

impl<S: Scalar> Seg<S> {
    fn sign(&self) -> Letter {
        if self.b > self.a {
            1
        } else {
            -1
        }
    }
    fn start_germ(&self) -> Letter {
        self.sign() * (self.eps as Letter + 1)
    }
    fn germ(&self, at_start: bool) -> Letter {
        if at_start {
            self.start_germ()
        } else {
            -self.start_germ()
        }
    }
    fn pos(&self, at_start: bool) -> &S {
        if at_start {
            &self.a
        } else {
            &self.b
        }
    }
}

struct Gate {
    vertex: usize,
    germ: Letter,
    ends: Vec<(usize, bool)>,
}

fn folding_gates<S: Scalar>(segs: &[Seg<S>]) -> Vec<Gate> {
    let mut by: BTreeMap<(usize, Letter), Vec<(usize, bool)>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        by.entry((s.u, s.germ(true))).or_default().push((i, true));
        by.entry((s.v, s.germ(false))).or_default().push((i, false));
    }
    by.into_iter().filter(|(_, e)| e.len() >= 2).map(|((vertex, germ), ends)| Gate { vertex, germ, ends }).collect()
}

fn frame_from<S: Scalar>(
    rank: usize,
    target: &MarkedGraph<S>,
    nv: usize,
    segs: &[Seg<S>],
    rates: &[(i64, i64)],
    sample: &S,
) -> FoldFrame<S> {
    let mut paths = Vec::with_capacity(segs.len());
    let mut words = Vec::with_capacity(segs.len());
    for (s, &(da, db)) in segs.iter().zip(rates) {
        let a = s.a.clone() + sample.times(da);
        let b = s.b.clone() + sample.times(db);
        let p = snap_path(s.eps, &a, &b, target.length(s.eps));
        words.push(target.h_word(p.letters()));
        paths.push(p);
    }
    FoldFrame {
        rank,
        num_vertices: nv,
        edges: segs.iter().map(|s| (s.u, s.v)).collect(),
        target_edge: segs.iter().map(|s| s.eps).collect(),
        start_pos: segs.iter().map(|s| s.a.clone()).collect(),
        start_rate: rates.iter().map(|r| r.0).collect(),
        end_pos: segs.iter().map(|s| s.b.clone()).collect(),
        end_rate: rates.iter().map(|r| r.1).collect(),
        paths,
        words,
    }
}

impl<S: Scalar> FoldFrame<S> {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    fn positions(&self, i: usize, tau: &S) -> (S, S) {
        (
            self.start_pos[i].clone() + tau.times(self.start_rate[i]),
            self.end_pos[i].clone() + tau.times(self.end_rate[i]),
        )
    }

    pub fn lengths_at(&self, tau: &S) -> Vec<S> {
        (0..self.num_edges())
            .map(|i| {
                let (a, b) = self.positions(i, tau);
                (b - a).abs()
            })
            .collect()
    }

    pub fn volume_at(&self, tau: &S) -> S {
        S::sum(&self.lengths_at(tau))
    }

    /// Image of each edge in the target as `(target edge, low, high)` at local time `tau`.
    pub fn footprint_at(&self, tau: &S) -> Vec<(usize, S, S)> {
        (0..self.num_edges())
            .map(|i| {
                let (a, b) = self.positions(i, tau);
                if a <= b {
                    (self.target_edge[i], a, b)
                } else {
                    (self.target_edge[i], b, a)
                }
            })
            .collect()
    }

    /// Initial target direction of each edge at local time `tau`.
    pub fn start_germs_at(&self, tau: &S) -> Vec<Letter> {
        (0..self.num_edges())
            .map(|i| {
                let (a, b) = self.positions(i, tau);
                let e = self.target_edge[i] as Letter + 1;
                if b > a {
                    e
                } else {
                    -e
                }
            })
            .collect()
    }

    fn directions(&self) -> Vec<Vec<Letter>> {
        let mut d = vec![Vec::new(); self.num_vertices];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            d[u].push(i as Letter + 1);
            d[v].push(-(i as Letter + 1));
        }
        d
    }

    /// Gates of the map to the target at local time `tau`, in the direction convention of
    /// [`MarkedGraph`] built by [`FoldFrame::graph_at`].
    pub fn gates_at(&self, tau: &S) -> GateStructure {
        let germs = self.start_germs_at(tau);
        GateStructure::from_germs(self.directions(), |d| {
            let g = germs[edge_of(d)];
            Some(if d > 0 { g } else { -g })
        })
    }

    /// Unnormalized marked graph at local time `tau`.
    pub fn graph_at(&self, tau: &S) -> Result<MarkedGraph<S>, FoldingError> {
        Ok(MarkedGraph::new(
            self.rank,
            self.num_vertices,
            self.edges.clone(),
            self.lengths_at(tau),
            self.words.clone(),
        )?)
    }

    /// The frame as segments of target edges, for collapses.
    pub fn seg_graph(&self, tau: &S) -> SegGraph<S> {
        let germs = self.start_germs_at(tau);
        SegGraph {
            num_vertices: self.num_vertices,
            segs: (0..self.num_edges())
                .map(|i| {
                    let (a, b) = self.positions(i, tau);
                    ViewSeg {
                        u: self.edges[i].0,
                        v: self.edges[i].1,
                        target_edge: self.target_edge[i],
                        start_germ: germs[i],
                        start_pos: a,
                        end_pos: b,
                        path: self.paths[i].clone(),
                    }
                })
                .collect(),
        }
    }
}

impl<S: Scalar> SegView<S> for GreedyFoldingPath<S> {
    fn seg_graphs(&self) -> Vec<SegGraph<S>> {
        self.sample_times()
            .iter()
            .map(|t| {
                let (f, tau) = self.locate(t);
                f.seg_graph(&tau)
            })
            .collect()
    }
    fn target_edges(&self) -> usize {
        self.guide.target().num_edges()
    }
}

/// Greedy folding path of an optimal morphism, simulated exactly. The source is scaled by
/// σ so that every edge maps isometrically; at every moment each gate with two or more
/// directions folds at unit speed.
pub fn greedy_folding_path<S: Scalar>(phi: &GraphMorphism<S>) -> Result<GreedyFoldingPath<S>, FoldingError> {
    if !phi.is_optimal() {
        return Err(FoldingError::NotOptimal);
    }
    let target = phi.target();
    let src = phi.source();
    let rank = src.rank();
    let mut nv = src.num_vertices();
    let mut segs: Vec<Seg<S>> = Vec::new();
    for e in 0..src.num_edges() {
        let (u, v) = src.edge(e);
        let w = phi.image(e).letters();
        let mut cur = u;
        for (i, &l) in w.iter().enumerate() {
            let next = if i + 1 == w.len() {
                v
            } else {
                nv += 1;
                nv - 1
            };
            let eps = edge_of(l);
            let len = target.length(eps).clone();
            let (a, b) = if l > 0 { (S::zero(), len) } else { (len, S::zero()) };
            let id = segs.len();
            segs.push(Seg { u: cur, v: next, eps, a, b, origin: (id, cur, next) });
            cur = next;
        }
    }
    let zero_rates = |n: usize| vec![(0i64, 0i64); n];
    let initial = frame_from(rank, target, nv, &segs, &zero_rates(segs.len()), &S::zero());
    let initial_volume = initial.volume_at(&S::zero());
    let mut states = vec![initial];
    let mut intervals = Vec::new();
    let mut events = Vec::new();
    let mut time = S::zero();
    loop {
        let gates = folding_gates(&segs);
        if gates.is_empty() {
            break;
        }
        if events.len() >= EVENT_BUDGET {
            return Err(FoldingError::EventBudget(EVENT_BUDGET));
        }
        // Interval graph: every folding gate gets a front vertex and a folded edge.
        let mut iv: Vec<Seg<S>> = segs.clone();
        let mut rates = zero_rates(iv.len());
        let mut inv = nv;
        for g in &gates {
            let front = inv;
            inv += 1;
            let sgn = g.germ.signum() as i64;
            let (s0, st0) = g.ends[0];
            let p = segs[s0].pos(st0).clone();
            for &(s, st) in &g.ends {
                if st {
                    iv[s].u = front;
                    rates[s].0 = sgn;
                } else {
                    iv[s].v = front;
                    rates[s].1 = sgn;
                }
            }
            iv.push(Seg { u: g.vertex, v: front, eps: edge_of(g.germ), a: p.clone(), b: p, origin: (0, 0, 0) });
            rates.push((0, sgn));
        }
        for (i, s) in iv.iter_mut().enumerate() {
            s.origin = (i, s.u, s.v);
        }
        let slope = |i: usize| -> i64 {
            let (da, db) = rates[i];
            if iv[i].a == iv[i].b {
                (db - da).abs()
            } else {
                iv[i].sign() as i64 * (db - da)
            }
        };
        let mut delta: Option<S> = None;
        for i in 0..iv.len() {
            let sl = slope(i);
            if sl < 0 {
                let t = (iv[i].b.clone() - iv[i].a.clone()).abs() / S::from_int(-sl);
                delta = Some(match delta {
                    Some(d) => S::min_of(d, t),
                    None => t,
                });
            }
        }
        let delta = delta.expect("a folding gate shortens some edge");
        let mid = delta.clone() / S::from_int(2);
        let frame = frame_from(rank, target, inv, &iv, &rates, &mid);
        intervals.push(FoldInterval { start: time.clone(), duration: delta.clone(), frame });
        time = time + delta.clone();

        // Advance to the event and contract vanished edges.
        let mut at: Vec<Seg<S>> = iv
            .iter()
            .zip(&rates)
            .map(|(s, &(da, db))| Seg {
                a: s.a.clone() + delta.times(da),
                b: s.b.clone() + delta.times(db),
                ..s.clone()
            })
            .collect();
        let mut diffs = Vec::new();
        let mut uf = UnionFind::new(inv);
        for (i, s) in at.iter().enumerate() {
            if s.a == s.b {
                if uf.union(s.u, s.v).is_none() {
                    return Err(FoldingError::LoopCollapsed);
                }
                let kind =
                    if slope(i) == -2 { FoldEventKind::EdgeCollapse } else { FoldEventKind::SegmentReachesVertex };
                diffs.push(FoldDiff { edge: i, kind });
            }
        }
        at.retain(|s| s.a != s.b);
        for s in at.iter_mut() {
            s.u = uf.find(s.u);
            s.v = uf.find(s.v);
        }
        merge_collinear(&mut at, target);
        let (n2, renum) = renumber(&mut at, inv);
        let _ = renum;
        let next_gates = folding_gates(&at);
        for g in &next_gates {
            let origins: std::collections::BTreeSet<usize> =
                g.ends.iter().map(|&(s, st)| if st { at[s].origin.1 } else { at[s].origin.2 }).collect();
            if origins.len() >= 2 {
                let edge = g.ends.iter().map(|&(s, _)| at[s].origin.0).min().unwrap();
                diffs.push(FoldDiff { edge, kind: FoldEventKind::GateMerge });
            }
        }
        if next_gates.len() < gates.len() {
            diffs.push(FoldDiff { edge: 0, kind: FoldEventKind::IllegalTurnResolved });
        }
        diffs.sort();
        diffs.dedup();
        let kind = diffs.first().map(|d| d.kind).unwrap_or(FoldEventKind::IllegalTurnResolved);
        events.push(FoldEvent { time: time.clone(), kind, diffs });
        segs = at;
        nv = n2;
        for (i, s) in segs.iter_mut().enumerate() {
            s.origin = (i, s.u, s.v);
        }
        states.push(frame_from(rank, target, nv, &segs, &zero_rates(segs.len()), &S::zero()));
    }
    // The final graph must be the target: one full segment per target edge.
    let mut seen = vec![false; target.num_edges()];
    for s in &segs {
        let full = (s.a.is_zero() && s.b == *target.length(s.eps)) || (s.b.is_zero() && s.a == *target.length(s.eps));
        if !full || seen[s.eps] {
            return Err(FoldingError::TargetMismatch);
        }
        seen[s.eps] = true;
    }
    if seen.iter().any(|&b| !b) {
        return Err(FoldingError::TargetMismatch);
    }
    Ok(GreedyFoldingPath { guide: phi.clone(), states, intervals, events, initial_volume })
}

/// Merge valence-two vertices at interior points of a target edge where the path continues
/// straight through.
fn merge_collinear<S: Scalar>(segs: &mut Vec<Seg<S>>, target: &MarkedGraph<S>) {
    loop {
        let mut ends: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
        for (i, s) in segs.iter().enumerate() {
            ends.entry(s.u).or_default().push((i, true));
            ends.entry(s.v).or_default().push((i, false));
        }
        let mut found = None;
        for (&x, e) in &ends {
            if e.len() != 2 || e[0].0 == e[1].0 {
                continue;
            }
            let (s1, st1) = e[0];
            let (s2, st2) = e[1];
            let g1 = segs[s1].germ(st1);
            let g2 = segs[s2].germ(st2);
            let p = segs[s1].pos(st1);
            let len = target.length(segs[s1].eps);
            if g1 == -g2 && p.is_positive() && p < len {
                found = Some((x, s1, st1, s2, st2));
                break;
            }
        }
        let Some((_, s1, st1, s2, st2)) = found else { return };
        // Walk from the far end of s1 through x to the far end of s2.
        let (fu, fa, fo) = if st1 {
            (segs[s1].v, segs[s1].b.clone(), segs[s1].origin.2)
        } else {
            (segs[s1].u, segs[s1].a.clone(), segs[s1].origin.1)
        };
        let (fv, fb, fo2) = if st2 {
            (segs[s2].v, segs[s2].b.clone(), segs[s2].origin.2)
        } else {
            (segs[s2].u, segs[s2].a.clone(), segs[s2].origin.1)
        };
        let id = segs[s1].origin.0.min(segs[s2].origin.0);
        let merged = Seg { u: fu, v: fv, eps: segs[s1].eps, a: fa, b: fb, origin: (id, fo, fo2) };
        let (hi, lo) = if s1 > s2 { (s1, s2) } else { (s2, s1) };
        segs.remove(hi);
        segs.remove(lo);
        segs.push(merged);
    }
}

/// Renumber used vertices compactly, keeping their relative order.
fn renumber<S: Scalar>(segs: &mut [Seg<S>], nv: usize) -> (usize, Vec<Option<usize>>) {
    let mut used = vec![false; nv];
    for s in segs.iter() {
        used[s.u] = true;
        used[s.v] = true;
    }
    let mut map = vec![None; nv];
    let mut k = 0;
    for v in 0..nv {
        if used[v] {
            map[v] = Some(k);
            k += 1;
        }
    }
    for s in segs.iter_mut() {
        s.u = map[s.u].unwrap();
        s.v = map[s.v].unwrap();
    }
    (k, map)
}

impl<S: Scalar> GreedyFoldingPath<S> {
    pub fn guide(&self) -> &GraphMorphism<S> {
        &self.guide
    }
    pub fn events(&self) -> &[FoldEvent<S>] {
        &self.events
    }
    pub fn intervals(&self) -> &[FoldInterval<S>] {
        &self.intervals
    }
    pub fn states(&self) -> &[FoldFrame<S>] {
        &self.states
    }
    /// Unnormalized volume of the subdivided, rescaled source.
    pub fn initial_volume(&self) -> S {
        self.initial_volume.clone()
    }
    /// Parameter value at which the target is reached.
    pub fn end_time(&self) -> S {
        self.events.last().map(|e| e.time.clone()).unwrap_or_else(S::zero)
    }

    /// Frame and local parameter describing the graph at time `t`. Event times resolve to the
    /// state after the event.
    pub fn locate(&self, t: &S) -> (&FoldFrame<S>, S) {
        for (i, iv) in self.intervals.iter().enumerate() {
            if *t == iv.start {
                return (&self.states[i], S::zero());
            }
            if *t > iv.start && *t < iv.start.clone() + iv.duration.clone() {
                return (&iv.frame, t.clone() - iv.start.clone());
            }
        }
        (self.states.last().unwrap(), S::zero())
    }

    pub fn graph_at(&self, t: &S) -> Result<MarkedGraph<S>, FoldingError> {
        let (f, tau) = self.locate(t);
        f.graph_at(&tau)
    }

    pub fn gates_at(&self, t: &S) -> GateStructure {
        let (f, tau) = self.locate(t);
        f.gates_at(&tau)
    }

    pub fn volume_at(&self, t: &S) -> S {
        let (f, tau) = self.locate(t);
        f.volume_at(&tau)
    }

    /// Arclength of the normalized path, `log(vol(0) / vol(t))`.
    pub fn arclength(&self, t: &S) -> f64 {
        (self.initial_volume.to_f64() / self.volume_at(t).to_f64()).ln()
    }

    /// Sample times: the start, every interval midpoint and every event.
    pub fn sample_times(&self) -> Vec<S> {
        let mut out = vec![S::zero()];
        for iv in &self.intervals {
            out.push(iv.start.clone() + iv.duration.clone() / S::from_int(2));
            out.push(iv.start.clone() + iv.duration.clone());
        }
        out
    }

    /// Check the path invariants: strictly increasing event times, constant combinatorics and
    /// gates inside every interval, `vol(t) ≤ vol(0) − t`, the final graph equal to the
    /// target, and Lipschitz distance between normalized samples equal to the arclength
    /// difference (exactly, as the volume ratio). At most `max_pairs` consecutive sample
    /// pairs are compared with the candidate-loop distance.
    pub fn check_invariants(&self, max_pairs: usize) -> Result<PathReport, FoldingError> {
        let bad = |m: &str| Err(FoldingError::Invariant(m.to_string()));
        let mut prev = S::zero();
        for (i, e) in self.events.iter().enumerate() {
            if e.time <= prev && i > 0 || e.time <= S::zero() {
                return bad("event times not increasing");
            }
            prev = e.time.clone();
        }
        for iv in &self.intervals {
            let t1 = iv.duration.clone() / S::from_int(3);
            let t2 = t1.times(2);
            let l1 = iv.frame.lengths_at(&t1);
            let l2 = iv.frame.lengths_at(&t2);
            if l1.iter().chain(&l2).any(|l| !l.is_positive()) {
                return bad("edge length not positive inside an interval");
            }
            if iv.frame.gates_at(&t1) != iv.frame.gates_at(&t2) {
                return bad("gate structure changes inside an interval");
            }
        }
        let v0 = self.initial_volume.clone();
        let times = self.sample_times();
        for t in &times {
            if !self.events.is_empty() && *t < self.end_time() && self.volume_at(t) > v0.clone() - t.clone() {
                return bad("volume above vol(0) - t");
            }
        }
        let last = self.graph_at(&self.end_time())?.normalized();
        let tgt = self.guide.target().normalized();
        let one = S::one();
        if lipschitz_ratio(&last.smoothed(), &tgt, Mode::Sequential).ratio != one
            || lipschitz_ratio(&tgt, &last.smoothed(), Mode::Sequential).ratio != one
        {
            return bad("final graph differs from target");
        }
        let mut pairs = 0;
        let mut err: f64 = 0.0;
        let step = (times.len() / max_pairs.max(1)).max(1);
        let picked: Vec<&S> = times.iter().step_by(step).collect();
        for w in picked.windows(2) {
            let (t1, t2) = (w[0], w[1]);
            let g1 = self.graph_at(t1)?;
            let g2 = self.graph_at(t2)?;
            let (v1, v2) = (g1.volume(), g2.volume());
            let r = lipschitz_ratio(&g1.smoothed().normalized(), &g2.smoothed().normalized(), Mode::Sequential);
            if r.ratio != v1.clone() / v2.clone() {
                return Err(FoldingError::Invariant(format!(
                    "Lipschitz ratio {} differs from volume ratio {}",
                    r.ratio,
                    v1 / v2
                )));
            }
            let ds = self.arclength(t2) - self.arclength(t1);
            err = err.max((r.log() - ds).abs());
            pairs += 1;
        }
        if err > 1e-9 {
            return bad("arclength disagrees with Lipschitz distance");
        }
        Ok(PathReport { events: self.events.len(), lipschitz_pairs: pairs, max_arclength_error: err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_maps::difference_of_markings;
    use crate::scalar::{Q, QL};

    fn monogon() -> GraphMorphism<Q> {
        let src = MarkedGraph::rose_with_words(
            vec![Word::parse("a").unwrap(), Word::parse("ab").unwrap()],
            vec![Q::ratio(1, 3), Q::ratio(2, 3)],
        )
        .unwrap();
        let tgt = MarkedGraph::<Q>::rose(2, vec![Q::ratio(1, 3), Q::ratio(1, 3)]).unwrap();
        difference_of_markings(&src, &tgt).unwrap()
    }

    #[test]
    fn identity_has_no_events() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        let p = greedy_folding_path(&difference_of_markings(&g, &g).unwrap()).unwrap();
        assert!(p.events().is_empty());
        assert_eq!(p.end_time(), Q::int(0));
        p.check_invariants(4).unwrap();
    }

    #[test]
    fn monogon_single_event() {
        let m = monogon();
        assert!(m.is_optimal());
        let p = greedy_folding_path(&m).unwrap();
        assert_eq!(p.events().len(), 1);
        assert_eq!(p.end_time(), Q::ratio(1, 3));
        assert_eq!(p.events()[0].kind, FoldEventKind::SegmentReachesVertex);
        let f = &p.intervals()[0].frame;
        // Both a-segments shrink, the folded edge grows and the b-segment is idle.
        let mut slopes: Vec<i64> = (0..f.num_edges())
            .map(|i| {
                let l0 = f.lengths_at(&Q::int(0))[i].clone();
                let l1 = f.lengths_at(&Q::ratio(1, 10))[i].clone();
                ((l1 - l0) * Q::int(10)).floor().try_into().unwrap()
            })
            .collect();
        slopes.sort();
        assert_eq!(slopes, vec![-1, -1, 0, 1]);
        assert_eq!(p.volume_at(&Q::ratio(1, 6)), Q::int(1) - Q::ratio(1, 6));
        p.check_invariants(8).unwrap();
    }

    #[test]
    fn worked_example_is_self_similar() {
        let m = crate::optimal_maps::tests::example_map();
        let p = greedy_folding_path(&m).unwrap();
        let rep = p.check_invariants(64).unwrap();
        assert!(rep.events >= 1);
        let l = QL::lambda();
        assert_eq!(p.initial_volume(), l.clone());
        let end = p.graph_at(&p.end_time()).unwrap();
        assert_eq!(end.volume(), QL::one());
        assert!((p.arclength(&p.end_time()) - crate::scalar::lambda_f64().ln()).abs() < 1e-12);
        // The start rescaled by 1/λ is isometric to the end as a metric graph.
        let start = p.graph_at(&QL::zero()).unwrap().smoothed();
        let mut a: Vec<QL> = start.lengths().iter().map(|x| x.clone() / l.clone()).collect();
        let mut b: Vec<QL> = end.smoothed().lengths().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
