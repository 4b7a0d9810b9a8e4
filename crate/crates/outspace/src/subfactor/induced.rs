use super::predicates::{edge_counts, GatedCover, PredicateFlags};
use super::SubfactorError;
use crate::folding::{FoldFrame, GreedyFoldingPath};
use crate::free_group::{SubgroupGraph, UnionFind};
use crate::marked_graph::{classify_attachment, core_cover, omega_data, Attachment, CoreCover, MarkedGraph, OmegaData};
use crate::optimal_maps::GateStructure;
use crate::scalar::Scalar;
use std::ops::Range;

/// Union of closed intervals on target edges, merged and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Footprint<S: Scalar> {
    pub intervals: Vec<(usize, S, S)>,
}

impl<S: Scalar> Footprint<S> {
    pub fn new(mut pieces: Vec<(usize, S, S)>) -> Footprint<S> {
        pieces.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.partial_cmp(&y.1).unwrap()));
        let mut out: Vec<(usize, S, S)> = Vec::new();
        for (e, a, b) in pieces {
            match out.last_mut() {
                Some((le, _, lb)) if *le == e && a <= *lb => {
                    if b > *lb {
                        *lb = b;
                    }
                }
                _ => out.push((e, a, b)),
            }
        }
        Footprint { intervals: out }
    }

    pub fn is_subset_of(&self, other: &Footprint<S>) -> bool {
        self.intervals.iter().all(|(e, a, b)| other.intervals.iter().any(|(f, c, d)| e == f && c <= a && b <= d))
    }
}

/// The cover of the graph at one sample time.
#[derive(Clone, Debug)]
pub struct InducedSample<S: Scalar> {
    pub time: S,
    /// Whether the time is a threshold crossing of a cover length rather than a base sample.
    pub cover_level: bool,
    pub cover: CoreCover<S>,
    pub omega: OmegaData,
    pub gates: GateStructure,
    pub flags: PredicateFlags,
    pub theta_rank: usize,
    pub theta_footprint: Footprint<S>,
    pub omega_footprint: Footprint<S>,
}

impl<S: Scalar> InducedSample<S> {
    pub fn attachment(&self) -> Attachment {
        classify_attachment(&self.cover)
    }
}

/// Covers `A|G_t` along a greedy folding path.
#[derive(Clone, Debug)]
pub struct InducedPath<S: Scalar> {
    pub subgroup: SubgroupGraph,
    pub samples: Vec<InducedSample<S>>,
}

/// Rank of the subgraph spanned by the flagged edges.
pub fn subgraph_rank<S: Scalar>(g: &MarkedGraph<S>, edges: &[bool]) -> usize {
    let mut uf = UnionFind::new(g.num_vertices());
    let mut cycles = 0;
    for (e, &on) in edges.iter().enumerate() {
        if on {
            let (u, v) = g.edge(e);
            if uf.union(u, v).is_none() {
                cycles += 1;
            }
        }
    }
    cycles
}

fn sample_at<S: Scalar>(
    a: &SubgroupGraph,
    frame: &FoldFrame<S>,
    tau: &S,
    time: S,
    cover_level: bool,
) -> Result<InducedSample<S>, SubfactorError> {
    let g = frame.graph_at(tau)?;
    let gates = frame.gates_at(tau);
    let cover = core_cover(a, &g)?;
    let omega = omega_data(&cover);
    let flags = GatedCover { cover: &cover, gates: &gates }.flags(&g.volume());
    let theta_rank = subgraph_rank(&g, &omega.theta_edges);
    let fp = frame.footprint_at(tau);
    let pick =
        |on: &[bool]| Footprint::new(fp.iter().enumerate().filter(|(i, _)| on[*i]).map(|(_, x)| x.clone()).collect());
    let theta_footprint = pick(&omega.theta_edges);
    let omega_footprint = pick(&omega.omega_edges);
    Ok(InducedSample { time, cover_level, cover, omega, gates, flags, theta_rank, theta_footprint, omega_footprint })
}

/// Local times in `(0, duration)` where a legal segment or a topological edge of the cover
/// reaches twice the volume of the base.
fn crossings<S: Scalar>(a: &SubgroupGraph, frame: &FoldFrame<S>, duration: &S) -> Result<Vec<S>, SubfactorError> {
    let mid = duration.clone() / S::from_int(2);
    let g = frame.graph_at(&mid)?;
    let gates = frame.gates_at(&mid);
    let cover = core_cover(a, &g)?;
    let gc = GatedCover { cover: &cover, gates: &gates };
    let l0 = frame.lengths_at(&S::zero());
    let l1 = frame.lengths_at(duration);
    let (v0, v1) = (S::sum(&l0), S::sum(&l1));
    let mut out = Vec::new();
    for path in gc.measured_paths() {
        let c = edge_counts(&path, g.num_edges());
        let weigh = |l: &[S]| c.iter().zip(l).fold(S::zero(), |acc, (&k, x)| acc + x.times(k));
        let (s0, s1) = (weigh(&l0), weigh(&l1));
        let den = (s1 - s0.clone()) - (v1.clone() - v0.clone()).times(2);
        if den.is_zero() {
            continue;
        }
        let s = (v0.times(2) - s0) / den;
        if s.is_positive() && s < S::one() {
            out.push(s * duration.clone());
        }
    }
    Ok(out)
}

pub fn induced_path<S: Scalar>(
    a: &SubgroupGraph,
    path: &GreedyFoldingPath<S>,
) -> Result<InducedPath<S>, SubfactorError> {
    let mut samples = Vec::new();
    if path.intervals().is_empty() {
        samples.push(sample_at(a, &path.states()[0], &S::zero(), S::zero(), false)?);
        return Ok(InducedPath { subgroup: a.clone(), samples });
    }
    for (i, iv) in path.intervals().iter().enumerate() {
        let mut local = crossings(a, &iv.frame, &iv.duration)?;
        local.sort_by(|x, y| x.partial_cmp(y).unwrap());
        local.dedup();
        samples.push(sample_at(a, &path.states()[i], &S::zero(), iv.start.clone(), false)?);
        let mut prev = S::zero();
        for t in local.iter().chain(std::iter::once(&iv.duration)) {
            let m = (prev.clone() + t.clone()) / S::from_int(2);
            samples.push(sample_at(a, &iv.frame, &m, iv.start.clone() + m.clone(), false)?);
            if *t != iv.duration {
                samples.push(sample_at(a, &iv.frame, t, iv.start.clone() + t.clone(), true)?);
            }
            prev = t.clone();
        }
    }
    let last = path.states().len() - 1;
    samples.push(sample_at(a, &path.states()[last], &S::zero(), path.end_time(), false)?);
    Ok(InducedPath { subgroup: a.clone(), samples })
}

/// Boundaries of the three segments as sample indices: `[0, beta)` has P1, `[gamma, len)`
/// has P3, the rest is the middle segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalClassification<S: Scalar> {
    pub times: Vec<S>,
    pub flags: Vec<PredicateFlags>,
    pub beta: usize,
    pub gamma: usize,
    pub violations: Vec<String>,
}

impl<S: Scalar> IntervalClassification<S> {
    pub fn from_flags(times: Vec<S>, flags: Vec<PredicateFlags>) -> IntervalClassification<S> {
        let n = flags.len();
        let beta = flags.iter().take_while(|f| f.p1).count();
        let gamma = flags.iter().position(|f| f.p3).unwrap_or(n);
        let mut violations = Vec::new();
        for (i, f) in flags.iter().enumerate() {
            if f.p1 && f.p3 {
                violations.push(format!("sample {i}: P1 and P3 together"));
            }
            if f.p1 && i > beta {
                violations.push(format!("sample {i}: P1 after the initial segment"));
            }
            if !f.p3 && i > gamma {
                violations.push(format!("sample {i}: P3 fails inside the terminal segment"));
            }
            if i >= beta && i < gamma && !f.p2 {
                violations.push(format!("sample {i}: P2 fails in the middle segment"));
            }
        }
        IntervalClassification { times, flags, beta, gamma: gamma.max(beta), violations }
    }

    pub fn beta_time(&self) -> Option<&S> {
        self.times.get(self.beta)
    }
    pub fn gamma_time(&self) -> Option<&S> {
        self.times.get(self.gamma)
    }
    pub fn middle(&self) -> Range<usize> {
        self.beta..self.gamma
    }
}

pub fn classify_intervals<S: Scalar>(ip: &InducedPath<S>) -> IntervalClassification<S> {
    IntervalClassification::from_flags(
        ip.samples.iter().map(|s| s.time.clone()).collect(),
        ip.samples.iter().map(|s| s.flags).collect(),
    )
}

impl<S: Scalar> InducedPath<S> {
    /// Monotonicity along the path: the image Θ only shrinks in the target, and on the
    /// middle segment the rank of Θ never drops and the doubly covered locus Ω only grows.
    /// Containments are compared through images in the target, which the fold maps respect.
    pub fn monotonicity_violations(&self, cls: &IntervalClassification<S>) -> Vec<String> {
        let mut out = Vec::new();
        for (i, w) in self.samples.windows(2).enumerate() {
            if !w[1].theta_footprint.is_subset_of(&w[0].theta_footprint) {
                out.push(format!("sample {i}: image of the cover grows"));
            }
        }
        let mid = cls.middle();
        for i in mid.start..mid.end.saturating_sub(1) {
            let (s, t) = (&self.samples[i], &self.samples[i + 1]);
            if t.theta_rank < s.theta_rank {
                out.push(format!("sample {i}: rank of the image drops"));
            }
            if !s.omega_footprint.is_subset_of(&t.omega_footprint) {
                out.push(format!("sample {i}: doubly covered locus shrinks"));
            }
        }
        out
    }

    /// Number of changes of the homotopy type of Ω̃ (rank and component count) along the
    /// path, and the maximal component count.
    pub fn omega_tilde_changes(&self) -> (usize, usize) {
        let kinds: Vec<(usize, usize)> = self
            .samples
            .iter()
            .map(|s| {
                let edges = s.cover.edges();
                let comps = s.omega.omega_tilde_components(&edges);
                let rank: usize = comps.iter().map(|(v, e)| e.len() + 1 - v.len()).sum();
                (comps.len(), rank)
            })
            .collect();
        let changes = kinds.windows(2).filter(|w| w[0] != w[1]).count();
        (changes, kinds.iter().map(|k| k.0).max().unwrap_or(0))
    }
}

/// Whether every edge of the base is covered at least twice.
pub fn doubly_covered<S: Scalar>(a: &SubgroupGraph, g: &MarkedGraph<S>) -> Result<bool, SubfactorError> {
    Ok(omega_data(&core_cover(a, g)?).omega_is_everything())
}

/// Maximal initial part of the middle segment on which the subgroup is adjoined.
pub fn adjoined_interval<S: Scalar>(ip: &InducedPath<S>, cls: &IntervalClassification<S>) -> Range<usize> {
    let mid = cls.middle();
    let end = mid.clone().find(|&i| !ip.samples[i].attachment().adjoined).unwrap_or(mid.end);
    mid.start..end
}
