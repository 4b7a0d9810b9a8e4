use crate::free_group::{Letter, Word};
use crate::marked_graph::MarkedGraph;
use crate::par::{self, Mode};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CandidateKind {
    Embedded,
    FigureEight,
    Barbell,
}

/// Candidate loop of a graph as a closed edge path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub path: Vec<Letter>,
}

/// Exact stretch ratio and the candidate realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzValue<S: Scalar> {
    pub ratio: S,
    pub witness: Candidate,
}

impl<S: Scalar> LipschitzValue<S> {
    /// Natural log of the ratio, for reporting.
    pub fn log(&self) -> f64 {
        self.ratio.to_f64().ln()
    }
}

/// Simple cycles, each listed once, starting with its least edge traversed forward.
fn simple_cycles<S: Scalar>(g: &MarkedGraph<S>) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for e0 in 0..g.num_edges() {
        let l0 = e0 as Letter + 1;
        let start = g.start(l0);
        let mut visited = vec![false; g.num_vertices()];
        visited[start] = true;
        let mut path = vec![l0];
        if g.end(l0) == start {
            out.push(path);
            continue;
        }
        visited[g.end(l0)] = true;
        extend(g, e0, start, &mut visited, &mut path, &mut out);
    }
    out
}

fn extend<S: Scalar>(
    g: &MarkedGraph<S>,
    e0: usize,
    start: usize,
    visited: &mut [bool],
    path: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
) {
    let cur = g.end(*path.last().unwrap());
    for d in g.directions(cur) {
        let e = d.unsigned_abs() as usize - 1;
        if e <= e0 || g.start(d) == g.end(d) {
            continue;
        }
        let next = g.end(d);
        if next == start {
            let mut c = path.clone();
            c.push(d);
            out.push(c);
        } else if !visited[next] {
            visited[next] = true;
            path.push(d);
            extend(g, e0, start, visited, path, out);
            path.pop();
            visited[next] = false;
        }
    }
}

fn cycle_vertices<S: Scalar>(g: &MarkedGraph<S>, c: &[Letter]) -> Vec<usize> {
    let mut v: Vec<usize> = c.iter().map(|&l| g.start(l)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Rotate a cycle to start at vertex `w`.
fn rotate_to<S: Scalar>(g: &MarkedGraph<S>, c: &[Letter], w: usize) -> Vec<Letter> {
    let i = c.iter().position(|&l| g.start(l) == w).expect("vertex on cycle");
    c[i..].iter().chain(c[..i].iter()).copied().collect()
}

fn reversed(c: &[Letter]) -> Vec<Letter> {
    c.iter().rev().map(|&l| -l).collect()
}

/// Simple paths from `u` to `v` avoiding `blocked` in their interiors.
fn simple_paths<S: Scalar>(g: &MarkedGraph<S>, u: usize, v: usize, blocked: &[bool]) -> Vec<Vec<Letter>> {
    fn go<S: Scalar>(
        g: &MarkedGraph<S>,
        cur: usize,
        v: usize,
        blocked: &[bool],
        seen: &mut Vec<bool>,
        path: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        for d in g.directions(cur) {
            let next = g.end(d);
            if next == v {
                let mut p = path.clone();
                p.push(d);
                out.push(p);
            } else if !blocked[next] && !seen[next] {
                seen[next] = true;
                path.push(d);
                go(g, next, v, blocked, seen, path, out);
                path.pop();
                seen[next] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; g.num_vertices()];
    seen[u] = true;
    go(g, u, v, blocked, &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Embedded loops, figure-eights and barbells of `g`, in a fixed order.
pub fn candidate_loops<S: Scalar>(g: &MarkedGraph<S>) -> Vec<Candidate> {
    let cycles = simple_cycles(g);
    let verts: Vec<Vec<usize>> = cycles.iter().map(|c| cycle_vertices(g, c)).collect();
    let mut out: Vec<Candidate> =
        cycles.iter().map(|c| Candidate { kind: CandidateKind::Embedded, path: c.clone() }).collect();
    for i in 0..cycles.len() {
        for j in i + 1..cycles.len() {
            let common: Vec<usize> = verts[i].iter().filter(|v| verts[j].contains(v)).copied().collect();
            if common.len() == 1 {
                let w = common[0];
                let a = rotate_to(g, &cycles[i], w);
                let b = rotate_to(g, &cycles[j], w);
                for bb in [b.clone(), reversed(&b)] {
                    let mut p = a.clone();
                    p.extend(bb);
                    out.push(Candidate { kind: CandidateKind::FigureEight, path: p });
                }
            } else if common.is_empty() {
                let mut blocked = vec![false; g.num_vertices()];
                for &v in verts[i].iter().chain(verts[j].iter()) {
                    blocked[v] = true;
                }
                for &u in &verts[i] {
                    for &v in &verts[j] {
                        for bar in simple_paths(g, u, v, &blocked) {
                            let a = rotate_to(g, &cycles[i], u);
                            let b = rotate_to(g, &cycles[j], v);
                            for bb in [b.clone(), reversed(&b)] {
                                let mut p = a.clone();
                                p.extend(&bar);
                                p.extend(bb);
                                p.extend(reversed(&bar));
                                out.push(Candidate { kind: CandidateKind::Barbell, path: p });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Largest stretch `ℓ_{h}(α) / ℓ_{g}(α)` over the candidate loops α of `g`; ties go to the
/// earliest candidate.
pub fn lipschitz_ratio<S: Scalar>(g: &MarkedGraph<S>, h: &MarkedGraph<S>, mode: Mode) -> LipschitzValue<S> {
    assert_eq!(g.rank(), h.rank());
    let cands = candidate_loops(g);
    let ratios = par::map(mode, &cands, |c| {
        let w: Word = g.h_word(&c.path);
        h.translation_length(&w) / g.path_length(&c.path)
    });
    let mut best = 0;
    for i in 1..ratios.len() {
        if ratios[i] > ratios[best] {
            best = i;
        }
    }
    LipschitzValue { ratio: ratios[best].clone(), witness: cands[best].clone() }
}

/// Lipschitz distance `log σ` from `g` to `h`, with the exact ratio.
pub fn lipschitz_distance<S: Scalar>(g: &MarkedGraph<S>, h: &MarkedGraph<S>) -> LipschitzValue<S> {
    lipschitz_ratio(g, h, Mode::Sequential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn rose_candidates() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        let c = candidate_loops(&g);
        assert_eq!(c.iter().filter(|c| c.kind == CandidateKind::Embedded).count(), 3);
        assert_eq!(c.iter().filter(|c| c.kind == CandidateKind::FigureEight).count(), 6);
        assert_eq!(c.len(), 9);
    }

    #[test]
    fn theta_candidates() {
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (0, 1), (0, 1)],
            vec![Q::ratio(1, 3); 3],
            vec![Word::identity(), Word::parse("a").unwrap(), Word::parse("b").unwrap()],
        )
        .unwrap();
        let c = candidate_loops(&g);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn distances() {
        let g = MarkedGraph::<Q>::standard_rose(3);
        assert_eq!(lipschitz_distance(&g, &g).ratio, Q::int(1));
        let h = g.with_lengths(vec![Q::ratio(1, 2), Q::ratio(1, 4), Q::ratio(1, 4)]);
        let d = lipschitz_distance(&g, &h);
        assert_eq!(d.ratio, Q::ratio(3, 2));
        assert!((d.log() - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(lipschitz_distance(&h, &g).ratio, Q::ratio(4, 3));
    }
}
