use super::chain::conjugate_into;
use super::SubfactorError;
use crate::free_group::{fiber_product, LabeledGraph, Letter, SubgroupGraph, Word};
use crate::marked_graph::{core_cover, one_edge_splittings, same_color, MarkedGraph, Splitting, SplittingId};
use crate::scalar::Q;
use crate::whitehead::{complement, is_free_factor_bool};
use num_integer::Integer;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Whether a projection between two free factors is known to be defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definedness {
    DefinedSameColor,
    /// A certified lower bound above 4 on the factor distance.
    DefinedFar,
    Unknown,
}

/// Lower bound on the distance in the free factor complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LowerBound {
    pub value: u32,
    /// Whether the bound relies on the unproved evenness of distances between corank-one
    /// factors.
    pub uses_parity: bool,
}

/// Elementary lower bound: 1 if not conjugate, 2 if not nested, 3 if additionally no proper
/// factor is nested with both (checked for two corank-one factors whose conjugates meet
/// trivially). With `assume_parity`, an odd bound for two corank-one factors is raised by one.
pub fn distance_lower_bound(a: &SubgroupGraph, b: &SubgroupGraph, assume_parity: bool) -> LowerBound {
    let n = a.ambient_rank();
    if a.is_conjugate_to(b) {
        return LowerBound { value: 0, uses_parity: false };
    }
    if conjugate_into(a, b).is_some() || conjugate_into(b, a).is_some() {
        return LowerBound { value: 1, uses_parity: false };
    }
    let corank_one = a.rank() + 1 == n && b.rank() + 1 == n;
    let disjoint = fiber_product(a, b).map(|cs| cs.iter().all(|c| c.rank == 0)).unwrap_or(false);
    if !(corank_one && disjoint) {
        return LowerBound { value: 2, uses_parity: false };
    }
    if assume_parity {
        LowerBound { value: 4, uses_parity: true }
    } else {
        LowerBound { value: 3, uses_parity: false }
    }
}

pub fn definedness_gate(a: &SubgroupGraph, b: &SubgroupGraph) -> Definedness {
    if same_color(a, b) {
        Definedness::DefinedSameColor
    } else if distance_lower_bound(a, b, false).value > 4 {
        Definedness::DefinedFar
    } else {
        Definedness::Unknown
    }
}

/// One-edge splittings of `A` read off `A|G` for a rose `G` in which `B` is embedded.
#[derive(Clone, Debug)]
pub struct ProjectionSet {
    pub graph: MarkedGraph<Q>,
    pub gate: Definedness,
    pub splittings: Vec<Splitting>,
}

impl ProjectionSet {
    /// Distinct splittings up to conjugacy.
    pub fn ids(&self) -> BTreeSet<SplittingId> {
        self.splittings.iter().filter_map(|s| s.id()).collect()
    }

    /// Nontrivial vertex groups, in the coordinates of the basis of `A`, one per conjugacy
    /// class.
    pub fn factors(&self) -> Vec<SubgroupGraph> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.splittings {
            for h in s.vertex_groups() {
                if !h.is_trivial() && seen.insert(h.conjugacy_core()) {
                    out.push(h.clone());
                }
            }
        }
        out
    }
}

/// Rose on a basis of `B` followed by a basis of a complement.
pub fn embedding_rose(b: &SubgroupGraph, complement_basis: &[Word]) -> Result<MarkedGraph<Q>, SubfactorError> {
    let mut words = b.basis();
    words.extend(complement_basis.iter().cloned());
    let n = words.len();
    Ok(MarkedGraph::rose_with_words(words, vec![Q::ratio(1, n as i64); n])?)
}

fn check_inputs(a: &SubgroupGraph, b: &SubgroupGraph) -> Result<(), SubfactorError> {
    let n = a.ambient_rank();
    for h in [a, b] {
        if h.is_trivial() || h.rank() >= n || !is_free_factor_bool(h) {
            return Err(SubfactorError::NotFreeFactor);
        }
    }
    if a.is_conjugate_to(b) {
        return Err(SubfactorError::SelfProjection);
    }
    Ok(())
}

/// Projection of `B` to the splittings of `A`, using the given complement basis of `B`
/// (a Whitehead complement when `None`).
pub fn projection_s_with(
    a: &SubgroupGraph,
    b: &SubgroupGraph,
    complement_basis: Option<&[Word]>,
) -> Result<ProjectionSet, SubfactorError> {
    check_inputs(a, b)?;
    let d = match complement_basis {
        Some(w) => w.to_vec(),
        None => complement(b)?.basis(),
    };
    let graph = embedding_rose(b, &d)?;
    let cover = core_cover(a, &graph)?;
    let splittings = one_edge_splittings(&cover.as_marked_graph());
    Ok(ProjectionSet { graph, gate: definedness_gate(a, b), splittings })
}

pub fn projection_s(a: &SubgroupGraph, b: &SubgroupGraph) -> Result<ProjectionSet, SubfactorError> {
    projection_s_with(a, b, None)
}

/// Projection of `B` to the free factors of `A`: vertex groups of [`projection_s`], in the
/// coordinates of the basis of `A`.
pub fn projection_f(a: &SubgroupGraph, b: &SubgroupGraph) -> Result<Vec<SubgroupGraph>, SubfactorError> {
    Ok(projection_s(a, b)?.factors())
}

/// Complement bases of `B` obtained from a given one by Nielsen moves that fix `B`:
/// multiplying a complement generator by a generator of `B` or by another complement
/// generator, on either side.
pub fn twisted_complement<R: rand::Rng>(b: &SubgroupGraph, d: &[Word], moves: usize, rng: &mut R) -> Vec<Word> {
    let bb = b.basis();
    let mut d = d.to_vec();
    for _ in 0..moves {
        let i = rng.gen_range(0..d.len());
        let pool = bb.len() + d.len() - 1;
        let mut k = rng.gen_range(0..pool);
        let m = if k < bb.len() {
            bb[k].clone()
        } else {
            k -= bb.len();
            if k >= i {
                k += 1;
            }
            d[k].clone()
        };
        let m = if rng.gen_bool(0.5) { m.inverse() } else { m };
        d[i] = if rng.gen_bool(0.5) { d[i].mul(&m) } else { m.mul(&d[i]) };
    }
    d
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

/// Farey distance from `∞ = 1/0` to `p/q`, by breadth-first search over the ladder of
/// intermediate fractions of the continued fraction, which contains every geodesic.
fn farey_from_infinity(p: i64, q: i64) -> u32 {
    let (mut p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    if q == 0 {
        return 0;
    }
    if q == 1 {
        return 1;
    }
    p = p.mod_floor(&q);
    let mut verts: Vec<(i64, i64)> = vec![(1, 0), (0, 1), (1, 1)];
    let (mut h2, mut k2, mut h1, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let (mut x, mut y) = (p, q);
    // Continued fraction of p/q in [0, 1); the first partial quotient is 0.
    let mut quotients = Vec::new();
    while y != 0 {
        let (a, r) = x.div_mod_floor(&y);
        quotients.push(a);
        x = y;
        y = r;
    }
    for &a in &quotients {
        for j in 0..=a {
            verts.push((h2 + j * h1, k2 + j * k1));
        }
        let (h, k) = (a * h1 + h2, a * k1 + k2);
        h2 = h1;
        k2 = k1;
        h1 = h;
        k1 = k;
    }
    verts.sort();
    verts.dedup();
    let target = (p, q);
    let adj = |u: (i64, i64), v: (i64, i64)| (u.0 * v.1 - u.1 * v.0).abs() == 1;
    let mut dist: BTreeMap<(i64, i64), u32> = BTreeMap::from([((1, 0), 0)]);
    let mut queue = VecDeque::from([(1i64, 0i64)]);
    while let Some(u) = queue.pop_front() {
        if u == target {
            return dist[&u];
        }
        for &v in &verts {
            if !dist.contains_key(&v) && adj(u, v) {
                dist.insert(v, dist[&u] + 1);
                queue.push_back(v);
            }
        }
    }
    unreachable!("ladder is connected")
}

/// Distance in the Farey graph between the rank-one free factors `⟨u⟩` and `⟨v⟩` of `F_2`.
pub fn farey_distance(u: &Word, v: &Word) -> Result<u32, SubfactorError> {
    let mut slopes = Vec::new();
    for w in [u, v] {
        let h = SubgroupGraph::new(2, std::slice::from_ref(w))?;
        if h.is_trivial() || !is_free_factor_bool(&h) {
            return Err(SubfactorError::NotPrimitive);
        }
        let ab = w.abelianization(2);
        slopes.push((ab[0], ab[1]));
    }
    let ((a, c), (p, q)) = (slopes[0], slopes[1]);
    let (_, x, y) = ext_gcd(a, c);
    Ok(farey_from_infinity(x * p + y * q, -c * p + a * q))
}

/// Limits of the capped search in the free factor complex of a factor of rank at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SurrogateConfig {
    /// Largest total word length of a basis visited by the search.
    pub kmax: usize,
    pub max_states: usize,
}

impl Default for SurrogateConfig {
    fn default() -> SurrogateConfig {
        SurrogateConfig { kmax: 8, max_states: 20_000 }
    }
}

fn class_key(h: &SubgroupGraph) -> LabeledGraph {
    h.conjugacy_core()
}

fn basis_key(ws: &[Word]) -> Vec<Vec<Letter>> {
    let mut k: Vec<Vec<Letter>> = ws
        .iter()
        .map(|w| {
            let (a, b) = (w.letters().to_vec(), w.inverse().letters().to_vec());
            if (a.len(), &a) <= (b.len(), &b) {
                a
            } else {
                b
            }
        })
        .collect();
    k.sort();
    k
}

/// Extend a basis of a free factor of `F_r` to a basis of `F_r`.
fn extend_basis(h: &SubgroupGraph) -> Result<Vec<Word>, SubfactorError> {
    let mut b = h.basis();
    b.extend(complement(h)?.basis());
    Ok(b)
}

/// Upper bound on the distance between two proper free factors of `F_r`, `r ≥ 3`: breadth-
/// first search over bases related by Nielsen moves, with total length at most `kmax`
/// (starting bases exempt), over the graph whose vertices are the factors spanned by subsets
/// of visited bases and whose edges are nestings inside one basis. `None` when the second
/// factor is not reached.
fn capped_factor_distance(
    x: &SubgroupGraph,
    y: &SubgroupGraph,
    cfg: &SurrogateConfig,
) -> Result<Option<u32>, SubfactorError> {
    let r = x.ambient_rank();
    let target = class_key(y);
    let start = extend_basis(x)?;
    let goal = extend_basis(y)?;
    let mut states: BTreeSet<Vec<Vec<Letter>>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<Word>> = VecDeque::new();
    for s in [start, goal] {
        if states.insert(basis_key(&s)) {
            queue.push_back(s);
        }
    }
    let mut index: BTreeMap<LabeledGraph, usize> = BTreeMap::new();
    let mut adj: Vec<BTreeSet<usize>> = Vec::new();
    let mut id = |k: LabeledGraph, adj: &mut Vec<BTreeSet<usize>>| {
        let n = index.len();
        *index.entry(k).or_insert_with(|| {
            adj.push(BTreeSet::new());
            n
        })
    };
    let subsets: Vec<Vec<usize>> =
        (1..(1usize << r) - 1).map(|m| (0..r).filter(|i| m >> i & 1 == 1).collect()).collect();
    while let Some(basis) = queue.pop_front() {
        let ids: Vec<usize> = subsets
            .iter()
            .map(|s| {
                let gens: Vec<Word> = s.iter().map(|&i| basis[i].clone()).collect();
                id(class_key(&SubgroupGraph::new(r, &gens).expect("rank")), &mut adj)
            })
            .collect();
        for (i, s) in subsets.iter().enumerate() {
            for (j, t) in subsets.iter().enumerate() {
                if s.len() < t.len() && s.iter().all(|k| t.contains(k)) {
                    adj[ids[i]].insert(ids[j]);
                    adj[ids[j]].insert(ids[i]);
                }
            }
        }
        if states.len() >= cfg.max_states {
            continue;
        }
        for i in 0..r {
            for j in (0..r).filter(|&j| j != i) {
                for m in [basis[j].clone(), basis[j].inverse()] {
                    for right in [true, false] {
                        let mut nb = basis.clone();
                        nb[i] = if right { basis[i].mul(&m) } else { m.mul(&basis[i]) };
                        let size: usize = nb.iter().map(|w| w.len()).sum();
                        if size <= cfg.kmax && states.insert(basis_key(&nb)) {
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
    }
    let (Some(&s), Some(&t)) = (index.get(&class_key(x)), index.get(&target)) else { return Ok(None) };
    let mut dist = vec![u32::MAX; adj.len()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    Ok((dist[t] != u32::MAX).then_some(dist[t]))
}

/// Surrogate distance between proper free factors of `F_r`: 0 in rank 1, the Farey distance
/// in rank 2, and the capped search above. `None` when the search does not connect them.
pub fn factor_distance(
    x: &SubgroupGraph,
    y: &SubgroupGraph,
    cfg: &SurrogateConfig,
) -> Result<Option<u32>, SubfactorError> {
    let r = x.ambient_rank();
    if x.is_conjugate_to(y) || r <= 1 {
        return Ok(Some(0));
    }
    if r == 2 {
        let (u, v) = (&x.basis()[0], &y.basis()[0]);
        return Ok(Some(farey_distance(u, v)?));
    }
    capped_factor_distance(x, y, cfg)
}

/// Diameter of a set of factors of one group under [`factor_distance`].
pub fn factor_set_diameter(set: &[SubgroupGraph], cfg: &SurrogateConfig) -> Result<Option<u32>, SubfactorError> {
    let mut best = 0;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            match factor_distance(&set[i], &set[j], cfg)? {
                Some(d) => best = best.max(d),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(best))
}

/// Projection distance `d_A(B, C)`: diameter of the union of the projections of `B` and `C`
/// to the free factors of `A`.
pub fn projection_distance(
    a: &SubgroupGraph,
    b: &SubgroupGraph,
    c: &SubgroupGraph,
    cfg: &SurrogateConfig,
) -> Result<Option<u32>, SubfactorError> {
    let mut set = projection_f(a, b)?;
    set.extend(projection_f(a, c)?);
    factor_set_diameter(&dedup_classes(set), cfg)
}

pub(crate) fn dedup_classes(set: Vec<SubgroupGraph>) -> Vec<SubgroupGraph> {
    let mut seen = BTreeSet::new();
    set.into_iter().filter(|h| seen.insert(h.conjugacy_core())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use rand::Rng;

    fn sub(n: usize, gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
        SubgroupGraph::new(n, &ws).unwrap()
    }

    /// Breadth-first search in the Farey graph restricted to fractions with entries bounded
    /// by `m`.
    fn farey_oracle(p: i64, q: i64, m: i64, depth: u32) -> Option<u32> {
        let norm = |(a, b): (i64, i64)| if b < 0 || (b == 0 && a < 0) { (-a, -b) } else { (a, b) };
        let mut verts = Vec::new();
        for a in -m..=m {
            for b in 0..=m {
                if a.gcd(&b) == 1 {
                    verts.push(norm((a, b)));
                }
            }
        }
        verts.sort();
        verts.dedup();
        let target = norm((p, q));
        let mut dist = BTreeMap::from([((1i64, 0i64), 0u32)]);
        let mut queue = VecDeque::from([(1i64, 0i64)]);
        while let Some(u) = queue.pop_front() {
            if u == target {
                return Some(dist[&u]);
            }
            if dist[&u] == depth {
                continue;
            }
            for &v in &verts {
                if !dist.contains_key(&v) && (u.0 * v.1 - u.1 * v.0).abs() == 1 {
                    dist.insert(v, dist[&u] + 1);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    #[test]
    fn farey_examples() {
        let w = |s: &str| Word::parse(s).unwrap();
        assert_eq!(farey_distance(&w("a"), &w("b")).unwrap(), 1);
        assert_eq!(farey_distance(&w("a"), &w("a")).unwrap(), 0);
        assert_eq!(farey_distance(&w("a"), &w("A")).unwrap(), 0);
        assert_eq!(farey_distance(&w("a"), &w("aab")).unwrap(), 1);
        assert_eq!(farey_distance(&w("b"), &w("aab")).unwrap(), 2);
        assert_eq!(farey_distance(&w("a"), &w("aa")).unwrap_err(), SubfactorError::NotPrimitive);
        assert_eq!(farey_distance(&w("a"), &w("abAB")).unwrap_err(), SubfactorError::NotPrimitive);
    }

    #[test]
    fn farey_matches_bfs_oracle() {
        let mut r = rng(5);
        let mut checked = 0;
        for _ in 0..400 {
            let (p, q) = (r.gen_range(-13i64..=13), r.gen_range(-13i64..=13));
            if p.gcd(&q) != 1 {
                continue;
            }
            let d = farey_from_infinity(p, q);
            if let Some(o) = farey_oracle(p, q, 13, 4) {
                assert_eq!(d, o, "slope {p}/{q}");
                checked += 1;
            } else {
                assert!(d > 4, "slope {p}/{q}");
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn projections_and_gate() {
        let a = sub(3, &["cabABabAB"]);
        let b = sub(3, &["c"]);
        let p = projection_s(&a, &b).unwrap();
        assert_eq!(p.gate, Definedness::DefinedSameColor);
        assert!(!p.splittings.is_empty());
        assert!(p.splittings.iter().all(|s| s.id().is_some()));
        assert_eq!(projection_s(&b, &b).unwrap_err().code(), "PROJ_SELF");
        let a4 = sub(4, &["abaab", "cb", "abd"]);
        let b4 = sub(4, &["a", "c", "d"]);
        let p = projection_s(&a4, &b4).unwrap();
        assert_eq!(p.gate, Definedness::Unknown);
        // The two factors share the primitive element `DaaC`, so they are not far apart.
        assert_eq!(distance_lower_bound(&a4, &b4, true), LowerBound { value: 2, uses_parity: false });
    }

    #[test]
    fn capped_search() {
        let cfg = SurrogateConfig::default();
        let d = |x: &[&str], y: &[&str]| factor_distance(&sub(3, x), &sub(3, y), &cfg).unwrap();
        assert_eq!(d(&["a"], &["a", "b"]), Some(1));
        assert_eq!(d(&["a", "b"], &["c"]), Some(3));
        assert_eq!(d(&["a", "b"], &["b", "c"]), Some(2));
        assert_eq!(d(&["a"], &["b"]), Some(2));
    }
}
