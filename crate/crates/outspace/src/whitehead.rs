//! Whitehead automorphisms, peak-reduction minimization of subgroup graphs, free-factor
//! recognition with replayable certificates, and complements of free factors.

use crate::free_group::{Automorphism, FreeGroupError, LabeledGraph, Letter, SubgroupGraph, Word};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WhiteheadError {
    #[error("subgroup is trivial")]
    Trivial,
    #[error("subgroup is not a proper free factor")]
    NotProperFreeFactor,
    #[error("search budget exhausted")]
    Budget,
    #[error("subgroup is not contained in the ambient factor")]
    NotContained,
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// How a type II move acts on one generator `x` other than the multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Fix,
    /// `x ↦ x a`
    Right,
    /// `x ↦ a⁻¹ x`
    Left,
    /// `x ↦ a⁻¹ x a`
    Conjugate,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WhiteheadMove {
    /// Type I: generator `i` maps to the letter `perm[i]`.
    Permute { perm: Vec<Letter> },
    /// Type II with multiplier `a`; `actions[i]` describes generator `i` (ignored for `a`).
    Multiply { multiplier: Letter, actions: Vec<Action> },
}

impl WhiteheadMove {
    pub fn automorphism(&self, rank: usize) -> Automorphism {
        match self {
            WhiteheadMove::Permute { perm } => Automorphism::permutation(rank, perm).expect("signed permutation"),
            WhiteheadMove::Multiply { multiplier, actions } => {
                let a = Word::new(&[*multiplier]);
                let ai = a.inverse();
                let images = (0..rank)
                    .map(|i| {
                        let x = Word::generator(i);
                        if i + 1 == multiplier.unsigned_abs() as usize {
                            return x;
                        }
                        match actions[i] {
                            Action::Fix => x,
                            Action::Right => x.mul(&a),
                            Action::Left => ai.mul(&x),
                            Action::Conjugate => ai.mul(&x).mul(&a),
                        }
                    })
                    .collect();
                Automorphism::new(rank, images).expect("Whitehead move is an automorphism")
            }
        }
    }

    /// All nontrivial type II moves of F_rank.
    pub fn type_two(rank: usize) -> Vec<WhiteheadMove> {
        let mut moves = Vec::new();
        for m in 1..=rank as Letter {
            for multiplier in [m, -m] {
                let others: Vec<usize> = (0..rank).filter(|&i| i + 1 != m as usize).collect();
                let total = 4usize.pow(others.len() as u32);
                for code in 1..total {
                    let mut actions = vec![Action::Fix; rank];
                    let mut c = code;
                    for &i in &others {
                        actions[i] = [Action::Fix, Action::Right, Action::Left, Action::Conjugate][c % 4];
                        c /= 4;
                    }
                    moves.push(WhiteheadMove::Multiply { multiplier, actions });
                }
            }
        }
        moves
    }
}

/// Apply an automorphism to a subgroup.
pub fn image(phi: &Automorphism, h: &SubgroupGraph) -> SubgroupGraph {
    let gens: Vec<Word> = h.basis().iter().map(|w| phi.apply(w)).collect();
    SubgroupGraph::new(phi.rank(), &gens).expect("ranks agree")
}

/// Replayable evidence that a subgroup is a free factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCertificate {
    pub moves: Vec<WhiteheadMove>,
    /// Generators spanning the final basis-subset factor.
    pub subset: Vec<usize>,
    /// `g` with `φ(H) = g ⟨a_S⟩ g⁻¹`, where `φ` is the product of the moves.
    pub conjugator: Word,
}

impl FactorCertificate {
    /// Product of the moves, first move applied first.
    pub fn automorphism(&self, rank: usize) -> Automorphism {
        self.moves.iter().fold(Automorphism::identity(rank), |acc, m| m.automorphism(rank).compose(&acc))
    }

    /// Replay the moves on `h` and compare with the recorded basis-subset form.
    pub fn verify(&self, h: &SubgroupGraph) -> bool {
        let n = h.ambient_rank();
        let img = image(&self.automorphism(n), h);
        let target = basis_subset(n, &self.subset).conjugate(&self.conjugator);
        img == target
    }
}

/// `⟨a_i : i ∈ subset⟩`.
pub fn basis_subset(rank: usize, subset: &[usize]) -> SubgroupGraph {
    let gens: Vec<Word> = subset.iter().map(|&i| Word::generator(i)).collect();
    SubgroupGraph::new(rank, &gens).unwrap()
}

/// Result of the minimization.
#[derive(Clone, Debug)]
pub struct Minimized {
    pub subgroup: SubgroupGraph,
    pub moves: Vec<WhiteheadMove>,
    pub sizes: Vec<usize>,
}

/// Greedy strict descent of the core size over type II moves; among the strictly smaller
/// images the least (size, canonical form) is taken. By peak reduction a local minimum is a
/// global minimum of the orbit.
pub fn whitehead_minimize_budget(h: &SubgroupGraph, budget: Option<usize>) -> Result<Minimized, WhiteheadError> {
    if h.is_trivial() {
        return Err(WhiteheadError::Trivial);
    }
    let n = h.ambient_rank();
    let moves = WhiteheadMove::type_two(n);
    let autos: Vec<Automorphism> = moves.iter().map(|m| m.automorphism(n)).collect();
    let mut cur = h.clone();
    let mut size = cur.size();
    let mut trace = Vec::new();
    let mut sizes = vec![size];
    let mut spent = 0usize;
    loop {
        let mut best: Option<(usize, LabeledGraph, usize, SubgroupGraph)> = None;
        for (k, phi) in autos.iter().enumerate() {
            spent += 1;
            if let Some(b) = budget {
                if spent > b {
                    return Err(WhiteheadError::Budget);
                }
            }
            let img = image(phi, &cur);
            let s = img.size();
            if s >= size {
                continue;
            }
            if best.as_ref().is_some_and(|b| s > b.0) {
                continue;
            }
            let key = img.conjugacy_core();
            if best.as_ref().is_none_or(|b| (s, &key) < (b.0, &b.1)) {
                best = Some((s, key, k, img));
            }
        }
        match best {
            Some((s, _, k, img)) => {
                trace.push(moves[k].clone());
                sizes.push(s);
                size = s;
                cur = img;
            }
            None => break,
        }
    }
    Ok(Minimized { subgroup: cur, moves: trace, sizes })
}

/// Minimal representative of the Whitehead orbit with the move trace.
pub fn whitehead_minimize(h: &SubgroupGraph) -> Result<(SubgroupGraph, FactorCertificate), WhiteheadError> {
    let m = whitehead_minimize_budget(h, None)?;
    let subset = rose_letters(&m.subgroup).unwrap_or_default();
    Ok((m.subgroup.clone(), FactorCertificate { moves: m.moves, subset, conjugator: m.subgroup.hair() }))
}

/// Generators of a subgroup whose core is a one-vertex rose with distinct positive letters.
fn rose_letters(h: &SubgroupGraph) -> Option<Vec<usize>> {
    let (core, _) = h.graph().core(false);
    if core.num_vertices() != 1 {
        return None;
    }
    let mut s: Vec<usize> = core.edges().iter().map(|&(_, l, _)| l as usize - 1).collect();
    s.sort_unstable();
    Some(s)
}

/// Three-valued answer used above the exhaustive rank bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    True,
    False,
    Timeout,
}

/// Largest rank for which the search runs without a budget.
pub const EXHAUSTIVE_RANK: usize = 5;

/// Default number of move evaluations above [`EXHAUSTIVE_RANK`].
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct FactorResult {
    pub verdict: Verdict,
    pub certificate: Option<FactorCertificate>,
}

/// Free-factor test with an explicit budget (ignored when `None`).
pub fn is_free_factor_budget(h: &SubgroupGraph, budget: Option<usize>) -> FactorResult {
    if h.is_trivial() {
        return FactorResult { verdict: Verdict::False, certificate: None };
    }
    match whitehead_minimize_budget(h, budget) {
        Err(_) => FactorResult { verdict: Verdict::Timeout, certificate: None },
        Ok(m) => {
            let subset = rose_letters(&m.subgroup);
            match subset {
                Some(s) if s.len() == h.rank() => FactorResult {
                    verdict: Verdict::True,
                    certificate: Some(FactorCertificate { moves: m.moves, subset: s, conjugator: m.subgroup.hair() }),
                },
                _ => FactorResult { verdict: Verdict::False, certificate: None },
            }
        }
    }
}

/// Free-factor test; exhaustive up to rank [`EXHAUSTIVE_RANK`], budgeted above.
pub fn is_free_factor(h: &SubgroupGraph) -> FactorResult {
    let budget = (h.ambient_rank() > EXHAUSTIVE_RANK).then_some(DEFAULT_BUDGET);
    is_free_factor_budget(h, budget)
}

/// Convenience boolean; a timeout counts as `false`.
pub fn is_free_factor_bool(h: &SubgroupGraph) -> bool {
    is_free_factor(h).verdict == Verdict::True
}

/// A free factor `D` with `H ∗ D = F_n`.
pub fn complement(h: &SubgroupGraph) -> Result<SubgroupGraph, WhiteheadError> {
    let n = h.ambient_rank();
    if h.rank() >= n {
        return Err(WhiteheadError::NotProperFreeFactor);
    }
    let res = is_free_factor(h);
    let cert = match (res.verdict, res.certificate) {
        (Verdict::True, Some(c)) => c,
        (Verdict::Timeout, _) => return Err(WhiteheadError::Budget),
        _ => return Err(WhiteheadError::NotProperFreeFactor),
    };
    let rest: Vec<usize> = (0..n).filter(|i| !cert.subset.contains(i)).collect();
    let inv = cert.automorphism(n).inverse();
    let d = basis_subset(n, &rest).conjugate(&cert.conjugator);
    Ok(image(&inv, &d))
}

/// Express `h ≤ k` in the coordinates of the basis of `k`, as a subgroup of F_{rank k}.
pub fn to_coordinates(h: &SubgroupGraph, k: &SubgroupGraph) -> Result<SubgroupGraph, WhiteheadError> {
    let gens = h
        .basis()
        .iter()
        .map(|w| k.coordinates(w).ok_or(WhiteheadError::NotContained))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubgroupGraph::new(k.rank(), &gens)?)
}

/// Map a subgroup written in the coordinates of `k`'s basis back into F_n.
pub fn from_coordinates(h: &SubgroupGraph, k: &SubgroupGraph) -> SubgroupGraph {
    let basis = k.basis();
    let gens: Vec<Word> = h.basis().iter().map(|w| crate::free_group::substitute(&basis, w)).collect();
    SubgroupGraph::new(k.ambient_rank(), &gens).unwrap()
}

/// A complement of `h` inside the free factor `k`: `H ∗ D = K`.
pub fn complement_in(h: &SubgroupGraph, k: &SubgroupGraph) -> Result<SubgroupGraph, WhiteheadError> {
    let hk = to_coordinates(h, k)?;
    let dk = complement(&hk)?;
    Ok(from_coordinates(&dk, k))
}

/// Whether `h` is a free factor of the free factor `k` (and contained in it).
pub fn is_free_factor_of(h: &SubgroupGraph, k: &SubgroupGraph) -> Result<bool, WhiteheadError> {
    let hk = to_coordinates(h, k)?;
    Ok(is_free_factor(&hk).verdict == Verdict::True)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(n: usize, gens: &[&str]) -> SubgroupGraph {
        let ws: Vec<Word> = gens.iter().map(|s| Word::parse(s).unwrap()).collect();
        SubgroupGraph::new(n, &ws).unwrap()
    }

    #[test]
    fn basic_factors() {
        assert!(is_free_factor_bool(&sub(3, &["a", "b"])));
        assert!(!is_free_factor_bool(&sub(2, &["aa"])));
        assert!(is_free_factor_bool(&sub(2, &["aab"])));
        assert!(!is_free_factor_bool(&sub(2, &["abAB"])));
        let (m, cert) = whitehead_minimize(&sub(2, &["a"])).unwrap();
        assert_eq!(m, sub(2, &["a"]));
        assert!(cert.moves.is_empty());
    }

    #[test]
    fn certificate_replays() {
        let phi = Automorphism::nielsen(3, 0, 3, true)
            .compose(&Automorphism::nielsen(3, 1, -1, false))
            .compose(&Automorphism::nielsen(3, 2, 2, true))
            .compose(&Automorphism::nielsen(3, 0, 2, false));
        let h = image(&phi, &sub(3, &["a", "b"]));
        let res = is_free_factor(&h);
        assert_eq!(res.verdict, Verdict::True);
        assert!(res.certificate.unwrap().verify(&h));
    }

    #[test]
    fn complements() {
        let d = complement(&sub(3, &["a", "b"])).unwrap();
        assert!(d.is_conjugate_to(&sub(3, &["c"])) || d.rank() == 1);
        assert_eq!(sub(3, &["a", "b"]).join(&d), SubgroupGraph::full(3));
        let d = complement(&sub(3, &["c"])).unwrap();
        assert_eq!(d.rank(), 2);
        assert_eq!(sub(3, &["c"]).join(&d), SubgroupGraph::full(3));
    }
}
