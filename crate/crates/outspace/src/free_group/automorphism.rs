use super::word::{Letter, Word, DEFAULT_ALPHABET};
use super::FreeGroupError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Automorphism of F_n given by the images of the generators. The inverse images are
/// computed once at construction, which also certifies that the images form a basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    rank: usize,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

/// One identification performed while folding the wedge of image loops to the rose.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldStep {
    pub vertex: usize,
    pub label: Letter,
    pub merged: (usize, usize),
}

#[derive(Clone, Debug)]
struct GaugeEdge {
    from: usize,
    to: usize,
    label: Letter,
    gauge: Word,
}

/// Fold the wedge of loops `images` down to the rose, carrying for every edge a word in the
/// formal basis `u_1..u_n` of the source so that based loops read `g` over `u` and `α(g)`
/// over the target alphabet, where `α(u_i) = images[i]`. Returns `α⁻¹(a_j)` for each `j`.
fn gauge_fold(rank: usize, images: &[Word]) -> Result<(Vec<Word>, Vec<FoldStep>), FreeGroupError> {
    if images.len() != rank {
        return Err(FreeGroupError::RankMismatch { expected: rank, found: images.len() });
    }
    let mut edges: Vec<GaugeEdge> = Vec::new();
    let mut nv = 1;
    for (i, w) in images.iter().enumerate() {
        if w.is_empty() {
            return Err(FreeGroupError::NotABasis);
        }
        let mut cur = 0;
        for (k, &l) in w.letters().iter().enumerate() {
            let next = if k + 1 == w.len() {
                0
            } else {
                nv += 1;
                nv - 1
            };
            let trav = if k == 0 { Word::generator(i) } else { Word::identity() };
            if l > 0 {
                edges.push(GaugeEdge { from: cur, to: next, label: l, gauge: trav });
            } else {
                edges.push(GaugeEdge { from: next, to: cur, label: -l, gauge: trav.inverse() });
            }
            cur = next;
        }
    }
    let mut steps = Vec::new();
    // Half-edge at a vertex: (signed label, edge index, target, traversal gauge).
    let half_edges = |edges: &[GaugeEdge], v: usize| {
        let mut hs: Vec<(Letter, usize, usize, Word)> = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if e.from == v {
                hs.push((e.label, i, e.to, e.gauge.clone()));
            }
            if e.to == v {
                hs.push((-e.label, i, e.from, e.gauge.inverse()));
            }
        }
        hs.sort_by_key(|h| (h.0, h.1));
        hs
    };
    loop {
        let mut vertices: Vec<usize> = edges.iter().flat_map(|e| [e.from, e.to]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut conflict = None;
        'outer: for &v in &vertices {
            let hs = half_edges(&edges, v);
            for w in hs.windows(2) {
                if w[0].0 == w[1].0 {
                    conflict = Some((v, w[0].clone(), w[1].clone()));
                    break 'outer;
                }
            }
        }
        let Some((u, h1, h2)) = conflict else { break };
        let (label, e1, mut w1, mut g1) = h1;
        let (_, e2, mut w2, mut g2) = h2;
        if w1 != w2 {
            if w2 == 0 {
                std::mem::swap(&mut w1, &mut w2);
                std::mem::swap(&mut g1, &mut g2);
            }
            // Gauge transform at w2 so that both half-edges carry the same gauge.
            let c = g2.inverse().mul(&g1);
            for e in edges.iter_mut() {
                if e.to == w2 {
                    e.gauge = e.gauge.mul(&c);
                }
                if e.from == w2 {
                    e.gauge = c.inverse().mul(&e.gauge);
                }
            }
            for e in edges.iter_mut() {
                if e.from == w2 {
                    e.from = w1;
                }
                if e.to == w2 {
                    e.to = w1;
                }
            }
            steps.push(FoldStep { vertex: u, label, merged: (w1, w2) });
        }
        let (a, b) = (&edges[e1], &edges[e2]);
        let same = (a.from == b.from && a.to == b.to && a.gauge == b.gauge)
            || (a.from == b.to && a.to == b.from && a.gauge == b.gauge.inverse());
        if !same {
            return Err(FreeGroupError::NotABasis);
        }
        edges.remove(e2);
    }
    let mut inv = vec![Word::identity(); rank];
    let mut seen = vec![false; rank];
    for e in &edges {
        if e.from != 0 || e.to != 0 {
            return Err(FreeGroupError::NotABasis);
        }
        let j = e.label as usize - 1;
        inv[j] = e.gauge.clone();
        seen[j] = true;
    }
    if edges.len() != rank || !seen.iter().all(|&s| s) {
        return Err(FreeGroupError::NotABasis);
    }
    Ok((inv, steps))
}

impl Automorphism {
    /// Validate that `images` is a basis of F_rank and build the automorphism.
    pub fn new(rank: usize, images: Vec<Word>) -> Result<Automorphism, FreeGroupError> {
        for w in &images {
            Word::checked(rank, w.letters())?;
        }
        let (inverse_images, _) = gauge_fold(rank, &images)?;
        Ok(Automorphism { rank, images, inverse_images })
    }

    /// The fold sequence certifying that the images form a basis.
    pub fn certificate(&self) -> Vec<FoldStep> {
        gauge_fold(self.rank, &self.images).expect("validated at construction").1
    }

    pub fn parse(rank: usize, images: &[&str], alphabet: &str) -> Result<Automorphism, FreeGroupError> {
        let ws = images.iter().map(|s| Word::parse_with(s, alphabet)).collect::<Result<Vec<_>, _>>()?;
        Automorphism::new(rank, ws)
    }

    pub fn identity(rank: usize) -> Automorphism {
        let g: Vec<Word> = (0..rank).map(Word::generator).collect();
        Automorphism { rank, images: g.clone(), inverse_images: g }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn images(&self) -> &[Word] {
        &self.images
    }
    pub fn image(&self, i: usize) -> &Word {
        &self.images[i]
    }

    pub fn apply(&self, w: &Word) -> Word {
        substitute(&self.images, w)
    }

    pub fn apply_checked(&self, w: &Word) -> Result<Word, FreeGroupError> {
        if w.support_rank() > self.rank {
            return Err(FreeGroupError::RankMismatch { expected: self.rank, found: w.support_rank() });
        }
        Ok(self.apply(w))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        assert_eq!(self.rank, other.rank);
        Automorphism {
            rank: self.rank,
            images: other.images.iter().map(|w| self.apply(w)).collect(),
            inverse_images: self.inverse_images.iter().map(|w| substitute(&other.inverse_images, w)).collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism { rank: self.rank, images: self.inverse_images.clone(), inverse_images: self.images.clone() }
    }

    pub fn pow(&self, k: i64) -> Automorphism {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Automorphism::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == Word::generator(i))
    }

    /// Elementary Nielsen move `a_i ↦ a_i · a_j^{±1}` (right) or `a_j^{±1} · a_i` (left).
    pub fn nielsen(rank: usize, i: usize, j: Letter, right: bool) -> Automorphism {
        assert!(i < rank && j != 0 && j.unsigned_abs() as usize <= rank && j.unsigned_abs() as usize != i + 1);
        let mut images: Vec<Word> = (0..rank).map(Word::generator).collect();
        let mul = Word::new(&[j]);
        images[i] = if right { images[i].mul(&mul) } else { mul.mul(&images[i]) };
        let mut inv: Vec<Word> = (0..rank).map(Word::generator).collect();
        inv[i] = if right { inv[i].mul(&mul.inverse()) } else { mul.inverse().mul(&inv[i]) };
        Automorphism { rank, images, inverse_images: inv }
    }

    /// Signed permutation: generator `i` maps to the letter `perm[i]`.
    pub fn permutation(rank: usize, perm: &[Letter]) -> Result<Automorphism, FreeGroupError> {
        Automorphism::new(rank, perm.iter().map(|&l| Word::new(&[l])).collect())
    }

    pub fn display_with(&self, alphabet: &str) -> String {
        let chars: Vec<char> = alphabet.chars().collect();
        self.images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{}->{}", chars[i], w.display_with(alphabet)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(DEFAULT_ALPHABET))
    }
}

/// Substitute `images[i]` for generator `i` in `w`.
pub fn substitute(images: &[Word], w: &Word) -> Word {
    let mut v: Vec<Letter> = Vec::new();
    for &l in w.letters() {
        let img = &images[l.unsigned_abs() as usize - 1];
        if l > 0 {
            v.extend_from_slice(img.letters());
        } else {
            v.extend(img.letters().iter().rev().map(|&x| -x));
        }
    }
    Word::new(&v)
}

/// Apply `φ` to `w`, checking ranks.
pub fn apply_automorphism(phi: &Automorphism, w: &Word) -> Result<Word, FreeGroupError> {
    phi.apply_checked(w)
}

/// Inverse automorphism.
pub fn invert_automorphism(phi: &Automorphism) -> Automorphism {
    phi.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> Automorphism {
        Automorphism::parse(3, &["y", "z", "zx"], "xyz").unwrap()
    }

    #[test]
    fn example_map_and_inverse() {
        let p = phi();
        let z = Word::parse_with("z", "xyz").unwrap();
        assert_eq!(p.apply(&z).display_with("xyz"), "zx");
        let x = Word::parse_with("x", "xyz").unwrap();
        assert_eq!(p.pow(2).apply(&x).display_with("xyz"), "z");
        let inv = p.inverse();
        assert_eq!(inv.display_with("xyz"), "x->Yz, y->x, z->y");
        assert!(p.compose(&inv).is_identity());
        assert!(inv.compose(&p).is_identity());
    }

    #[test]
    fn rejects_non_bases() {
        assert!(Automorphism::parse(2, &["a", "aa"], "ab").is_err());
        assert!(Automorphism::parse(2, &["ab", "ba"], "ab").is_err());
        assert!(Automorphism::parse(2, &["aa", "b"], "ab").is_err());
        assert!(Automorphism::parse(2, &["abA", "b"], "ab").is_err());
    }

    #[test]
    fn conjugated_basis_inverts() {
        let a = Automorphism::parse(3, &["abaBA", "abbBA", "abcBA"], "abc").unwrap();
        assert!(a.compose(&a.inverse()).is_identity());
        assert!(a.inverse().compose(&a).is_identity());
    }
}
