use super::FreeGroupError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A generator or its inverse: `+(i+1)` is generator `i`, `-(i+1)` its inverse.
pub type Letter = i32;

/// Alphabet used when none is given: `a`, `b`, `c`, ... with capitals as inverses.
pub const DEFAULT_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";

/// Freely reduced word in a free group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

/// Freely reduce a letter sequence.
pub fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl Word {
    /// Reduce an arbitrary letter sequence.
    pub fn new(letters: &[Letter]) -> Word {
        debug_assert!(letters.iter().all(|&l| l != 0));
        Word(free_reduce(letters))
    }

    /// Reduce after checking every letter lies in a rank-`rank` alphabet.
    pub fn checked(rank: usize, letters: &[Letter]) -> Result<Word, FreeGroupError> {
        for &l in letters {
            if l == 0 || l.unsigned_abs() as usize > rank {
                return Err(FreeGroupError::LetterOutOfRange { letter: l, rank });
            }
        }
        Ok(Word::new(letters))
    }

    pub fn identity() -> Word {
        Word(Vec::new())
    }

    /// Generator `i` (zero based).
    pub fn generator(i: usize) -> Word {
        Word(vec![i as Letter + 1])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn support_rank(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word::new(&v)
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `g w g⁻¹`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    /// Cyclic reduction: returns `(u, c)` with `self = c u c⁻¹` and `u` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let v = &self.0;
        let mut i = 0;
        let mut j = v.len();
        while j >= i + 2 && v[i] == -v[j - 1] {
            i += 1;
            j -= 1;
        }
        (Word(v[i..j].to_vec()), Word(v[..i].to_vec()))
    }

    pub fn cyclic_len(&self) -> usize {
        self.cyclic_reduce().0.len()
    }

    /// Exponent sums in the abelianization.
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &l in &self.0 {
            let i = l.unsigned_abs() as usize - 1;
            v[i] += l.signum() as i64;
        }
        v
    }

    /// Image in H₁(F_n; Z/2) as a bitmask.
    pub fn mod2(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &l| acc ^ (1u64 << (l.unsigned_abs() - 1)))
    }

    /// Parse a word over `alphabet`; capitals are inverses. `1` and the empty string are the
    /// identity.
    pub fn parse_with(s: &str, alphabet: &str) -> Result<Word, FreeGroupError> {
        let t = s.trim();
        if t.is_empty() || t == "1" {
            return Ok(Word::identity());
        }
        let chars: Vec<char> = alphabet.chars().collect();
        let mut letters = Vec::with_capacity(t.len());
        for c in t.chars() {
            if c.is_whitespace() || c == '.' || c == '*' {
                continue;
            }
            let lower = c.to_ascii_lowercase();
            let idx = chars
                .iter()
                .position(|&a| a == lower)
                .ok_or_else(|| FreeGroupError::Parse(format!("unknown letter {c:?} in {s:?}")))?;
            let l = idx as Letter + 1;
            letters.push(if c.is_uppercase() { -l } else { l });
        }
        Ok(Word::new(&letters))
    }

    pub fn parse(s: &str) -> Result<Word, FreeGroupError> {
        Word::parse_with(s, DEFAULT_ALPHABET)
    }

    pub fn display_with(&self, alphabet: &str) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let chars: Vec<char> = alphabet.chars().collect();
        self.0
            .iter()
            .map(|&l| {
                let c = chars[l.unsigned_abs() as usize - 1];
                if l < 0 {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(DEFAULT_ALPHABET))
    }
}

/// Reduce a letter sequence of a rank-`rank` group, rejecting out-of-range letters.
pub fn reduce(rank: usize, letters: &[Letter]) -> Result<Word, FreeGroupError> {
    Word::checked(rank, letters)
}

/// Parse a comma or whitespace separated list of words.
pub fn parse_words(s: &str, alphabet: &str) -> Result<Vec<Word>, FreeGroupError> {
    s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()).map(|t| Word::parse_with(t, alphabet)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce(2, &[1, -1, 2]).unwrap(), Word::generator(1));
        assert!(reduce(2, &[]).unwrap().is_empty());
        let zx = Word::parse_with("zx", "xyz").unwrap();
        assert_eq!(zx.letters(), &[3, 1]);
        assert!(reduce(2, &[3]).is_err());
    }

    #[test]
    fn cyclic_reduction() {
        let w = Word::parse("abcA").unwrap();
        let (u, c) = w.cyclic_reduce();
        assert_eq!(u.to_string(), "bc");
        assert_eq!(c.to_string(), "a");
        assert_eq!(u.conjugate_by(&c), w);
    }

    #[test]
    fn parse_roundtrip() {
        let w = Word::parse("abAB").unwrap();
        assert_eq!(w.to_string(), "abAB");
        assert_eq!(w.inverse().to_string(), "baBA");
        assert_eq!(w.mod2(), 0);
    }
}
