//! Words of the unital free semigroup on `n` generators.
//!
//! Words index the basis vectors of the full Fock space and the Fourier
//! coefficients of multi-analytic operators. The canonical order used
//! everywhere in this crate is graded-lexicographic: by length first, then
//! lexicographically by letter sequence. Every word carries its alphabet
//! size so mixed-alphabet arithmetic fails fast.

use crate::error::{Error, Result};
use std::fmt;

/// A word over the generators `g_1, ..., g_n`; the empty word is the
/// semigroup identity `g_0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    n: u32,
    letters: Vec<u32>,
}

impl Word {
    /// The identity word `g_0` over an alphabet of size `n`.
    pub fn identity(n: u32) -> Self {
        assert!(n >= 1, "alphabet size must be positive");
        Word {
            n,
            letters: Vec::new(),
        }
    }

    /// The single-letter word `g_i`, `1 <= i <= n`.
    pub fn generator(n: u32, i: u32) -> Result<Self> {
        if i < 1 || i > n {
            return Err(Error::GeneratorOutOfRange { index: i, n });
        }
        Ok(Word {
            n,
            letters: vec![i],
        })
    }

    /// Builds a word from explicit letters, validating the range of each.
    pub fn from_letters(n: u32, letters: &[u32]) -> Result<Self> {
        assert!(n >= 1, "alphabet size must be positive");
        for &l in letters {
            if l < 1 || l > n {
                return Err(Error::GeneratorOutOfRange { index: l, n });
            }
        }
        Ok(Word {
            n,
            letters: letters.to_vec(),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    /// Word length `|alpha|`; the identity has length 0.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation `alpha . beta`; fails on alphabet mismatch.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return Err(Error::AlphabetMismatch(self.n, other.n));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { n: self.n, letters })
    }

    /// The reversed word `alpha~`.
    pub fn reverse(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word {
            n: self.n,
            letters,
        }
    }

    /// First letter of a nonempty word.
    pub fn first(&self) -> Option<u32> {
        self.letters.first().copied()
    }

    /// Everything after the first letter.
    pub fn tail(&self) -> Option<Word> {
        if self.letters.is_empty() {
            return None;
        }
        Some(Word {
            n: self.n,
            letters: self.letters[1..].to_vec(),
        })
    }

    /// All `|w|+1` ordered splittings `(prefix, suffix)` with
    /// `prefix.concat(suffix) == w`.
    pub fn factorizations(&self) -> Vec<(Word, Word)> {
        (0..=self.letters.len())
            .map(|k| {
                (
                    Word {
                        n: self.n,
                        letters: self.letters[..k].to_vec(),
                    },
                    Word {
                        n: self.n,
                        letters: self.letters[k..].to_vec(),
                    },
                )
            })
            .collect()
    }

    /// Tests whether `self` is a prefix of `other`, returning the remainder.
    pub fn strip_prefix_of(&self, other: &Word) -> Option<Word> {
        if self.n != other.n || self.letters.len() > other.letters.len() {
            return None;
        }
        if other.letters[..self.letters.len()] == self.letters[..] {
            Some(Word {
                n: self.n,
                letters: other.letters[self.letters.len()..].to_vec(),
            })
        } else {
            None
        }
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    /// Graded-lexicographic order: by length, then letter-by-letter.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl fmt::Display for Word {
    /// Renders as `g0` or dot-separated letters, e.g. `g1.g2.g1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "g0");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| format!("g{}", l)).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parses the textual rendering produced by `Display`.
pub fn parse_word(n: u32, s: &str) -> Result<Word> {
    let s = s.trim();
    if s == "g0" {
        return Ok(Word::identity(n));
    }
    let mut letters = Vec::new();
    for part in s.split('.') {
        let digits = part
            .strip_prefix('g')
            .ok_or_else(|| Error::InvalidInput(format!("bad word syntax: {s:?}")))?;
        let l: u32 = digits
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad word syntax: {s:?}")))?;
        letters.push(l);
    }
    Word::from_letters(n, &letters)
}

/// Number of words of length exactly `k`.
pub fn words_of_len(n: u32, k: usize) -> usize {
    (n as usize).pow(k as u32)
}

/// Number of words of length at most `max_len`.
pub fn words_up_to(n: u32, max_len: usize) -> usize {
    (0..=max_len).map(|k| words_of_len(n, k)).sum()
}

/// All words of length `<= max_len` in the canonical graded-lex order.
///
/// This is the basis order of the truncated Fock space; it is prefix-closed,
/// and the word at position 0 is always the identity.
pub fn enumerate_words(n: u32, max_len: usize) -> Vec<Word> {
    assert!(n >= 1, "alphabet size must be positive");
    let mut all = Vec::with_capacity(words_up_to(n, max_len));
    all.push(Word::identity(n));
    let mut prev_start = 0;
    for _ in 1..=max_len {
        let prev_end = all.len();
        for idx in prev_start..prev_end {
            for l in 1..=n {
                let mut letters = all[idx].letters.clone();
                letters.push(l);
                all.push(Word { n, letters });
            }
        }
        prev_start = prev_end;
    }
    // Appending letters on the right to an already lex-sorted layer keeps
    // each new layer lex-sorted, so the result is graded-lex overall.
    all
}
