//! Symbolic words over the binary alphabet {0,1} and the ternary alphabet
//! {0,1,*}, the heap bijection between binary words and positive integers,
//! and the admissible-word language that drives the point-family builders.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::params::{ParamsError, SequenceSpec};

/// Hard cap on admissible-word enumeration depth (3^n candidates, pruned).
pub const OMEGA_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordsError {
    #[error("the root index 1 has no parent")]
    RootHasNoParent,
    #[error("enumeration cap exceeded: level {0} > {OMEGA_ENUMERATION_CAP}")]
    EnumerationCapExceeded(usize),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Finite word over {0,1}; the empty word is allowed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word2 {
    bits: Vec<u8>,
}

impl Word2 {
    pub fn empty() -> Self {
        Word2::default()
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "letters must be 0 or 1");
        Word2 { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn child(&self, bit: u8) -> Word2 {
        assert!(bit <= 1);
        let mut bits = self.bits.clone();
        bits.push(bit);
        Word2 { bits }
    }

    pub fn parent(&self) -> Option<Word2> {
        if self.bits.is_empty() {
            None
        } else {
            Some(Word2 {
                bits: self.bits[..self.bits.len() - 1].to_vec(),
            })
        }
    }

    pub fn prefix(&self, len: usize) -> Word2 {
        Word2 {
            bits: self.bits[..len].to_vec(),
        }
    }

    /// All words of the given length, in lexicographic order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = Word2> {
        assert!(n < 64);
        (0u64..(1u64 << n)).map(move |x| {
            let bits = (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect();
            Word2 { bits }
        })
    }
}

impl fmt::Display for Word2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return write!(f, "ε");
        }
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Word2 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s.is_empty() {
            return Ok(Word2::empty());
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(format!("invalid binary letter `{c}`")),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Ok(Word2 { bits })
    }
}

/// Letter of the ternary alphabet; `Star` acts as the identity map in the
/// point constructions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Letter3 {
    Zero,
    One,
    Star,
}

impl Letter3 {
    pub fn as_char(self) -> char {
        match self {
            Letter3::Zero => '0',
            Letter3::One => '1',
            Letter3::Star => '*',
        }
    }
}

/// Finite word over {0,1,*}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word3 {
    letters: Vec<Letter3>,
}

impl Word3 {
    pub fn empty() -> Self {
        Word3::default()
    }

    pub fn from_letters(letters: Vec<Letter3>) -> Self {
        Word3 { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter3] {
        &self.letters
    }

    pub fn prefix(&self, len: usize) -> Word3 {
        Word3 {
            letters: self.letters[..len].to_vec(),
        }
    }

    /// The word with star letters removed (the {0,1} skeleton).
    pub fn skeleton(&self) -> Word2 {
        Word2 {
            bits: self
                .letters
                .iter()
                .filter_map(|l| match l {
                    Letter3::Zero => Some(0),
                    Letter3::One => Some(1),
                    Letter3::Star => None,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Word3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "ε");
        }
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word3 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s.is_empty() {
            return Ok(Word3::empty());
        }
        let letters = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Letter3::Zero),
                '1' => Ok(Letter3::One),
                '*' => Ok(Letter3::Star),
                _ => Err(format!("invalid ternary letter `{c}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word3 { letters })
    }
}

/// Heap index of a binary word: a bijection from finite binary words onto the
/// positive integers with index 1 for the empty word.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TreeIndex(pub u64);

impl fmt::Display for TreeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `f(w_1..w_n) = 2^n + sum_i w_i 2^(n-i)`, `f(ε) = 1`: the binary digits of
/// the index are `1 w_1 .. w_n`.
pub fn heap_index(w: &Word2) -> TreeIndex {
    assert!(w.len() <= 62, "word too long for a u64 heap index");
    let mut k = 1u64;
    for &b in w.bits() {
        k = (k << 1) | b as u64;
    }
    TreeIndex(k)
}

/// Inverse of [`heap_index`].
pub fn heap_word(k: TreeIndex) -> Word2 {
    assert!(k.0 >= 1, "heap indices start at 1");
    let n = 63 - k.0.leading_zeros() as usize;
    let bits = (0..n).map(|i| ((k.0 >> (n - 1 - i)) & 1) as u8).collect();
    Word2 { bits }
}

/// Index of the parent word; errors on the root.
pub fn parent_index(k: TreeIndex) -> Result<TreeIndex, WordsError> {
    if k.0 <= 1 {
        return Err(WordsError::RootHasNoParent);
    }
    Ok(TreeIndex(k.0 >> 1))
}

/// Membership in the admissible language at length `n = |w|`: whenever letter
/// `i` is a one and the i-th constraint value `k_i` is below `n`, every
/// position after `k_i` must be a star.  A one at a position already past its
/// own constraint bound is inadmissible.
pub fn omega_member(w: &Word3, kseq: &SequenceSpec) -> Result<bool, WordsError> {
    let n = w.len();
    for (idx, &l) in w.letters().iter().enumerate() {
        let i = idx + 1;
        if l != Letter3::One {
            continue;
        }
        let ki = kseq.term(i as u64)?;
        if ki < BigUint::from(n) {
            // every position j with k_i < j <= n must be a star
            let start = ki
                .to_u64_digits()
                .first()
                .copied()
                .unwrap_or(0) as usize;
            for j in (start + 1)..=n {
                if w.letters()[j - 1] != Letter3::Star {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Enumerates the admissible words of length `n` in lexicographic order
/// (with letter order 0 < 1 < *), with early pruning.
pub fn omega_enumerate(n: usize, kseq: &SequenceSpec) -> Result<Vec<Word3>, WordsError> {
    if n > OMEGA_ENUMERATION_CAP {
        return Err(WordsError::EnumerationCapExceeded(n));
    }
    // constraint prefix: k_1..k_n compared against n
    let mut small_k: Vec<Option<usize>> = Vec::with_capacity(n);
    for i in 1..=n as u64 {
        let ki = kseq.term(i)?;
        small_k.push(if ki < BigUint::from(n) {
            Some(ki.to_u64_digits().first().copied().unwrap_or(0) as usize)
        } else {
            None
        });
    }
    let mut out = Vec::new();
    let mut prefix: Vec<Letter3> = Vec::with_capacity(n);
    // forced: positions > forced_from must all be stars (1-based, n+1 = none)
    fn recurse(
        prefix: &mut Vec<Letter3>,
        n: usize,
        forced_from: usize,
        small_k: &[Option<usize>],
        out: &mut Vec<Word3>,
    ) {
        if prefix.len() == n {
            out.push(Word3::from_letters(prefix.clone()));
            return;
        }
        let pos = prefix.len() + 1;
        if pos > forced_from {
            prefix.push(Letter3::Star);
            recurse(prefix, n, forced_from, small_k, out);
            prefix.pop();
            return;
        }
        for l in [Letter3::Zero, Letter3::One, Letter3::Star] {
            let mut next_forced = forced_from;
            if l == Letter3::One {
                if let Some(ki) = small_k[pos - 1] {
                    if ki < pos {
                        // this one would violate its own constraint
                        continue;
                    }
                    next_forced = next_forced.min(ki);
                }
            }
            prefix.push(l);
            recurse(prefix, n, next_forced, small_k, out);
            prefix.pop();
        }
    }
    recurse(&mut prefix, n, n, &small_k, &mut out);
    Ok(out)
}

/// Exact cardinality of the admissible language at length `n`, by dynamic
/// programming over the forced-star frontier (no materialization).
pub fn omega_count(n: usize, kseq: &SequenceSpec) -> Result<BigUint, WordsError> {
    let mut small_k: Vec<Option<usize>> = Vec::with_capacity(n);
    for i in 1..=n as u64 {
        let ki = kseq.term(i)?;
        small_k.push(if ki < BigUint::from(n) {
            Some(ki.to_u64_digits().first().copied().unwrap_or(0) as usize)
        } else {
            None
        });
    }
    // states: forced_from in {1..=n+1}; count words for positions pos..=n
    let mut counts: Vec<BigUint> = vec![BigUint::zero(); n + 2];
    for f in 1..=n + 1 {
        counts[f] = BigUint::one(); // empty suffix
    }
    for pos in (1..=n).rev() {
        let mut next = vec![BigUint::zero(); n + 2];
        for forced_from in 1..=n + 1 {
            let total = if pos > forced_from {
                counts[forced_from].clone()
            } else {
                // letters 0 and *
                let mut t = &counts[forced_from] + &counts[forced_from];
                // letter 1
                if let Some(ki) = small_k[pos - 1] {
                    if ki >= pos {
                        t += &counts[forced_from.min(ki)];
                    }
                } else {
                    t += &counts[forced_from];
                }
                t
            };
            next[forced_from] = total;
        }
        counts = next;
    }
    Ok(counts[n + 1].clone())
}
