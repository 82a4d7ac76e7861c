//! Finite alphabets, words over them, and letter sets.
//!
//! Letters are 1-based (`1..=size`) everywhere in the public API, matching
//! the file formats.

use std::fmt;

use crate::error::{Error, Result};

pub type Letter = u32;

/// A finite alphabet `{1, ..., size}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    size: u32,
    labels: Option<Vec<String>>,
}

impl Domain {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::validation("domain/size", "domain size must be >= 1"));
        }
        Ok(Domain { size, labels: None })
    }

    pub fn with_labels(size: u32, labels: Vec<String>) -> Result<Self> {
        let mut d = Domain::new(size)?;
        if labels.len() != size as usize {
            return Err(Error::validation(
                "domain/labels",
                format!("expected {} labels, found {}", size, labels.len()),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, l) in labels.iter().enumerate() {
            if !seen.insert(l.as_str()) {
                return Err(Error::validation(
                    format!("domain/labels/{i}"),
                    format!("duplicate label {l:?}"),
                ));
            }
        }
        d.labels = Some(labels);
        Ok(d)
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        1..=self.size
    }

    pub fn check_letter(&self, a: Letter) -> Result<()> {
        if a == 0 || a > self.size {
            return Err(Error::validation(
                "letter",
                format!("letter {a} outside 1..={}", self.size),
            ));
        }
        Ok(())
    }

    pub fn check_word(&self, w: &[Letter]) -> Result<()> {
        for (i, &a) in w.iter().enumerate() {
            if a == 0 || a > self.size {
                return Err(Error::validation(
                    format!("word/{i}"),
                    format!("letter {a} outside 1..={}", self.size),
                ));
            }
        }
        Ok(())
    }

    /// `size^len`, or `None` on overflow.
    pub fn word_count(&self, len: usize) -> Option<u64> {
        let len = u32::try_from(len).ok()?;
        (self.size as u64).checked_pow(len)
    }
}

/// Iterates all words of a fixed length in lexicographic order.
pub struct Words {
    size: u32,
    current: Option<Vec<Letter>>,
}

impl Words {
    pub fn new(size: u32, len: usize) -> Self {
        Words {
            size,
            current: if size == 0 && len > 0 {
                None
            } else {
                Some(vec![1; len])
            },
        }
    }
}

impl Iterator for Words {
    type Item = Vec<Letter>;

    fn next(&mut self) -> Option<Vec<Letter>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut i = next.len();
        while i > 0 {
            i -= 1;
            if next[i] < self.size {
                next[i] += 1;
                self.current = Some(next);
                return Some(out);
            }
            next[i] = 1;
        }
        Some(out)
    }
}

/// A subset of the letters of a domain, stored as a fixed-width bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterSet {
    size: u32,
    bits: Vec<u64>,
}

impl LetterSet {
    pub fn empty(size: u32) -> Self {
        LetterSet {
            size,
            bits: vec![0; (size as usize).div_ceil(64)],
        }
    }

    pub fn full(size: u32) -> Self {
        let mut s = Self::empty(size);
        for a in 1..=size {
            s.insert(a);
        }
        s
    }

    pub fn singleton(size: u32, a: Letter) -> Self {
        let mut s = Self::empty(size);
        s.insert(a);
        s
    }

    pub fn from_letters(size: u32, letters: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let mut s = Self::empty(size);
        for a in letters {
            if a == 0 || a > size {
                return Err(Error::validation(
                    "letter",
                    format!("letter {a} outside 1..={size}"),
                ));
            }
            s.insert(a);
        }
        Ok(s)
    }

    pub fn domain_size(&self) -> u32 {
        self.size
    }

    pub fn insert(&mut self, a: Letter) {
        debug_assert!(a >= 1 && a <= self.size);
        let i = (a - 1) as usize;
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, a: Letter) -> bool {
        if a == 0 || a > self.size {
            return false;
        }
        let i = (a - 1) as usize;
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.size as usize
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection(&self, other: &LetterSet) -> LetterSet {
        LetterSet {
            size: self.size,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &LetterSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Letter> + '_ {
        (1..=self.size).filter(move |&a| self.contains(a))
    }
}

impl fmt::Debug for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() && self.size > 1 {
            return write!(f, "D");
        }
        write!(f, "{{")?;
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}
