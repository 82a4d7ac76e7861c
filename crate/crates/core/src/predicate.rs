//! Relations over a finite domain and the operators the closures are built
//! from: suffix membership, suffix-join, prefix drop, singleton extension and
//! suffix slices.
//!
//! Every value of [`Predicate`] is canonical: empty relations of any arity
//! collapse to [`Predicate::Bottom`], products keep positional factors, and
//! explicit relations keep their tuples sorted and deduplicated. Structural
//! equality is therefore relation equality within one representation kind.

use std::cmp::Ordering;
use std::fmt;

use crate::domain::{Letter, LetterSet};
use crate::error::{Error, Result};

/// A direct product `F1 x ... x Fk` of nonempty letter sets, `k >= 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Product {
    factors: Vec<LetterSet>,
}

impl Product {
    pub fn factors(&self) -> &[LetterSet] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    fn domain(&self) -> u32 {
        self.factors[0].domain_size()
    }

    fn contains(&self, t: &[Letter]) -> bool {
        t.len() == self.factors.len() && self.factors.iter().zip(t).all(|(f, &a)| f.contains(a))
    }

    /// Number of tuples in the expanded relation (saturating).
    fn cardinality(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, f| acc.saturating_mul(f.len() as u64))
    }

    fn expand(&self) -> Vec<Vec<Letter>> {
        let mut out: Vec<Vec<Letter>> = vec![Vec::new()];
        for f in &self.factors {
            let mut next = Vec::with_capacity(out.len() * f.len());
            for prefix in &out {
                for a in f.iter() {
                    let mut t = prefix.clone();
                    t.push(a);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

/// An explicit nonempty set of equal-length tuples, sorted lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    domain: u32,
    arity: usize,
    tuples: Vec<Vec<Letter>>,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<Letter>] {
        &self.tuples
    }

    fn contains(&self, t: &[Letter]) -> bool {
        t.len() == self.arity
            && self
                .tuples
                .binary_search_by(|probe| probe.as_slice().cmp(t))
                .is_ok()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// The empty relation, shared by every arity.
    Bottom,
    /// The arity-0 relation holding only the empty word.
    Epsilon,
    Simple(Product),
    Extensional(Relation),
}

impl Predicate {
    /// Builds a product predicate. An empty factor yields `Bottom`, zero
    /// factors yield `Epsilon`.
    pub fn simple(domain: u32, factors: Vec<LetterSet>) -> Result<Predicate> {
        if factors.is_empty() {
            return Ok(Predicate::Epsilon);
        }
        for (i, f) in factors.iter().enumerate() {
            if f.domain_size() != domain {
                return Err(Error::validation(
                    format!("factors/{i}"),
                    format!(
                        "factor over domain of size {} in a predicate over size {domain}",
                        f.domain_size()
                    ),
                ));
            }
        }
        if factors.iter().any(LetterSet::is_empty) {
            return Ok(Predicate::Bottom);
        }
        Ok(Predicate::Simple(Product { factors }))
    }

    /// Builds a product predicate from letter lists.
    pub fn simple_from_letters(domain: u32, factors: &[Vec<Letter>]) -> Result<Predicate> {
        let sets = factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                LetterSet::from_letters(domain, f.iter().copied()).map_err(|e| match e {
                    Error::Validation { message, .. } => {
                        Error::validation(format!("factors/{i}"), message)
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Predicate::simple(domain, sets)
    }

    /// Builds an explicit relation. An empty tuple set yields `Bottom`; an
    /// arity of zero yields `Epsilon`.
    pub fn extensional(domain: u32, arity: usize, tuples: Vec<Vec<Letter>>) -> Result<Predicate> {
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != arity {
                return Err(Error::validation(
                    format!("tuples/{i}"),
                    format!("tuple of length {} in a relation of arity {arity}", t.len()),
                ));
            }
            if let Some(&a) = t.iter().find(|&&a| a == 0 || a > domain) {
                return Err(Error::validation(
                    format!("tuples/{i}"),
                    format!("letter {a} outside 1..={domain}"),
                ));
            }
        }
        Ok(Self::relation_unchecked(domain, arity, tuples))
    }

    fn relation_unchecked(domain: u32, arity: usize, mut tuples: Vec<Vec<Letter>>) -> Predicate {
        if tuples.is_empty() {
            return Predicate::Bottom;
        }
        if arity == 0 {
            return Predicate::Epsilon;
        }
        tuples.sort_unstable();
        tuples.dedup();
        Predicate::Extensional(Relation {
            domain,
            arity,
            tuples,
        })
    }

    /// `None` for `Bottom`, which has no fixed arity.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Predicate::Bottom => None,
            Predicate::Epsilon => Some(0),
            Predicate::Simple(p) => Some(p.arity()),
            Predicate::Extensional(r) => Some(r.arity),
        }
    }

    /// Arity with `Bottom` counted as 0; used where only nonempty predicates matter.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.arity().unwrap_or(0)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Predicate::Bottom)
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, Predicate::Epsilon)
    }

    pub fn is_simple(&self) -> bool {
        matches!(self, Predicate::Simple(_))
    }

    pub fn is_extensional(&self) -> bool {
        matches!(self, Predicate::Extensional(_))
    }

    pub fn domain_size(&self) -> Option<u32> {
        match self {
            Predicate::Bottom | Predicate::Epsilon => None,
            Predicate::Simple(p) => Some(p.domain()),
            Predicate::Extensional(r) => Some(r.domain),
        }
    }

    /// Whether the tuple `t` belongs to the relation.
    pub fn contains_tuple(&self, t: &[Letter]) -> bool {
        match self {
            Predicate::Bottom => false,
            Predicate::Epsilon => t.is_empty(),
            Predicate::Simple(p) => p.contains(t),
            Predicate::Extensional(r) => r.contains(t),
        }
    }

    /// Number of tuples (1 for `Epsilon`, saturating for large products).
    pub fn cardinality(&self) -> u64 {
        match self {
            Predicate::Bottom => 0,
            Predicate::Epsilon => 1,
            Predicate::Simple(p) => p.cardinality(),
            Predicate::Extensional(r) => r.tuples.len() as u64,
        }
    }

    /// All tuples of the relation in lexicographic order.
    pub fn tuples(&self) -> Vec<Vec<Letter>> {
        match self {
            Predicate::Bottom => Vec::new(),
            Predicate::Epsilon => vec![Vec::new()],
            Predicate::Simple(p) => p.expand(),
            Predicate::Extensional(r) => r.tuples.clone(),
        }
    }

    /// Converts a product into an explicit relation; other kinds are returned as-is.
    pub fn to_extensional(&self) -> Predicate {
        match self {
            Predicate::Simple(p) => Self::relation_unchecked(p.domain(), p.arity(), p.expand()),
            other => other.clone(),
        }
    }

    /// Suffix membership without letter validation: `w` is in `*self`.
    pub fn accepts_suffix(&self, w: &[Letter]) -> bool {
        match self {
            Predicate::Bottom => false,
            Predicate::Epsilon => true,
            _ => {
                let k = self.len();
                w.len() >= k && self.contains_tuple(&w[w.len() - k..])
            }
        }
    }

    /// Decides whether `w` lies in `*self`, the set of words whose
    /// length-`arity` suffix belongs to the relation.
    pub fn membership_suffix(&self, w: &[Letter]) -> Result<bool> {
        if let Some(d) = self.domain_size() {
            for (i, &a) in w.iter().enumerate() {
                if a == 0 || a > d {
                    return Err(Error::validation(
                        format!("word/{i}"),
                        format!("letter {a} outside 1..={d}"),
                    ));
                }
            }
        }
        Ok(self.accepts_suffix(w))
    }

    /// The suffix-join: the predicate whose suffix language is the
    /// intersection of the two suffix languages.
    pub fn suffix_join(&self, other: &Predicate) -> Result<Predicate> {
        check_same_domain(self, other)?;
        let (long, short) = match (self, other) {
            (Predicate::Bottom, _) | (_, Predicate::Bottom) => return Ok(Predicate::Bottom),
            (Predicate::Epsilon, p) | (p, Predicate::Epsilon) => return Ok(p.clone()),
            (a, b) if a.len() >= b.len() => (a, b),
            (a, b) => (b, a),
        };
        let offset = long.len() - short.len();
        Ok(match (long, short) {
            (Predicate::Simple(l), Predicate::Simple(s)) => {
                let mut factors = l.factors.clone();
                for (f, g) in factors[offset..].iter_mut().zip(&s.factors) {
                    *f = f.intersection(g);
                    if f.is_empty() {
                        return Ok(Predicate::Bottom);
                    }
                }
                Predicate::Simple(Product { factors })
            }
            (Predicate::Extensional(l), s) => {
                let tuples = l
                    .tuples
                    .iter()
                    .filter(|t| s.contains_tuple(&t[offset..]))
                    .cloned()
                    .collect();
                Self::relation_unchecked(l.domain, l.arity, tuples)
            }
            (Predicate::Simple(l), s) => {
                let tuples = l
                    .expand()
                    .into_iter()
                    .filter(|t| s.contains_tuple(&t[offset..]))
                    .collect();
                Self::relation_unchecked(l.domain(), l.arity(), tuples)
            }
            _ => unreachable!("bottom and epsilon handled above"),
        })
    }

    /// Projection to all but the last coordinate. Arity-1 predicates drop to
    /// `Epsilon`; `Bottom` drops to itself.
    pub fn prefix_drop(&self) -> Result<Predicate> {
        match self {
            Predicate::Bottom => Ok(Predicate::Bottom),
            Predicate::Epsilon => Err(Error::UndefinedOperation(
                "prefix drop of the arity-0 predicate".into(),
            )),
            _ => self.suffix_prefix(self.len() - 1),
        }
    }

    /// `prefix_drop(self) x {a}`.
    pub fn singleton_extend(&self, a: Letter) -> Result<Predicate> {
        let d = match self {
            Predicate::Bottom => return Ok(Predicate::Bottom),
            Predicate::Epsilon => {
                return Err(Error::UndefinedOperation(
                    "singleton extension of the arity-0 predicate".into(),
                ))
            }
            p => p.domain_size().expect("nonempty predicates carry a domain"),
        };
        if a == 0 || a > d {
            return Err(Error::validation(
                "letter",
                format!("letter {a} outside 1..={d}"),
            ));
        }
        Ok(match self {
            Predicate::Simple(p) => {
                let mut factors = p.factors[..p.arity() - 1].to_vec();
                factors.push(LetterSet::singleton(d, a));
                Predicate::Simple(Product { factors })
            }
            Predicate::Extensional(r) => {
                let tuples = r
                    .tuples
                    .iter()
                    .map(|t| {
                        let mut u = t[..r.arity - 1].to_vec();
                        u.push(a);
                        u
                    })
                    .collect();
                Self::relation_unchecked(d, r.arity, tuples)
            }
            _ => unreachable!(),
        })
    }

    /// Projection to the last `k` coordinates.
    pub fn suffix_slice(&self, k: usize) -> Result<Predicate> {
        match self {
            Predicate::Bottom => Ok(Predicate::Bottom),
            _ if k > self.len() => Err(Error::validation(
                "k",
                format!("slice length {k} exceeds arity {}", self.len()),
            )),
            _ if k == 0 => Ok(Predicate::Epsilon),
            Predicate::Simple(p) => Ok(Predicate::Simple(Product {
                factors: p.factors[p.arity() - k..].to_vec(),
            })),
            Predicate::Extensional(r) => {
                let tuples = r.tuples.iter().map(|t| t[r.arity - k..].to_vec()).collect();
                Ok(Self::relation_unchecked(r.domain, k, tuples))
            }
            Predicate::Epsilon => unreachable!("k == 0 handled"),
        }
    }

    /// Projection to the first `k` coordinates.
    pub fn prefix_slice(&self, k: usize) -> Result<Predicate> {
        match self {
            Predicate::Bottom => Ok(Predicate::Bottom),
            _ if k > self.len() => Err(Error::validation(
                "k",
                format!("slice length {k} exceeds arity {}", self.len()),
            )),
            _ => self.suffix_prefix(k),
        }
    }

    fn suffix_prefix(&self, k: usize) -> Result<Predicate> {
        Ok(match self {
            _ if k == 0 => Predicate::Epsilon,
            Predicate::Simple(p) => Predicate::Simple(Product {
                factors: p.factors[..k].to_vec(),
            }),
            Predicate::Extensional(r) => {
                let tuples = r.tuples.iter().map(|t| t[..k].to_vec()).collect();
                Self::relation_unchecked(r.domain, k, tuples)
            }
            _ => unreachable!(),
        })
    }

    /// Letters occurring in the last coordinate, ascending.
    pub fn last_projection(&self) -> Result<Vec<Letter>> {
        match self {
            Predicate::Bottom => Ok(Vec::new()),
            Predicate::Epsilon => Err(Error::UndefinedOperation(
                "last projection of the arity-0 predicate".into(),
            )),
            Predicate::Simple(p) => Ok(p.factors[p.arity() - 1].iter().collect()),
            Predicate::Extensional(r) => {
                let mut out: Vec<Letter> = r.tuples.iter().map(|t| t[r.arity - 1]).collect();
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
        }
    }

    /// Whether the suffix of length `arity(self)` of every tuple of `other`
    /// lies in `self`. Caller guarantees `arity(self) <= arity(other)` and
    /// both are nonempty.
    pub(crate) fn contains_suffixes_of(&self, other: &Predicate) -> bool {
        let k = self.len();
        let offset = other.len() - k;
        match (self, other) {
            (Predicate::Simple(a), Predicate::Simple(b)) => a
                .factors
                .iter()
                .zip(&b.factors[offset..])
                .all(|(fa, fb)| fb.is_subset(fa)),
            (Predicate::Simple(a), Predicate::Extensional(b)) => {
                b.tuples.iter().all(|t| a.contains(&t[offset..]))
            }
            (Predicate::Extensional(a), Predicate::Extensional(b)) => {
                b.tuples.iter().all(|t| a.contains(&t[offset..]))
            }
            (Predicate::Extensional(a), Predicate::Simple(b)) => {
                let tail = Product {
                    factors: b.factors[offset..].to_vec(),
                };
                tail.cardinality() <= a.tuples.len() as u64
                    && tail.expand().iter().all(|t| a.contains(t))
            }
            _ => unreachable!("nonempty predicates only"),
        }
    }

    /// A stable textual key, e.g. `<{1},{1,2}>`, `{(1,2),(2,1)}`, `eps`, `bot`.
    pub fn key(&self) -> String {
        match self {
            Predicate::Bottom => "bot".into(),
            Predicate::Epsilon => "eps".into(),
            Predicate::Simple(p) => {
                let parts: Vec<String> = p
                    .factors
                    .iter()
                    .map(|f| {
                        let ls: Vec<String> = f.iter().map(|a| a.to_string()).collect();
                        format!("{{{}}}", ls.join(","))
                    })
                    .collect();
                format!("<{}>", parts.join(","))
            }
            Predicate::Extensional(r) => {
                let parts: Vec<String> = r
                    .tuples
                    .iter()
                    .map(|t| {
                        let ls: Vec<String> = t.iter().map(|a| a.to_string()).collect();
                        format!("({})", ls.join(","))
                    })
                    .collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

pub(crate) fn check_same_domain(a: &Predicate, b: &Predicate) -> Result<()> {
    match (a.domain_size(), b.domain_size()) {
        (Some(x), Some(y)) if x != y => Err(Error::validation(
            "predicates",
            format!("predicates over domains of size {x} and {y}"),
        )),
        _ => Ok(()),
    }
}

impl Ord for Predicate {
    /// Canonical order: `Bottom`, `Epsilon`, then by arity, products before
    /// explicit relations, then by content.
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(p: &Predicate) -> (u8, usize, u8) {
            match p {
                Predicate::Bottom => (0, 0, 0),
                Predicate::Epsilon => (1, 0, 0),
                Predicate::Simple(s) => (2, s.arity(), 0),
                Predicate::Extensional(r) => (2, r.arity, 1),
            }
        }
        rank(self)
            .cmp(&rank(other))
            .then_with(|| match (self, other) {
                (Predicate::Simple(a), Predicate::Simple(b)) => a
                    .domain()
                    .cmp(&b.domain())
                    .then_with(|| a.factors.cmp(&b.factors)),
                (Predicate::Extensional(a), Predicate::Extensional(b)) => a
                    .domain
                    .cmp(&b.domain)
                    .then_with(|| a.tuples.cmp(&b.tuples)),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Predicate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Bottom => write!(f, "⊥"),
            Predicate::Epsilon => write!(f, "ε"),
            Predicate::Simple(p) => {
                write!(f, "⟨")?;
                for (i, s) in p.factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s:?}")?;
                }
                write!(f, "⟩")
            }
            Predicate::Extensional(_) => write!(f, "{}", self.key()),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
