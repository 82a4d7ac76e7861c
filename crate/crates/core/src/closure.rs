//! Least fixpoints of predicate sets under prefix drop, pairwise suffix-join
//! and singleton-suffix extension.
//!
//! All three closures run the same worklist: members are appended in
//! discovery order and each newly processed member is combined with every
//! member processed before it (and itself), so every pair is visited once.

use indexmap::IndexMap;
use serde::Serialize;

use crate::domain::Letter;
use crate::error::{Error, Result};
use crate::order::{build_hasse, check_hasse_bound, HasseDiagram};
use crate::predicate::Predicate;

pub const DEFAULT_CLOSURE_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureKind {
    Prefix,
    CapBar,
    Star,
}

#[derive(Debug, Clone, Copy)]
pub struct ClosureConfig {
    /// Maximum number of members before the fixpoint is abandoned.
    pub cap: usize,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig {
            cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

/// How a member first entered the closure. Indices refer to member order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Base(usize),
    /// Added because every closed language here carries the arity-0 top.
    ForcedEpsilon,
    Drop(usize),
    Join(usize, usize),
    Extend(usize, Letter),
}

#[derive(Debug, Clone)]
pub struct ClosedLanguage {
    domain_size: u32,
    base: Vec<Predicate>,
    members: IndexMap<Predicate, Provenance>,
    kind: ClosureKind,
    diagram: Option<HasseDiagram>,
}

impl ClosedLanguage {
    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn kind(&self) -> ClosureKind {
        self.kind
    }

    pub fn base(&self) -> &[Predicate] {
        &self.base
    }

    /// Members in discovery order.
    pub fn members(&self) -> impl Iterator<Item = &Predicate> {
        self.members.keys()
    }

    pub fn member(&self, i: usize) -> &Predicate {
        self.members.get_index(i).expect("member index in range").0
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        *self.members.get_index(i).expect("member index in range").1
    }

    pub fn contains(&self, p: &Predicate) -> bool {
        self.members.contains_key(p)
    }

    pub fn index_of(&self, p: &Predicate) -> Option<usize> {
        self.members.get_index_of(p)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn includes_epsilon(&self) -> bool {
        self.contains(&Predicate::Epsilon)
    }

    pub fn includes_bottom(&self) -> bool {
        self.contains(&Predicate::Bottom)
    }

    /// Member count without the arity-0 predicate.
    pub fn reported_size(&self) -> usize {
        self.len() - usize::from(self.includes_epsilon())
    }

    pub fn is_simple(&self) -> bool {
        self.members.keys().all(|p| !p.is_extensional())
    }

    pub fn diagram(&self) -> Option<&HasseDiagram> {
        self.diagram.as_ref()
    }

    /// Builds (once) and returns the Hasse diagram over the members.
    pub fn ensure_diagram(&mut self) -> Result<&HasseDiagram> {
        if self.diagram.is_none() {
            self.diagram = Some(build_hasse(self.members.keys().cloned())?);
        }
        Ok(self.diagram.as_ref().expect("just built"))
    }

    pub fn with_diagram(mut self) -> Result<Self> {
        self.ensure_diagram()?;
        Ok(self)
    }

    /// Whether one more sweep of the closure rules for `kind` adds nothing.
    /// A join that comes out empty counts as present even without `Bottom`.
    pub fn is_closed(&self) -> bool {
        let members: Vec<&Predicate> = self.members.keys().collect();
        let has = |p: Result<Predicate>| {
            p.map(|p| p.is_bottom() || self.members.contains_key(&p))
                .unwrap_or(true)
        };
        for (i, p) in members.iter().enumerate() {
            if !p.is_epsilon() && !has(p.prefix_drop()) {
                return false;
            }
            if self.kind != ClosureKind::Prefix
                && !members[..=i].iter().all(|q| has(p.suffix_join(q)))
            {
                return false;
            }
            if self.kind == ClosureKind::Star
                && !p.is_epsilon()
                && !(1..=self.domain_size).all(|a| has(p.singleton_extend(a)))
            {
                return false;
            }
        }
        true
    }

    /// For closures of product languages: each member other than `Bottom`
    /// written as a list of `(base index, prefix length)` terms whose
    /// suffix-join reproduces it. Empty list means `Epsilon`.
    pub fn prefix_join_terms(&self) -> Vec<Option<Vec<(usize, usize)>>> {
        let mut terms: Vec<Option<Vec<(usize, usize)>>> = Vec::with_capacity(self.len());
        for (i, (p, prov)) in self.members.iter().enumerate() {
            let t = if p.is_bottom() {
                None
            } else {
                match *prov {
                    Provenance::Base(b) => Some(vec![(b, self.base[b].len())]),
                    Provenance::ForcedEpsilon => Some(Vec::new()),
                    Provenance::Drop(src) => terms[src].as_ref().map(|ts| {
                        ts.iter()
                            .filter(|&&(_, k)| k > 1)
                            .map(|&(b, k)| (b, k - 1))
                            .collect()
                    }),
                    Provenance::Join(x, y) => match (&terms[x], &terms[y]) {
                        (Some(a), Some(b)) => {
                            let mut v = a.clone();
                            v.extend(b.iter().copied());
                            v.sort_unstable();
                            v.dedup();
                            Some(v)
                        }
                        _ => None,
                    },
                    Provenance::Extend(..) => None,
                }
            };
            debug_assert!(terms.len() == i);
            terms.push(t);
        }
        terms
    }

    pub fn report(&mut self) -> Result<ClosureReport> {
        let kind = self.kind;
        let size = self.len();
        let reported_size = self.reported_size();
        let includes_epsilon = self.includes_epsilon();
        let includes_bottom = self.includes_bottom();
        let d = self.domain_size;
        let diagram = self.ensure_diagram()?;
        let b = check_hasse_bound(diagram, d);
        Ok(ClosureReport {
            kind,
            size,
            reported_size,
            includes_epsilon,
            includes_bottom,
            hasse_edges: b.edge_count,
            bound: b.bound,
            bound_satisfied: b.satisfied,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub kind: ClosureKind,
    pub size: usize,
    pub reported_size: usize,
    pub includes_epsilon: bool,
    pub includes_bottom: bool,
    pub hasse_edges: u64,
    pub bound: u64,
    pub bound_satisfied: bool,
}

#[derive(Clone, Copy)]
struct Rules {
    join: bool,
    extend: bool,
    /// Whether a join that comes out empty adds `Bottom`.
    bottom: bool,
}

struct Fixpoint {
    domain_size: u32,
    cap: usize,
    members: IndexMap<Predicate, Provenance>,
}

impl Fixpoint {
    fn insert(&mut self, p: Predicate, prov: Provenance) -> Result<()> {
        if !self.members.contains_key(&p) {
            if self.members.len() >= self.cap {
                return Err(Error::capacity("closure size", self.cap as u64));
            }
            self.members.insert(p, prov);
        }
        Ok(())
    }

    fn run(&mut self, rules: Rules) -> Result<()> {
        let mut next = 0;
        while next < self.members.len() {
            let p = self.members.get_index(next).expect("in range").0.clone();
            if !p.is_epsilon() {
                self.insert(p.prefix_drop()?, Provenance::Drop(next))?;
            }
            if rules.join {
                for j in 0..=next {
                    let q = self.members.get_index(j).expect("in range").0;
                    let r = p.suffix_join(q)?;
                    if rules.bottom || !r.is_bottom() {
                        self.insert(r, Provenance::Join(next, j))?;
                    }
                }
            }
            if rules.extend && !p.is_epsilon() {
                for a in 1..=self.domain_size {
                    self.insert(p.singleton_extend(a)?, Provenance::Extend(next, a))?;
                }
            }
            next += 1;
        }
        Ok(())
    }
}

fn validate_base(domain_size: u32, base: &[Predicate]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for (i, p) in base.iter().enumerate() {
        match p.arity() {
            None | Some(0) => {
                return Err(Error::validation(
                    format!("predicates/{i}"),
                    "language predicates must have arity >= 1",
                ))
            }
            _ => {}
        }
        if p.domain_size() != Some(domain_size) {
            return Err(Error::validation(
                format!("predicates/{i}"),
                format!("predicate is not over the domain of size {domain_size}"),
            ));
        }
        if !seen.insert(p) {
            return Err(Error::validation(
                format!("predicates/{i}"),
                format!("duplicate predicate {}", p.key()),
            ));
        }
    }
    Ok(())
}

fn close(
    domain_size: u32,
    base: &[Predicate],
    kind: ClosureKind,
    rules: Rules,
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    validate_base(domain_size, base)?;
    let mut fp = Fixpoint {
        domain_size,
        cap: config.cap,
        members: IndexMap::new(),
    };
    for (i, p) in base.iter().enumerate() {
        fp.insert(p.clone(), Provenance::Base(i))?;
    }
    fp.run(rules)?;
    fp.insert(Predicate::Epsilon, Provenance::ForcedEpsilon)?;
    Ok(ClosedLanguage {
        domain_size,
        base: base.to_vec(),
        members: fp.members,
        kind,
        diagram: None,
    })
}

/// Smallest superset closed under prefix drop.
pub fn prefix_closure(
    domain_size: u32,
    base: &[Predicate],
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    let rules = Rules {
        join: false,
        extend: false,
        bottom: true,
    };
    close(domain_size, base, ClosureKind::Prefix, rules, config)
}

/// Smallest superset closed under prefix drop and pairwise suffix-join.
pub fn cap_bar_closure(
    domain_size: u32,
    base: &[Predicate],
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    let rules = Rules {
        join: true,
        extend: false,
        bottom: true,
    };
    close(domain_size, base, ClosureKind::CapBar, rules, config)
}

/// One sweep of singleton-suffix extension over a prefix- and
/// join-closed language.
pub fn singleton_suffix_saturate(
    closed: &ClosedLanguage,
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    let mut fp = Fixpoint {
        domain_size: closed.domain_size,
        cap: config.cap,
        members: closed.members.clone(),
    };
    let n = fp.members.len();
    for i in 0..n {
        let p = fp.members.get_index(i).expect("in range").0.clone();
        if p.is_epsilon() || p.is_bottom() {
            continue;
        }
        for a in 1..=closed.domain_size {
            fp.insert(p.singleton_extend(a)?, Provenance::Extend(i, a))?;
        }
    }
    Ok(ClosedLanguage {
        domain_size: closed.domain_size,
        base: closed.base.clone(),
        members: fp.members,
        kind: ClosureKind::Star,
        diagram: None,
    })
}

/// The full closure. Product languages take the saturate-after-join path;
/// anything else runs the three-rule fixpoint.
///
/// The product path re-closes the saturated set under joins: two extensions
/// `a- x {x}` and `b- x {x}` meet in `(a- | b-) x {x}`, which a single sweep
/// misses when `a | b` is empty. Joins that vanish do not add `Bottom` here,
/// so the result matches the fixpoint up to `Bottom`.
pub fn star_closure(
    domain_size: u32,
    base: &[Predicate],
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    if base.iter().all(Predicate::is_simple) {
        let cap_bar = cap_bar_closure(domain_size, base, config)?;
        let saturated = singleton_suffix_saturate(&cap_bar, config)?;
        let mut fp = Fixpoint {
            domain_size,
            cap: config.cap,
            members: saturated.members,
        };
        fp.run(Rules {
            join: true,
            extend: false,
            bottom: false,
        })?;
        Ok(ClosedLanguage {
            members: fp.members,
            ..saturated
        })
    } else {
        star_closure_fixpoint(domain_size, base, config)
    }
}

/// The full closure by direct three-rule fixpoint, for any base.
pub fn star_closure_fixpoint(
    domain_size: u32,
    base: &[Predicate],
    config: &ClosureConfig,
) -> Result<ClosedLanguage> {
    let rules = Rules {
        join: true,
        extend: true,
        bottom: true,
    };
    close(domain_size, base, ClosureKind::Star, rules, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn s(d: u32, f: &[&[u32]]) -> Predicate {
        let v: Vec<Vec<u32>> = f.iter().map(|x| x.to_vec()).collect();
        Predicate::simple_from_letters(d, &v).unwrap()
    }

    fn set(c: &ClosedLanguage) -> BTreeSet<Predicate> {
        c.members().cloned().collect()
    }

    fn cfg() -> ClosureConfig {
        ClosureConfig::default()
    }

    #[test]
    fn prefix_closure_examples() {
        let base = vec![s(2, &[&[1], &[1]])];
        let c = prefix_closure(2, &base, &cfg()).unwrap();
        let want: BTreeSet<_> = [s(2, &[&[1], &[1]]), s(2, &[&[1]]), Predicate::Epsilon].into();
        assert_eq!(set(&c), want);
        assert!(c.is_closed());

        let again: Vec<Predicate> = c.members().filter(|p| !p.is_epsilon()).cloned().collect();
        let c2 = prefix_closure(2, &again, &cfg()).unwrap();
        assert_eq!(set(&c2), want);

        let rel = Predicate::extensional(2, 2, vec![vec![1, 2], vec![2, 1]]).unwrap();
        let c = prefix_closure(2, std::slice::from_ref(&rel), &cfg()).unwrap();
        let unary = Predicate::extensional(2, 1, vec![vec![1], vec![2]]).unwrap();
        assert_eq!(set(&c), [rel, unary, Predicate::Epsilon].into());
    }

    #[test]
    fn cap_bar_examples() {
        let c = cap_bar_closure(2, &[s(2, &[&[1], &[1]])], &cfg()).unwrap();
        assert_eq!(
            set(&c),
            [Predicate::Epsilon, s(2, &[&[1]]), s(2, &[&[1], &[1]])].into()
        );
        let c = cap_bar_closure(2, &[], &cfg()).unwrap();
        assert_eq!(set(&c), [Predicate::Epsilon].into());
        assert_eq!(c.reported_size(), 0);
    }

    #[test]
    fn saturate_and_star_examples() {
        let c = cap_bar_closure(2, &[s(2, &[&[1], &[1]])], &cfg()).unwrap();
        let st = singleton_suffix_saturate(&c, &cfg()).unwrap();
        let want: BTreeSet<_> = [
            Predicate::Epsilon,
            s(2, &[&[1]]),
            s(2, &[&[2]]),
            s(2, &[&[1], &[1]]),
            s(2, &[&[1], &[2]]),
        ]
        .into();
        assert_eq!(set(&st), want);
        assert_eq!(set(&singleton_suffix_saturate(&st, &cfg()).unwrap()), want);
        assert!(st.len() <= 3 * c.len());

        // The fixpoint also meets <{1}> and <{2}> at the bottom element.
        let direct = star_closure_fixpoint(2, &[s(2, &[&[1], &[1]])], &cfg()).unwrap();
        let mut with_bottom = want.clone();
        with_bottom.insert(Predicate::Bottom);
        assert_eq!(set(&direct), with_bottom);
        assert!(direct.is_closed());

        let eps = cap_bar_closure(2, &[], &cfg()).unwrap();
        assert_eq!(
            set(&singleton_suffix_saturate(&eps, &cfg()).unwrap()),
            set(&eps)
        );
        assert_eq!(set(&star_closure(2, &[], &cfg()).unwrap()), set(&eps));
    }

    #[test]
    fn validation_and_cap() {
        assert!(cap_bar_closure(2, &[Predicate::Epsilon], &cfg()).is_err());
        let p = s(2, &[&[1]]);
        assert!(cap_bar_closure(2, &[p.clone(), p.clone()], &cfg()).is_err());
        assert!(cap_bar_closure(3, &[p], &cfg()).is_err());
        let big = s(4, &[&[1], &[1, 2, 3, 4], &[2], &[1, 2, 3, 4], &[3]]);
        let err = cap_bar_closure(4, &[big], &ClosureConfig { cap: 5 }).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 5, .. }));
    }

    #[test]
    fn minimality_by_rule_replay() {
        let base = vec![s(3, &[&[1, 2], &[2, 3]]), s(3, &[&[2], &[1, 2, 3], &[3]])];
        let c = cap_bar_closure(3, &base, &cfg()).unwrap();
        assert!(c.is_closed());
        for i in 0..c.len() {
            let p = c.member(i);
            // Bottom is optional: a vanishing join never requires it.
            if base.contains(p) || p.is_epsilon() || p.is_bottom() {
                continue;
            }
            let mut without = c.clone();
            without.members.shift_remove(p);
            assert!(!without.is_closed(), "{p:?} is redundant");
        }
    }

    #[test]
    fn star_joins_extensions_of_disjoint_tails() {
        // <{1,2},{1}> | <{2,3},{2}> is empty, yet their extensions by the
        // same letter meet in <{2},{a}>.
        let base = vec![s(3, &[&[1, 2], &[1]]), s(3, &[&[2, 3], &[2]])];
        let fast = star_closure(3, &base, &cfg()).unwrap();
        for a in 1..=3 {
            assert!(fast.contains(&s(3, &[&[2], &[a]])));
        }
        assert!(fast.is_closed());
        let general = star_closure_fixpoint(3, &base, &cfg()).unwrap();
        let strip = |c: &ClosedLanguage| -> BTreeSet<Predicate> {
            c.members().filter(|p| !p.is_bottom()).cloned().collect()
        };
        assert_eq!(strip(&fast), strip(&general));
        let cap = cap_bar_closure(3, &base, &cfg()).unwrap();
        assert!(fast.len() <= 4 * cap.len());
    }
}
