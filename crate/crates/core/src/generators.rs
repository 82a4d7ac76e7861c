//! Example languages and seeded random languages and instances.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Domain, Letter, LetterSet};
use crate::error::{Error, Result};
use crate::model::{Instance, Language};
use crate::predicate::Predicate;

fn build(domain_size: u32, preds: Vec<Predicate>, prefix: &str) -> Result<Language> {
    let mut seen = HashSet::new();
    let entries = preds
        .into_iter()
        .filter(|p| !p.is_bottom() && seen.insert(p.clone()))
        .enumerate()
        .map(|(i, p)| (format!("{prefix}{i}"), p))
        .collect();
    Language::new(Domain::new(domain_size)?, entries)
}

fn check_partition(
    domain_size: u32,
    classes: &[Vec<Letter>],
    path: &str,
) -> Result<Vec<LetterSet>> {
    let mut seen = LetterSet::empty(domain_size);
    let mut out = Vec::with_capacity(classes.len());
    for (i, c) in classes.iter().enumerate() {
        let set = LetterSet::from_letters(domain_size, c.iter().copied())
            .map_err(|e| Error::validation(format!("{path}/{i}"), e.to_string()))?;
        if set.is_empty() {
            return Err(Error::validation(format!("{path}/{i}"), "empty class"));
        }
        if set.iter().any(|a| seen.contains(a)) {
            return Err(Error::validation(format!("{path}/{i}"), "classes overlap"));
        }
        for a in set.iter() {
            seen.insert(a);
        }
        out.push(set);
    }
    if !seen.is_full() {
        return Err(Error::validation(path, "classes do not cover the domain"));
    }
    Ok(out)
}

fn check_prefix_closed(words: &[Vec<usize>], alphabet: usize, path: &str) -> Result<()> {
    let set: HashSet<&[usize]> = words.iter().map(Vec::as_slice).collect();
    for (i, w) in words.iter().enumerate() {
        if w.is_empty() {
            return Err(Error::validation(format!("{path}/{i}"), "empty word"));
        }
        if let Some(&c) = w.iter().find(|&&c| c >= alphabet) {
            return Err(Error::validation(
                format!("{path}/{i}"),
                format!("symbol {c} out of range 0..{alphabet}"),
            ));
        }
        if w.len() > 1 && !set.contains(&w[..w.len() - 1]) {
            return Err(Error::validation(
                format!("{path}/{i}"),
                "word set is not prefix closed",
            ));
        }
    }
    Ok(())
}

/// `{ <{1}, D, {2}, D, {3}> }`.
pub fn gen_example1(domain_size: u32) -> Result<Language> {
    if domain_size < 3 {
        return Err(Error::validation("domain_size", "needs at least 3 letters"));
    }
    let d = LetterSet::full(domain_size);
    let one = |a| LetterSet::singleton(domain_size, a);
    let p = Predicate::simple(domain_size, vec![one(1), d.clone(), one(2), d, one(3)])?;
    build(domain_size, vec![p], "rho")
}

/// Products of classes along each word of `words` (class indices, 0-based).
pub fn gen_equivalence_prefix(
    domain_size: u32,
    classes: &[Vec<Letter>],
    words: &[Vec<usize>],
) -> Result<Language> {
    let classes = check_partition(domain_size, classes, "classes")?;
    check_prefix_closed(words, classes.len(), "words")?;
    let preds = words
        .iter()
        .map(|w| Predicate::simple(domain_size, w.iter().map(|&c| classes[c].clone()).collect()))
        .collect::<Result<_>>()?;
    build(domain_size, preds, "w")
}

/// All `O_1 x .. x O_l x {a_1} x .. x {a_k}` with `O_i` from `family`,
/// `l <= r1`, `k <= r2`, `l + k >= 1`. Pairwise intersections of family
/// members must be empty or in the family.
pub fn gen_family_products(
    domain_size: u32,
    family: &[Vec<Letter>],
    r1: usize,
    r2: usize,
) -> Result<Language> {
    if r1 + r2 == 0 {
        return Err(Error::validation("r1", "r1 + r2 must be at least 1"));
    }
    let sets: Vec<LetterSet> = family
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let s = LetterSet::from_letters(domain_size, f.iter().copied())
                .map_err(|e| Error::validation(format!("family/{i}"), e.to_string()))?;
            if s.is_empty() {
                return Err(Error::validation(format!("family/{i}"), "empty set"));
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            let c = a.intersection(b);
            if !c.is_empty() && !sets.contains(&c) {
                return Err(Error::validation(
                    format!("family/{i}"),
                    "family is not intersection closed",
                ));
            }
        }
    }
    let singles: Vec<LetterSet> = (1..=domain_size)
        .map(|a| LetterSet::singleton(domain_size, a))
        .collect();
    let heads = sequences(&sets, r1);
    let tails = sequences(&singles, r2);
    let mut preds = Vec::new();
    for h in &heads {
        for t in &tails {
            if h.len() + t.len() == 0 {
                continue;
            }
            let factors = h.iter().chain(t).cloned().collect();
            preds.push(Predicate::simple(domain_size, factors)?);
        }
    }
    build(domain_size, preds, "f")
}

/// Every sequence over `items` of length `0..=max_len`, shortest first.
fn sequences<T: Clone>(items: &[T], max_len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for x in items {
                let mut t: Vec<T> = s.clone();
                t.push(x.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Products `O_1 x .. x O_l`, `l <= r`, where `O_i` is a class of
/// `levels[n_i]` and `n_1 <= .. <= n_l`. Each level must refine the one
/// before it.
pub fn gen_multiscale(domain_size: u32, levels: &[Vec<Vec<Letter>>], r: usize) -> Result<Language> {
    if r == 0 {
        return Err(Error::validation("r", "r must be at least 1"));
    }
    if levels.is_empty() {
        return Err(Error::validation("levels", "no partitions given"));
    }
    let parts: Vec<Vec<LetterSet>> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| check_partition(domain_size, l, &format!("levels/{i}")))
        .collect::<Result<_>>()?;
    for (i, w) in parts.windows(2).enumerate() {
        if !w[1].iter().all(|c| w[0].iter().any(|p| c.is_subset(p))) {
            return Err(Error::validation(
                format!("levels/{}", i + 1),
                "partition does not refine the previous level",
            ));
        }
    }
    // (product so far, level of its last factor)
    let mut frontier: Vec<(Vec<LetterSet>, usize)> = vec![(Vec::new(), 0)];
    let mut preds = Vec::new();
    for _ in 0..r {
        let mut next = Vec::new();
        for (f, lvl) in &frontier {
            for (l, classes) in parts.iter().enumerate().skip(*lvl) {
                for c in classes {
                    let mut g = f.clone();
                    g.push(c.clone());
                    preds.push(Predicate::simple(domain_size, g.clone())?);
                    next.push((g, l));
                }
            }
        }
        frontier = next;
    }
    build(domain_size, preds, "m")
}

/// Tuples `(x_1..x_k)` with `(x_i, x_{i+1})` in relation `w_i` and
/// `x_k` in `last`.
fn wave_relation(
    domain_size: u32,
    relations: &[HashSet<(Letter, Letter)>],
    word: &[usize],
    last: &LetterSet,
) -> Result<Predicate> {
    let mut tuples: Vec<Vec<Letter>> = last.iter().map(|a| vec![a]).collect();
    for &j in word.iter().rev() {
        tuples = tuples
            .iter()
            .flat_map(|t| {
                (1..=domain_size)
                    .filter(|&a| relations[j].contains(&(a, t[0])))
                    .map(move |a| {
                        let mut u = Vec::with_capacity(t.len() + 1);
                        u.push(a);
                        u.extend_from_slice(t);
                        u
                    })
            })
            .collect();
    }
    if tuples.is_empty() {
        return Ok(Predicate::Bottom);
    }
    Predicate::extensional(domain_size, word.len() + 1, tuples)
}

/// Pair-pattern relations `rho_{w,W}` for `w` in `words` (indices into
/// `relations`) and `W` in `suffix_sets`, plus each `W` as a unary relation.
/// `relations` must partition `D x D`. Empty relations and repeats are
/// dropped.
pub fn gen_waves(
    domain_size: u32,
    relations: &[Vec<(Letter, Letter)>],
    words: &[Vec<usize>],
    suffix_sets: &[Vec<Letter>],
) -> Result<Language> {
    let dom = Domain::new(domain_size)?;
    let mut owner = std::collections::HashMap::new();
    let mut rels = Vec::with_capacity(relations.len());
    for (j, r) in relations.iter().enumerate() {
        let mut set = HashSet::new();
        for &(a, b) in r {
            dom.check_letter(a)
                .and_then(|_| dom.check_letter(b))
                .map_err(|e| Error::validation(format!("relations/{j}"), e.to_string()))?;
            if let Some(k) = owner.insert((a, b), j) {
                if k != j {
                    return Err(Error::validation(
                        format!("relations/{j}"),
                        format!("pair ({a},{b}) already in relation {k}"),
                    ));
                }
            }
            set.insert((a, b));
        }
        rels.push(set);
    }
    if owner.len() != (domain_size as usize).pow(2) {
        return Err(Error::validation(
            "relations",
            "relations do not cover D x D",
        ));
    }
    check_prefix_closed(words, rels.len(), "words")?;
    let lasts: Vec<LetterSet> = suffix_sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let set = LetterSet::from_letters(domain_size, s.iter().copied())
                .map_err(|e| Error::validation(format!("suffix_sets/{i}"), e.to_string()))?;
            if set.is_empty() {
                return Err(Error::validation(format!("suffix_sets/{i}"), "empty set"));
            }
            Ok(set)
        })
        .collect::<Result<_>>()?;
    let mut preds = Vec::new();
    for w in words {
        for last in &lasts {
            preds.push(wave_relation(domain_size, &rels, w, last)?);
        }
    }
    for last in &lasts {
        preds.push(wave_relation(domain_size, &rels, &[], last)?);
    }
    build(domain_size, preds, "v")
}

/// Rise, fall and flat on `1..=d`.
pub fn rise_fall_flat(domain_size: u32) -> Vec<Vec<(Letter, Letter)>> {
    let mut out = vec![Vec::new(), Vec::new(), Vec::new()];
    for a in 1..=domain_size {
        for b in 1..=domain_size {
            let j = match a.cmp(&b) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => 2,
            };
            out[j].push((a, b));
        }
    }
    out
}

/// All nonempty subsets of `1..=d` in increasing bitmask order.
pub fn nonempty_subsets(domain_size: u32) -> Vec<Vec<Letter>> {
    (1u32..(1 << domain_size))
        .map(|mask| {
            (1..=domain_size)
                .filter(|a| mask >> (a - 1) & 1 == 1)
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSign {
    NonPositive,
    Mixed,
}

fn random_letter_set<R: Rng>(rng: &mut R, domain_size: u32) -> LetterSet {
    match rng.gen_range(0..4) {
        0 => LetterSet::full(domain_size),
        1 => LetterSet::singleton(domain_size, rng.gen_range(1..=domain_size)),
        _ => loop {
            let s = LetterSet::from_letters(
                domain_size,
                (1..=domain_size).filter(|_| rng.gen_bool(0.5)),
            )
            .expect("letters in range");
            if !s.is_empty() {
                break s;
            }
        },
    }
}

/// Up to `max_preds` distinct product predicates of arity `1..=max_arity`.
pub fn random_simple_language<R: Rng>(
    rng: &mut R,
    domain_size: u32,
    max_preds: usize,
    max_arity: usize,
) -> Result<Language> {
    let count = rng.gen_range(1..=max_preds);
    let preds = (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=max_arity);
            let f = (0..k)
                .map(|_| random_letter_set(rng, domain_size))
                .collect();
            Predicate::simple(domain_size, f)
        })
        .collect::<Result<_>>()?;
    build(domain_size, preds, "p")
}

/// Up to `max_preds` distinct explicit relations of arity `1..=max_arity`.
pub fn random_extensional_language<R: Rng>(
    rng: &mut R,
    domain_size: u32,
    max_preds: usize,
    max_arity: usize,
) -> Result<Language> {
    let count = rng.gen_range(1..=max_preds);
    let mut preds = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(1..=max_arity);
        let all: Vec<Vec<Letter>> = crate::domain::Words::new(domain_size, k).collect();
        let keep = rng.gen_range(1..=all.len().min(6));
        let tuples = all.choose_multiple(rng, keep).cloned().collect();
        preds.push(Predicate::extensional(domain_size, k, tuples)?);
    }
    build(domain_size, preds, "r")
}

/// Weights in quarter steps within `[-3, 3]` so sums stay exact in `f64`.
pub fn random_weight<R: Rng>(rng: &mut R, sign: WeightSign) -> f64 {
    let q = rng.gen_range(1..=12) as f64 / 4.0;
    match sign {
        WeightSign::NonPositive => -q,
        WeightSign::Mixed if rng.gen_bool(0.5) => q,
        WeightSign::Mixed => -q,
    }
}

/// Places a weight at each valid `(predicate, position)` with probability
/// `density`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    language: &Language,
    n: usize,
    sign: WeightSign,
    density: f64,
) -> Result<Instance> {
    let mut inst = Instance::new(language.clone(), n);
    for (p, pred) in language.predicates().iter().enumerate() {
        let k = pred.len();
        if k > n {
            continue;
        }
        for i in 1..=n + 1 - k {
            if rng.gen_bool(density) {
                let w = random_weight(rng, sign);
                inst.add_weight(p, i, w)?;
            }
        }
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{cap_bar_closure, star_closure, ClosureConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ClosureConfig {
        ClosureConfig::default()
    }

    #[test]
    fn example1_shape() {
        let l = gen_example1(4).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.predicates()[0].len(), 5);
        assert_eq!(l.predicates()[0].cardinality(), 16);
        assert!(gen_example1(2).is_err());
        for d in [3, 4, 7] {
            let c = cap_bar_closure(d, gen_example1(d).unwrap().predicates(), &cfg()).unwrap();
            assert_eq!(c.reported_size(), 12);
        }
    }

    #[test]
    fn equivalence_prefix() {
        let l =
            gen_equivalence_prefix(4, &[vec![1, 2], vec![3, 4]], &[vec![0], vec![0, 1]]).unwrap();
        assert_eq!(l.len(), 2);
        let c = cap_bar_closure(4, l.predicates(), &cfg()).unwrap();
        assert_eq!(c.members().filter(|p| !p.is_bottom()).count(), 3);
        assert!(gen_equivalence_prefix(4, &[vec![1, 2], vec![3, 4]], &[vec![0, 1]]).is_err());
        assert!(gen_equivalence_prefix(4, &[vec![1, 2], vec![2, 3, 4]], &[vec![0]]).is_err());
        assert!(gen_equivalence_prefix(4, &[vec![1, 2]], &[vec![0]]).is_err());
    }

    #[test]
    fn family_products_count() {
        let l = gen_family_products(4, &[vec![1, 2], vec![3, 4]], 1, 1).unwrap();
        assert_eq!(l.len(), 2 * 4 + 2 + 4);
        let c = cap_bar_closure(4, l.predicates(), &cfg()).unwrap();
        assert!(c
            .members()
            .all(|p| p.is_epsilon() || p.is_bottom() || l.index_of(p).is_some()));
        assert!(gen_family_products(4, &[vec![1, 2], vec![2, 3]], 1, 1).is_err());
    }

    #[test]
    fn multiscale_closed() {
        let levels = vec![
            vec![vec![1, 2, 3, 4], vec![5, 6, 7, 8]],
            vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
        ];
        let l = gen_multiscale(8, &levels, 2).unwrap();
        let c = cap_bar_closure(8, l.predicates(), &cfg()).unwrap();
        assert!(c
            .members()
            .all(|p| p.is_epsilon() || p.is_bottom() || l.index_of(p).is_some()));
        let bad = vec![levels[1].clone(), levels[0].clone()];
        assert!(gen_multiscale(8, &bad, 2).is_err());
    }

    #[test]
    fn multiscale_single_level_matches_prefix_words() {
        let classes = vec![vec![1, 2], vec![3]];
        let a = gen_multiscale(3, std::slice::from_ref(&classes), 2).unwrap();
        let words = vec![
            vec![0],
            vec![1],
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
        ];
        let b = gen_equivalence_prefix(3, &classes, &words).unwrap();
        let sa: HashSet<_> = a.predicates().iter().cloned().collect();
        let sb: HashSet<_> = b.predicates().iter().cloned().collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn waves_rise() {
        let l = gen_waves(3, &rise_fall_flat(3), &[vec![0]], &[vec![1, 2, 3]]).unwrap();
        let rise = Predicate::extensional(3, 2, vec![vec![1, 2], vec![1, 3], vec![2, 3]]).unwrap();
        assert_eq!(l.predicates()[0], rise);
        assert_eq!(l.len(), 2);
    }

    #[test]
    fn waves_full_suffix_sets_count() {
        let l = gen_waves(
            3,
            &rise_fall_flat(3),
            &[vec![2], vec![2, 2]],
            &nonempty_subsets(3),
        )
        .unwrap();
        assert_eq!(l.len(), 2 * 7 + 7);
        let c = cap_bar_closure(3, l.predicates(), &cfg()).unwrap();
        assert!(c
            .members()
            .all(|p| p.is_epsilon() || p.is_bottom() || l.index_of(p).is_some()));
    }

    #[test]
    fn waves_rejects_non_partition() {
        let mut rels = rise_fall_flat(3);
        rels[2].pop();
        assert!(gen_waves(3, &rels, &[vec![0]], &[vec![1]]).is_err());
    }

    #[test]
    fn random_languages_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = random_simple_language(&mut rng, 3, 3, 3).unwrap();
            assert!(l.is_simple());
            star_closure(3, l.predicates(), &cfg()).unwrap();
            let e = random_extensional_language(&mut rng, 2, 3, 3).unwrap();
            assert!(!e.is_simple());
            let inst = random_instance(&mut rng, &l, 4, WeightSign::NonPositive, 0.5).unwrap();
            assert!(inst.all_nonpositive());
        }
    }
}
