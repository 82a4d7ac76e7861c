//! Reference computations by enumeration and by a windowed dynamic program.

use crate::domain::{Letter, Words};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::order::HasseDiagram;
use crate::semiring::{Selective, Semiring};

pub const DEFAULT_MAX_WORDS: u64 = 2_000_000;
pub const DEFAULT_MAX_STATES: u64 = 1_000_000;
pub const DEFAULT_MAX_CLASS_WORDS: u64 = 100_000;

fn check_word_count(inst: &Instance, len: usize, cap: u64) -> Result<()> {
    match inst.language().domain().word_count(len) {
        Some(c) if c <= cap => Ok(()),
        _ => Err(Error::capacity(
            format!("{}^{} words", inst.language().domain_size(), len),
            cap,
        )),
    }
}

/// `(predicate, lifted weight)` pairs, one list per end position.
type ByEnd<V> = Vec<Vec<(usize, V)>>;

fn lifted_by_end<S: Semiring>(inst: &Instance, s: &S) -> Result<ByEnd<S::Value>> {
    let preds = inst.language().predicates();
    let mut out = vec![Vec::new(); inst.n() + 1];
    for ((p, i), w) in inst.weights() {
        out[i + preds[p].len() - 1].push((p, s.lift(w)?));
    }
    Ok(out)
}

fn cost_prefix<S: Semiring>(
    inst: &Instance,
    s: &S,
    by_end: &[Vec<(usize, S::Value)>],
    x: &[Letter],
) -> S::Value {
    let preds = inst.language().predicates();
    let mut acc = s.one();
    for (end, terms) in by_end.iter().enumerate().take(x.len() + 1).skip(1) {
        for (p, w) in terms {
            if preds[*p].contains_tuple(&x[end - preds[*p].len()..end]) {
                acc = s.times(&acc, w);
            }
        }
    }
    acc
}

/// `F_s(x)`: the ⊗-product of lifted weights of satisfied constraints whose
/// window ends within `x` (`s = x.len()`).
pub fn partial_cost<S: Semiring>(inst: &Instance, s: &S, x: &[Letter]) -> Result<S::Value> {
    inst.language().domain().check_word(x)?;
    if x.len() > inst.n() {
        return Err(Error::validation(
            "word",
            format!("length {} exceeds n = {}", x.len(), inst.n()),
        ));
    }
    Ok(cost_prefix(inst, s, &lifted_by_end(inst, s)?, x))
}

/// ⊕ over every word of length `n` of its cost, words in lexicographic order.
pub fn brute_force_reduce<S: Semiring>(inst: &Instance, s: &S, max_words: u64) -> Result<S::Value> {
    check_word_count(inst, inst.n(), max_words)?;
    let by_end = lifted_by_end(inst, s)?;
    let mut total = s.zero();
    for x in Words::new(inst.language().domain_size(), inst.n()) {
        total = s.plus(&total, &cost_prefix(inst, s, &by_end, &x));
    }
    Ok(total)
}

/// Best value and the lexicographically smallest word attaining it.
pub fn brute_force_argmin<S: Selective>(
    inst: &Instance,
    s: &S,
    max_words: u64,
) -> Result<(S::Value, Vec<Letter>)> {
    check_word_count(inst, inst.n(), max_words)?;
    let by_end = lifted_by_end(inst, s)?;
    let mut best: Option<(S::Value, Vec<Letter>)> = None;
    for x in Words::new(inst.language().domain_size(), inst.n()) {
        let v = cost_prefix(inst, s, &by_end, &x);
        if best.as_ref().is_none_or(|(b, _)| s.better(&v, b)) {
            best = Some((v, x));
        }
    }
    Ok(best.expect("D^n is never empty"))
}

/// Forward dynamic program whose state is the last `l_max - 1` letters.
pub fn windowed_dp<S: Semiring>(inst: &Instance, s: &S, max_states: u64) -> Result<S::Value> {
    let lang = inst.language();
    let d = lang.domain_size() as usize;
    let width = lang.max_arity().saturating_sub(1);
    let states = (d as u64)
        .checked_pow(width as u32)
        .filter(|&c| c <= max_states)
        .ok_or_else(|| Error::capacity(format!("{}^{} window states", d, width), max_states))?
        as usize;
    if inst.n() == 0 {
        return Ok(s.one());
    }
    let preds = lang.predicates();
    let by_end = lifted_by_end(inst, s)?;

    // Codes are base-|D| with the most recent letter least significant.
    let mut layer = vec![s.one()];
    let mut held = 0usize;
    let mut window = vec![0 as Letter; width + 1];
    for ending in &by_end[1..] {
        let next_held = (held + 1).min(width);
        let next_size = d.pow(next_held as u32);
        let mut next = vec![s.zero(); next_size.min(states)];
        for (code, v) in layer.iter().enumerate() {
            for a in 0..d {
                let full = code * d + a;
                let len = held + 1;
                let mut c = full;
                for slot in (0..len).rev() {
                    window[slot] = (c % d) as Letter + 1;
                    c /= d;
                }
                let mut val = v.clone();
                for (p, w) in ending {
                    let k = preds[*p].len();
                    if preds[*p].contains_tuple(&window[len - k..len]) {
                        val = s.times(&val, w);
                    }
                }
                let target = full % next_size;
                next[target] = s.plus(&next[target], &val);
            }
        }
        layer = next;
        held = next_held;
    }
    Ok(layer.iter().fold(s.zero(), |acc, v| s.plus(&acc, v)))
}

/// Word sets of the closure classes at length `s`, indexed by diagram node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordClasses {
    /// Words of length `s` in `*a`.
    pub covered: Vec<Vec<Vec<Letter>>>,
    /// Words in `*a` but in no `*g` for `g` strictly below `a`.
    pub exclusive: Vec<Vec<Vec<Letter>>>,
}

pub fn enumerate_classes(
    diagram: &HasseDiagram,
    domain_size: u32,
    s: usize,
    max_words: u64,
) -> Result<WordClasses> {
    let count = crate::domain::Domain::new(domain_size)?.word_count(s);
    if count.is_none_or(|c| c > max_words) {
        return Err(Error::capacity(
            format!("{}^{} words", domain_size, s),
            max_words,
        ));
    }
    let m = diagram.len();
    let mut covered = vec![Vec::new(); m];
    let mut exclusive = vec![Vec::new(); m];
    let mut inside = vec![false; m];
    for x in Words::new(domain_size, s) {
        for (a, p) in diagram.nodes().iter().enumerate() {
            inside[a] = p.accepts_suffix(&x);
            if inside[a] {
                covered[a].push(x.clone());
            }
        }
        for a in (0..m).filter(|&a| inside[a]) {
            let lower = diagram.down_set(a).any(|g| g != a && inside[g]);
            if !lower {
                exclusive[a].push(x.clone());
            }
        }
    }
    Ok(WordClasses { covered, exclusive })
}
