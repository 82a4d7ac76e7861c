//! Constraint languages, weighted chain instances, and their JSON forms.
//!
//! Positions and letters are 1-based. A weight stored at `(predicate, i)`
//! covers the window `i..=i + arity - 1`, which must lie inside `1..=n`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Letter, LetterSet};
use crate::error::{Error, Result};
use crate::predicate::Predicate;

/// A finite set of named predicates over one domain.
///
/// If any predicate is an explicit relation, every predicate is stored as one.
#[derive(Debug, Clone, PartialEq)]
pub struct Language {
    domain: Domain,
    ids: Vec<String>,
    predicates: Vec<Predicate>,
}

impl Language {
    pub fn new(domain: Domain, entries: Vec<(String, Predicate)>) -> Result<Self> {
        let promote = entries.iter().any(|(_, p)| p.is_extensional());
        let mut ids = Vec::with_capacity(entries.len());
        let mut predicates = Vec::with_capacity(entries.len());
        let mut seen_ids = HashSet::new();
        let mut seen = HashMap::new();
        for (i, (id, p)) in entries.into_iter().enumerate() {
            let path = format!("/predicates/{i}");
            if !seen_ids.insert(id.clone()) {
                return Err(Error::validation(path, format!("duplicate id {id:?}")));
            }
            match p.arity() {
                None => return Err(Error::validation(path, "predicate is empty")),
                Some(0) => return Err(Error::validation(path, "predicate has arity 0")),
                _ => {}
            }
            if p.domain_size() != Some(domain.size()) {
                return Err(Error::validation(
                    path,
                    format!("predicate is not over the domain of size {}", domain.size()),
                ));
            }
            let p = if promote { p.to_extensional() } else { p };
            if let Some(prev) = seen.insert(p.clone(), id.clone()) {
                return Err(Error::validation(
                    path,
                    format!("predicate {id:?} duplicates {prev:?}"),
                ));
            }
            ids.push(id);
            predicates.push(p);
        }
        Ok(Language {
            domain,
            ids,
            predicates,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn domain_size(&self) -> u32 {
        self.domain.size()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn index_of(&self, p: &Predicate) -> Option<usize> {
        self.predicates.iter().position(|x| x == p)
    }

    /// True iff every predicate is a product.
    pub fn is_simple(&self) -> bool {
        self.predicates.iter().all(Predicate::is_simple)
    }

    /// Largest arity, 0 for the empty language.
    pub fn max_arity(&self) -> usize {
        self.predicates
            .iter()
            .map(Predicate::len)
            .max()
            .unwrap_or(0)
    }
}

/// A chain of `n` variables with weighted pattern constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    language: Language,
    n: usize,
    weights: BTreeMap<(usize, usize), f64>,
}

impl Instance {
    pub fn new(language: Language, n: usize) -> Self {
        Instance {
            language,
            n,
            weights: BTreeMap::new(),
        }
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `energy` to the weight of predicate `pred` starting at `pos`.
    pub fn add_weight(&mut self, pred: usize, pos: usize, energy: f64) -> Result<()> {
        let Some(p) = self.language.predicates.get(pred) else {
            return Err(Error::validation(
                "pred",
                format!("no predicate with index {pred}"),
            ));
        };
        if !energy.is_finite() {
            return Err(Error::validation("weight", "weight must be finite"));
        }
        let end = pos + p.len() - 1;
        if pos == 0 || end > self.n {
            return Err(Error::validation(
                "pos",
                format!(
                    "window {pos}..={end} of {:?} is outside 1..={}",
                    self.language.ids[pred], self.n
                ),
            ));
        }
        *self.weights.entry((pred, pos)).or_insert(0.0) += energy;
        Ok(())
    }

    pub fn weight(&self, pred: usize, pos: usize) -> Option<f64> {
        self.weights.get(&(pred, pos)).copied()
    }

    /// `((predicate index, start position), energy)` in key order.
    pub fn weights(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    pub fn all_nonpositive(&self) -> bool {
        self.weights.values().all(|&w| w <= 0.0)
    }

    /// Energy of a full assignment `x` of length `n`.
    pub fn evaluate_energy(&self, x: &[Letter]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::validation(
                "word",
                format!(
                    "word of length {} for a chain of length {}",
                    x.len(),
                    self.n
                ),
            ));
        }
        self.language.domain.check_word(x)?;
        Ok(self
            .weights
            .iter()
            .filter(|(&(p, i), _)| {
                let pred = &self.language.predicates[p];
                pred.contains_tuple(&x[i - 1..i - 1 + pred.len()])
            })
            .map(|(_, &w)| w)
            .sum())
    }
}

enum Strip {
    Leading,
    Trailing,
}

fn decomposition(p: &Predicate, domain_size: u32) -> Option<(Strip, Predicate)> {
    if p.len() < 2 {
        return None;
    }
    match p {
        Predicate::Simple(prod) => {
            let f = prod.factors();
            if f[0].is_full() {
                Some((Strip::Leading, p.suffix_slice(p.len() - 1).ok()?))
            } else if f[f.len() - 1].is_full() {
                Some((Strip::Trailing, p.prefix_drop().ok()?))
            } else {
                None
            }
        }
        Predicate::Extensional(_) => {
            let d = domain_size as u64;
            let tail = p.suffix_slice(p.len() - 1).ok()?;
            if tail.cardinality() * d == p.cardinality() {
                return Some((Strip::Leading, tail));
            }
            let head = p.prefix_drop().ok()?;
            if head.cardinality() * d == p.cardinality() {
                return Some((Strip::Trailing, head));
            }
            None
        }
        _ => None,
    }
}

/// Removes every predicate of the form `D x a` or `a x D`, folding its
/// weights into `a` (added to the language when absent). The energy of
/// every word is unchanged.
pub fn normalize_instance(inst: &Instance) -> Instance {
    let d = inst.language.domain_size();
    let mut preds: Vec<(String, Predicate, BTreeMap<usize, f64>)> = inst
        .language
        .ids
        .iter()
        .cloned()
        .zip(inst.language.predicates.iter().cloned())
        .map(|(id, p)| (id, p, BTreeMap::new()))
        .collect();
    for ((p, i), w) in inst.weights() {
        preds[p].2.insert(i, w);
    }

    while let Some((idx, strip, reduced)) = preds
        .iter()
        .enumerate()
        .find_map(|(i, (_, p, _))| decomposition(p, d).map(|(s, r)| (i, s, r)))
    {
        let (id, _, weights) = preds.remove(idx);
        let target = match preds.iter().position(|(_, p, _)| *p == reduced) {
            Some(t) => t,
            None => {
                let mut new_id = format!("{id}'");
                while preds.iter().any(|(x, _, _)| *x == new_id) {
                    new_id.push('\'');
                }
                preds.push((new_id, reduced, BTreeMap::new()));
                preds.len() - 1
            }
        };
        for (i, w) in weights {
            let j = match strip {
                Strip::Leading => i + 1,
                Strip::Trailing => i,
            };
            *preds[target].2.entry(j).or_insert(0.0) += w;
        }
    }

    let language = Language {
        domain: inst.language.domain.clone(),
        ids: preds.iter().map(|(id, _, _)| id.clone()).collect(),
        predicates: preds.iter().map(|(_, p, _)| p.clone()).collect(),
    };
    let mut out = Instance::new(language, inst.n);
    for (p, (_, _, ws)) in preds.into_iter().enumerate() {
        for (i, w) in ws {
            out.weights.insert((p, i), w);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<Vec<Letter>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuples: Option<Vec<Vec<Letter>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LanguageFile {
    domain: DomainFile,
    kind: String,
    predicates: Vec<PredicateFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    pred: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    all_positions: Option<bool>,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    language: serde_json::Value,
    n: usize,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, prefix: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let p = pointer(e.path());
        let p = if p == "/" && !prefix.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}{p}")
        };
        Error::validation(p, e.into_inner().to_string())
    })
}

fn rebase(e: Error, prefix: &str) -> Error {
    match e {
        Error::Validation { path, message } if !prefix.is_empty() => {
            let path = if path.starts_with('/') {
                format!("{prefix}{path}")
            } else {
                format!("{prefix}/{path}")
            };
            Error::Validation { path, message }
        }
        other => other,
    }
}

fn language_from_file(f: LanguageFile) -> Result<Language> {
    let domain = match f.domain.labels {
        Some(labels) => Domain::with_labels(f.domain.size, labels),
        None => Domain::new(f.domain.size),
    }
    .map_err(|e| match e {
        Error::Validation { path, message } => Error::validation(format!("/{path}"), message),
        other => other,
    })?;
    let simple = match f.kind.as_str() {
        "simple" => true,
        "extensional" => false,
        other => {
            return Err(Error::validation(
                "/kind",
                format!("kind must be \"simple\" or \"extensional\", found {other:?}"),
            ))
        }
    };
    let d = domain.size();
    let mut entries = Vec::with_capacity(f.predicates.len());
    for (i, p) in f.predicates.into_iter().enumerate() {
        let path = format!("/predicates/{i}");
        let pred = match (p.factors, p.arity, p.tuples) {
            (Some(factors), None, None) => {
                if factors.is_empty() {
                    return Err(Error::validation(
                        format!("{path}/factors"),
                        "a predicate needs at least one factor",
                    ));
                }
                for (k, fac) in factors.iter().enumerate() {
                    if fac.is_empty() {
                        return Err(Error::validation(
                            format!("{path}/factors/{k}"),
                            "empty factor",
                        ));
                    }
                }
                Predicate::simple_from_letters(d, &factors).map_err(|e| rebase(e, &path))?
            }
            (None, Some(arity), Some(tuples)) => {
                if simple {
                    return Err(Error::validation(
                        path,
                        "explicit tuples are not allowed in a simple language",
                    ));
                }
                if arity == 0 {
                    return Err(Error::validation(
                        format!("{path}/arity"),
                        "arity must be >= 1",
                    ));
                }
                if tuples.is_empty() {
                    return Err(Error::validation(
                        format!("{path}/tuples"),
                        "empty relation",
                    ));
                }
                Predicate::extensional(d, arity, tuples).map_err(|e| rebase(e, &path))?
            }
            _ => {
                return Err(Error::validation(
                    path,
                    "expected either \"factors\" or both \"arity\" and \"tuples\"",
                ))
            }
        };
        entries.push((p.id, pred));
    }
    Language::new(domain, entries)
}

pub fn parse_language(text: &str) -> Result<Language> {
    language_from_file(from_json(text, "")?)
}

/// Parses an instance. A `{"path": ...}` language reference is resolved
/// against `base_dir` (or the working directory).
pub fn parse_instance(text: &str, base_dir: Option<&Path>) -> Result<Instance> {
    let f: InstanceFile = from_json(text, "")?;
    let language = match f.language.get("path") {
        Some(serde_json::Value::String(p)) => {
            let path = match base_dir {
                Some(b) => b.join(p),
                None => Path::new(p).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::validation("/language/path", format!("{}: {e}", path.display()))
            })?;
            parse_language(&text)?
        }
        Some(_) => return Err(Error::validation("/language/path", "path must be a string")),
        None => {
            let lf: LanguageFile = from_json(&f.language.to_string(), "/language")?;
            language_from_file(lf).map_err(|e| rebase(e, "/language"))?
        }
    };
    let mut inst = Instance::new(language, f.n);
    for (c, con) in f.constraints.iter().enumerate() {
        let path = format!("/constraints/{c}");
        let Some(p) = inst.language.index_of_id(&con.pred) else {
            return Err(Error::validation(
                format!("{path}/pred"),
                format!("unknown predicate {:?}", con.pred),
            ));
        };
        let k = inst.language.predicates[p].len();
        let positions: Vec<usize> = match (con.pos, con.all_positions) {
            (Some(pos), None | Some(false)) => vec![pos],
            (None, Some(true)) => (1..=inst.n.saturating_sub(k - 1)).collect(),
            (Some(_), Some(true)) => {
                return Err(Error::validation(
                    path,
                    "\"pos\" and \"all_positions\" are mutually exclusive",
                ))
            }
            (None, _) => {
                return Err(Error::validation(
                    path,
                    "expected \"pos\" or \"all_positions\": true",
                ))
            }
        };
        for pos in positions {
            inst.add_weight(p, pos, con.weight).map_err(|e| match e {
                Error::Validation {
                    path: field,
                    message,
                } => Error::validation(format!("{path}/{field}"), message),
                other => other,
            })?;
        }
    }
    Ok(inst)
}

pub fn load_language(path: &Path) -> Result<Language> {
    parse_language(&std::fs::read_to_string(path)?)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text, path.parent())
}

fn letters_of(set: &LetterSet) -> Vec<Letter> {
    set.iter().collect()
}

fn language_file(lang: &Language) -> LanguageFile {
    let simple = lang.is_simple();
    LanguageFile {
        domain: DomainFile {
            size: lang.domain.size(),
            labels: lang.domain.labels().map(<[String]>::to_vec),
        },
        kind: if simple { "simple" } else { "extensional" }.into(),
        predicates: lang
            .ids
            .iter()
            .zip(&lang.predicates)
            .map(|(id, p)| match p {
                Predicate::Simple(prod) => PredicateFile {
                    id: id.clone(),
                    factors: Some(prod.factors().iter().map(letters_of).collect()),
                    arity: None,
                    tuples: None,
                },
                other => PredicateFile {
                    id: id.clone(),
                    factors: None,
                    arity: Some(other.len()),
                    tuples: Some(other.tuples()),
                },
            })
            .collect(),
    }
}

pub fn language_to_json(lang: &Language) -> serde_json::Value {
    serde_json::to_value(language_file(lang)).expect("plain data")
}

pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    let f = InstanceFile {
        language: language_to_json(&inst.language),
        n: inst.n,
        constraints: inst
            .weights()
            .map(|((p, i), w)| ConstraintFile {
                pred: inst.language.ids[p].clone(),
                pos: Some(i),
                all_positions: None,
                weight: w,
            })
            .collect(),
    };
    serde_json::to_value(f).expect("plain data")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_instance() -> Instance {
        let text = r#"{"language":{"domain":{"size":2},"kind":"simple",
            "predicates":[{"id":"p0","factors":[[1],[1]]}]},
            "n":3,"constraints":[{"pred":"p0","all_positions":true,"weight":-1}]}"#;
        parse_instance(text, None).unwrap()
    }

    #[test]
    fn parse_simple_language() {
        let l = parse_language(
            r#"{"domain":{"size":2},"kind":"simple","predicates":[{"id":"p0","factors":[[1],[1]]}]}"#,
        )
        .unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.predicates()[0].key(), "<{1},{1}>");
        assert!(l.is_simple());
    }

    #[test]
    fn all_positions_expands() {
        let inst = chain_instance();
        let w: Vec<_> = inst.weights().collect();
        assert_eq!(w, vec![((0, 1), -1.0), ((0, 2), -1.0)]);
    }

    #[test]
    fn window_outside_chain_is_rejected() {
        let text = r#"{"language":{"domain":{"size":2},"kind":"simple",
            "predicates":[{"id":"p0","factors":[[1],[1]]}]},
            "n":3,"constraints":[{"pred":"p0","pos":3,"weight":-1}]}"#;
        match parse_instance(text, None).unwrap_err() {
            Error::Validation { path, .. } => assert_eq!(path, "/constraints/0/pos"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let bad_letter = r#"{"domain":{"size":2},"kind":"simple","predicates":[{"id":"p","factors":[[1],[3]]}]}"#;
        match parse_language(bad_letter).unwrap_err() {
            Error::Validation { path, .. } => assert_eq!(path, "/predicates/0/factors/1"),
            e => panic!("unexpected {e:?}"),
        }
        let wrong_type = r#"{"domain":{"size":"two"},"kind":"simple","predicates":[]}"#;
        match parse_language(wrong_type).unwrap_err() {
            Error::Validation { path, .. } => assert_eq!(path, "/domain/size"),
            e => panic!("unexpected {e:?}"),
        }
        let dup = r#"{"domain":{"size":2},"kind":"simple","predicates":[
            {"id":"a","factors":[[1]]},{"id":"b","factors":[[1]]}]}"#;
        assert!(parse_language(dup).is_err());
        let unknown = r#"{"language":{"domain":{"size":2},"kind":"simple","predicates":[]},
            "n":2,"constraints":[{"pred":"zz","pos":1,"weight":1}]}"#;
        match parse_instance(unknown, None).unwrap_err() {
            Error::Validation { path, .. } => assert_eq!(path, "/constraints/0/pred"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn extensional_promotes_products() {
        let l = parse_language(
            r#"{"domain":{"size":2},"kind":"extensional","predicates":[
                {"id":"a","factors":[[1],[1,2]]},
                {"id":"b","arity":2,"tuples":[[2,1],[1,2]]}]}"#,
        )
        .unwrap();
        assert!(l.predicates().iter().all(Predicate::is_extensional));
        assert_eq!(l.predicates()[0].key(), "{(1,1),(1,2)}");
    }

    #[test]
    fn energy_examples() {
        let inst = chain_instance();
        assert_eq!(inst.evaluate_energy(&[1, 1, 1]).unwrap(), -2.0);
        assert_eq!(inst.evaluate_energy(&[1, 2, 1]).unwrap(), 0.0);
        assert!(inst.evaluate_energy(&[1, 1]).is_err());
        let empty = Instance::new(inst.language().clone(), 3);
        assert_eq!(empty.evaluate_energy(&[2, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_constraints_are_summed() {
        let text = r#"{"language":{"domain":{"size":2},"kind":"simple",
            "predicates":[{"id":"p0","factors":[[1]]}]},
            "n":1,"constraints":[{"pred":"p0","pos":1,"weight":-1},{"pred":"p0","pos":1,"weight":-2.5}]}"#;
        let inst = parse_instance(text, None).unwrap();
        assert_eq!(inst.weight(0, 1), Some(-3.5));
    }

    #[test]
    fn normalize_folds_leading_domain_factor() {
        let text = r#"{"language":{"domain":{"size":2},"kind":"simple",
            "predicates":[{"id":"a","factors":[[1,2],[1]]},{"id":"b","factors":[[1]]}]},
            "n":2,"constraints":[{"pred":"a","pos":1,"weight":-2},{"pred":"b","pos":2,"weight":-3}]}"#;
        let inst = parse_instance(text, None).unwrap();
        let norm = normalize_instance(&inst);
        assert_eq!(norm.language().len(), 1);
        assert_eq!(norm.language().ids(), &["b".to_string()]);
        assert_eq!(norm.weights().collect::<Vec<_>>(), vec![((0, 2), -5.0)]);
    }

    #[test]
    fn normalize_leaves_indecomposable_alone() {
        let inst = chain_instance();
        assert_eq!(normalize_instance(&inst), inst);
    }

    #[test]
    fn normalize_adds_missing_reduced_predicate() {
        let text = r#"{"language":{"domain":{"size":2},"kind":"extensional",
            "predicates":[{"id":"a","arity":2,"tuples":[[1,1],[2,1]]}]},
            "n":3,"constraints":[{"pred":"a","all_positions":true,"weight":1.5}]}"#;
        let inst = parse_instance(text, None).unwrap();
        let norm = normalize_instance(&inst);
        assert_eq!(norm.language().ids(), &["a'".to_string()]);
        assert_eq!(norm.language().predicates()[0].key(), "{(1)}");
        assert_eq!(
            norm.weights().collect::<Vec<_>>(),
            vec![((0, 2), 1.5), ((0, 3), 1.5)]
        );
    }

    #[test]
    fn json_round_trip() {
        let inst = chain_instance();
        let text = instance_to_json(&inst).to_string();
        assert_eq!(parse_instance(&text, None).unwrap(), inst);
    }
}
