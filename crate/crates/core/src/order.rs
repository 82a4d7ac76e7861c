//! The suffix order `a >= b` (every word ending in `b` also ends in `a`) and
//! its Hasse diagram.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::predicate::{check_same_domain, Predicate};

/// `*a ⊇ *b`.
pub fn ge(a: &Predicate, b: &Predicate) -> Result<bool> {
    check_same_domain(a, b)?;
    Ok(ge_unchecked(a, b))
}

pub(crate) fn ge_unchecked(a: &Predicate, b: &Predicate) -> bool {
    match (a, b) {
        (_, Predicate::Bottom) => true,
        (Predicate::Bottom, _) => false,
        (Predicate::Epsilon, _) => true,
        (_, Predicate::Epsilon) => false,
        _ => a.len() <= b.len() && a.contains_suffixes_of(b),
    }
}

/// Hasse diagram of the suffix order restricted to a finite node set.
///
/// Nodes are kept in canonical order; `rank` is a children-first topological
/// numbering (every edge goes from a higher rank to a lower one).
#[derive(Debug, Clone)]
pub struct HasseDiagram {
    nodes: Vec<Predicate>,
    edges: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    rank: Vec<usize>,
    topo: Vec<usize>,
    ge: BitMatrix,
}

impl HasseDiagram {
    pub fn nodes(&self) -> &[Predicate] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(parent, child)` pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn rank(&self, node: usize) -> usize {
        self.rank[node]
    }

    /// Node indices by increasing rank (children before parents).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn index_of(&self, p: &Predicate) -> Option<usize> {
        self.nodes.binary_search(p).ok()
    }

    /// `nodes[a] >= nodes[b]`, read from the precomputed comparison matrix.
    pub fn ge(&self, a: usize, b: usize) -> bool {
        self.ge.get(a, b)
    }

    /// All `b` with `nodes[a] >= nodes[b]`, including `a` itself.
    pub fn down_set(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.ge.ones(a)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Export<'a> {
            nodes: Vec<String>,
            edges: &'a [(usize, usize)],
        }
        serde_json::to_value(Export {
            nodes: self.nodes.iter().map(Predicate::key).collect(),
            edges: &self.edges,
        })
        .expect("diagram export is plain data")
    }
}

/// Builds the Hasse diagram of the suffix order on `nodes` (deduplicated and
/// sorted canonically).
pub fn build_hasse(nodes: impl IntoIterator<Item = Predicate>) -> Result<HasseDiagram> {
    let mut nodes: Vec<Predicate> = nodes.into_iter().collect();
    nodes.sort();
    nodes.dedup();
    let domains: Vec<u32> = nodes.iter().filter_map(Predicate::domain_size).collect();
    if domains.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::validation(
            "nodes",
            "predicates over different domains",
        ));
    }
    let m = nodes.len();

    let mut ge = BitMatrix::new(m);
    for a in 0..m {
        for b in 0..m {
            if a == b || ge_unchecked(&nodes[a], &nodes[b]) {
                ge.set(a, b);
            }
        }
    }
    for a in 0..m {
        for b in (a + 1)..m {
            if ge.get(a, b) && ge.get(b, a) {
                return Err(Error::validation(
                    "nodes",
                    format!(
                        "{} and {} denote the same suffix language; mixed representations are not allowed in one node set",
                        nodes[a].key(),
                        nodes[b].key()
                    ),
                ));
            }
        }
    }

    // Covering pairs: b strictly below a with nothing strictly in between.
    let words = m.div_ceil(64).max(1);
    let mut children = vec![Vec::new(); m];
    let mut parents = vec![Vec::new(); m];
    let mut edges = Vec::new();
    for a in 0..m {
        let mut strict: Vec<u64> = ge.row(a).to_vec();
        strict[a / 64] &= !(1 << (a % 64));
        let mut implied = vec![0u64; words];
        for c in ge.ones(a).filter(|&c| c != a) {
            for (w, (x, &y)) in implied.iter_mut().zip(ge.row(c)).enumerate() {
                let mut y = y;
                if w == c / 64 {
                    y &= !(1 << (c % 64));
                }
                *x |= y;
            }
        }
        for (w, (s, i)) in strict.iter().zip(&implied).enumerate() {
            let mut cover = s & !i;
            while cover != 0 {
                let b = w * 64 + cover.trailing_zeros() as usize;
                cover &= cover - 1;
                children[a].push(b);
                parents[b].push(a);
                edges.push((a, b));
            }
        }
    }

    // Kahn's algorithm from the minimal elements upward, smallest key first.
    let mut pending: Vec<usize> = children.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..m).filter(|&v| pending[v] == 0).map(Reverse).collect();
    let mut topo = Vec::with_capacity(m);
    let mut rank = vec![0; m];
    while let Some(Reverse(v)) = ready.pop() {
        rank[v] = topo.len();
        topo.push(v);
        for &p in &parents[v] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse(p));
            }
        }
    }
    debug_assert_eq!(topo.len(), m);

    Ok(HasseDiagram {
        nodes,
        edges,
        children,
        parents,
        rank,
        topo,
        ge,
    })
}

/// Edge count of a diagram against the bound
/// `1/2 * sum (|a|^2 + |a|) * |D|` over its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HasseBound {
    pub edge_count: u64,
    pub bound: u64,
    pub satisfied: bool,
}

pub fn check_hasse_bound(diagram: &HasseDiagram, domain_size: u32) -> HasseBound {
    let half_sum: u64 = diagram
        .nodes
        .iter()
        .map(|p| {
            let k = p.len() as u64;
            (k * k + k) / 2
        })
        .sum();
    let bound = half_sum * domain_size as u64;
    let edge_count = diagram.edge_count() as u64;
    HasseBound {
        edge_count,
        bound,
        satisfied: edge_count <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(d: u32, f: &[&[u32]]) -> Predicate {
        let v: Vec<Vec<u32>> = f.iter().map(|x| x.to_vec()).collect();
        Predicate::simple_from_letters(d, &v).unwrap()
    }

    #[test]
    fn ge_examples() {
        assert!(ge(&Predicate::Epsilon, &s(2, &[&[1]])).unwrap());
        assert!(ge(&s(2, &[&[1]]), &s(2, &[&[1], &[1]])).unwrap());
        assert!(!ge(&s(2, &[&[1]]), &s(2, &[&[1], &[2]])).unwrap());
        assert!(ge(&s(2, &[&[2]]), &Predicate::Bottom).unwrap());
        assert!(!ge(&Predicate::Bottom, &s(2, &[&[2]])).unwrap());
        assert!(!ge(&s(2, &[&[1], &[1]]), &s(2, &[&[1]])).unwrap());
        assert!(ge(&s(2, &[&[1]]), &s(3, &[&[1]])).is_err());
    }

    #[test]
    fn three_chain() {
        let chain = vec![s(2, &[&[1], &[1]]), Predicate::Epsilon, s(2, &[&[1]])];
        let h = build_hasse(chain).unwrap();
        let eps = h.index_of(&Predicate::Epsilon).unwrap();
        let one = h.index_of(&s(2, &[&[1]])).unwrap();
        let oneone = h.index_of(&s(2, &[&[1], &[1]])).unwrap();
        let mut expect = vec![(eps, one), (one, oneone)];
        expect.sort();
        assert_eq!(h.edges(), expect.as_slice());
        assert!(h.rank(eps) > h.rank(one) && h.rank(one) > h.rank(oneone));
        let b = check_hasse_bound(&h, 2);
        assert_eq!(
            b,
            HasseBound {
                edge_count: 2,
                bound: 8,
                satisfied: true
            }
        );
        let json = h.to_json();
        assert_eq!(json["nodes"][0], "eps");
        assert_eq!(json["edges"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn singletons() {
        let h = build_hasse(vec![s(2, &[&[1]])]).unwrap();
        assert_eq!(h.edge_count(), 0);
        let h = build_hasse(vec![Predicate::Epsilon]).unwrap();
        assert_eq!(
            check_hasse_bound(&h, 5),
            HasseBound {
                edge_count: 0,
                bound: 0,
                satisfied: true
            }
        );
    }

    #[test]
    fn mixed_representations_rejected() {
        let p = s(2, &[&[1], &[1, 2]]);
        assert!(build_hasse(vec![p.clone(), p.to_extensional()]).is_err());
    }
}
