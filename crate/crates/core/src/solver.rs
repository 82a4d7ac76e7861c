//! Chain dynamic programs over closure nodes.
//!
//! Two recursions are provided:
//!
//! * [`minimize_nonpositive`] runs over the prefix+join closure and is valid
//!   only when every weight is `<= 0`. Each layer visits nodes children-first
//!   and takes `W_s(a) = min(min_child W_s(c), W_{s-1}(a⁻) + phi_s(a))`.
//! * [`semiring_sum`] runs over the full closure in any commutative semiring.
//!   Words of length `s` are partitioned into classes, one per node whose
//!   last coordinate is a single letter, and
//!   `M_s(a) = phi_s(a) ⊗ ⊕_{b in P(a)} M_{s-1}(b)`.
//!
//! `phi_s(a)` combines the weights of base predicates `b >= a` whose window
//! ends at `s`.

use serde::Serialize;

use crate::closure::{cap_bar_closure, star_closure, ClosedLanguage, ClosureConfig};
use crate::domain::Letter;
use crate::error::{Error, Result};
use crate::model::{Instance, Language};
use crate::order::HasseDiagram;
use crate::predicate::Predicate;
use crate::semiring::{repeat_plus, MinPlus, Selective, Semiring};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub closure_size: usize,
    pub star_size: usize,
    pub hasse_edges: usize,
    pub oplus_ops: u64,
    pub otimes_ops: u64,
}

impl SolveStats {
    pub fn total_ops(&self) -> u64 {
        self.oplus_ops + self.otimes_ops
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<V> {
    pub value: V,
    pub argmin: Option<Vec<Letter>>,
    pub stats: SolveStats,
}

/// Semiring wrapper that counts operations.
struct Counted<'a, S> {
    s: &'a S,
    plus: u64,
    times: u64,
}

impl<'a, S: Semiring> Counted<'a, S> {
    fn new(s: &'a S) -> Self {
        Counted {
            s,
            plus: 0,
            times: 0,
        }
    }

    fn plus(&mut self, a: &S::Value, b: &S::Value) -> S::Value {
        self.plus += 1;
        self.s.plus(a, b)
    }

    fn times(&mut self, a: &S::Value, b: &S::Value) -> S::Value {
        self.times += 1;
        self.s.times(a, b)
    }
}

/// Per-layer values indexed by closure node, double-buffered over `s`.
#[derive(Debug, Clone)]
pub struct MessageTable<V> {
    prev: Vec<V>,
    cur: Vec<V>,
}

impl<V: Clone> MessageTable<V> {
    fn new(initial: Vec<V>) -> Self {
        MessageTable {
            cur: initial.clone(),
            prev: initial,
        }
    }

    /// Moves the current layer to `prev` and resets `cur` to `fill`.
    fn advance(&mut self, fill: &V) {
        std::mem::swap(&mut self.prev, &mut self.cur);
        for v in &mut self.cur {
            *v = fill.clone();
        }
    }

    pub fn previous(&self) -> &[V] {
        &self.prev
    }

    pub fn current(&self) -> &[V] {
        &self.cur
    }
}

/// Lifted weights as `[predicate][start position]`, position 0 unused.
struct WeightTable<V> {
    rows: Vec<Vec<Option<V>>>,
    arity: Vec<usize>,
}

impl<V: Clone> WeightTable<V> {
    fn build<S: Semiring<Value = V>>(inst: &Instance, s: &S) -> Result<Self> {
        let lang = inst.language();
        let mut rows = vec![vec![None; inst.n() + 1]; lang.len()];
        for ((p, i), w) in inst.weights() {
            rows[p][i] = Some(s.lift(w)?);
        }
        Ok(WeightTable {
            rows,
            arity: lang.predicates().iter().map(Predicate::len).collect(),
        })
    }

    /// Weight of predicate `p` on the window ending at `end`, if any.
    fn ending_at(&self, p: usize, end: usize) -> Option<&V> {
        let k = self.arity[p];
        if end < k {
            return None;
        }
        self.rows[p][end + 1 - k].as_ref()
    }
}

/// For each diagram node, the language predicates `b` with `b >= node`.
#[derive(Debug, Clone)]
pub struct AnchorTable {
    anchors: Vec<Vec<usize>>,
}

impl AnchorTable {
    pub fn build(lang: &Language, diagram: &HasseDiagram) -> Result<Self> {
        let base: Vec<usize> = lang
            .predicates()
            .iter()
            .map(|p| {
                diagram.index_of(p).ok_or_else(|| {
                    Error::Mode(format!(
                        "language predicate {} missing from closure",
                        p.key()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let anchors = (0..diagram.len())
            .map(|a| {
                base.iter()
                    .enumerate()
                    .filter(|&(_, &b)| diagram.ge(b, a))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Ok(AnchorTable { anchors })
    }

    pub fn anchors(&self, node: usize) -> &[usize] {
        &self.anchors[node]
    }
}

fn phi<S: Semiring>(
    ops: &mut Counted<'_, S>,
    anchors: &[usize],
    weights: &WeightTable<S::Value>,
    s: usize,
) -> S::Value {
    let mut acc: Option<S::Value> = None;
    for &b in anchors {
        if let Some(w) = weights.ending_at(b, s) {
            acc = Some(match acc {
                None => w.clone(),
                Some(a) => ops.times(&a, w),
            });
        }
    }
    acc.unwrap_or_else(|| ops.s.one())
}

fn drop_index(diagram: &HasseDiagram, node: usize) -> Result<Option<usize>> {
    let p = &diagram.nodes()[node];
    if p.is_epsilon() {
        return Ok(None);
    }
    let d = p.prefix_drop()?;
    diagram
        .index_of(&d)
        .map(Some)
        .ok_or_else(|| Error::Mode(format!("closure is not prefix closed at {}", p.key())))
}

// ---------------------------------------------------------------------------
// Non-positive minimization

/// Closure, diagram and anchors for the non-positive minimization.
#[derive(Debug, Clone)]
pub struct NonPositivePlan {
    closure: ClosedLanguage,
    anchors: AnchorTable,
    drops: Vec<Option<usize>>,
}

impl NonPositivePlan {
    pub fn build(lang: &Language, config: &ClosureConfig) -> Result<Self> {
        let closure =
            cap_bar_closure(lang.domain_size(), lang.predicates(), config)?.with_diagram()?;
        let diagram = closure.diagram().expect("built above");
        let anchors = AnchorTable::build(lang, diagram)?;
        let drops = (0..diagram.len())
            .map(|a| drop_index(diagram, a))
            .collect::<Result<_>>()?;
        Ok(NonPositivePlan {
            closure,
            anchors,
            drops,
        })
    }

    pub fn closure(&self) -> &ClosedLanguage {
        &self.closure
    }

    pub fn diagram(&self) -> &HasseDiagram {
        self.closure
            .diagram()
            .expect("plan always carries a diagram")
    }

    pub fn run<S: Selective>(&self, inst: &Instance, s: &S) -> Result<SolveResult<S::Value>> {
        if !inst.all_nonpositive() {
            return Err(Error::Mode(
                "positive weight present; use the semiring summation with minplus".into(),
            ));
        }
        let diagram = self.diagram();
        let weights = WeightTable::build(inst, s)?;
        let mut ops = Counted::new(s);
        let m = diagram.len();
        let eps = diagram
            .index_of(&Predicate::Epsilon)
            .expect("closures always contain the arity-0 predicate");
        let bottom = diagram.index_of(&Predicate::Bottom);

        let mut init = vec![s.one(); m];
        if let Some(b) = bottom {
            init[b] = s.zero();
        }
        let mut table = MessageTable::new(init);
        let zero = s.zero();
        for step in 1..=inst.n() {
            table.advance(&zero);
            for &a in diagram.topological_order() {
                if Some(a) == bottom {
                    continue;
                }
                let carried = match self.drops[a] {
                    None => s.one(),
                    Some(d) => table.prev[d].clone(),
                };
                let f = phi(&mut ops, self.anchors.anchors(a), &weights, step);
                let mut v = ops.times(&carried, &f);
                for &c in diagram.children(a) {
                    v = ops.plus(&v, &table.cur[c]);
                }
                table.cur[a] = v;
            }
        }
        Ok(SolveResult {
            value: table.cur[eps].clone(),
            argmin: None,
            stats: SolveStats {
                closure_size: self.closure.len(),
                star_size: 0,
                hasse_edges: diagram.edge_count(),
                oplus_ops: ops.plus,
                otimes_ops: ops.times,
            },
        })
    }
}

/// Minimum energy of an instance whose weights are all `<= 0`.
pub fn minimize_nonpositive(inst: &Instance, config: &ClosureConfig) -> Result<SolveResult<f64>> {
    minimize_nonpositive_in(inst, &MinPlus, config)
}

/// As [`minimize_nonpositive`], in any selective (min-plus style) carrier.
pub fn minimize_nonpositive_in<S: Selective>(
    inst: &Instance,
    s: &S,
    config: &ClosureConfig,
) -> Result<SolveResult<S::Value>> {
    if !inst.all_nonpositive() {
        return Err(Error::Mode(
            "positive weight present; use the semiring summation with minplus".into(),
        ));
    }
    NonPositivePlan::build(inst.language(), config)?.run(inst, s)
}

// ---------------------------------------------------------------------------
// Semiring summation

/// Nodes whose last coordinate is a single letter (the message-carrying classes).
pub fn singleton_tail_nodes(diagram: &HasseDiagram) -> Vec<usize> {
    diagram
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            !p.is_epsilon() && !p.is_bottom() && p.last_projection().is_ok_and(|l| l.len() == 1)
        })
        .map(|(i, _)| i)
        .collect()
}

/// For each node `a` with a single-letter tail, the tail-class nodes `b`
/// with `a⁻ >= b` and `c⁻ ≱ b` for every Hasse child `c != Bottom` of `a`.
/// Other nodes get an empty list.
pub fn predecessor_sets(diagram: &HasseDiagram) -> Result<Vec<Vec<usize>>> {
    let tails = singleton_tail_nodes(diagram);
    let mut out = vec![Vec::new(); diagram.len()];
    for &a in &tails {
        let a_drop = drop_index(diagram, a)?.expect("tail nodes have arity >= 1");
        let child_drops: Vec<usize> = diagram
            .children(a)
            .iter()
            .filter(|&&c| !diagram.nodes()[c].is_bottom())
            .map(|&c| drop_index(diagram, c).map(|d| d.expect("children have arity >= 1")))
            .collect::<Result<_>>()?;
        out[a] = tails
            .iter()
            .copied()
            .filter(|&b| diagram.ge(a_drop, b) && child_drops.iter().all(|&g| !diagram.ge(g, b)))
            .collect();
    }
    Ok(out)
}

/// Full closure, diagram, tail classes and predecessor sets for the summation.
#[derive(Debug, Clone)]
pub struct SumPlan {
    star: ClosedLanguage,
    closure_size: usize,
    domain_size: u32,
    language_empty: bool,
    tails: Vec<usize>,
    preds: Vec<Vec<usize>>,
    anchors: AnchorTable,
}

/// Output of a summation run; `layers[s]` holds `M_s` over all diagram nodes
/// when recording was requested.
#[derive(Debug, Clone)]
pub struct SumRun<V> {
    pub result: SolveResult<V>,
    pub layers: Option<Vec<Vec<V>>>,
}

impl SumPlan {
    pub fn build(lang: &Language, config: &ClosureConfig) -> Result<Self> {
        let d = lang.domain_size();
        let closure_size = cap_bar_closure(d, lang.predicates(), config)?.len();
        let star = star_closure(d, lang.predicates(), config)?.with_diagram()?;
        let diagram = star.diagram().expect("built above");
        let anchors = AnchorTable::build(lang, diagram)?;
        let tails = singleton_tail_nodes(diagram);
        let preds = predecessor_sets(diagram)?;
        Ok(SumPlan {
            star,
            closure_size,
            domain_size: d,
            language_empty: lang.is_empty(),
            tails,
            preds,
            anchors,
        })
    }

    pub fn star(&self) -> &ClosedLanguage {
        &self.star
    }

    pub fn diagram(&self) -> &HasseDiagram {
        self.star.diagram().expect("plan always carries a diagram")
    }

    pub fn tail_nodes(&self) -> &[usize] {
        &self.tails
    }

    pub fn predecessors(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    fn stats(&self, ops: &Counted<'_, impl Semiring>) -> SolveStats {
        SolveStats {
            closure_size: self.closure_size,
            star_size: self.star.len(),
            hasse_edges: self.diagram().edge_count(),
            oplus_ops: ops.plus,
            otimes_ops: ops.times,
        }
    }

    pub fn run<S: Semiring>(
        &self,
        inst: &Instance,
        s: &S,
        record: bool,
    ) -> Result<SumRun<S::Value>> {
        let diagram = self.diagram();
        let m = diagram.len();
        let mut ops = Counted::new(s);
        let zero = s.zero();

        if self.language_empty {
            // No constraints: the sum of one over D^n.
            let mut v = s.one();
            let mut layers = record.then(Vec::new);
            for _ in 0..inst.n() {
                v = repeat_plus(s, &v, self.domain_size as u64);
            }
            if let Some(l) = layers.as_mut() {
                l.extend((0..=inst.n()).map(|_| vec![zero.clone(); m]));
            }
            return Ok(SumRun {
                result: SolveResult {
                    value: v,
                    argmin: None,
                    stats: self.stats(&ops),
                },
                layers,
            });
        }

        let weights = WeightTable::build(inst, s)?;
        let mut table = MessageTable::new(vec![zero.clone(); m]);
        let mut layers = record.then(|| vec![table.cur.clone()]);
        for step in 1..=inst.n() {
            table.advance(&zero);
            for &a in &self.tails {
                let mut acc = if step == 1 && diagram.nodes()[a].len() == 1 {
                    s.one()
                } else {
                    zero.clone()
                };
                for &b in &self.preds[a] {
                    acc = ops.plus(&acc, &table.prev[b]);
                }
                let f = phi(&mut ops, self.anchors.anchors(a), &weights, step);
                table.cur[a] = ops.times(&f, &acc);
            }
            if let Some(l) = layers.as_mut() {
                l.push(table.cur.clone());
            }
        }
        let value = if inst.n() == 0 {
            s.one()
        } else {
            let mut total = zero.clone();
            for &a in &self.tails {
                total = ops.plus(&total, &table.cur[a]);
            }
            total
        };
        Ok(SumRun {
            result: SolveResult {
                value,
                argmin: None,
                stats: self.stats(&ops),
            },
            layers,
        })
    }

    /// Minimum with a minimizing word, recovered by walking the recorded
    /// layers backwards. Ties go to the canonically smallest node.
    pub fn run_argmin<S: Selective>(
        &self,
        inst: &Instance,
        s: &S,
    ) -> Result<SolveResult<S::Value>> {
        let run = self.run(inst, s, true)?;
        let mut result = run.result;
        let n = inst.n();
        if n == 0 {
            result.argmin = Some(Vec::new());
            return Ok(result);
        }
        if self.language_empty {
            result.argmin = Some(vec![1; n]);
            return Ok(result);
        }
        let layers = run.layers.expect("recorded");
        let pick = |cands: &mut dyn Iterator<Item = usize>, layer: &[S::Value]| -> Option<usize> {
            let mut best: Option<usize> = None;
            for c in cands {
                if best.is_none_or(|b| s.better(&layer[c], &layer[b])) {
                    best = Some(c);
                }
            }
            best
        };
        let diagram = self.diagram();
        let letter = |node: usize| -> Letter {
            diagram.nodes()[node].last_projection().expect("tail node")[0]
        };
        let mut node = pick(&mut self.tails.iter().copied(), &layers[n])
            .ok_or_else(|| Error::Mode("no message-carrying class".into()))?;
        let mut word = vec![letter(node)];
        for step in (1..n).rev() {
            node = pick(&mut self.preds[node].iter().copied(), &layers[step]).ok_or_else(|| {
                Error::Mode(format!("traceback found no predecessor at layer {step}"))
            })?;
            word.push(letter(node));
        }
        word.reverse();
        result.argmin = Some(word);
        Ok(result)
    }
}

/// `⊕` over all words of length `n` of the `⊗`-combined lifted weights.
pub fn semiring_sum<S: Semiring>(
    inst: &Instance,
    s: &S,
    config: &ClosureConfig,
) -> Result<SolveResult<S::Value>> {
    Ok(SumPlan::build(inst.language(), config)?
        .run(inst, s, false)?
        .result)
}

/// Minimum and a minimizing word, for any sign of weights.
pub fn semiring_argmin<S: Selective>(
    inst: &Instance,
    s: &S,
    config: &ClosureConfig,
) -> Result<SolveResult<S::Value>> {
    SumPlan::build(inst.language(), config)?.run_argmin(inst, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulatePath {
    /// `W(a) = ⊕_{b <= a} M(b)`.
    Full,
    /// `W(a) = M(a) ⊕ ⊕_{children c} W(c)`, valid only for idempotent `⊕`.
    Sweep,
    /// `Sweep` when `⊕` is idempotent, otherwise `Full`.
    Auto,
}

/// Recovers `W_s` (the sum over all words in `*a`) from the class sums `M_s`.
pub fn accumulate_w_from_m<S: Semiring>(
    m: &[S::Value],
    diagram: &HasseDiagram,
    s: &S,
    path: AccumulatePath,
) -> Result<Vec<S::Value>> {
    let path = match path {
        AccumulatePath::Auto if s.is_idempotent() => AccumulatePath::Sweep,
        AccumulatePath::Auto => AccumulatePath::Full,
        AccumulatePath::Sweep if !s.is_idempotent() => {
            return Err(Error::Mode(format!(
                "upward sweep needs an idempotent sum; {} is not",
                s.name()
            )))
        }
        p => p,
    };
    match path {
        AccumulatePath::Full => Ok((0..diagram.len())
            .map(|a| {
                diagram
                    .down_set(a)
                    .fold(s.zero(), |acc, b| s.plus(&acc, &m[b]))
            })
            .collect()),
        AccumulatePath::Sweep => {
            let mut w = vec![s.zero(); diagram.len()];
            for &a in diagram.topological_order() {
                let mut v = m[a].clone();
                for &c in diagram.children(a) {
                    v = s.plus(&v, &w[c]);
                }
                w[a] = v;
            }
            Ok(w)
        }
        AccumulatePath::Auto => unreachable!(),
    }
}
