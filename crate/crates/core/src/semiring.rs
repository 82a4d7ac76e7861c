//! Commutative semirings used by the solvers, and the rule that turns an
//! energy into a semiring value.
//!
//! Instances store energies on one scale; each semiring lifts them:
//! min-plus keeps `w`, sum-product uses `exp(-w)`, log-sum-exp uses `-w`.

use std::fmt::Debug;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Semiring {
    type Value: Clone + Debug + PartialEq;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn plus(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn times(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn is_idempotent(&self) -> bool;

    /// Maps an energy onto the carrier. Errors on non-finite energies.
    fn lift(&self, energy: f64) -> Result<Self::Value>;

    fn to_f64(&self, v: &Self::Value) -> f64;

    /// Equality up to a relative tolerance; exact carriers ignore `tol`.
    fn approx_eq(&self, a: &Self::Value, b: &Self::Value, tol: f64) -> bool;
}

/// Semirings whose addition selects one operand, so an optimal term can be
/// traced back.
pub trait Selective: Semiring {
    /// Whether `a` is strictly preferred over `b` by `plus`.
    fn better(&self, a: &Self::Value, b: &Self::Value) -> bool;
}

fn check_finite(energy: f64) -> Result<()> {
    if energy.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            "weight",
            format!("energy {energy} is not finite"),
        ))
    }
}

pub(crate) fn float_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// `(R ∪ {+inf}, min, +)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Value = f64;

    fn name(&self) -> &'static str {
        "minplus"
    }
    fn zero(&self) -> f64 {
        f64::INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn is_idempotent(&self) -> bool {
        true
    }
    fn lift(&self, energy: f64) -> Result<f64> {
        check_finite(energy)?;
        Ok(energy)
    }
    fn to_f64(&self, v: &f64) -> f64 {
        *v
    }
    fn approx_eq(&self, a: &f64, b: &f64, tol: f64) -> bool {
        float_close(*a, *b, tol)
    }
}

impl Selective for MinPlus {
    fn better(&self, a: &f64, b: &f64) -> bool {
        a < b
    }
}

/// `(R>=0, +, *)` with `exp(-w)` lifting.
#[derive(Debug, Clone, Copy, Default)]
pub struct SumProduct;

impl Semiring for SumProduct {
    type Value = f64;

    fn name(&self) -> &'static str {
        "sumprod"
    }
    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn is_idempotent(&self) -> bool {
        false
    }
    fn lift(&self, energy: f64) -> Result<f64> {
        check_finite(energy)?;
        Ok((-energy).exp())
    }
    fn to_f64(&self, v: &f64) -> f64 {
        *v
    }
    fn approx_eq(&self, a: &f64, b: &f64, tol: f64) -> bool {
        float_close(*a, *b, tol)
    }
}

/// Sum-product carried in log space: `(R ∪ {-inf}, logaddexp, +)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogSumExp;

pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl Semiring for LogSumExp {
    type Value = f64;

    fn name(&self) -> &'static str {
        "logsumexp"
    }
    fn zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        log_add_exp(*a, *b)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn is_idempotent(&self) -> bool {
        false
    }
    fn lift(&self, energy: f64) -> Result<f64> {
        check_finite(energy)?;
        Ok(-energy)
    }
    fn to_f64(&self, v: &f64) -> f64 {
        *v
    }
    fn approx_eq(&self, a: &f64, b: &f64, tol: f64) -> bool {
        float_close(*a, *b, tol)
    }
}

/// Min-plus over exact rationals; `None` is `+inf`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinPlusExact;

impl Semiring for MinPlusExact {
    type Value = Option<BigRational>;

    fn name(&self) -> &'static str {
        "minplus_exact"
    }
    fn zero(&self) -> Self::Value {
        None
    }
    fn one(&self) -> Self::Value {
        Some(BigRational::zero())
    }
    fn plus(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        match (a, b) {
            (None, x) | (x, None) => x.clone(),
            (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
        }
    }
    fn times(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        match (a, b) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        }
    }
    fn is_idempotent(&self) -> bool {
        true
    }
    /// The exact binary value of the `f64` energy.
    fn lift(&self, energy: f64) -> Result<Self::Value> {
        check_finite(energy)?;
        Ok(Some(
            BigRational::from_float(energy).expect("finite floats are representable"),
        ))
    }
    fn to_f64(&self, v: &Self::Value) -> f64 {
        match v {
            None => f64::INFINITY,
            Some(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
    fn approx_eq(&self, a: &Self::Value, b: &Self::Value, _tol: f64) -> bool {
        a == b
    }
}

impl Selective for MinPlusExact {
    fn better(&self, a: &Self::Value, b: &Self::Value) -> bool {
        match (a, b) {
            (Some(_), None) => true,
            (Some(x), Some(y)) => x < y,
            _ => false,
        }
    }
}

/// Names accepted on the command line and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiringKind {
    MinPlus,
    SumProduct,
    LogSumExp,
    MinPlusExact,
}

impl SemiringKind {
    pub fn name(self) -> &'static str {
        match self {
            SemiringKind::MinPlus => "minplus",
            SemiringKind::SumProduct => "sumprod",
            SemiringKind::LogSumExp => "logsumexp",
            SemiringKind::MinPlusExact => "minplus_exact",
        }
    }
}

impl FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minplus" => Ok(SemiringKind::MinPlus),
            "sumprod" => Ok(SemiringKind::SumProduct),
            "logsumexp" => Ok(SemiringKind::LogSumExp),
            "minplus_exact" => Ok(SemiringKind::MinPlusExact),
            other => Err(Error::validation(
                "semiring",
                format!("unknown semiring {other:?}"),
            )),
        }
    }
}

/// `v ⊕ v ⊕ ... ⊕ v` (`count` terms) by doubling; `zero` when `count == 0`.
pub fn repeat_plus<S: Semiring>(s: &S, v: &S::Value, mut count: u64) -> S::Value {
    let mut acc = s.zero();
    let mut pow = v.clone();
    while count > 0 {
        if count & 1 == 1 {
            acc = s.plus(&acc, &pow);
        }
        count >>= 1;
        if count > 0 {
            pow = s.plus(&pow, &pow);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawFailure {
    pub law: &'static str,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub checked: usize,
    pub failures: Vec<LawFailure>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const LAW_TOLERANCE: f64 = 1e-12;

/// Checks the commutative-semiring laws on every triple drawn from `samples`.
pub fn check_laws<S: Semiring>(s: &S, samples: &[S::Value]) -> LawReport {
    let mut report = LawReport {
        checked: 0,
        failures: Vec::new(),
    };
    let eq = |a: &S::Value, b: &S::Value| s.approx_eq(a, b, LAW_TOLERANCE);
    let mut check = |law: &'static str, ok: bool, w: &[&S::Value]| {
        report.checked += 1;
        if !ok && !report.failures.iter().any(|f| f.law == law) {
            report.failures.push(LawFailure {
                law,
                witness: w.iter().map(|v| format!("{v:?}")).collect(),
            });
        }
    };
    let (zero, one) = (s.zero(), s.one());
    for a in samples {
        check("plus identity", eq(&s.plus(a, &zero), a), &[a]);
        check("times identity", eq(&s.times(a, &one), a), &[a]);
        check("zero absorbs", eq(&s.times(a, &zero), &zero), &[a]);
        if s.is_idempotent() {
            check("plus idempotent", eq(&s.plus(a, a), a), &[a]);
        }
        for b in samples {
            check(
                "plus commutative",
                eq(&s.plus(a, b), &s.plus(b, a)),
                &[a, b],
            );
            check(
                "times commutative",
                eq(&s.times(a, b), &s.times(b, a)),
                &[a, b],
            );
            for c in samples {
                check(
                    "plus associative",
                    eq(&s.plus(&s.plus(a, b), c), &s.plus(a, &s.plus(b, c))),
                    &[a, b, c],
                );
                check(
                    "times associative",
                    eq(&s.times(&s.times(a, b), c), &s.times(a, &s.times(b, c))),
                    &[a, b, c],
                );
                check(
                    "distributive",
                    eq(
                        &s.times(a, &s.plus(b, c)),
                        &s.plus(&s.times(a, b), &s.times(a, c)),
                    ),
                    &[a, b, c],
                );
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifting() {
        assert_eq!(MinPlus.lift(-1.0).unwrap(), -1.0);
        assert_eq!(SumProduct.lift(0.0).unwrap(), SumProduct.one());
        assert!((SumProduct.lift(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(LogSumExp.lift(1.5).unwrap(), -1.5);
        assert!(MinPlus.lift(f64::NAN).is_err());
        assert!(SumProduct.lift(f64::INFINITY).is_err());
        assert_eq!(
            MinPlusExact.lift(0.5).unwrap(),
            Some(BigRational::new(1.into(), 2.into()))
        );
    }

    #[test]
    fn laws_hold() {
        assert!(check_laws(&MinPlus, &[0.0, -1.0, 3.0, f64::INFINITY]).passed());
        assert!(check_laws(&SumProduct, &[0.0, 1.0, 0.5, 2.0]).passed());
        assert!(check_laws(&LogSumExp, &[f64::NEG_INFINITY, 0.0, -0.7, 1.25]).passed());
        let ex: Vec<_> = [0.0, -1.0, 0.25]
            .iter()
            .map(|&w| MinPlusExact.lift(w).unwrap())
            .chain([None])
            .collect();
        assert!(check_laws(&MinPlusExact, &ex).passed());
    }

    struct Broken;
    impl Semiring for Broken {
        type Value = f64;
        fn name(&self) -> &'static str {
            "broken"
        }
        fn zero(&self) -> f64 {
            0.0
        }
        fn one(&self) -> f64 {
            1.0
        }
        fn plus(&self, a: &f64, b: &f64) -> f64 {
            a - b
        }
        fn times(&self, a: &f64, b: &f64) -> f64 {
            a * b
        }
        fn is_idempotent(&self) -> bool {
            false
        }
        fn lift(&self, e: f64) -> Result<f64> {
            Ok(e)
        }
        fn to_f64(&self, v: &f64) -> f64 {
            *v
        }
        fn approx_eq(&self, a: &f64, b: &f64, tol: f64) -> bool {
            float_close(*a, *b, tol)
        }
    }

    #[test]
    fn broken_semiring_reports_witness() {
        let r = check_laws(&Broken, &[0.0, 1.0, 0.5, 2.0]);
        assert!(!r.passed());
        let comm = r
            .failures
            .iter()
            .find(|f| f.law == "plus commutative")
            .expect("subtraction is not commutative");
        assert_eq!(comm.witness.len(), 2);
    }

    #[test]
    fn log_add_is_stable() {
        let v = log_add_exp(1234.0, 1232.0);
        assert!((v - 1_234.126_928_011_043).abs() < 1e-9);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
    }

    #[test]
    fn repeat_plus_counts() {
        assert_eq!(repeat_plus(&SumProduct, &1.0, 8), 8.0);
        assert_eq!(repeat_plus(&MinPlus, &0.0, 1000), 0.0);
        assert_eq!(repeat_plus(&SumProduct, &1.0, 0), 0.0);
        assert!((repeat_plus(&LogSumExp, &0.0, 8) - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "sumprod".parse::<SemiringKind>().unwrap(),
            SemiringKind::SumProduct
        );
        assert!("tropical".parse::<SemiringKind>().is_err());
    }
}
