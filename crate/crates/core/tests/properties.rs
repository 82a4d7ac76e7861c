use gpp_core::closure::{cap_bar_closure, star_closure, star_closure_fixpoint, ClosureConfig};
use gpp_core::generators::{random_instance, random_simple_language, WeightSign};
use gpp_core::model::{language_to_json, parse_language};
use gpp_core::oracle::{brute_force_argmin, brute_force_reduce, windowed_dp};
use gpp_core::semiring::{check_laws, LogSumExp, MinPlus, MinPlusExact, Semiring, SumProduct};
use gpp_core::solver::minimize_nonpositive_in;
use gpp_core::{
    build_hasse, ge, minimize_nonpositive, normalize_instance, semiring_argmin, semiring_sum,
    Domain, Language, Letter, Predicate, Words,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const D: u32 = 3;

fn simple_pred() -> impl Strategy<Value = Predicate> {
    prop::collection::vec(1u32..(1 << D), 1..=3).prop_map(|masks| {
        let factors: Vec<Vec<Letter>> = masks
            .iter()
            .map(|m| (1..=D).filter(|a| m >> (a - 1) & 1 == 1).collect())
            .collect();
        Predicate::simple_from_letters(D, &factors).unwrap()
    })
}

fn extensional_pred() -> impl Strategy<Value = Predicate> {
    (1usize..=3).prop_flat_map(|k| {
        let total = (D as usize).pow(k as u32);
        prop::collection::btree_set(0..total, 1..=total.min(8)).prop_map(move |idx| {
            let all: Vec<Vec<Letter>> = Words::new(D, k).collect();
            let tuples = idx.into_iter().map(|i| all[i].clone()).collect();
            Predicate::extensional(D, k, tuples).unwrap()
        })
    })
}

fn with_specials(base: impl Strategy<Value = Predicate>) -> impl Strategy<Value = Predicate> {
    prop_oneof![
        1 => Just(Predicate::Bottom),
        1 => Just(Predicate::Epsilon),
        8 => base,
    ]
}

fn any_pred() -> impl Strategy<Value = Predicate> {
    prop_oneof![
        with_specials(simple_pred()),
        with_specials(extensional_pred())
    ]
}

fn same_kind_pair() -> impl Strategy<Value = (Predicate, Predicate)> {
    prop_oneof![
        (with_specials(simple_pred()), with_specials(simple_pred())),
        (
            with_specials(extensional_pred()),
            with_specials(extensional_pred())
        ),
    ]
}

fn same_kind_triple() -> impl Strategy<Value = (Predicate, Predicate, Predicate)> {
    prop_oneof![
        (
            with_specials(simple_pred()),
            with_specials(simple_pred()),
            with_specials(simple_pred())
        ),
        (
            with_specials(extensional_pred()),
            with_specials(extensional_pred()),
            with_specials(extensional_pred())
        ),
    ]
}

fn words_up_to(len: usize) -> impl Iterator<Item = Vec<Letter>> {
    (0..=len).flat_map(|l| Words::new(D, l))
}

fn norm(p: &Predicate) -> usize {
    p.len()
}

fn seeded_language(seed: u64) -> Language {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_simple_language(&mut rng, 2, 3, 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn join_commutes((a, b) in same_kind_pair()) {
        prop_assert_eq!(a.suffix_join(&b).unwrap(), b.suffix_join(&a).unwrap());
    }

    #[test]
    fn join_associates((a, b, c) in same_kind_triple()) {
        let left = a.suffix_join(&b).unwrap().suffix_join(&c).unwrap();
        let right = a.suffix_join(&b.suffix_join(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn join_is_intersection_of_suffix_sets((a, b) in same_kind_pair()) {
        let j = a.suffix_join(&b).unwrap();
        for w in words_up_to(norm(&a) + norm(&b) + 2) {
            prop_assert_eq!(
                a.membership_suffix(&w).unwrap() && b.membership_suffix(&w).unwrap(),
                j.membership_suffix(&w).unwrap(),
                "word {:?}", w
            );
        }
    }

    #[test]
    fn join_with_identity_and_bottom(a in any_pred()) {
        prop_assert_eq!(a.suffix_join(&Predicate::Epsilon).unwrap(), a.clone());
        prop_assert_eq!(a.suffix_join(&Predicate::Bottom).unwrap(), Predicate::Bottom);
    }

    #[test]
    fn simple_join_stays_simple((a, b) in (simple_pred(), simple_pred())) {
        let j = a.suffix_join(&b).unwrap();
        prop_assert!(j.is_simple() || j.is_bottom());
    }

    #[test]
    fn ge_matches_enumeration((a, b) in same_kind_pair()) {
        let by_words = words_up_to(norm(&b) + 2)
            .filter(|w| b.membership_suffix(w).unwrap())
            .all(|w| a.membership_suffix(&w).unwrap());
        let expect = by_words && (norm(&a) <= norm(&b) || b.is_bottom() || a.is_epsilon());
        prop_assert_eq!(ge(&a, &b).unwrap(), expect);
    }

    #[test]
    fn ge_is_a_partial_order((a, b, c) in same_kind_triple()) {
        prop_assert!(ge(&a, &a).unwrap());
        if ge(&a, &b).unwrap() && ge(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if ge(&a, &b).unwrap() && ge(&b, &c).unwrap() {
            prop_assert!(ge(&a, &c).unwrap());
        }
    }

    #[test]
    fn drop_extend_slice_laws(a in with_specials(simple_pred())) {
        if a.is_epsilon() {
            prop_assert!(a.prefix_drop().is_err());
            return Ok(());
        }
        let d = a.prefix_drop().unwrap();
        if !a.is_bottom() {
            prop_assert_eq!(norm(&d), norm(&a) - 1);
            prop_assert!(ge(&d.suffix_slice(norm(&d)).unwrap(), &d).unwrap());
            let last = a.last_projection().unwrap();
            prop_assert!(!last.is_empty());
            for x in 1..=D {
                let e = a.singleton_extend(x).unwrap();
                prop_assert_eq!(e.prefix_drop().unwrap(), d.clone());
                prop_assert_eq!(e.last_projection().unwrap(), vec![x]);
            }
        } else {
            prop_assert_eq!(d, Predicate::Bottom);
        }
    }

    #[test]
    fn hasse_edges_are_covers(preds in prop::collection::vec(with_specials(simple_pred()), 1..8)) {
        let h = build_hasse(preds).unwrap();
        for &(p, c) in h.edges() {
            prop_assert!(h.ge(p, c) && p != c);
            for m in 0..h.len() {
                prop_assert!(!(m != p && m != c && h.ge(p, m) && h.ge(m, c)));
            }
            prop_assert!(h.rank(p) > h.rank(c));
        }
    }

    #[test]
    fn language_json_round_trip(seed in any::<u64>()) {
        let l = seeded_language(seed);
        let text = language_to_json(&l).to_string();
        prop_assert_eq!(parse_language(&text).unwrap(), l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn closures_are_monotone_idempotent_and_closed(seed in any::<u64>()) {
        let l = seeded_language(seed);
        let cfg = ClosureConfig::default();
        let c = cap_bar_closure(2, l.predicates(), &cfg).unwrap();
        prop_assert!(c.is_closed());
        prop_assert!(l.predicates().iter().all(|p| c.contains(p)));
        let members: Vec<Predicate> = c
            .members()
            .filter(|p| !p.is_epsilon() && !p.is_bottom())
            .cloned()
            .collect();
        let again = cap_bar_closure(2, &members, &cfg).unwrap();
        prop_assert_eq!(again.len(), c.len());

        let s = star_closure(2, l.predicates(), &cfg).unwrap();
        prop_assert!(s.members().all(|p| p.is_simple() || p.is_bottom() || p.is_epsilon()));
        prop_assert!(s.len() <= (2 + 1) * c.len());
        let f = star_closure_fixpoint(2, l.predicates(), &cfg).unwrap();
        prop_assert!(f.is_closed());
        let strip = |x: &gpp_core::ClosedLanguage| {
            x.members().filter(|p| !p.is_bottom()).cloned().collect::<std::collections::BTreeSet<_>>()
        };
        prop_assert_eq!(strip(&s), strip(&f));
    }

    #[test]
    fn cap_bar_members_are_joins_of_base_prefixes(seed in any::<u64>()) {
        let l = seeded_language(seed);
        let c = cap_bar_closure(2, l.predicates(), &ClosureConfig::default()).unwrap();
        for (i, terms) in c.prefix_join_terms().into_iter().enumerate() {
            let p = c.member(i);
            let Some(terms) = terms else {
                prop_assert!(p.is_bottom());
                continue;
            };
            let mut acc = Predicate::Epsilon;
            for (b, k) in terms {
                acc = acc.suffix_join(&l.predicates()[b].prefix_slice(k).unwrap()).unwrap();
            }
            prop_assert_eq!(&acc, p);
        }
    }

    #[test]
    fn normalization_preserves_energy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_simple_language(&mut rng, 2, 3, 3).unwrap();
        let inst = random_instance(&mut rng, &l, 5, WeightSign::Mixed, 0.6).unwrap();
        let norm = normalize_instance(&inst);
        for x in Words::new(2, 5) {
            prop_assert_eq!(inst.evaluate_energy(&x).unwrap(), norm.evaluate_energy(&x).unwrap());
        }
    }

    #[test]
    fn solvers_agree_with_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_simple_language(&mut rng, 2, 3, 3).unwrap();
        let n = rand::Rng::gen_range(&mut rng, 0..=7);
        let cfg = ClosureConfig::default();

        let neg = random_instance(&mut rng, &l, n, WeightSign::NonPositive, 0.6).unwrap();
        let exact = minimize_nonpositive_in(&neg, &MinPlusExact, &cfg).unwrap().value;
        prop_assert_eq!(exact, brute_force_reduce(&neg, &MinPlusExact, 1 << 20).unwrap());
        prop_assert_eq!(
            minimize_nonpositive(&neg, &cfg).unwrap().value,
            brute_force_reduce(&neg, &MinPlus, 1 << 20).unwrap()
        );

        let mixed = random_instance(&mut rng, &l, n, WeightSign::Mixed, 0.6).unwrap();
        let r = semiring_argmin(&mixed, &MinPlus, &cfg).unwrap();
        let (best, _) = brute_force_argmin(&mixed, &MinPlus, 1 << 20).unwrap();
        prop_assert_eq!(r.value, best);
        prop_assert_eq!(mixed.evaluate_energy(r.argmin.as_ref().unwrap()).unwrap(), best);

        let z = semiring_sum(&mixed, &SumProduct, &cfg).unwrap().value;
        let zb = brute_force_reduce(&mixed, &SumProduct, 1 << 20).unwrap();
        prop_assert!(SumProduct.approx_eq(&z, &zb, 1e-9));
        let zw = windowed_dp(&mixed, &SumProduct, 1 << 20).unwrap();
        prop_assert!(SumProduct.approx_eq(&zw, &zb, 1e-12));
        let lz = semiring_sum(&mixed, &LogSumExp, &cfg).unwrap().value;
        prop_assert!(LogSumExp.approx_eq(&lz, &z.ln(), 1e-9));
    }
}

#[test]
fn semiring_laws_on_samples() {
    let floats = [0.0, 0.5, 1.0, 2.25, 7.0];
    assert!(check_laws(&SumProduct, &floats).passed());
    let tropical = [f64::INFINITY, -2.0, 0.0, 0.75, 3.0];
    assert!(check_laws(&MinPlus, &tropical).passed());
    assert!(check_laws(&LogSumExp, &[f64::NEG_INFINITY, -1.0, 0.0, 2.5]).passed());
    let exact: Vec<_> = [-2.0, 0.0, 0.25, 3.5]
        .iter()
        .map(|&w| MinPlusExact.lift(w).unwrap())
        .chain([MinPlusExact.zero()])
        .collect();
    assert!(check_laws(&MinPlusExact, &exact).passed());
}

#[test]
fn empty_language_everywhere() {
    let l = Language::new(Domain::new(3).unwrap(), vec![]).unwrap();
    let inst = gpp_core::Instance::new(l, 4);
    let cfg = ClosureConfig::default();
    assert_eq!(semiring_sum(&inst, &SumProduct, &cfg).unwrap().value, 81.0);
    assert_eq!(brute_force_reduce(&inst, &SumProduct, 1000).unwrap(), 81.0);
    assert_eq!(windowed_dp(&inst, &SumProduct, 1000).unwrap(), 81.0);
    assert_eq!(minimize_nonpositive(&inst, &cfg).unwrap().value, 0.0);
}
