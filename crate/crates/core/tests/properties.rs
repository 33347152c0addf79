use proptest::prelude::*;

use stpa::analysis::{bisim_definitional, relevant_instants};
use stpa::axioms::{alt_canonical, normalize};
use stpa::semantics::Sos;
use stpa::syntax::parse_term;
use stpa::{Action, CommState, ExtScalar, Point, Scalar, SpeedConfig, Term};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Scalar::frac(n, d))
}

fn time() -> impl Strategy<Value = Scalar> {
    (0i64..=8).prop_map(|k| Scalar::frac(k, 2))
}

fn point() -> impl Strategy<Value = Point> {
    (0i64..=2).prop_map(|x| Point::ints(x, 0, 0))
}

fn action() -> impl Strategy<Value = Action> {
    let cd = (prop::sample::select(vec!["c", "k"]), prop::sample::select(vec!["d", "e"]));
    (cd, 0u8..6, time(), 1i64..=4, point()).prop_map(|((c, d), kind, t, w, p)| {
        let hi = ExtScalar::Finite(&t + &Scalar::int(w));
        match kind {
            0 => Action::ps_abs(c, d, t, p),
            1 => Action::ps_rel(c, d, t, p),
            2 => Action::pr_abs(c, d, t, hi, p).unwrap(),
            3 => Action::pr_rel(c, d, t, hi, p).unwrap(),
            4 => Action::es(c, d, t, p),
            _ => Action::er(c, d, t, p),
        }
    })
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => action().prop_map(Term::Act),
        1 => time().prop_map(Term::adead),
        1 => time().prop_map(Term::rdead),
        1 => Just(Term::Delta),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::alt(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::seq(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::par(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::left_merge(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::timeout(a, b)),
        ]
    })
}

/// A short sequence of actions on channel `c`.
fn component() -> impl Strategy<Value = Term> {
    prop::collection::vec(action(), 1..=2).prop_map(|v| {
        Term::seq_all(v.into_iter().map(|mut a| {
            a.channel = stpa::terms::name("c");
            Term::Act(a)
        }))
    })
}

fn system() -> impl Strategy<Value = Term> {
    prop::collection::vec(component(), 1..=2).prop_map(|v| {
        let body = v.into_iter().reduce(Term::par).unwrap();
        Term::state(["c"], Scalar::zero(), CommState::empty(), body)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn printed_terms_parse_back(t in term()) {
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn state_terms_parse_back(t in system()) {
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn meadow_inverse_is_involutive(a in scalar()) {
        prop_assert_eq!(a.inv().inv(), a.clone());
        prop_assert_eq!(&(&a * &a.inv()) * &a, a);
    }

    #[test]
    fn square_root_of_a_square_is_the_absolute_value(a in scalar()) {
        prop_assert_eq!(a.square().sqrt_total().unwrap(), a.abs());
        prop_assert_eq!(&a.signum() * &a, a.abs());
    }

    #[test]
    fn sums_are_canonical_up_to_order(a in term(), b in term(), c in term()) {
        let l = Term::alt(Term::alt(a.clone(), b.clone()), c.clone());
        let r = Term::alt(c, Term::alt(b, a));
        prop_assert_eq!(alt_canonical(&l), alt_canonical(&r));
        prop_assert_eq!(alt_canonical(&alt_canonical(&l)), alt_canonical(&l));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn normal_forms_behave_like_their_source(p in system()) {
        let cfg = SpeedConfig::default();
        let n = normalize(&p, &cfg).unwrap();
        let sos = Sos::new(cfg.clone());
        let v = bisim_definitional(&p, &n, &relevant_instants(&p, &n), 4, &sos);
        prop_assert!(v.is_bisimilar(), "{} ~> {}: {:?}", p, n, v);
        prop_assert_eq!(normalize(&n, &cfg).unwrap(), n);
    }
}
