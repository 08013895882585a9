mod common;

use std::collections::BTreeSet;

use nmt_core::analyzer::search_theorem_bounded;
use nmt_core::corpus::corpus_matrix;
use nmt_core::deterministic::{
    build_theta, decide_matrix_equivalence, decide_matrix_inclusion, matrix_theorem_existence, Inclusion,
    MatrixEquivalence, Side,
};
use nmt_core::formula::enumerate_formulas;
use nmt_core::{express, Error, Formula, NMatrix, Signature, ValueSet};

use common::{brute_consequence, flat, parse};

fn m(name: &str) -> NMatrix {
    corpus_matrix(name).unwrap()
}

fn texts(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(|f| f.to_string()).collect()
}

#[test]
fn theta_examples() {
    let bare = NMatrix::from_fn(Signature::empty(), vec!["0".into(), "1".into()], ValueSet::singleton(1), |_, _| {
        unreachable!()
    })
    .unwrap();
    assert_eq!(texts(&build_theta(&bare, &bare, 2).unwrap().representatives), ["p1", "p2"]);

    let t = build_theta(&m("M7"), &m("M8"), 2).unwrap();
    let got: BTreeSet<String> = texts(&t.representatives).into_iter().collect();
    let want: BTreeSet<String> =
        ["p1", "p2", "flat(p1)", "flat(p2)", "flat(flat(p1))", "flat(flat(p2))"].iter().map(|s| s.to_string()).collect();
    assert_eq!(got, want);

    let t = build_theta(&m("M7"), &m("M7"), 2).unwrap();
    assert_eq!(t.len(), 4);
}

#[test]
fn theta_covers_every_formula_to_depth_three() {
    let pairs = [("M7", "M8"), ("M4", "M5"), ("M5", "M7"), ("I", "I"), ("M8", "M8")];
    for (a, b) in pairs {
        let (m1, m2) = (m(a), m(b));
        let n = m1.num_values().max(m2.num_values());
        let theta = build_theta(&m1, &m2, n).unwrap();
        for (i, t) in theta.tables.iter().enumerate() {
            assert!(!theta.tables[..i].contains(t), "{a}/{b}: duplicate table pair at {i}");
        }
        for f in enumerate_formulas(m1.signature(), n as u32, 3) {
            let pair = (express(&m1, &f, n).unwrap(), express(&m2, &f, n).unwrap());
            assert!(theta.tables.contains(&pair), "{a}/{b}: {f} has no representative");
        }
        // Closure under every connective.
        for (op, arity) in m1.signature().iter() {
            common::each_assignment(theta.len(), arity, |idx| {
                let f = Formula::app(op, idx.iter().map(|&i| theta.representatives[i].clone()).collect());
                let pair = (express(&m1, &f, n).unwrap(), express(&m2, &f, n).unwrap());
                assert!(theta.tables.contains(&pair), "{a}/{b}: {f} escapes");
            });
        }
    }
}

#[test]
fn non_deterministic_input_is_rejected() {
    for f in [
        |a: &NMatrix, b: &NMatrix| build_theta(a, b, 2).map(|_| ()),
        |a: &NMatrix, b: &NMatrix| decide_matrix_inclusion(a, b).map(|_| ()),
    ] {
        assert!(matches!(f(&m("M7"), &m("U")), Err(Error::NonDeterministic(_))));
        assert!(matches!(f(&m("U"), &m("M7")), Err(Error::NonDeterministic(_))));
    }
    assert!(matches!(matrix_theorem_existence(&m("M1")), Err(Error::NonDeterministic(_))));
}

#[test]
fn inclusion_examples() {
    assert_eq!(
        decide_matrix_inclusion(&m("M8"), &m("M7")).unwrap(),
        Inclusion::Separated { premises: vec![], conclusion: parse("flat(p1)", &flat()) }
    );
    for name in ["M4", "M5", "M7", "M8", "I"] {
        assert_eq!(decide_matrix_inclusion(&m(name), &m(name)).unwrap(), Inclusion::Included);
    }
}

#[test]
fn separations_are_confirmed_independently() {
    let names = ["M4", "M5", "M7", "M8"];
    for a in names {
        for b in names {
            let (m1, m2) = (m(a), m(b));
            if let Inclusion::Separated { premises, conclusion } = decide_matrix_inclusion(&m1, &m2).unwrap() {
                assert!(brute_consequence(&m1, &premises, &conclusion), "{a}/{b}");
                assert!(!brute_consequence(&m2, &premises, &conclusion), "{a}/{b}");
            }
        }
    }
}

#[test]
fn equivalence_examples() {
    let m7 = m("M7");
    let renamed = m7.with_value_names(vec!["a".into(), "b".into()]).unwrap();
    assert_eq!(decide_matrix_equivalence(&m7, &renamed).unwrap(), MatrixEquivalence::Equivalent);

    let doubled = NMatrix::from_fn(flat(), vec!["0".into(), "1".into(), "0b".into()], ValueSet::singleton(1), |_, args| {
        ValueSet::singleton(if args[0] == 1 { 0 } else { 1 })
    })
    .unwrap();
    assert_eq!(decide_matrix_equivalence(&m7, &doubled).unwrap(), MatrixEquivalence::Equivalent);

    match decide_matrix_equivalence(&m("M5"), &m("M4")).unwrap() {
        MatrixEquivalence::NotEquivalent(s) => {
            let (holds, fails) = if s.holds_in == Side::First { (m("M5"), m("M4")) } else { (m("M4"), m("M5")) };
            assert!(brute_consequence(&holds, &s.premises, &s.conclusion));
            assert!(!brute_consequence(&fails, &s.premises, &s.conclusion));
        }
        other => panic!("expected a separation, got {other:?}"),
    }
    // flat(p1) / p2 separates them in the other direction.
    let (a, b) = (parse("flat(p1)", &flat()), parse("p2", &flat()));
    assert!(brute_consequence(&m("M4"), std::slice::from_ref(&a), &b));
    assert!(!brute_consequence(&m("M5"), &[a], &b));
}

#[test]
fn theorem_existence_examples() {
    assert_eq!(matrix_theorem_existence(&m("M8")).unwrap(), Some(parse("flat(p1)", &flat())));
    assert_eq!(matrix_theorem_existence(&m("M7")).unwrap(), None);
    let i = m("I");
    let thm = matrix_theorem_existence(&i).unwrap().expect("classical implication has theorems");
    assert!(brute_consequence(&i, &[], &thm));
}

#[test]
fn theorem_existence_agrees_with_bounded_search() {
    for name in ["M4", "M5", "M7", "M8", "I"] {
        let x = m(name);
        let found = matrix_theorem_existence(&x).unwrap();
        let searched = search_theorem_bounded(&x, 4, 1).unwrap();
        assert_eq!(found.is_some(), searched.is_some(), "{name}");
        if let Some(f) = found {
            assert!(brute_consequence(&x, &[], &f));
        }
    }
}
