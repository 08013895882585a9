mod common;

use std::collections::BTreeMap;

use nmt_core::analyzer::{analyze, verify_verdict, AnalyzeOptions, Budget, Evidence, Outcome};
use nmt_core::constructions::unconstrained;
use nmt_core::corpus::corpus_machine;
use nmt_core::machine::{
    build_reduction_pair, canonical_numeric_assignment, compile_machine, encode_number, encode_trace,
    CompiledLayout, Configuration, CounterMachine, Instruction, NumericKind, NUM_NAMES,
};
use nmt_core::{check_prevaluation, is_theorem, Error, Formula, NMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn conf(state: &str, counters: &[u64]) -> Configuration {
    Configuration { state: state.into(), counters: counters.to_vec() }
}

fn layout(c: &CounterMachine) -> CompiledLayout {
    CompiledLayout { counters: c.counters(), states: c.states().to_vec() }
}

#[test]
fn corpus_runs() {
    let t = corpus_machine("INC1").unwrap().run(&[0], 10).unwrap();
    assert!(t.halted);
    assert_eq!(t.configurations, [conf("q0", &[0]), conf("q1", &[1])]);

    let t = corpus_machine("LOOP").unwrap().run(&[0], 5).unwrap();
    assert!(!t.halted);
    assert_eq!(t.configurations.len(), 6);
    assert_eq!(t.configurations[5], conf("q0", &[5]));

    let t = corpus_machine("INCTEST").unwrap().run(&[0], 10_000).unwrap();
    assert!(t.halted);
    assert_eq!(t.configurations, [conf("q0", &[0]), conf("q1", &[1]), conf("q2", &[0])]);
    assert_eq!(encode_trace(&t).to_string(), "step_q2(step_q1(step_q0(eps,zero),succ(zero)),zero)");
}

#[test]
fn run_checks_counter_arity() {
    assert!(matches!(corpus_machine("INC1").unwrap().run(&[0, 0], 3), Err(Error::Machine(_))));
}

#[test]
fn numbers_encode_as_successor_chains() {
    for a in 0..6u64 {
        let f = encode_number(a);
        assert!(f.is_closed());
        assert_eq!(f.depth(), a as u32 + 1);
        assert_eq!(f.subformulas().len(), a as usize + 1);
    }
}

#[test]
fn compiled_inctest_shape() {
    let c = corpus_machine("INCTEST").unwrap();
    let m = compile_machine(&c);
    assert_eq!(m.num_values(), 4 + 3 * 4 + 2);
    assert_eq!(m.designated_names(), ["conf_q2_r_eq0", "conf_q2_r_ge0", "conf_q2_r_ge1", "conf_q2_r_ge2"]);
    let idx = |s: &str| m.value_index(s).unwrap();
    let out = |op: &str, args: &[&str]| m.names_of(m.apply(op, &args.iter().map(|a| idx(a)).collect::<Vec<_>>()));
    assert_eq!(out("zero", &[]), ["r_eq0", "r_ge0"]);
    assert_eq!(out("eps", &[]), ["init"]);
    // Decrement into q2 and staying at zero back into q0.
    assert_eq!(out("step_q2", &["conf_q1_r_ge1", "r_eq0"]), ["conf_q2_r_eq0"]);
    assert_eq!(out("step_q2", &["conf_q1_r_ge2", "r_ge1"]), ["conf_q2_r_ge1"]);
    assert_eq!(out("step_q2", &["conf_q1_r_eq0", "r_eq0"]), ["error"]);
    assert_eq!(out("step_q0", &["conf_q1_r_eq0", "r_eq0"]), ["conf_q0_r_eq0"]);
    assert_eq!(out("step_q0", &["conf_q1_r_ge1", "r_ge1"]), ["error"]);
    // Halting states have no successors.
    assert_eq!(out("step_q0", &["conf_q2_r_eq0", "r_eq0"]), ["error"]);
}

#[test]
fn value_names_are_bijective() {
    for name in ["INC1", "LOOP", "INCTEST"] {
        let c = corpus_machine(name).unwrap();
        let m = compile_machine(&c);
        let l = layout(&c);
        assert_eq!(m.num_values(), l.num_values());
        assert_eq!(m.value_name(l.init()), "init");
        assert_eq!(m.value_name(l.error()), "error");
        for v in 0..m.num_values() {
            if let Some((q, nums)) = l.decode_conf(v) {
                assert_eq!(l.conf(q, &nums), v);
                let expect = format!("conf_{}_{}", c.states()[q], nums.iter().map(|&r| NUM_NAMES[r]).collect::<Vec<_>>().join("_"));
                assert_eq!(m.value_name(v), expect);
            }
        }
    }
}

#[test]
fn error_absorbs_at_table_level() {
    for name in ["INC1", "LOOP", "INCTEST"] {
        let m = compile_machine(&corpus_machine(name).unwrap());
        let e = m.value_index("error").unwrap();
        for (op, t) in m.tables() {
            common::each_assignment(m.num_values(), t.arity(), |args| {
                if args.contains(&e) {
                    assert_eq!(m.names_of(m.apply(op, args)), ["error"], "{name}: {op}{args:?}");
                }
            });
        }
    }
}

/// Assigns every subformula of `f` a value chosen at random from the interpretation.
fn random_prevaluation(m: &NMatrix, f: &Formula, rng: &mut impl Rng, out: &mut BTreeMap<Formula, usize>) -> usize {
    if let Some(&v) = out.get(f) {
        return v;
    }
    let args: Vec<usize> = f.args().iter().map(|a| random_prevaluation(m, a, rng, out)).collect();
    let options: Vec<usize> = m.apply(f.connective().expect("closed formulas only"), &args).iter().collect();
    let v = options[rng.gen_range(0..options.len())];
    out.insert(f.clone(), v);
    v
}

#[test]
fn error_absorbs_in_random_prevaluations() {
    let c = corpus_machine("INCTEST").unwrap();
    let m = compile_machine(&c);
    let e = m.value_index("error").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut hit = 0;
    for _ in 0..400 {
        let f = closed_formula(&mut rng, &c, 5);
        let mut vals = BTreeMap::new();
        random_prevaluation(&m, &f, &mut rng, &mut vals);
        for (g, &v) in &vals {
            if v == e {
                hit += 1;
                for (h, &w) in &vals {
                    if h.subformulas().contains(g) {
                        assert_eq!(w, e, "{h} sits above {g}");
                    }
                }
            }
        }
    }
    assert!(hit > 0);
}

fn closed_formula(rng: &mut impl Rng, c: &CounterMachine, depth: u32) -> Formula {
    let sig = c.signature();
    let ops: Vec<(&str, usize)> = sig.iter().collect();
    let pick: Vec<_> = if depth == 0 { ops.iter().filter(|(_, a)| *a == 0).collect() } else { ops.iter().collect() };
    let (op, arity) = *pick[rng.gen_range(0..pick.len())];
    Formula::app(op, (0..arity).map(|_| closed_formula(rng, c, depth - 1)).collect())
}

#[test]
fn machine_json_validation() {
    let bad = [
        r#"{"counters":1,"states":["q0"],"initial":"q1"}"#,
        r#"{"counters":1,"states":["q0","q0"],"initial":"q0"}"#,
        r#"{"counters":1,"states":["q0"],"initial":"q0","transitions":{"q0":{"op":"test","counter":1,"nonzero":"q0","zero":"qz"}}}"#,
        r#"{"counters":1,"states":["q0"],"initial":"q0","transitions":{"q0":{"op":"inc","counter":0,"next":"q0"}}}"#,
        r#"{"counters":1,"states":["q 0"],"initial":"q 0"}"#,
        r#"{"counters":1,"states":["q0"],"initial":"q0","transitions":{"q0":{"op":"jump","counter":1,"next":"q0"}}}"#,
    ];
    for text in bad {
        assert!(serde_json::from_str::<CounterMachine>(text).is_err(), "{text}");
    }
    let c = corpus_machine("INCTEST").unwrap();
    let back: CounterMachine = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn degenerate_machines_warn_but_compile() {
    let no_counters = CounterMachine::new(0, vec!["h".into()], "h".into(), BTreeMap::new()).unwrap();
    assert!(!no_counters.warnings().is_empty());
    let m = compile_machine(&no_counters);
    assert_eq!(m.num_values(), 4 + 1 + 2);
    assert!(is_theorem(&m, &Formula::app("step_h", vec![Formula::constant("eps")])).unwrap().holds());

    let mut t = BTreeMap::new();
    t.insert("q0".to_string(), Instruction::Inc { counter: 1, next: "q0".into() });
    let never_halts = CounterMachine::new(1, vec!["q0".into()], "q0".into(), t).unwrap();
    assert!(!never_halts.warnings().is_empty());
    assert!(compile_machine(&never_halts).designated().is_empty());
}

#[test]
fn canonical_assignments_are_prevaluations() {
    let m = compile_machine(&corpus_machine("INC1").unwrap());
    for kind in [NumericKind::Eq, NumericKind::Omega, NumericKind::K(0), NumericKind::K(2)] {
        let t = canonical_numeric_assignment(kind, 4);
        assert_eq!(t.len(), 5);
        assert!(check_prevaluation(&m, &t).unwrap().is_empty(), "{kind:?}");
    }
    let t = canonical_numeric_assignment(NumericKind::K(2), 4);
    let got: Vec<&str> = t.iter().map(|(_, v)| v).collect();
    assert_eq!(got, ["r_ge0", "r_ge0", "r_ge0", "r_ge1", "r_ge2"]);
}

#[test]
fn reduction_pair_for_inc1() {
    let c = corpus_machine("INC1").unwrap();
    let (t, u) = build_reduction_pair(&c).unwrap();
    assert_eq!(t.signature(), u.signature());
    assert_eq!(u, unconstrained(&c.signature()));
    assert_eq!(t.num_values(), 14 + 10);

    let witness = encode_trace(&c.run(&[0], 10).unwrap());
    assert!(is_theorem(&t, &witness).unwrap().holds());
    assert!(!is_theorem(&u, &witness).unwrap().holds());

    let opts = AnalyzeOptions { budget: Budget { depth: 3, vars: 0, premises: 0, max_instances: 100_000 }, ..Default::default() };
    let v = analyze(&t, &u, &opts).unwrap();
    assert_eq!(v.outcome, Outcome::NotEquivalent);
    let Evidence::Counterexample { counterexample } = &v.evidence else { panic!("{v:?}") };
    assert!(counterexample.premises.is_empty());
    assert_eq!(counterexample.conclusion, witness);
    assert!(verify_verdict(&t, &u, &opts, &v).unwrap());
}

#[test]
fn reduction_pair_for_loop_is_never_separated() {
    let (t, u) = build_reduction_pair(&corpus_machine("LOOP").unwrap()).unwrap();
    let opts = AnalyzeOptions { budget: Budget { depth: 3, vars: 0, premises: 0, max_instances: 100_000 }, ..Default::default() };
    let v = analyze(&t, &u, &opts).unwrap();
    // The halting configurations are unreachable by any step table, so the
    // designation indicator is already a strongly-preserving hom onto U.
    assert_eq!((v.outcome, v.stage), (Outcome::Equivalent, 2));
    assert!(verify_verdict(&t, &u, &opts, &v).unwrap());
}

/// A random one-counter machine with `k` states, the last of which halts.
fn random_machine(rng: &mut impl Rng, k: usize) -> CounterMachine {
    let states: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let mut t = BTreeMap::new();
    for q in &states[..k - 1] {
        let target = |rng: &mut dyn rand::RngCore| states[rng.gen_range(0..k)].clone();
        let ins = if rng.gen_bool(0.5) {
            Instruction::Inc { counter: 1, next: target(rng) }
        } else {
            Instruction::Test { counter: 1, nonzero: target(rng), zero: target(rng) }
        };
        t.insert(q.clone(), ins);
    }
    CounterMachine::new(1, states.clone(), states[0].clone(), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn halting_traces_are_exactly_the_theorems_nearby(seed in any::<u64>(), k in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_machine(&mut rng, k);
        let trace = c.run(&[0], 6).unwrap();
        let m = compile_machine(&c);
        let encoded = encode_trace(&trace);
        prop_assert_eq!(is_theorem(&m, &encoded).unwrap().holds(), trace.halted);

        // Truncations and counter perturbations of the run are not theorems.
        let confs = &trace.configurations;
        for cut in 1..confs.len() {
            let f = nmt_core::machine::encode_configurations(&confs[..cut]);
            prop_assert!(!is_theorem(&m, &f).unwrap().holds(), "prefix {}", f);
        }
        for i in 0..confs.len() {
            let mut bent = confs.clone();
            bent[i].counters[0] += 1;
            let f = nmt_core::machine::encode_configurations(&bent);
            prop_assert!(!is_theorem(&m, &f).unwrap().holds(), "perturbed {}", f);
        }
    }
}
