use std::path::PathBuf;

use nmt_core::corpus::{corpus_entry, corpus_matrix, load_corpus};
use nmt_core::io::{load_artifact, load_machine, load_nmatrix, load_rules, load_signature, parse_artifact, store_artifact, Artifact};
use nmt_core::{Error, NMatrix, Violation};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nmt-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn out(m: &NMatrix, op: &str, args: &[&str]) -> Vec<String> {
    let idx: Vec<usize> = args.iter().map(|a| m.value_index(a).unwrap()).collect();
    m.names_of(m.apply(op, &idx))
}

#[test]
fn corpus_entry_facts() {
    let m3 = corpus_matrix("M3").unwrap();
    assert_eq!(out(&m3, "flat", &["0"]), ["0"]);
    assert_eq!(out(&m3, "flat", &["1"]), ["0", "1"]);

    let k = corpus_matrix("K").unwrap();
    assert_eq!(out(&k, "or", &["f", "t"]), ["t", "T"]);

    let t5 = corpus_matrix("tilde_M5").unwrap();
    assert_eq!(out(&t5, "flat", &["1"]), ["1"]);
    assert_eq!(out(&t5, "flat", &["0"]), ["0", "0~"]);
    assert_eq!(out(&t5, "flat", &["0~"]), ["0", "0~"]);
}

#[test]
fn corpus_contents() {
    let corpus = load_corpus().unwrap();
    let count = |kind: &str| corpus.iter().filter(|e| e.artifact.kind() == kind).count();
    assert_eq!(count("nmatrix"), 9 + 9 + 3);
    assert_eq!(count("rules"), 8);
    assert_eq!(count("machine"), 3);
    for e in corpus {
        assert!(!e.note.is_empty(), "{}", e.name);
        if let Some(base) = &e.tilde_of {
            let built = nmt_core::constructions::tilde(&corpus_matrix(base).unwrap()).unwrap();
            assert_eq!(corpus_matrix(&e.name).unwrap(), built);
        }
    }
    assert!(matches!(corpus_entry("M9"), Err(Error::Corpus(_))));
}

#[test]
fn store_then_load_is_identity_on_canonical_form() {
    for e in load_corpus().unwrap() {
        let path = scratch(&format!("{}.json", e.name));
        store_artifact(&e.artifact, &path).unwrap();
        let sig = match &e.artifact {
            Artifact::Rules(_) => Some(corpus_matrix("M1").unwrap().signature().clone()),
            _ => None,
        };
        let back = load_artifact(path.to_str().unwrap(), sig.as_ref()).unwrap();
        assert_eq!(back.to_canonical_json(), e.artifact.to_canonical_json(), "{}", e.name);
        // Canonicalisation only reorders keys and whitespace.
        let raw: serde_json::Value = serde_json::from_str(e.text).unwrap();
        let canon: serde_json::Value = serde_json::from_str(&e.artifact.to_canonical_json()).unwrap();
        assert_eq!(raw, canon, "{}", e.name);
    }
}

#[test]
fn corpus_scheme_and_files_agree() {
    let from_scheme = load_nmatrix("corpus:K").unwrap();
    let path = scratch("k.json");
    std::fs::write(&path, corpus_entry("K").unwrap().text).unwrap();
    assert_eq!(load_nmatrix(path.to_str().unwrap()).unwrap(), from_scheme);

    assert_eq!(load_machine("corpus:INC1").unwrap().counters(), 1);
    assert_eq!(load_signature("corpus:INC1").unwrap(), load_machine("corpus:INC1").unwrap().signature());
    let sig = load_signature("corpus:M1").unwrap();
    assert_eq!(load_rules("corpus:R_M1", &sig).unwrap().rules.len(), 1);

    assert!(matches!(load_nmatrix("corpus:INC1"), Err(Error::Artifact(_))));
    assert!(matches!(load_nmatrix("corpus:nothing"), Err(Error::Corpus(_))));
    assert!(matches!(load_nmatrix("/definitely/not/here.json"), Err(Error::Io(_))));
}

#[test]
fn validation_errors_are_reported() {
    let bad_designated = r#"{"signature":{"connectives":[{"name":"flat","arity":1}]},"values":["0","1"],"designated":["2"],
        "interpretation":{"flat":[{"args":["0"],"out":["1"]},{"args":["1"],"out":["0"]}]}}"#;
    match parse_artifact(bad_designated, None) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|x| matches!(x, Violation::UnknownDesignated(_)))),
        other => panic!("{other:?}"),
    }

    let bad_initial = r#"{"counters":1,"states":["q0","q1"],"initial":"q7","transitions":{}}"#;
    assert!(parse_artifact(bad_initial, None).is_err());

    let not_json = "{\"values\": [";
    assert!(matches!(parse_artifact(not_json, None), Err(Error::Json(_))));
    assert!(matches!(parse_artifact("{\"other\":1}", None), Err(Error::Artifact(_))));

    let rules = r#"{"rules":[{"premises":["p1"],"conclusion":"flat(p1)"}]}"#;
    assert!(matches!(parse_artifact(rules, None), Err(Error::Artifact(_))));
    let sig = load_signature("corpus:M1").unwrap();
    assert!(matches!(parse_artifact(rules, Some(&sig)).unwrap(), Artifact::Rules(_)));
    let bad_formula = r#"{"rules":[{"premises":["neg(p1)"],"conclusion":"p1"}]}"#;
    assert!(matches!(parse_artifact(bad_formula, Some(&sig)), Err(Error::Parse(_))));
}
