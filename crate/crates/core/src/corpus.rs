//! Bundled reference artifacts, checksummed and self-checked on first load.

use std::sync::OnceLock;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::analyzer::RuleSet;
use crate::constructions::tilde;
use crate::error::{Error, Result};
use crate::io::Artifact;
use crate::machine::CounterMachine;
use crate::nmatrix::NMatrix;

const INDEX: &str = include_str!("../corpus/index.json");

static FILES: &[(&str, &str)] = &[
    ("U.json", include_str!("../corpus/U.json")),
    ("M1.json", include_str!("../corpus/M1.json")),
    ("M2.json", include_str!("../corpus/M2.json")),
    ("M3.json", include_str!("../corpus/M3.json")),
    ("M4.json", include_str!("../corpus/M4.json")),
    ("M5.json", include_str!("../corpus/M5.json")),
    ("M6.json", include_str!("../corpus/M6.json")),
    ("M7.json", include_str!("../corpus/M7.json")),
    ("M8.json", include_str!("../corpus/M8.json")),
    ("tilde_U.json", include_str!("../corpus/tilde_U.json")),
    ("tilde_M1.json", include_str!("../corpus/tilde_M1.json")),
    ("tilde_M2.json", include_str!("../corpus/tilde_M2.json")),
    ("tilde_M3.json", include_str!("../corpus/tilde_M3.json")),
    ("tilde_M4.json", include_str!("../corpus/tilde_M4.json")),
    ("tilde_M5.json", include_str!("../corpus/tilde_M5.json")),
    ("tilde_M6.json", include_str!("../corpus/tilde_M6.json")),
    ("tilde_M7.json", include_str!("../corpus/tilde_M7.json")),
    ("tilde_M8.json", include_str!("../corpus/tilde_M8.json")),
    ("K.json", include_str!("../corpus/K.json")),
    ("I.json", include_str!("../corpus/I.json")),
    ("tilde_I.json", include_str!("../corpus/tilde_I.json")),
    ("R_U.json", include_str!("../corpus/R_U.json")),
    ("R_M1.json", include_str!("../corpus/R_M1.json")),
    ("R_M2.json", include_str!("../corpus/R_M2.json")),
    ("R_M3.json", include_str!("../corpus/R_M3.json")),
    ("R_M4.json", include_str!("../corpus/R_M4.json")),
    ("R_M5.json", include_str!("../corpus/R_M5.json")),
    ("R_M7.json", include_str!("../corpus/R_M7.json")),
    ("R_M8.json", include_str!("../corpus/R_M8.json")),
    ("INC1.json", include_str!("../corpus/INC1.json")),
    ("LOOP.json", include_str!("../corpus/LOOP.json")),
    ("INCTEST.json", include_str!("../corpus/INCTEST.json")),
];

#[derive(Deserialize)]
struct Index {
    entries: Vec<IndexEntry>,
}

#[derive(Deserialize)]
struct IndexEntry {
    name: String,
    kind: String,
    file: String,
    sha256: String,
    note: String,
    #[serde(default)]
    tilde_of: Option<String>,
    #[serde(default)]
    signature_of: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub note: String,
    pub artifact: Artifact,
    /// For tilded matrices, the entry they were built from.
    pub tilde_of: Option<String>,
    /// The exact bundled JSON text.
    pub text: &'static str,
}

fn text_of(files: &[(&str, &'static str)], file: &str) -> Result<&'static str> {
    files
        .iter()
        .find(|(f, _)| *f == file)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Corpus(format!("file `{file}` is not bundled")))
}

fn build(index: &str, files: &[(&str, &'static str)]) -> Result<Vec<CorpusEntry>> {
    let index: Index = serde_json::from_str(index)?;
    let mut out: Vec<CorpusEntry> = Vec::with_capacity(index.entries.len());
    for e in index.entries {
        let text = text_of(files, &e.file)?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        if digest != e.sha256 {
            return Err(Error::Corpus(format!("checksum mismatch for `{}`", e.name)));
        }
        let artifact = match e.kind.as_str() {
            "nmatrix" => Artifact::NMatrix(serde_json::from_str(text)?),
            "machine" => Artifact::Machine(serde_json::from_str(text)?),
            "rules" => {
                let base = e.signature_of.as_deref().ok_or_else(|| Error::Corpus(format!("`{}` has no signature", e.name)))?;
                let sig = match out.iter().find(|c| c.name == base).map(|c| &c.artifact) {
                    Some(Artifact::NMatrix(m)) => m.signature().clone(),
                    _ => return Err(Error::Corpus(format!("`{}` refers to unknown matrix `{base}`", e.name))),
                };
                Artifact::Rules(RuleSet::from_json_str(text, &sig)?)
            }
            k => return Err(Error::Corpus(format!("unknown kind `{k}`"))),
        };
        if let (Some(base), Artifact::NMatrix(m)) = (&e.tilde_of, &artifact) {
            let expected = match out.iter().find(|c| &c.name == base).map(|c| &c.artifact) {
                Some(Artifact::NMatrix(b)) => tilde(b)?,
                _ => return Err(Error::Corpus(format!("`{}` refers to unknown matrix `{base}`", e.name))),
            };
            if expected != *m {
                return Err(Error::Corpus(format!("`{}` differs from the tilde of `{base}`", e.name)));
            }
        }
        out.push(CorpusEntry { name: e.name, note: e.note, artifact, tilde_of: e.tilde_of, text });
    }
    Ok(out)
}

/// Every bundled entry, in index order.
pub fn load_corpus() -> Result<&'static [CorpusEntry]> {
    static CORPUS: OnceLock<std::result::Result<Vec<CorpusEntry>, String>> = OnceLock::new();
    CORPUS
        .get_or_init(|| build(INDEX, FILES).map_err(|e| e.to_string()))
        .as_deref()
        .map_err(|e| Error::Corpus(e.clone()))
}

pub fn corpus_entry(name: &str) -> Result<&'static CorpusEntry> {
    load_corpus()?
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Corpus(format!("no corpus entry named `{name}`")))
}

pub fn corpus_matrix(name: &str) -> Result<NMatrix> {
    match &corpus_entry(name)?.artifact {
        Artifact::NMatrix(m) => Ok(m.clone()),
        a => Err(Error::Corpus(format!("`{name}` is a {}, not an nmatrix", a.kind()))),
    }
}

pub fn corpus_machine(name: &str) -> Result<CounterMachine> {
    match &corpus_entry(name)?.artifact {
        Artifact::Machine(m) => Ok(m.clone()),
        a => Err(Error::Corpus(format!("`{name}` is a {}, not a machine", a.kind()))),
    }
}

pub fn corpus_rules(name: &str) -> Result<RuleSet> {
    match &corpus_entry(name)?.artifact {
        Artifact::Rules(r) => Ok(r.clone()),
        a => Err(Error::Corpus(format!("`{name}` is a {}, not a rule set", a.kind()))),
    }
}

/// The deterministic matrices of the corpus, used as default no-theorem certificates.
pub fn deterministic_matrices() -> Result<Vec<NMatrix>> {
    Ok(load_corpus()?
        .iter()
        .filter_map(|e| match &e.artifact {
            Artifact::NMatrix(m) if m.is_deterministic() => Some(m.clone()),
            _ => None,
        })
        .collect())
}
