//! Loading and storing JSON artifacts, from files or `corpus:NAME` references.

use std::path::Path;

use serde_json::Value;

use crate::analyzer::RuleSet;
use crate::corpus::corpus_entry;
use crate::error::{Error, Result};
use crate::formula::Signature;
use crate::machine::CounterMachine;
use crate::nmatrix::{validate_nmatrix, NMatrix, RawNMatrix};

pub const CORPUS_SCHEME: &str = "corpus:";

#[derive(Clone, Debug)]
pub enum Artifact {
    NMatrix(NMatrix),
    Machine(CounterMachine),
    Rules(RuleSet),
    Signature(Signature),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::NMatrix(_) => "nmatrix",
            Artifact::Machine(_) => "machine",
            Artifact::Rules(_) => "rules",
            Artifact::Signature(_) => "signature",
        }
    }

    /// Pretty-printed canonical JSON with a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let v = match self {
            Artifact::NMatrix(m) => serde_json::to_value(m),
            Artifact::Machine(c) => serde_json::to_value(c),
            Artifact::Rules(r) => serde_json::to_value(r),
            Artifact::Signature(s) => serde_json::to_value(s),
        }
        .expect("artifacts serialize");
        let mut text = serde_json::to_string_pretty(&v).expect("values serialize");
        text.push('\n');
        text
    }
}

/// The JSON text behind a file path or a `corpus:NAME` reference.
pub fn read_source(source: &str) -> Result<String> {
    match source.strip_prefix(CORPUS_SCHEME) {
        Some(name) => Ok(corpus_entry(name)?.text.to_string()),
        None => Ok(std::fs::read_to_string(source)?),
    }
}

fn detect(v: &Value) -> Option<&'static str> {
    let obj = v.as_object()?;
    if obj.contains_key("interpretation") {
        Some("nmatrix")
    } else if obj.contains_key("counters") {
        Some("machine")
    } else if obj.contains_key("rules") {
        Some("rules")
    } else if obj.contains_key("connectives") {
        Some("signature")
    } else {
        None
    }
}

/// Parses an artifact, recognising its type from its keys.
///
/// Rule sets need a signature, taken from an embedded `signature` key or from `sig`.
pub fn parse_artifact(text: &str, sig: Option<&Signature>) -> Result<Artifact> {
    let v: Value = serde_json::from_str(text)?;
    match detect(&v) {
        Some("nmatrix") => {
            let raw: RawNMatrix = serde_json::from_value(v)?;
            Ok(Artifact::NMatrix(validate_nmatrix(&raw).map_err(Error::Validation)?))
        }
        Some("machine") => Ok(Artifact::Machine(serde_json::from_value(v)?)),
        Some("signature") => Ok(Artifact::Signature(serde_json::from_value(v)?)),
        Some("rules") => {
            let embedded: Option<Signature> = match v.get("signature") {
                Some(s) => Some(serde_json::from_value(s.clone())?),
                None => None,
            };
            let sig = embedded
                .as_ref()
                .or(sig)
                .ok_or_else(|| Error::Artifact("a rule set needs a signature to be parsed".into()))?;
            Ok(Artifact::Rules(RuleSet::from_json_str(text, sig)?))
        }
        _ => Err(Error::Artifact("expected an nmatrix, machine, rule set or signature".into())),
    }
}

pub fn load_artifact(source: &str, sig: Option<&Signature>) -> Result<Artifact> {
    parse_artifact(&read_source(source)?, sig)
}

pub fn store_artifact(a: &Artifact, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, a.to_canonical_json())?;
    Ok(())
}

fn wrong(source: &str, want: &str, got: &Artifact) -> Error {
    Error::Artifact(format!("`{source}` holds a {}, expected a {want}", got.kind()))
}

pub fn load_nmatrix(source: &str) -> Result<NMatrix> {
    match load_artifact(source, None)? {
        Artifact::NMatrix(m) => Ok(m),
        a => Err(wrong(source, "nmatrix", &a)),
    }
}

pub fn load_machine(source: &str) -> Result<CounterMachine> {
    match load_artifact(source, None)? {
        Artifact::Machine(c) => Ok(c),
        a => Err(wrong(source, "machine", &a)),
    }
}

pub fn load_rules(source: &str, sig: &Signature) -> Result<RuleSet> {
    match load_artifact(source, Some(sig))? {
        Artifact::Rules(r) => Ok(r),
        a => Err(wrong(source, "rule set", &a)),
    }
}

/// A signature, given directly or as the signature of a matrix or machine.
pub fn load_signature(source: &str) -> Result<Signature> {
    match load_artifact(source, None)? {
        Artifact::Signature(s) => Ok(s),
        Artifact::NMatrix(m) => Ok(m.signature().clone()),
        Artifact::Machine(c) => Ok(c.signature()),
        a => Err(wrong(source, "signature", &a)),
    }
}
