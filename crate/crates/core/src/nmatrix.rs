//! Finite Nmatrices: truth values, designated values and multi-valued
//! interpretations of every connective.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{for_each_tuple, Signature};
use crate::values::ValueSet;

/// Interpretation of one connective: a total map from `V^arity` to
/// non-empty value sets, indexed in mixed radix (first argument most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    arity: usize,
    outputs: Vec<ValueSet>,
}

impl Table {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, args: &[usize], num_values: usize) -> &ValueSet {
        &self.outputs[tuple_index(args, num_values)]
    }

    pub(crate) fn get_by_index(&self, index: usize) -> &ValueSet {
        &self.outputs[index]
    }

    pub fn outputs(&self) -> &[ValueSet] {
        &self.outputs
    }
}

pub(crate) fn tuple_index(args: &[usize], num_values: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * num_values + a)
}

#[derive(Clone, PartialEq, Eq)]
pub struct NMatrix {
    signature: Signature,
    values: Vec<String>,
    value_index: HashMap<String, usize>,
    designated: ValueSet,
    tables: BTreeMap<String, Table>,
}

impl NMatrix {
    /// Builds a matrix from an interpretation function over value indices.
    /// Fails if names are duplicated or some output is empty.
    pub fn from_fn<F>(signature: Signature, values: Vec<String>, designated: ValueSet, mut interp: F) -> Result<Self>
    where
        F: FnMut(&str, &[usize]) -> ValueSet,
    {
        let n = values.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation::NoValues);
        }
        let mut value_index = HashMap::new();
        for (i, v) in values.iter().enumerate() {
            if value_index.insert(v.clone(), i).is_some() {
                violations.push(Violation::DuplicateValue(v.clone()));
            }
        }
        let mut tables = BTreeMap::new();
        for (name, arity) in signature.iter() {
            let mut outputs = Vec::new();
            for_each_tuple(n, arity, |args| {
                let out = interp(name, args);
                if out.is_empty() || out.iter().any(|v| v >= n) {
                    violations.push(Violation::EmptyOutput {
                        connective: name.to_string(),
                        args: args.iter().map(|&a| values[a].clone()).collect(),
                    });
                }
                outputs.push(out);
            });
            tables.insert(name.to_string(), Table { arity, outputs });
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(NMatrix { signature, values, value_index, designated, tables })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn value_name(&self, v: usize) -> &str {
        &self.values[v]
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.value_index.get(name).copied()
    }

    pub(crate) fn resolve(&self, name: &str) -> Result<usize> {
        self.value_index(name).ok_or_else(|| Error::UnknownValue(name.to_string()))
    }

    pub fn designated(&self) -> &ValueSet {
        &self.designated
    }

    pub fn undesignated(&self) -> ValueSet {
        (0..self.num_values()).filter(|&v| !self.designated.contains(v)).collect()
    }

    pub fn is_designated(&self, v: usize) -> bool {
        self.designated.contains(v)
    }

    pub fn table(&self, connective: &str) -> Option<&Table> {
        self.tables.get(connective)
    }

    /// `©_M(args)`. Panics if the connective is unknown.
    pub fn apply(&self, connective: &str, args: &[usize]) -> &ValueSet {
        self.tables[connective].get(args, self.num_values())
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &Table)> {
        self.tables.iter().map(|(k, t)| (k.as_str(), t))
    }

    /// All output sets are singletons.
    pub fn is_deterministic(&self) -> bool {
        self.tables.values().all(|t| t.outputs.iter().all(|o| o.len() == 1))
    }

    pub fn designated_names(&self) -> Vec<&str> {
        self.designated.iter().map(|v| self.value_name(v)).collect()
    }

    pub fn names_of(&self, set: &ValueSet) -> Vec<String> {
        set.iter().map(|v| self.values[v].clone()).collect()
    }

    /// Same matrix with every value renamed; `names` must be a bijection onto new names.
    pub fn with_value_names(&self, names: Vec<String>) -> Result<Self> {
        assert_eq!(names.len(), self.num_values());
        NMatrix::from_fn(self.signature.clone(), names, self.designated.clone(), |c, args| {
            self.apply(c, args).clone()
        })
    }

    /// Canonical serialisable form: connectives by name, tuples in value order.
    pub fn to_raw(&self) -> RawNMatrix {
        let n = self.num_values();
        let mut interpretation = BTreeMap::new();
        for (name, table) in &self.tables {
            let mut rows = Vec::with_capacity(table.outputs.len());
            for_each_tuple(n, table.arity, |args| {
                rows.push(RawEntry {
                    args: args.iter().map(|&a| self.values[a].clone()).collect(),
                    out: self.names_of(table.get(args, n)),
                });
            });
            interpretation.insert(name.clone(), rows);
        }
        RawNMatrix {
            signature: self.signature.clone(),
            values: self.values.clone(),
            designated: self.names_of(&self.designated),
            interpretation,
        }
    }
}

impl fmt::Debug for NMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NMatrix")
            .field("values", &self.values)
            .field("designated", &self.designated_names())
            .field("connectives", &self.tables.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Serialize for NMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNMatrix::deserialize(d)?;
        validate_nmatrix(&raw).map_err(|vs| serde::de::Error::custom(Error::Validation(vs)))
    }
}

/// Unchecked on-disk form of an Nmatrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNMatrix {
    pub signature: Signature,
    pub values: Vec<String>,
    pub designated: Vec<String>,
    pub interpretation: BTreeMap<String, Vec<RawEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEntry {
    pub args: Vec<String>,
    pub out: Vec<String>,
}

/// One reason a raw Nmatrix is rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NoValues,
    DuplicateValue(String),
    UnknownDesignated(String),
    UnknownConnective(String),
    MissingConnective(String),
    ArityMismatch { connective: String, args: Vec<String> },
    UnknownValue { connective: String, args: Vec<String>, value: String },
    DuplicateTuple { connective: String, args: Vec<String> },
    MissingTuple { connective: String, args: Vec<String> },
    EmptyOutput { connective: String, args: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoValues => write!(f, "value set is empty"),
            Violation::DuplicateValue(v) => write!(f, "duplicate value `{v}`"),
            Violation::UnknownDesignated(v) => write!(f, "designated value `{v}` is not a value"),
            Violation::UnknownConnective(c) => write!(f, "interpretation given for unknown connective `{c}`"),
            Violation::MissingConnective(c) => write!(f, "no interpretation for connective `{c}`"),
            Violation::ArityMismatch { connective, args } => {
                write!(f, "{connective}({}) has the wrong number of arguments", args.join(","))
            }
            Violation::UnknownValue { connective, args, value } => {
                write!(f, "{connective}({}) mentions unknown value `{value}`", args.join(","))
            }
            Violation::DuplicateTuple { connective, args } => {
                write!(f, "{connective}({}) is listed more than once", args.join(","))
            }
            Violation::MissingTuple { connective, args } => {
                write!(f, "{connective}({}) is missing", args.join(","))
            }
            Violation::EmptyOutput { connective, args } => {
                write!(f, "{connective}({}) has an empty output set", args.join(","))
            }
        }
    }
}

/// Checks every structural invariant of a raw Nmatrix, collecting all violations.
pub fn validate_nmatrix(raw: &RawNMatrix) -> std::result::Result<NMatrix, Vec<Violation>> {
    let mut violations = Vec::new();
    let n = raw.values.len();
    if n == 0 {
        violations.push(Violation::NoValues);
    }
    let mut index = HashMap::new();
    for (i, v) in raw.values.iter().enumerate() {
        if index.insert(v.as_str(), i).is_some() {
            violations.push(Violation::DuplicateValue(v.clone()));
        }
    }
    let mut designated = ValueSet::new();
    for d in &raw.designated {
        match index.get(d.as_str()) {
            Some(&i) => designated.insert(i),
            None => violations.push(Violation::UnknownDesignated(d.clone())),
        }
    }
    for name in raw.interpretation.keys() {
        if raw.signature.arity(name).is_none() {
            violations.push(Violation::UnknownConnective(name.clone()));
        }
    }

    let mut tables: BTreeMap<&str, Vec<Option<ValueSet>>> = BTreeMap::new();
    for (name, arity) in raw.signature.iter() {
        let Some(rows) = raw.interpretation.get(name) else {
            violations.push(Violation::MissingConnective(name.to_string()));
            continue;
        };
        let mut slots: Vec<Option<ValueSet>> = vec![None; n.checked_pow(arity as u32).unwrap_or(0)];
        for row in rows {
            if row.args.len() != arity {
                violations.push(Violation::ArityMismatch { connective: name.to_string(), args: row.args.clone() });
                continue;
            }
            let mut args = Vec::with_capacity(arity);
            let mut ok = true;
            for a in row.args.iter().chain(row.out.iter()) {
                if !index.contains_key(a.as_str()) {
                    violations.push(Violation::UnknownValue {
                        connective: name.to_string(),
                        args: row.args.clone(),
                        value: a.clone(),
                    });
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            args.extend(row.args.iter().map(|a| index[a.as_str()]));
            let out: ValueSet = row.out.iter().map(|o| index[o.as_str()]).collect();
            if out.is_empty() {
                violations.push(Violation::EmptyOutput { connective: name.to_string(), args: row.args.clone() });
            }
            let slot = &mut slots[tuple_index(&args, n)];
            if slot.is_some() {
                violations.push(Violation::DuplicateTuple { connective: name.to_string(), args: row.args.clone() });
            } else {
                *slot = Some(out);
            }
        }
        if n > 0 {
            for_each_tuple(n, arity, |args| {
                if slots[tuple_index(args, n)].is_none() {
                    violations.push(Violation::MissingTuple {
                        connective: name.to_string(),
                        args: args.iter().map(|&a| raw.values[a].clone()).collect(),
                    });
                }
            });
        }
        tables.insert(name, slots);
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    let built = NMatrix::from_fn(raw.signature.clone(), raw.values.clone(), designated, |c, args| {
        tables[c][tuple_index(args, n)].clone().unwrap_or_default()
    });
    built.map_err(|e| match e {
        Error::Validation(vs) => vs,
        other => unreachable!("from_fn only reports validation errors: {other}"),
    })
}

/// Convenience for building tables from value names; used by the corpus and tests.
pub fn matrix_from_rows(
    signature: Signature,
    values: &[&str],
    designated: &[&str],
    rows: &[(&str, &[&str], &[&str])],
) -> Result<NMatrix> {
    let mut interpretation: BTreeMap<String, Vec<RawEntry>> = BTreeMap::new();
    for (c, args, out) in rows {
        interpretation.entry(c.to_string()).or_default().push(RawEntry {
            args: args.iter().map(|s| s.to_string()).collect(),
            out: out.iter().map(|s| s.to_string()).collect(),
        });
    }
    for (c, _) in signature.iter() {
        interpretation.entry(c.to_string()).or_default();
    }
    let raw = RawNMatrix {
        signature,
        values: values.iter().map(|s| s.to_string()).collect(),
        designated: designated.iter().map(|s| s.to_string()).collect(),
        interpretation,
    };
    validate_nmatrix(&raw).map_err(Error::Validation)
}
