//! Prevaluations, finite consequence, and expressed multi-functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, Signature};
use crate::nmatrix::NMatrix;
use crate::search::Instance;
use crate::values::ValueSet;

/// A finite assignment of value names to formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrevaluationTable {
    entries: BTreeMap<Formula, String>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    formula: String,
    value: String,
}

impl PrevaluationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, formula: Formula, value: impl Into<String>) {
        self.entries.insert(formula, value.into());
    }

    pub fn get(&self, formula: &Formula) -> Option<&str> {
        self.entries.get(formula).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical formula order.
    pub fn iter(&self) -> impl Iterator<Item = (&Formula, &str)> {
        self.entries.iter().map(|(f, v)| (f, v.as_str()))
    }

    /// Builds a table from `(formula text, value)` pairs.
    pub fn from_pairs(sig: &Signature, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut t = Self::new();
        for (f, v) in pairs {
            t.insert(parse_formula(f, sig)?, *v);
        }
        Ok(t)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let list: Vec<Entry> =
            self.entries.iter().map(|(f, v)| Entry { formula: f.to_string(), value: v.clone() }).collect();
        serde_json::to_value(list).expect("entries serialize")
    }

    pub fn from_json_str(text: &str, sig: &Signature) -> Result<Self> {
        let list: Vec<Entry> = serde_json::from_str(text)?;
        let mut t = Self::new();
        for e in list {
            t.insert(parse_formula(&e.formula, sig)?, e.value);
        }
        Ok(t)
    }
}

impl Serialize for PrevaluationTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

/// Why a table fails to be a prevaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PrevaluationViolation {
    /// `formula` is in the domain but its argument `missing` is not.
    MissingSubformula { formula: String, missing: String },
    /// The value of `formula` is not among the interpretation's outputs on its arguments.
    OutsideInterpretation { formula: String, value: String, allowed: Vec<String> },
}

impl fmt::Display for PrevaluationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingSubformula { formula, missing } => {
                write!(f, "`{formula}` is assigned but its subformula `{missing}` is not")
            }
            Self::OutsideInterpretation { formula, value, allowed } => {
                write!(f, "`{formula}` takes `{value}`, outside the allowed {{{}}}", allowed.join(", "))
            }
        }
    }
}

/// Checks subformula closure and the interpretation condition at every compound entry.
///
/// An empty result means `t` is a prevaluation of `m`.
pub fn check_prevaluation(m: &NMatrix, t: &PrevaluationTable) -> Result<Vec<PrevaluationViolation>> {
    let mut vals = BTreeMap::new();
    for (f, v) in t.iter() {
        f.check(m.signature())?;
        vals.insert(f, m.resolve(v)?);
    }
    let mut out = Vec::new();
    for (f, &v) in &vals {
        let Some(op) = f.connective() else { continue };
        let mut args = Vec::with_capacity(f.args().len());
        for a in f.args() {
            match vals.get(a) {
                Some(&x) => args.push(x),
                None => out.push(PrevaluationViolation::MissingSubformula {
                    formula: f.to_string(),
                    missing: a.to_string(),
                }),
            }
        }
        if args.len() != f.args().len() {
            continue;
        }
        let allowed = m.apply(op, &args);
        if !allowed.contains(v) {
            out.push(PrevaluationViolation::OutsideInterpretation {
                formula: f.to_string(),
                value: m.value_name(v).to_string(),
                allowed: m.names_of(allowed),
            });
        }
    }
    Ok(out)
}

/// Outcome of a consequence query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consequence {
    Holds,
    /// A prevaluation designating every premise and not the conclusion.
    Fails(PrevaluationTable),
}

impl Consequence {
    pub fn holds(&self) -> bool {
        matches!(self, Consequence::Holds)
    }

    pub fn witness(&self) -> Option<&PrevaluationTable> {
        match self {
            Consequence::Holds => None,
            Consequence::Fails(w) => Some(w),
        }
    }
}

fn check_all(m: &NMatrix, fs: &[&Formula]) -> Result<()> {
    for f in fs {
        f.check(m.signature()).map_err(|e| Error::SignatureMismatch(e.to_string()))?;
    }
    Ok(())
}

/// Decides whether `premises ⊢_m conclusion`.
pub fn decide_consequence(m: &NMatrix, premises: &[Formula], conclusion: &Formula) -> Result<Consequence> {
    let mut all: Vec<&Formula> = premises.iter().collect();
    all.push(conclusion);
    check_all(m, &all)?;
    let gamma: BTreeSet<&Formula> = premises.iter().collect();
    if gamma.contains(conclusion) {
        return Ok(Consequence::Holds);
    }
    let inst = Instance::new(m, gamma.iter().copied().chain([conclusion]))?;
    let mut allowed = inst.unrestricted();
    for g in &gamma {
        let i = inst.position(g).expect("premise in closure");
        allowed[i] = allowed[i].intersection(m.designated());
    }
    let c = inst.position(conclusion).expect("conclusion in closure");
    allowed[c] = allowed[c].intersection(&m.undesignated());
    Ok(match inst.solve(&allowed) {
        None => Consequence::Holds,
        Some(assign) => {
            let mut w = PrevaluationTable::new();
            for (f, &v) in inst.formulas().iter().zip(&assign) {
                w.insert(f.clone(), m.value_name(v));
            }
            debug_assert!(check_prevaluation(m, &w).map(|v| v.is_empty()).unwrap_or(false));
            Consequence::Fails(w)
        }
    })
}

pub fn is_theorem(m: &NMatrix, a: &Formula) -> Result<Consequence> {
    decide_consequence(m, &[], a)
}

/// Whether some prevaluation on `sub(a)` gives `a` a value in `targets`.
pub fn can_take(m: &NMatrix, a: &Formula, targets: &ValueSet) -> Result<bool> {
    check_all(m, &[a])?;
    let inst = Instance::new(m, [a])?;
    let mut allowed = inst.unrestricted();
    let i = inst.position(a).expect("root in closure");
    allowed[i] = allowed[i].intersection(targets);
    Ok(inst.solve(&allowed).is_some())
}

/// An n-ary multi-function over the value indices of some matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiFunctionTable {
    arity: usize,
    num_values: usize,
    outputs: Vec<ValueSet>,
}

impl MultiFunctionTable {
    pub fn new(arity: usize, num_values: usize, outputs: Vec<ValueSet>) -> Self {
        assert_eq!(outputs.len(), num_values.pow(arity as u32), "table must be total");
        MultiFunctionTable { arity, num_values, outputs }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, args: &[usize]) -> &ValueSet {
        &self.outputs[crate::nmatrix::tuple_index(args, self.num_values)]
    }

    /// Outputs indexed by argument tuple, first argument most significant.
    pub fn outputs(&self) -> &[ValueSet] {
        &self.outputs
    }

    /// Rows as `(argument names, output names)` pairs.
    pub fn rows(&self, m: &NMatrix) -> Vec<(Vec<String>, Vec<String>)> {
        let mut rows = Vec::with_capacity(self.outputs.len());
        crate::formula::for_each_tuple(self.num_values, self.arity, |args| {
            let names = args.iter().map(|&a| m.value_name(a).to_string()).collect();
            rows.push((names, m.names_of(self.get(args))));
        });
        rows
    }
}

/// The multi-function `[a]_m` on `n` variables.
pub fn express(m: &NMatrix, a: &Formula, n: usize) -> Result<MultiFunctionTable> {
    check_all(m, &[a])?;
    if let Some(&i) = a.variables().iter().find(|&&i| i as usize > n) {
        return Err(Error::VariableOutOfRange { index: i, arity: n });
    }
    let vars: Vec<Formula> = (1..=n as u32).map(Formula::var).collect();
    let inst = Instance::new(m, vars.iter().chain([a]))?;
    let root = inst.position(a).expect("root in closure");
    let var_pos: Vec<usize> = vars.iter().map(|v| inst.position(v).expect("variable in closure")).collect();
    let nv = m.num_values();
    let mut outputs = Vec::with_capacity(nv.pow(n as u32));
    let mut tuples = Vec::new();
    crate::formula::for_each_tuple(nv, n, |x| tuples.push(x.to_vec()));
    for x in tuples {
        let mut allowed = inst.unrestricted();
        for (&p, &xi) in var_pos.iter().zip(&x) {
            allowed[p] = ValueSet::singleton(xi);
        }
        let mut out = ValueSet::new();
        for y in 0..nv {
            let mut a2 = allowed.clone();
            a2[root] = a2[root].intersection(&ValueSet::singleton(y));
            if inst.solve(&a2).is_some() {
                out.insert(y);
            }
        }
        outputs.push(out);
    }
    Ok(MultiFunctionTable::new(n, nv, outputs))
}
