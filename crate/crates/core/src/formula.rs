//! Signatures, formulas and substitutions.
//!
//! Formulas are immutable, reference-counted trees. Every node caches its
//! canonical text together with its depth and node count, so equality and
//! hashing go through the text and the canonical order
//! `(depth, node count, text)` is cheap to evaluate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// `true` iff `s` is a propositional variable token `p<positive integer>`.
pub fn is_variable_token(s: &str) -> bool {
    let Some(rest) = s.strip_prefix('p') else {
        return false;
    };
    let mut chars = rest.chars();
    match chars.next() {
        Some('1'..='9') => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '^'
}

/// `true` iff `s` is a legal connective identifier.
pub fn is_connective_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => chars.all(is_name_char) && !is_variable_token(s),
        _ => false,
    }
}

/// A finite signature: connective names with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    connectives: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new<I, S>(connectives: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, arity) in connectives {
            let name = name.into();
            if !is_connective_name(&name) {
                return Err(Error::Signature(format!("illegal connective name `{name}`")));
            }
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::Signature(format!("duplicate connective `{name}`")));
            }
        }
        Ok(Signature { connectives: map })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.connectives.get(name).copied()
    }

    /// Connectives in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.connectives.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.connectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectives.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct SignatureRepr {
    connectives: Vec<ConnectiveRepr>,
}

#[derive(Serialize, Deserialize)]
struct ConnectiveRepr {
    name: String,
    arity: usize,
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignatureRepr {
            connectives: self
                .iter()
                .map(|(name, arity)| ConnectiveRepr { name: name.to_string(), arity })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SignatureRepr::deserialize(d)?;
        Signature::new(repr.connectives.into_iter().map(|c| (c.name, c.arity)))
            .map_err(serde::de::Error::custom)
    }
}

/// The shape of a formula node.
#[derive(Debug)]
pub enum Term {
    Var(u32),
    App(Arc<str>, Vec<Formula>),
}

#[derive(Debug)]
struct Node {
    term: Term,
    depth: u32,
    size: u32,
    text: Box<str>,
}

/// A propositional formula over some signature.
#[derive(Clone, Debug)]
pub struct Formula(Arc<Node>);

impl Formula {
    /// The variable `p<index>`. Panics if `index == 0`.
    pub fn var(index: u32) -> Formula {
        assert!(index > 0, "variables are indexed from 1");
        Formula(Arc::new(Node {
            term: Term::Var(index),
            depth: 0,
            size: 1,
            text: format!("p{index}").into_boxed_str(),
        }))
    }

    /// Application of `op` to `args`. No signature check is made here; use
    /// [`Formula::check`] or [`parse_formula`] for validated construction.
    pub fn app(op: impl Into<Arc<str>>, args: Vec<Formula>) -> Formula {
        let op: Arc<str> = op.into();
        let depth = 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0);
        let size = 1 + args.iter().map(|a| a.size()).sum::<u32>();
        let text = if args.is_empty() {
            op.to_string()
        } else {
            let mut t = String::with_capacity(op.len() + 2 + args.iter().map(|a| a.text().len() + 1).sum::<usize>());
            t.push_str(&op);
            t.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    t.push(',');
                }
                t.push_str(a.text());
            }
            t.push(')');
            t
        };
        Formula(Arc::new(Node { term: Term::App(op, args), depth, size, text: text.into_boxed_str() }))
    }

    pub fn constant(op: impl Into<Arc<str>>) -> Formula {
        Formula::app(op, Vec::new())
    }

    pub fn term(&self) -> &Term {
        &self.0.term
    }

    pub fn as_var(&self) -> Option<u32> {
        match self.0.term {
            Term::Var(i) => Some(i),
            Term::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        self.as_var().is_some()
    }

    /// Immediate subformulas (empty for variables and constants).
    pub fn args(&self) -> &[Formula] {
        match &self.0.term {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn connective(&self) -> Option<&str> {
        match &self.0.term {
            Term::Var(_) => None,
            Term::App(op, _) => Some(op),
        }
    }

    /// Variables have depth 0; an application is one deeper than its deepest argument.
    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    pub fn size(&self) -> u32 {
        self.0.size
    }

    pub fn text(&self) -> &str {
        &self.0.text
    }

    /// `sub(A)` in canonical order; `self` is always the last element.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut set = BTreeSet::new();
        self.collect_subformulas(&mut set);
        set.into_iter().collect()
    }

    pub(crate) fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.contains(self) {
            return;
        }
        for a in self.args() {
            a.collect_subformulas(out);
        }
        out.insert(self.clone());
    }

    /// `var(A)`.
    pub fn variables(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<u32>) {
        match &self.0.term {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    pub fn max_variable(&self) -> u32 {
        self.variables().into_iter().next_back().unwrap_or(0)
    }

    pub fn is_closed(&self) -> bool {
        self.variables().is_empty()
    }

    /// Checks that every connective exists in `sig` with the right arity.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match &self.0.term {
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                match sig.arity(op) {
                    None => {
                        return Err(Error::SignatureMismatch(format!(
                            "connective `{op}` in `{self}` is not in the signature"
                        )))
                    }
                    Some(a) if a != args.len() => {
                        return Err(Error::SignatureMismatch(format!(
                            "connective `{op}` has arity {a} but is applied to {} arguments in `{self}`",
                            args.len()
                        )))
                    }
                    Some(_) => {}
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    /// `A^σ`.
    pub fn substitute(&self, sigma: &Substitution) -> Formula {
        match &self.0.term {
            Term::Var(i) => sigma.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Term::App(op, args) => {
                Formula::app(op.clone(), args.iter().map(|a| a.substitute(sigma)).collect())
            }
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.text == other.0.text
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.text.hash(state)
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.depth()
            .cmp(&other.depth())
            .then(self.size().cmp(&other.size()))
            .then_with(|| self.text().cmp(other.text()))
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.text())
    }
}

/// A substitution; the identity outside its support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<u32, Formula>,
}

impl Substitution {
    pub fn identity() -> Self {
        Substitution::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Formula)>) -> Self {
        let mut s = Substitution::default();
        for (i, f) in pairs {
            s.set(i, f);
        }
        s
    }

    pub fn set(&mut self, index: u32, image: Formula) {
        if image.as_var() == Some(index) {
            self.map.remove(&index);
        } else {
            self.map.insert(index, image);
        }
    }

    pub fn get(&self, index: u32) -> Option<&Formula> {
        self.map.get(&index)
    }

    pub fn apply(&self, a: &Formula) -> Formula {
        a.substitute(self)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Substitution) -> Substitution {
        let mut out = Substitution::default();
        for (i, f) in &first.map {
            out.set(*i, f.substitute(self));
        }
        for (i, f) in &self.map {
            if !first.map.contains_key(i) {
                out.set(*i, f.clone());
            }
        }
        out
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.map.keys().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownConnective(String),
    ArityMismatch { name: String, expected: usize, found: usize },
}

/// Formula parse failure; `position` is a byte offset into the input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{} at position {position}: {}", self.code(), self.detail())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl ParseError {
    /// Stable machine-readable failure code.
    pub fn code(&self) -> &'static str {
        match self.kind {
            ParseErrorKind::Syntax(_) => "syntax-error",
            ParseErrorKind::UnknownConnective(_) => "unknown-connective",
            ParseErrorKind::ArityMismatch { .. } => "arity-mismatch",
        }
    }

    fn detail(&self) -> String {
        match &self.kind {
            ParseErrorKind::Syntax(m) => m.clone(),
            ParseErrorKind::UnknownConnective(n) => format!("unknown connective `{n}`"),
            ParseErrorKind::ArityMismatch { name, expected, found } => {
                format!("`{name}` expects {expected} arguments, found {found}")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> std::result::Result<T, ParseError> {
        Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), position: self.pos })
    }

    fn describe_here(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(c) => format!("`{c}`"),
        }
    }

    fn formula(&mut self) -> std::result::Result<Formula, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if is_name_start(c) => {}
            _ => return self.syntax(format!("expected a formula, found {}", self.describe_here())),
        }
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            self.pos += 1;
        }
        let ident = &self.src[start..self.pos];
        if is_variable_token(ident) {
            let index: u32 = ident[1..].parse().map_err(|_| ParseError {
                kind: ParseErrorKind::Syntax(format!("variable index out of range in `{ident}`")),
                position: start,
            })?;
            return Ok(Formula::var(index));
        }
        let expected = self.sig.arity(ident).ok_or_else(|| ParseError {
            kind: ParseErrorKind::UnknownConnective(ident.to_string()),
            position: start,
        })?;
        self.skip_ws();
        let mut args = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                args.push(self.formula()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.syntax(format!("expected `,` or `)`, found {}", self.describe_here())),
                }
            }
        }
        if args.len() != expected {
            return Err(ParseError {
                kind: ParseErrorKind::ArityMismatch { name: ident.to_string(), expected, found: args.len() },
                position: start,
            });
        }
        Ok(Formula::app(ident, args))
    }
}

/// Parses `text` against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> std::result::Result<Formula, ParseError> {
    let mut p = Parser { src: text, pos: 0, sig };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.syntax(format!("unexpected trailing input {}", p.describe_here()));
    }
    Ok(f)
}

/// Number of formulas over `vars` variables with depth at most `depth`,
/// saturating at `u128::MAX`.
pub fn formula_count(sig: &Signature, vars: u32, depth: u32) -> u128 {
    let mut n = vars as u128;
    for _ in 0..depth {
        let mut next = vars as u128;
        for (_, arity) in sig.iter() {
            let mut term: u128 = 1;
            for _ in 0..arity {
                term = term.saturating_mul(n);
            }
            next = next.saturating_add(term);
        }
        n = next;
    }
    n
}

/// All formulas over `p1..p<vars>` with depth at most `depth`, in canonical order.
pub fn enumerate_formulas(sig: &Signature, vars: u32, depth: u32) -> Vec<Formula> {
    let mut all: Vec<Formula> = (1..=vars).map(Formula::var).collect();
    for d in 1..=depth {
        let level = formulas_at_depth(sig, &all, d);
        all.extend(level);
    }
    all
}

/// Formulas of depth exactly `d` whose arguments are drawn from `below`
/// (which must hold every formula of depth `< d` of interest), sorted canonically.
pub fn formulas_at_depth(sig: &Signature, below: &[Formula], d: u32) -> Vec<Formula> {
    let mut level = Vec::new();
    for (name, arity) in sig.iter() {
        let op: Arc<str> = Arc::from(name);
        if arity == 0 {
            if d == 1 {
                level.push(Formula::constant(op.clone()));
            }
            continue;
        }
        for_each_tuple(below.len(), arity, |idx| {
            if idx.iter().any(|&i| below[i].depth() + 1 == d) {
                level.push(Formula::app(op.clone(), idx.iter().map(|&i| below[i].clone()).collect()));
            }
        });
    }
    level.sort();
    level
}

/// Calls `f` on every tuple in `0..base` of length `len`, in lexicographic order.
pub(crate) fn for_each_tuple(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    if len > 0 && base == 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        f(&idx);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
        }
    }
}
