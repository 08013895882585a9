//! Backtracking search for prevaluations over a subformula-closed set.
//!
//! Nodes are visited in canonical formula order, so every argument is
//! assigned before the formula applying a connective to it. A compound node
//! only ever tries values from the interpretation of its connective on the
//! already-chosen argument values. The first solution found is the
//! lexicographically least assignment in (formula order, value order).

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::nmatrix::{NMatrix, Table};
use crate::values::ValueSet;

/// Upper bound on argument-domain products explored during domain pre-filtering.
const PREFILTER_TUPLE_LIMIT: usize = 50_000;

enum NodeSpec<'m> {
    Var,
    App { table: &'m Table, children: Vec<usize> },
}

pub(crate) struct Instance<'m> {
    matrix: &'m NMatrix,
    formulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
    nodes: Vec<NodeSpec<'m>>,
    /// For node `i`, the parents whose last-assigned argument is `i`.
    completes: Vec<Vec<usize>>,
}

impl<'m> Instance<'m> {
    /// The subformula closure of `roots`, checked against the matrix signature.
    pub fn new<'a>(matrix: &'m NMatrix, roots: impl IntoIterator<Item = &'a Formula>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for r in roots {
            r.collect_subformulas(&mut set);
        }
        Self::from_closed_set(matrix, set.into_iter().collect())
    }

    /// `formulas` must be subformula-closed and sorted canonically.
    pub fn from_closed_set(matrix: &'m NMatrix, formulas: Vec<Formula>) -> Result<Self> {
        let index: HashMap<Formula, usize> = formulas.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let mut nodes = Vec::with_capacity(formulas.len());
        let mut completes = vec![Vec::new(); formulas.len()];
        for (i, f) in formulas.iter().enumerate() {
            match f.connective() {
                None => nodes.push(NodeSpec::Var),
                Some(op) => {
                    let table = matrix.table(op).ok_or_else(|| {
                        Error::SignatureMismatch(format!("connective `{op}` in `{f}` is not interpreted by the matrix"))
                    })?;
                    if table.arity() != f.args().len() {
                        return Err(Error::SignatureMismatch(format!(
                            "connective `{op}` has arity {} but `{f}` applies it to {} arguments",
                            table.arity(),
                            f.args().len()
                        )));
                    }
                    let children: Vec<usize> = f.args().iter().map(|a| index[a]).collect();
                    if let Some(&last) = children.iter().max() {
                        completes[last].push(i);
                    }
                    nodes.push(NodeSpec::App { table, children });
                }
            }
        }
        Ok(Instance { matrix, formulas, index, nodes, completes })
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn position(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// Per-node allowed sets with no restriction.
    pub fn unrestricted(&self) -> Vec<ValueSet> {
        vec![ValueSet::full(self.matrix.num_values()); self.len()]
    }

    fn args_index(&self, children: &[usize], assign: &[usize]) -> usize {
        let n = self.matrix.num_values();
        children.iter().fold(0, |acc, &c| acc * n + assign[c])
    }

    /// Upward domain filtering; `None` if some node has no possible value.
    fn domains(&self, allowed: &[ValueSet]) -> Option<Vec<ValueSet>> {
        let n = self.matrix.num_values();
        let mut dom: Vec<ValueSet> = Vec::with_capacity(self.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let d = match node {
                NodeSpec::Var => allowed[i].intersection(&ValueSet::full(n)),
                NodeSpec::App { table, children } => {
                    let product = children
                        .iter()
                        .try_fold(1usize, |acc, &c| acc.checked_mul(dom[c].len()))
                        .unwrap_or(usize::MAX);
                    if product > PREFILTER_TUPLE_LIMIT {
                        allowed[i].clone()
                    } else {
                        let child_vals: Vec<Vec<usize>> = children.iter().map(|&c| dom[c].iter().collect()).collect();
                        let mut reach = ValueSet::new();
                        for_each_tuple_of(&child_vals, |args| reach.union_with(table.get(args, n)));
                        reach.intersection(&allowed[i])
                    }
                }
            };
            if d.is_empty() {
                return None;
            }
            dom.push(d);
        }
        Some(dom)
    }

    fn candidates(&self, i: usize, assign: &[usize], dom: &[ValueSet]) -> ValueSet {
        match &self.nodes[i] {
            NodeSpec::Var => dom[i].clone(),
            NodeSpec::App { table, children } => {
                table.get_by_index(self.args_index(children, assign)).intersection(&dom[i])
            }
        }
    }

    fn forward_ok(&self, i: usize, assign: &[usize], dom: &[ValueSet]) -> bool {
        self.completes[i].iter().all(|&p| match &self.nodes[p] {
            NodeSpec::App { table, children } => table.get_by_index(self.args_index(children, assign)).intersects(&dom[p]),
            NodeSpec::Var => true,
        })
    }

    /// Visits solutions in lexicographic order until `visit` returns `false`.
    pub fn for_each_solution(&self, allowed: &[ValueSet], mut visit: impl FnMut(&[usize]) -> bool) {
        let n = self.len();
        let Some(dom) = self.domains(allowed) else {
            return;
        };
        if n == 0 {
            visit(&[]);
            return;
        }
        let mut assign = vec![0usize; n];
        let mut cands: Vec<ValueSet> = vec![ValueSet::new(); n];
        cands[0] = self.candidates(0, &assign, &dom);
        let mut i = 0usize;
        loop {
            match cands[i].first() {
                Some(v) => {
                    cands[i].remove(v);
                    assign[i] = v;
                    if !self.forward_ok(i, &assign, &dom) {
                        continue;
                    }
                    if i + 1 == n {
                        if !visit(&assign) {
                            return;
                        }
                    } else {
                        i += 1;
                        cands[i] = self.candidates(i, &assign, &dom);
                    }
                }
                None => {
                    if i == 0 {
                        return;
                    }
                    i -= 1;
                }
            }
        }
    }

    /// The first solution, if any.
    pub fn solve(&self, allowed: &[ValueSet]) -> Option<Vec<usize>> {
        let mut found = None;
        self.for_each_solution(allowed, |a| {
            found = Some(a.to_vec());
            false
        });
        found
    }
}

fn for_each_tuple_of(choices: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    let mut buf = vec![0usize; choices.len()];
    let lens: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    if lens.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        for (k, &j) in idx.iter().enumerate() {
            buf[k] = choices[k][j];
        }
        f(&buf);
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < lens[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}
