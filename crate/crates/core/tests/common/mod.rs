#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nmt_core::{Formula, NMatrix, Signature};
use rand::Rng;

pub fn flat() -> Signature {
    Signature::new([("flat", 1)]).unwrap()
}

pub fn parse(s: &str, sig: &Signature) -> Formula {
    nmt_core::parse_formula(s, sig).unwrap()
}

/// A uniformly-shaped random formula of depth at most `depth` over `p1..p<vars>`.
pub fn random_formula(rng: &mut impl Rng, sig: &Signature, vars: u32, depth: u32) -> Formula {
    let ops: Vec<(&str, usize)> = sig.iter().collect();
    if depth == 0 || ops.is_empty() || rng.gen_bool(0.3) {
        let constants: Vec<&str> = ops.iter().filter(|(_, a)| *a == 0).map(|(n, _)| *n).collect();
        if vars == 0 || (!constants.is_empty() && rng.gen_bool(0.2)) {
            if constants.is_empty() {
                return random_formula(rng, sig, vars, depth);
            }
            return Formula::constant(constants[rng.gen_range(0..constants.len())]);
        }
        return Formula::var(rng.gen_range(1..=vars));
    }
    let (op, arity) = ops[rng.gen_range(0..ops.len())];
    Formula::app(op, (0..arity).map(|_| random_formula(rng, sig, vars, depth - 1)).collect())
}

pub fn closure(fs: &[Formula]) -> Vec<Formula> {
    let mut set = BTreeSet::new();
    for f in fs {
        set.extend(f.subformulas());
    }
    set.into_iter().collect()
}

/// Whether `assign` (indexed like `domain`) satisfies the interpretation at every compound formula.
pub fn respects(m: &NMatrix, domain: &[Formula], assign: &[usize]) -> bool {
    let pos: BTreeMap<&Formula, usize> = domain.iter().enumerate().map(|(i, f)| (f, i)).collect();
    domain.iter().enumerate().all(|(i, f)| match f.connective() {
        None => true,
        Some(op) => {
            let args: Vec<usize> = f.args().iter().map(|a| assign[pos[a]]).collect();
            m.apply(op, &args).contains(assign[i])
        }
    })
}

/// Calls `f` on every assignment of `len` values below `base`.
pub fn each_assignment(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    if base == 0 && len > 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        f(&idx);
        let mut p = len;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < base {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Consequence by enumerating every assignment of the subformula closure.
pub fn brute_consequence(m: &NMatrix, premises: &[Formula], conclusion: &Formula) -> bool {
    let mut all = premises.to_vec();
    all.push(conclusion.clone());
    let domain = closure(&all);
    let pos: BTreeMap<&Formula, usize> = domain.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut holds = true;
    each_assignment(m.num_values(), domain.len(), |a| {
        if holds
            && respects(m, &domain, a)
            && premises.iter().all(|g| m.is_designated(a[pos[g]]))
            && !m.is_designated(a[pos[conclusion]])
        {
            holds = false;
        }
    });
    holds
}
