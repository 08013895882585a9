//! Complete procedures for finite deterministic matrices.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{for_each_tuple, Formula};
use crate::nmatrix::NMatrix;
use crate::semantics::MultiFunctionTable;
use crate::values::ValueSet;

/// Default ceiling on the number of representatives kept by a fixpoint.
pub const DEFAULT_THETA_CAP: usize = 200_000;

/// A function `V^n -> V`, one entry per argument tuple.
type Func = Vec<u32>;

fn require_deterministic(m: &NMatrix, which: &str) -> Result<()> {
    if m.is_deterministic() {
        Ok(())
    } else {
        Err(Error::NonDeterministic(which.to_string()))
    }
}

struct FnSpace<'m> {
    m: &'m NMatrix,
    n: usize,
    rows: usize,
}

impl<'m> FnSpace<'m> {
    fn new(m: &'m NMatrix, n: usize) -> Self {
        FnSpace { m, n, rows: m.num_values().pow(n as u32) }
    }

    fn projection(&self, i: usize) -> Func {
        let mut out = Vec::with_capacity(self.rows);
        for_each_tuple(self.m.num_values(), self.n, |x| out.push(x[i] as u32));
        out
    }

    fn apply(&self, op: &str, args: &[&Func]) -> Func {
        let t = self.m.table(op).expect("connective interpreted");
        let nv = self.m.num_values();
        (0..self.rows)
            .map(|row| {
                let idx = args.iter().fold(0usize, |acc, f| acc * nv + f[row] as usize);
                t.get_by_index(idx).first().expect("non-empty output") as u32
            })
            .collect()
    }

    fn to_table(&self, f: &Func) -> MultiFunctionTable {
        MultiFunctionTable::new(
            self.n,
            self.m.num_values(),
            f.iter().map(|&v| ValueSet::singleton(v as usize)).collect(),
        )
    }
}

/// Closes `seeds` under all connectives, keeping one formula per distinct key.
///
/// Each round applies connectives to tuples containing at least one
/// representative added in the previous round; within a round candidates are
/// taken in canonical order.
fn closure<K: Clone + Eq + std::hash::Hash>(
    sig: &crate::formula::Signature,
    seeds: Vec<(Formula, K)>,
    cap: usize,
    mut key_of: impl FnMut(&str, &[&K]) -> K,
) -> Result<Vec<(Formula, K)>> {
    let mut reps: Vec<(Formula, K)> = Vec::new();
    let mut seen: HashSet<K> = HashSet::new();
    for (f, k) in seeds {
        if seen.insert(k.clone()) {
            reps.push((f, k));
        }
    }
    let mut frontier_start = 0usize;
    let mut first_round = true;
    loop {
        let old_len = reps.len();
        let mut candidates: Vec<(Formula, K)> = Vec::new();
        for (op, arity) in sig.iter() {
            if arity == 0 {
                if first_round {
                    candidates.push((Formula::constant(op), key_of(op, &[])));
                }
                continue;
            }
            for_each_tuple(old_len, arity, |idx| {
                if idx.iter().all(|&i| i < frontier_start) {
                    return;
                }
                let args: Vec<&K> = idx.iter().map(|&i| &reps[i].1).collect();
                let key = key_of(op, &args);
                if seen.contains(&key) {
                    return;
                }
                let f = Formula::app(op, idx.iter().map(|&i| reps[i].0.clone()).collect());
                candidates.push((f, key));
            });
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        for (f, k) in candidates {
            if seen.insert(k.clone()) {
                reps.push((f, k));
                if reps.len() > cap {
                    return Err(Error::ResourceLimit(format!("fixpoint exceeded {cap} representatives")));
                }
            }
        }
        if reps.len() == old_len && !first_round {
            return Ok(reps);
        }
        first_round = false;
        frontier_start = old_len;
    }
}

/// Representatives of every pair of functions expressible over `p1..pn` in two matrices.
#[derive(Clone, Debug)]
pub struct ThetaSet {
    pub n: usize,
    pub representatives: Vec<Formula>,
    pub tables: Vec<(MultiFunctionTable, MultiFunctionTable)>,
}

impl ThetaSet {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }
}

pub fn build_theta(m1: &NMatrix, m2: &NMatrix, n: usize) -> Result<ThetaSet> {
    build_theta_with_cap(m1, m2, n, DEFAULT_THETA_CAP)
}

pub fn build_theta_with_cap(m1: &NMatrix, m2: &NMatrix, n: usize, cap: usize) -> Result<ThetaSet> {
    let (reps, s1, s2) = theta_funcs(m1, m2, n, cap)?;
    Ok(ThetaSet {
        n,
        tables: reps.iter().map(|(_, (a, b))| (s1.to_table(a), s2.to_table(b))).collect(),
        representatives: reps.into_iter().map(|(f, _)| f).collect(),
    })
}

type PairReps = Vec<(Formula, (Func, Func))>;

fn theta_funcs<'a>(
    m1: &'a NMatrix,
    m2: &'a NMatrix,
    n: usize,
    cap: usize,
) -> Result<(PairReps, FnSpace<'a>, FnSpace<'a>)> {
    require_deterministic(m1, "first")?;
    require_deterministic(m2, "second")?;
    if m1.signature() != m2.signature() {
        return Err(Error::SignatureMismatch("the two matrices have different signatures".into()));
    }
    let s1 = FnSpace::new(m1, n);
    let s2 = FnSpace::new(m2, n);
    let seeds = (0..n).map(|i| (Formula::var(i as u32 + 1), (s1.projection(i), s2.projection(i)))).collect();
    let reps = closure(m1.signature(), seeds, cap, |op, args| {
        let a: Vec<&Func> = args.iter().map(|k| &k.0).collect();
        let b: Vec<&Func> = args.iter().map(|k| &k.1).collect();
        (s1.apply(op, &a), s2.apply(op, &b))
    })?;
    Ok((reps, s1, s2))
}

/// Which matrix a separating consequence holds in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    First,
    Second,
}

/// `premises ⊢ conclusion` holds in the matrix on side `holds_in` and fails in the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub holds_in: Side,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Inclusion {
    Included,
    Separated { premises: Vec<Formula>, conclusion: Formula },
}

/// Decides `⊢_{m1} ⊆ ⊢_{m2}`.
///
/// A separation is reported for the canonical-first conclusion that admits
/// one, with its premise set shrunk greedily while the consequence still
/// holds in `m1`.
pub fn decide_matrix_inclusion(m1: &NMatrix, m2: &NMatrix) -> Result<Inclusion> {
    let n = m1.num_values().max(m2.num_values());
    let (reps, s1, _) = theta_funcs(m1, m2, n, DEFAULT_THETA_CAP)?;
    let d1 = m1.designated();
    let d2 = m2.designated();
    // Holds in m1 when every row designating the premises designates the conclusion.
    let holds1 = |premises: &[bool], a: usize| {
        (0..s1.rows).all(|y| {
            d1.contains(reps[a].1 .0[y] as usize)
                || reps.iter().zip(premises).any(|((_, (f1, _)), &t)| t && !d1.contains(f1[y] as usize))
        })
    };
    let maximal: Vec<Vec<bool>> = (0..s2_rows(m2, n))
        .map(|x| reps.iter().map(|(_, (_, f2))| d2.contains(f2[x] as usize)).collect())
        .collect();
    for a in 0..reps.len() {
        for t in &maximal {
            if t[a] || !holds1(t, a) {
                continue;
            }
            let mut t = t.clone();
            for b in 0..t.len() {
                if t[b] {
                    t[b] = false;
                    if !holds1(&t, a) {
                        t[b] = true;
                    }
                }
            }
            let premises = reps.iter().zip(&t).filter(|(_, &k)| k).map(|((f, _), _)| f.clone()).collect();
            return Ok(Inclusion::Separated { premises, conclusion: reps[a].0.clone() });
        }
    }
    Ok(Inclusion::Included)
}

fn s2_rows(m2: &NMatrix, n: usize) -> usize {
    m2.num_values().pow(n as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum MatrixEquivalence {
    Equivalent,
    NotEquivalent(Separation),
}

pub fn decide_matrix_equivalence(m1: &NMatrix, m2: &NMatrix) -> Result<MatrixEquivalence> {
    if let Inclusion::Separated { premises, conclusion } = decide_matrix_inclusion(m1, m2)? {
        return Ok(MatrixEquivalence::NotEquivalent(Separation { premises, conclusion, holds_in: Side::First }));
    }
    if let Inclusion::Separated { premises, conclusion } = decide_matrix_inclusion(m2, m1)? {
        return Ok(MatrixEquivalence::NotEquivalent(Separation { premises, conclusion, holds_in: Side::Second }));
    }
    Ok(MatrixEquivalence::Equivalent)
}

/// One-variable expressible functions with a representative each.
pub fn one_variable_functions(m: &NMatrix) -> Result<Vec<(Formula, MultiFunctionTable)>> {
    require_deterministic(m, "matrix")?;
    let s = FnSpace::new(m, 1);
    let reps = closure(m.signature(), vec![(Formula::var(1), s.projection(0))], DEFAULT_THETA_CAP, |op, args| {
        s.apply(op, args)
    })?;
    Ok(reps.into_iter().map(|(f, k)| (f, s.to_table(&k))).collect())
}

/// The canonical-first representative whose table is always designated, if any.
pub fn matrix_theorem_existence(m: &NMatrix) -> Result<Option<Formula>> {
    let d = m.designated();
    Ok(one_variable_functions(m)?
        .into_iter()
        .filter(|(_, t)| t.outputs().iter().all(|o| o.is_subset(d)))
        .map(|(f, _)| f)
        .min())
}
