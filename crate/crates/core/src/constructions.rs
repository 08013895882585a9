//! The unconstrained Nmatrix, tilded Nmatrices, and strict homomorphisms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::deterministic::matrix_theorem_existence;
use crate::error::{Error, Result};
use crate::formula::{for_each_tuple, Signature};
use crate::nmatrix::NMatrix;
use crate::values::ValueSet;

/// Suffix marking the designated copy of an undesignated value.
pub const TILDE_SUFFIX: &str = "~";

/// `U_Σ`: values `0`, `1`, designated `1`, every output `{0, 1}`.
pub fn unconstrained(sig: &Signature) -> NMatrix {
    NMatrix::from_fn(sig.clone(), vec!["0".into(), "1".into()], ValueSet::singleton(1), |_, _| ValueSet::full(2))
        .expect("two-valued full tables are valid")
}

/// Two or more values, some but not all designated, every output the whole value set.
///
/// Every such matrix defines the discrete logic.
pub fn is_unconstrained_like(m: &NMatrix) -> bool {
    let n = m.num_values();
    let d = m.designated().len();
    n >= 2 && d > 0 && d < n && m.tables().all(|(_, t)| t.outputs().iter().all(|o| o.len() == n))
}

/// Adds a designated copy `x~` of every undesignated `x`; copies behave exactly like their originals.
pub fn tilde(m: &NMatrix) -> Result<NMatrix> {
    if let Some(v) = m.values().iter().find(|v| v.ends_with(TILDE_SUFFIX)) {
        return Err(Error::ReservedSuffix(v.clone()));
    }
    let n = m.num_values();
    let copies: Vec<usize> = m.undesignated().iter().collect();
    let mut values = m.values().to_vec();
    values.extend(copies.iter().map(|&x| format!("{}{TILDE_SUFFIX}", m.value_name(x))));
    let forget = tilde_projection(m);
    let mut designated = m.designated().clone();
    for i in n..values.len() {
        designated.insert(i);
    }
    NMatrix::from_fn(m.signature().clone(), values, designated, |op, args| {
        let base: Vec<usize> = args.iter().map(|&a| forget[a]).collect();
        preimage(&forget, m.apply(op, &base))
    })
}

/// The forgetful map `u` from the values of `tilde(m)` onto those of `m`, by index.
pub fn tilde_projection(m: &NMatrix) -> Vec<usize> {
    (0..m.num_values()).chain(m.undesignated().iter()).collect()
}

fn preimage(map: &[usize], set: &ValueSet) -> ValueSet {
    map.iter().enumerate().filter(|(_, &y)| set.contains(y)).map(|(x, _)| x).collect()
}

/// A value map between two matrices over one signature, with its properties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomCandidate {
    #[serde(skip)]
    pub map: Vec<usize>,
    #[serde(rename = "map")]
    pub names: BTreeMap<String, String>,
    pub strict: bool,
    pub surjective: bool,
    pub strongly_preserving: bool,
}

fn same_signature(m1: &NMatrix, m2: &NMatrix) -> Result<()> {
    if m1.signature() != m2.signature() {
        return Err(Error::SignatureMismatch("the two matrices have different signatures".into()));
    }
    Ok(())
}

/// Classifies an arbitrary value map `h: V1 -> V2`.
pub fn classify_map(m1: &NMatrix, m2: &NMatrix, h: &[usize]) -> Result<HomCandidate> {
    same_signature(m1, m2)?;
    if h.len() != m1.num_values() || h.iter().any(|&y| y >= m2.num_values()) {
        return Err(Error::Artifact("value map does not fit the two matrices".into()));
    }
    let designation = (0..m1.num_values()).all(|x| m1.is_designated(x) == m2.is_designated(h[x]));
    let mut included = designation;
    let mut equal = designation;
    for (op, t1) in m1.tables() {
        for_each_tuple(m1.num_values(), t1.arity(), |args| {
            let image: ValueSet = t1.get(args, m1.num_values()).iter().map(|v| h[v]).collect();
            let hargs: Vec<usize> = args.iter().map(|&a| h[a]).collect();
            let target = m2.apply(op, &hargs);
            included &= image.is_subset(target);
            equal &= image == *target;
        });
    }
    let surjective = ValueSet::full(m2.num_values()) == h.iter().copied().collect::<ValueSet>();
    Ok(HomCandidate {
        map: h.to_vec(),
        names: h
            .iter()
            .enumerate()
            .map(|(x, &y)| (m1.value_name(x).to_string(), m2.value_name(y).to_string()))
            .collect(),
        strict: included,
        surjective,
        strongly_preserving: included && surjective && equal,
    })
}

/// Backtracking over maps in lexicographic order, pruning on designation and
/// on every interpretation entry whose values are all mapped already.
fn for_each_strict_map(m1: &NMatrix, m2: &NMatrix, mut visit: impl FnMut(&[usize]) -> bool) {
    let n1 = m1.num_values();
    let n2 = m2.num_values();
    if n1 == 0 {
        visit(&[]);
        return;
    }
    // Entries bucketed by the largest source value they mention.
    let mut buckets: Vec<Vec<(&str, Vec<usize>)>> = vec![Vec::new(); n1];
    for (op, t) in m1.tables() {
        for_each_tuple(n1, t.arity(), |args| {
            let top = args.iter().copied().chain(t.get(args, n1).iter()).max().unwrap_or(0);
            buckets[top].push((op, args.to_vec()));
        });
    }
    let ok_at = |i: usize, h: &[usize]| {
        buckets[i].iter().all(|(op, args)| {
            let hargs: Vec<usize> = args.iter().map(|&a| h[a]).collect();
            let target = m2.apply(op, &hargs);
            m1.apply(op, args).iter().all(|v| target.contains(h[v]))
        })
    };
    let mut h = vec![0usize; n1];
    let mut next = vec![0usize; n1];
    let mut i = 0usize;
    loop {
        if next[i] == n2 {
            if i == 0 {
                return;
            }
            i -= 1;
            continue;
        }
        h[i] = next[i];
        next[i] += 1;
        if m1.is_designated(i) != m2.is_designated(h[i]) || !ok_at(i, &h) {
            continue;
        }
        if i + 1 == n1 {
            if !visit(&h) {
                return;
            }
        } else {
            i += 1;
            next[i] = 0;
        }
    }
}

/// All strict homomorphisms `m1 -> m2`, in lexicographic order of the map.
pub fn enumerate_strict_homs(m1: &NMatrix, m2: &NMatrix) -> Result<Vec<HomCandidate>> {
    same_signature(m1, m2)?;
    let mut out = Vec::new();
    for_each_strict_map(m1, m2, |h| {
        out.push(h.to_vec());
        true
    });
    out.into_iter().map(|h| classify_map(m1, m2, &h)).collect()
}

/// The first strict homomorphism, optionally required to be strongly-preserving.
pub fn find_strict_hom(m1: &NMatrix, m2: &NMatrix, strong: bool) -> Result<Option<HomCandidate>> {
    same_signature(m1, m2)?;
    let mut found = None;
    let mut err = None;
    for_each_strict_map(m1, m2, |h| match classify_map(m1, m2, h) {
        Ok(c) if !strong || c.strongly_preserving => {
            found = Some(c);
            false
        }
        Ok(_) => true,
        Err(e) => {
            err = Some(e);
            false
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Evidence that a matrix has no theorems: a theorem-free deterministic
/// matrix with a strict homomorphism into it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoTheoremCertificate {
    pub matrix: NMatrix,
    pub hom: HomCandidate,
}

impl NoTheoremCertificate {
    /// Re-derives both halves of the certificate for `m`.
    pub fn verify(&self, m: &NMatrix) -> Result<bool> {
        if !self.matrix.is_deterministic() || matrix_theorem_existence(&self.matrix)?.is_some() {
            return Ok(false);
        }
        Ok(classify_map(&self.matrix, m, &self.hom.map)?.strict)
    }
}

/// Looks for a certificate among `corpus`; `None` means no conclusion.
pub fn certify_no_theorems(m: &NMatrix, corpus: &[NMatrix]) -> Result<Option<NoTheoremCertificate>> {
    for n in corpus {
        if n.signature() != m.signature() || !n.is_deterministic() {
            continue;
        }
        if matrix_theorem_existence(n)?.is_some() {
            continue;
        }
        if let Some(hom) = find_strict_hom(n, m, false)? {
            return Ok(Some(NoTheoremCertificate { matrix: n.clone(), hom }));
        }
    }
    Ok(None)
}
