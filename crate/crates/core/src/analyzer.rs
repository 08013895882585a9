//! Best-effort equivalence analysis for arbitrary finite Nmatrices.
//!
//! Stages run in a fixed order and stop at the first conclusive one:
//! deterministic decision, a strongly-preserving homomorphism, strict
//! homomorphisms both ways, a no-theorem certificate for a tilded side
//! against an unconstrained side, and bounded counterexample search.

use serde::{Deserialize, Serialize};

use crate::constructions::{
    certify_no_theorems, find_strict_hom, is_unconstrained_like, tilde, HomCandidate, NoTheoremCertificate,
};
use crate::deterministic::{decide_matrix_equivalence, MatrixEquivalence, Side};
use crate::error::{Error, Result};
use crate::formula::{enumerate_formulas, formulas_at_depth, parse_formula, Formula, Signature};
use crate::nmatrix::NMatrix;
use crate::semantics::{can_take, decide_consequence, is_theorem, Consequence, PrevaluationTable};
use crate::values::ValueSet;

/// A single-conclusion rule `premises / conclusion`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rule {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

#[derive(Deserialize)]
struct RawRule {
    #[serde(default)]
    name: Option<String>,
    premises: Vec<String>,
    conclusion: String,
}

#[derive(Deserialize)]
struct RawRuleSet {
    rules: Vec<RawRule>,
}

impl RuleSet {
    pub fn from_json_str(text: &str, sig: &Signature) -> Result<Self> {
        let raw: RawRuleSet = serde_json::from_str(text)?;
        let mut rules = Vec::with_capacity(raw.rules.len());
        for r in raw.rules {
            let premises = r.premises.iter().map(|p| parse_formula(p, sig)).collect::<Result<Vec<_>, _>>()?;
            rules.push(Rule { name: r.name, premises, conclusion: parse_formula(&r.conclusion, sig)? });
        }
        Ok(RuleSet { rules })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleReport {
    pub rule: Rule,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PrevaluationTable>,
}

pub fn check_rule_set(m: &NMatrix, r: &RuleSet) -> Result<Vec<RuleReport>> {
    r.rules
        .iter()
        .map(|rule| {
            let c = decide_consequence(m, &rule.premises, &rule.conclusion)?;
            Ok(RuleReport { rule: rule.clone(), holds: c.holds(), witness: c.witness().cloned() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum AxiomInclusion {
    /// Valid only if the rule set really axiomatizes the first logic; that is not checked.
    Included { assumption: String },
    NotIncluded { rule: Rule, witness: PrevaluationTable },
}

/// Inclusion of the logic axiomatized by `r` in the logic of `m2`.
pub fn inclusion_from_axiomatization(r: &RuleSet, m2: &NMatrix) -> Result<AxiomInclusion> {
    for report in check_rule_set(m2, r)? {
        if let Some(witness) = report.witness {
            return Ok(AxiomInclusion::NotIncluded { rule: report.rule, witness });
        }
    }
    Ok(AxiomInclusion::Included {
        assumption: "the rule set axiomatizes the first logic (caller-asserted)".to_string(),
    })
}

/// Bounds for enumerative search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub depth: u32,
    pub vars: u32,
    pub premises: usize,
    /// Ceiling on consequence instances examined.
    pub max_instances: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { depth: 3, vars: 2, premises: 2, max_instances: 2_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub holds_in: Side,
    /// Countermodel in the matrix where the consequence fails.
    pub witness: PrevaluationTable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub found: Option<Counterexample>,
    pub instances: u64,
    pub truncated: bool,
}

/// First `(Γ, A)` in canonical order on which the two consequence relations differ.
pub fn search_counterexample(m1: &NMatrix, m2: &NMatrix, budget: &Budget) -> Result<Option<Counterexample>> {
    Ok(search_counterexample_report(m1, m2, budget)?.found)
}

pub fn search_counterexample_report(m1: &NMatrix, m2: &NMatrix, budget: &Budget) -> Result<SearchReport> {
    if m1.signature() != m2.signature() {
        return Err(Error::SignatureMismatch("the two matrices have different signatures".into()));
    }
    let formulas = enumerate_formulas(m1.signature(), budget.vars, budget.depth);
    let mut instances = 0u64;
    for size in 0..=budget.premises.min(formulas.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let gamma: Vec<Formula> = idx.iter().map(|&i| formulas[i].clone()).collect();
            for (a_idx, a) in formulas.iter().enumerate() {
                if idx.contains(&a_idx) {
                    continue;
                }
                if instances >= budget.max_instances {
                    return Ok(SearchReport { found: None, instances, truncated: true });
                }
                instances += 1;
                let r1 = decide_consequence(m1, &gamma, a)?;
                let r2 = decide_consequence(m2, &gamma, a)?;
                let (holds_in, witness) = match (r1, r2) {
                    (Consequence::Holds, Consequence::Fails(w)) => (Side::First, w),
                    (Consequence::Fails(w), Consequence::Holds) => (Side::Second, w),
                    _ => continue,
                };
                let found = Counterexample { premises: gamma, conclusion: a.clone(), holds_in, witness };
                return Ok(SearchReport { found: Some(found), instances, truncated: false });
            }
            if !next_combination(&mut idx, formulas.len()) {
                break;
            }
        }
    }
    Ok(SearchReport { found: None, instances, truncated: false })
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Default ceiling on formulas examined by [`search_theorem_bounded`].
pub const DEFAULT_THEOREM_SEARCH_CAP: usize = 5_000_000;

pub fn search_theorem_bounded(m: &NMatrix, depth: u32, vars: u32) -> Result<Option<Formula>> {
    search_theorem_bounded_with_cap(m, depth, vars, DEFAULT_THEOREM_SEARCH_CAP)
}

/// A non-empty set of undesignated values that every formula can reach
/// shows the matrix has no theorems at all.
fn escape_set(m: &NMatrix) -> Option<ValueSet> {
    let und = m.undesignated();
    let closed = |w: &ValueSet| {
        let ws: Vec<usize> = w.iter().collect();
        m.tables().all(|(_, t)| {
            let mut ok = true;
            crate::formula::for_each_tuple(ws.len(), t.arity(), |idx| {
                let args: Vec<usize> = idx.iter().map(|&i| ws[i]).collect();
                ok &= t.get(&args, m.num_values()).intersects(w);
            });
            ok
        })
    };
    let mut candidates = vec![und.clone()];
    candidates.extend(und.iter().map(ValueSet::singleton));
    candidates.into_iter().find(|w| !w.is_empty() && closed(w))
}

/// Undesignated values `e` such that any argument tuple containing `e` yields exactly `{e}`.
fn absorbing_undesignated(m: &NMatrix) -> Vec<usize> {
    m.undesignated()
        .iter()
        .filter(|&e| {
            let only_e = ValueSet::singleton(e);
            m.tables().all(|(_, t)| {
                let mut ok = true;
                crate::formula::for_each_tuple(m.num_values(), t.arity(), |args| {
                    if args.contains(&e) {
                        ok &= *t.get(args, m.num_values()) == only_e;
                    }
                });
                ok
            })
        })
        .collect()
}

/// Canonical-order search for a theorem of depth at most `depth` over `p1..p<vars>`.
///
/// Formulas that can take an absorbing undesignated value are dropped
/// together with everything built on them, since no superformula of theirs
/// can be a theorem.
pub fn search_theorem_bounded_with_cap(m: &NMatrix, depth: u32, vars: u32, cap: usize) -> Result<Option<Formula>> {
    if m.designated().is_empty() || escape_set(m).is_some() {
        return Ok(None);
    }
    let absorbing: ValueSet = absorbing_undesignated(m).into_iter().collect();
    let survives = |f: &Formula| -> Result<bool> { Ok(absorbing.is_empty() || !can_take(m, f, &absorbing)?) };
    let mut below: Vec<Formula> = Vec::new();
    let mut seen = 0usize;
    for v in (1..=vars).map(Formula::var) {
        if is_theorem(m, &v)?.holds() {
            return Ok(Some(v));
        }
        if survives(&v)? {
            below.push(v);
        }
    }
    for d in 1..=depth {
        let level = formulas_at_depth(m.signature(), &below, d);
        seen += level.len();
        if seen > cap {
            return Err(Error::ResourceLimit(format!("theorem search exceeded {cap} formulas")));
        }
        let mut kept = Vec::new();
        for f in level {
            if !survives(&f)? {
                continue;
            }
            if is_theorem(m, &f)?.holds() {
                return Ok(Some(f));
            }
            kept.push(f);
        }
        below.extend(kept);
    }
    Ok(None)
}

/// Options for [`analyze`].
#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub budget: Budget,
    /// A matrix whose tilde is claimed to be one of the two inputs.
    pub tilde_of: Option<NMatrix>,
    /// Deterministic matrices tried as no-theorem certificates; `tilde_of` is always tried too.
    pub corpus: Vec<NMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Equivalent,
    NotEquivalent,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    DeterministicDecision { result: MatrixEquivalence },
    StronglyPreservingHom { from: Side, hom: HomCandidate },
    HomPair { first_to_second: HomCandidate, second_to_first: HomCandidate },
    NoTheoremCertificate { tilded: Side, certificate: NoTheoremCertificate },
    Counterexample { counterexample: Counterexample },
    BudgetReport { stages: Vec<String>, budget: Budget, instances: u64, truncated: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// 1-based index of the deciding stage; 6 for an inconclusive run.
    pub stage: u8,
    pub evidence: Evidence,
}

pub fn analyze(m1: &NMatrix, m2: &NMatrix, opts: &AnalyzeOptions) -> Result<Verdict> {
    if m1.signature() != m2.signature() {
        return Err(Error::SignatureMismatch("the two matrices have different signatures".into()));
    }
    let mut stages = Vec::new();

    stages.push("deterministic-decision".to_string());
    if m1.is_deterministic() && m2.is_deterministic() {
        let result = decide_matrix_equivalence(m1, m2)?;
        let outcome = match result {
            MatrixEquivalence::Equivalent => Outcome::Equivalent,
            MatrixEquivalence::NotEquivalent(_) => Outcome::NotEquivalent,
        };
        return Ok(Verdict { outcome, stage: 1, evidence: Evidence::DeterministicDecision { result } });
    }

    stages.push("strongly-preserving-hom".to_string());
    for (from, a, b) in [(Side::First, m1, m2), (Side::Second, m2, m1)] {
        if let Some(hom) = find_strict_hom(a, b, true)? {
            return Ok(Verdict {
                outcome: Outcome::Equivalent,
                stage: 2,
                evidence: Evidence::StronglyPreservingHom { from, hom },
            });
        }
    }

    stages.push("strict-hom-pair".to_string());
    if let Some(h12) = find_strict_hom(m1, m2, false)? {
        if let Some(h21) = find_strict_hom(m2, m1, false)? {
            return Ok(Verdict {
                outcome: Outcome::Equivalent,
                stage: 3,
                evidence: Evidence::HomPair { first_to_second: h12, second_to_first: h21 },
            });
        }
    }

    stages.push("no-theorem-certificate".to_string());
    if let Some(base) = &opts.tilde_of {
        if let Some(v) = stage_four(m1, m2, base, &opts.corpus)? {
            return Ok(v);
        }
    }

    stages.push("counterexample-search".to_string());
    let report = search_counterexample_report(m1, m2, &opts.budget)?;
    if let Some(counterexample) = report.found {
        return Ok(Verdict {
            outcome: Outcome::NotEquivalent,
            stage: 5,
            evidence: Evidence::Counterexample { counterexample },
        });
    }

    Ok(Verdict {
        outcome: Outcome::Unknown,
        stage: 6,
        evidence: Evidence::BudgetReport {
            stages,
            budget: opts.budget,
            instances: report.instances,
            truncated: report.truncated,
        },
    })
}

/// If one side is `tilde(base)` and the other defines the discrete logic,
/// a proof that `base` has no theorems makes the two equivalent.
fn stage_four(m1: &NMatrix, m2: &NMatrix, base: &NMatrix, corpus: &[NMatrix]) -> Result<Option<Verdict>> {
    let Ok(tilded) = tilde(base) else {
        return Ok(None);
    };
    for (side, t, u) in [(Side::First, m1, m2), (Side::Second, m2, m1)] {
        if *t != tilded || !is_unconstrained_like(u) {
            continue;
        }
        let mut candidates: Vec<NMatrix> = corpus.to_vec();
        if !candidates.contains(base) {
            candidates.push(base.clone());
        }
        if let Some(certificate) = certify_no_theorems(base, &candidates)? {
            return Ok(Some(Verdict {
                outcome: Outcome::Equivalent,
                stage: 4,
                evidence: Evidence::NoTheoremCertificate { tilded: side, certificate },
            }));
        }
    }
    Ok(None)
}

/// Re-checks the evidence of a conclusive verdict from scratch.
pub fn verify_verdict(m1: &NMatrix, m2: &NMatrix, opts: &AnalyzeOptions, v: &Verdict) -> Result<bool> {
    use crate::constructions::classify_map;
    Ok(match (&v.outcome, &v.evidence) {
        (Outcome::Equivalent, Evidence::DeterministicDecision { result })
        | (Outcome::NotEquivalent, Evidence::DeterministicDecision { result }) => {
            decide_matrix_equivalence(m1, m2)? == *result
        }
        (Outcome::Equivalent, Evidence::StronglyPreservingHom { from, hom }) => {
            let (a, b) = if *from == Side::First { (m1, m2) } else { (m2, m1) };
            classify_map(a, b, &hom.map)?.strongly_preserving
        }
        (Outcome::Equivalent, Evidence::HomPair { first_to_second, second_to_first }) => {
            classify_map(m1, m2, &first_to_second.map)?.strict && classify_map(m2, m1, &second_to_first.map)?.strict
        }
        (Outcome::Equivalent, Evidence::NoTheoremCertificate { tilded, certificate }) => {
            let Some(base) = &opts.tilde_of else { return Ok(false) };
            let (t, u) = if *tilded == Side::First { (m1, m2) } else { (m2, m1) };
            tilde(base)? == *t && is_unconstrained_like(u) && certificate.verify(base)?
        }
        (Outcome::NotEquivalent, Evidence::Counterexample { counterexample: c }) => {
            let (holds, fails) = if c.holds_in == Side::First { (m1, m2) } else { (m2, m1) };
            let designated = |f: &Formula| {
                c.witness.get(f).and_then(|v| fails.value_index(v)).is_some_and(|v| fails.is_designated(v))
            };
            decide_consequence(holds, &c.premises, &c.conclusion)?.holds()
                && crate::semantics::check_prevaluation(fails, &c.witness)?.is_empty()
                && c.premises.iter().all(designated)
                && !designated(&c.conclusion)
        }
        (Outcome::Unknown, Evidence::BudgetReport { .. }) => true,
        _ => false,
    })
}
