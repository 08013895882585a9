//! Minsky counter machines, their simulation, and their compilation into Nmatrices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constructions::{tilde, unconstrained};
use crate::error::{Error, Result};
use crate::formula::{for_each_tuple, is_connective_name, Formula, Signature};
use crate::nmatrix::NMatrix;
use crate::semantics::PrevaluationTable;
use crate::values::ValueSet;

pub const ZERO: &str = "zero";
pub const EPS: &str = "eps";
pub const SUCC: &str = "succ";

pub const R_EQ0: usize = 0;
pub const R_GE0: usize = 1;
pub const R_GE1: usize = 2;
pub const R_GE2: usize = 3;
pub const NUM_NAMES: [&str; 4] = ["r_eq0", "r_ge0", "r_ge1", "r_ge2"];

pub fn step_connective(state: &str) -> String {
    format!("step_{state}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Instruction {
    Inc { counter: usize, next: String },
    Test { counter: usize, nonzero: String, zero: String },
}

#[derive(Serialize, Deserialize)]
struct RawMachine {
    counters: usize,
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    transitions: BTreeMap<String, Instruction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMachine", into = "RawMachine")]
pub struct CounterMachine {
    counters: usize,
    states: Vec<String>,
    initial: String,
    transitions: BTreeMap<String, Instruction>,
}

impl TryFrom<RawMachine> for CounterMachine {
    type Error = Error;

    fn try_from(r: RawMachine) -> Result<Self> {
        CounterMachine::new(r.counters, r.states, r.initial, r.transitions)
    }
}

impl From<CounterMachine> for RawMachine {
    fn from(c: CounterMachine) -> Self {
        RawMachine { counters: c.counters, states: c.states, initial: c.initial, transitions: c.transitions }
    }
}

impl CounterMachine {
    pub fn new(
        counters: usize,
        states: Vec<String>,
        initial: String,
        transitions: BTreeMap<String, Instruction>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for q in &states {
            if !is_connective_name(q) {
                return Err(Error::Machine(format!("state `{q}` is not a valid identifier")));
            }
            if !seen.insert(q.as_str()) {
                return Err(Error::Machine(format!("state `{q}` is listed twice")));
            }
        }
        let known = |q: &str| -> Result<()> {
            if seen.contains(q) {
                Ok(())
            } else {
                Err(Error::Machine(format!("unknown state `{q}`")))
            }
        };
        known(&initial)?;
        for (q, ins) in &transitions {
            known(q)?;
            let (i, targets) = match ins {
                Instruction::Inc { counter, next } => (*counter, vec![next]),
                Instruction::Test { counter, nonzero, zero } => (*counter, vec![nonzero, zero]),
            };
            if i == 0 || i > counters {
                return Err(Error::Machine(format!("state `{q}` uses counter {i} outside 1..={counters}")));
            }
            for t in targets {
                known(t)?;
            }
        }
        Ok(CounterMachine { counters, states, initial, transitions })
    }

    pub fn counters(&self) -> usize {
        self.counters
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn instruction(&self, state: &str) -> Option<&Instruction> {
        self.transitions.get(state)
    }

    pub fn is_halting(&self, state: &str) -> bool {
        !self.transitions.contains_key(state)
    }

    pub fn halting_states(&self) -> Vec<&str> {
        self.states.iter().map(String::as_str).filter(|q| self.is_halting(q)).collect()
    }

    /// Notes about the machine that do not make it invalid.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.counters == 0 {
            w.push("machine has no counters; its step connectives are unary".to_string());
        }
        if self.halting_states().is_empty() {
            w.push("machine has no halting state; its compiled matrix designates nothing".to_string());
        }
        w
    }

    /// The successor configuration; fails on a halting configuration.
    pub fn step(&self, c: &Configuration) -> Result<Configuration> {
        let ins = self
            .instruction(&c.state)
            .ok_or_else(|| Error::Machine(format!("configuration in halting state `{}`", c.state)))?;
        let mut counters = c.counters.clone();
        let state = match ins {
            Instruction::Inc { counter, next } => {
                counters[counter - 1] += 1;
                next
            }
            Instruction::Test { counter, nonzero, zero } => {
                if counters[counter - 1] != 0 {
                    counters[counter - 1] -= 1;
                    nonzero
                } else {
                    zero
                }
            }
        };
        Ok(Configuration { state: state.clone(), counters })
    }

    /// Runs from the initial state for at most `max_steps` steps.
    pub fn run(&self, initial_counters: &[u64], max_steps: usize) -> Result<Trace> {
        if initial_counters.len() != self.counters {
            return Err(Error::Machine(format!(
                "expected {} initial counter values, got {}",
                self.counters,
                initial_counters.len()
            )));
        }
        let mut configurations = vec![Configuration { state: self.initial.clone(), counters: initial_counters.to_vec() }];
        for _ in 0..max_steps {
            let last = configurations.last().expect("non-empty");
            if self.is_halting(&last.state) {
                break;
            }
            configurations.push(self.step(last)?);
        }
        let halted = self.is_halting(&configurations.last().expect("non-empty").state);
        Ok(Trace { configurations, halted })
    }

    pub fn signature(&self) -> Signature {
        let mut cs = vec![(ZERO.to_string(), 0), (EPS.to_string(), 0), (SUCC.to_string(), 1)];
        cs.extend(self.states.iter().map(|q| (step_connective(q), self.counters + 1)));
        Signature::new(cs).expect("machine signature is well formed")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub state: String,
    pub counters: Vec<u64>,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.counters.iter().map(u64::to_string).collect();
        write!(f, "<{}, ({})>", self.state, cs.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub configurations: Vec<Configuration>,
    pub halted: bool,
}

pub fn encode_number(a: u64) -> Formula {
    (0..a).fold(Formula::constant(ZERO), |f, _| Formula::app(SUCC, vec![f]))
}

/// `seq` of a list of configurations; the empty list encodes as `eps`.
pub fn encode_configurations(cs: &[Configuration]) -> Formula {
    cs.iter().fold(Formula::constant(EPS), |prev, c| {
        let mut args = vec![prev];
        args.extend(c.counters.iter().map(|&a| encode_number(a)));
        Formula::app(step_connective(&c.state), args)
    })
}

pub fn encode_trace(t: &Trace) -> Formula {
    encode_configurations(&t.configurations)
}

/// Value layout of a compiled machine.
#[derive(Clone, Debug)]
pub struct CompiledLayout {
    pub counters: usize,
    pub states: Vec<String>,
}

impl CompiledLayout {
    pub fn conf_count(&self) -> usize {
        self.states.len() * 4usize.pow(self.counters as u32)
    }

    pub fn conf(&self, state: usize, nums: &[usize]) -> usize {
        4 + state * 4usize.pow(self.counters as u32) + nums.iter().fold(0, |acc, &r| acc * 4 + r)
    }

    pub fn init(&self) -> usize {
        4 + self.conf_count()
    }

    pub fn error(&self) -> usize {
        self.init() + 1
    }

    pub fn num_values(&self) -> usize {
        self.error() + 1
    }

    /// `(state index, Num indices)` of a configuration value.
    pub fn decode_conf(&self, v: usize) -> Option<(usize, Vec<usize>)> {
        if v < 4 || v >= self.init() {
            return None;
        }
        let per = 4usize.pow(self.counters as u32);
        let (q, mut rest) = ((v - 4) / per, (v - 4) % per);
        let mut nums = vec![0; self.counters];
        for slot in nums.iter_mut().rev() {
            *slot = rest % 4;
            rest /= 4;
        }
        Some((q, nums))
    }
}

fn succ_of(x: usize, error: usize) -> ValueSet {
    match x {
        R_EQ0 => ValueSet::singleton(R_GE1),
        R_GE0 => [R_GE0, R_GE1].into_iter().collect(),
        R_GE1 | R_GE2 => ValueSet::singleton(R_GE2),
        _ => ValueSet::singleton(error),
    }
}

fn is_num(x: usize) -> bool {
    x < 4
}

/// The Nmatrix induced by a counter machine.
pub fn compile_machine(c: &CounterMachine) -> NMatrix {
    let layout = CompiledLayout { counters: c.counters, states: c.states.clone() };
    let n = c.counters;
    let mut values: Vec<String> = NUM_NAMES.iter().map(|s| s.to_string()).collect();
    let mut designated = ValueSet::new();
    for (qi, q) in c.states.iter().enumerate() {
        for_each_tuple(4, n, |nums| {
            let mut name = format!("conf_{q}");
            for &r in nums {
                name.push('_');
                name.push_str(NUM_NAMES[r]);
            }
            if c.is_halting(q) {
                designated.insert(layout.conf(qi, nums));
            }
            values.push(name);
        });
    }
    values.push("init".into());
    values.push("error".into());
    let error = layout.error();
    let init = layout.init();
    let state_index: BTreeMap<String, usize> =
        c.states.iter().enumerate().map(|(i, q)| (step_connective(q), i)).collect();
    let initial = c.states.iter().position(|q| *q == c.initial).expect("validated");
    NMatrix::from_fn(c.signature(), values, designated, |op, args| match op {
        ZERO => [R_EQ0, R_GE0].into_iter().collect(),
        EPS => ValueSet::singleton(init),
        SUCC => succ_of(args[0], error),
        _ => {
            let q = state_index[op];
            let (x, z) = (args[0], &args[1..]);
            if !z.iter().all(|&r| is_num(r)) {
                return ValueSet::singleton(error);
            }
            let result = ValueSet::singleton(layout.conf(q, z));
            if x == init {
                let uniform = z.iter().all(|&r| r == R_EQ0) || z.iter().all(|&r| r == R_GE0);
                return if q == initial && uniform { result } else { ValueSet::singleton(error) };
            }
            let Some((qp, y)) = layout.decode_conf(x) else {
                return ValueSet::singleton(error);
            };
            let others_equal = |i: usize| (0..n).all(|l| l == i || z[l] == y[l]);
            let target = &c.states[q];
            let ok = match c.instruction(&c.states[qp]) {
                None => false,
                Some(Instruction::Inc { counter, next }) => {
                    let i = counter - 1;
                    next == target && succ_of(y[i], error).contains(z[i]) && others_equal(i)
                }
                Some(Instruction::Test { counter, nonzero, zero }) => {
                    let i = counter - 1;
                    let dec = nonzero == target && succ_of(z[i], error).contains(y[i]) && others_equal(i);
                    let stay = zero == target && (y[i] == R_EQ0 || y[i] == R_GE0) && z == y.as_slice();
                    dec || stay
                }
            };
            if ok {
                result
            } else {
                ValueSet::singleton(error)
            }
        }
    })
    .expect("compiled tables are valid")
}

/// The three families of numeral valuations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumericKind {
    Eq,
    Omega,
    K(u64),
}

impl NumericKind {
    /// The Num value given to `enc(a)`.
    pub fn value(self, a: u64) -> usize {
        match self {
            NumericKind::Eq => match a {
                0 => R_EQ0,
                1 => R_GE1,
                _ => R_GE2,
            },
            NumericKind::Omega => R_GE0,
            NumericKind::K(k) => {
                if a <= k {
                    R_GE0
                } else if a == k + 1 {
                    R_GE1
                } else {
                    R_GE2
                }
            }
        }
    }
}

/// The assignment of `kind` on `enc(0..=m)`.
pub fn canonical_numeric_assignment(kind: NumericKind, m: u64) -> PrevaluationTable {
    let mut t = PrevaluationTable::new();
    for a in 0..=m {
        t.insert(encode_number(a), NUM_NAMES[kind.value(a)]);
    }
    t
}

/// `(tilde(compile(c)), U)` over the machine's signature.
pub fn build_reduction_pair(c: &CounterMachine) -> Result<(NMatrix, NMatrix)> {
    let compiled = compile_machine(c);
    Ok((tilde(&compiled)?, unconstrained(compiled.signature())))
}
