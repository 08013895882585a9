//! Finite non-deterministic logical matrices.

pub mod analyzer;
pub mod constructions;
pub mod corpus;
pub mod deterministic;
pub mod error;
pub mod formula;
pub mod io;
pub mod machine;
pub mod nmatrix;
mod search;
pub mod semantics;
pub mod values;

pub use error::{Error, Result};
pub use formula::{parse_formula, Formula, Signature, Substitution};
pub use nmatrix::{validate_nmatrix, NMatrix, RawNMatrix, Violation};
pub use semantics::{check_prevaluation, decide_consequence, express, is_theorem, Consequence, MultiFunctionTable, PrevaluationTable};
pub use values::ValueSet;
