use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use nmt_core::analyzer::{
    analyze, check_rule_set, search_theorem_bounded, AnalyzeOptions, Budget, Evidence, Outcome,
};
use nmt_core::constructions::{enumerate_strict_homs, tilde, unconstrained, HomCandidate};
use nmt_core::corpus::{corpus_entry, deterministic_matrices, load_corpus};
use nmt_core::deterministic::{decide_matrix_equivalence, matrix_theorem_existence, MatrixEquivalence, Side};
use nmt_core::io::{load_machine, load_nmatrix, load_rules, load_signature, store_artifact, Artifact};
use nmt_core::machine::{build_reduction_pair, compile_machine, encode_trace};
use nmt_core::{decide_consequence, express, parse_formula, Consequence, Error, PrevaluationTable};

/// Finite non-deterministic matrices: consequence, equivalence, constructions and counter machines.
///
/// Artifacts are JSON files or bundled corpus entries written `corpus:NAME`.
#[derive(Parser)]
#[command(name = "nmt", version)]
struct Cli {
    /// Print structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build tilde(M): a designated copy of every undesignated value.
    Tilde {
        matrix: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the unconstrained matrix over the signature of a matrix, machine or signature file.
    Unconstrained {
        signature: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List strict homomorphisms between two matrices (exit 1 when there are none).
    Hom {
        from: String,
        to: String,
        #[arg(long)]
        strong_only: bool,
    },
    /// Decide equivalence of two deterministic matrices (exit 0 equivalent, 1 not).
    EqvMatrix { first: String, second: String },
    /// Decide whether a deterministic matrix has a theorem (exit 0 yes, 1 no).
    ThmExists { matrix: String },
    /// Run a counter machine from the given initial counters (all zero by default).
    RunCm {
        machine: String,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, value_delimiter = ',')]
        counters: Vec<u64>,
    },
    /// Compile a counter machine into a matrix.
    CompileCm {
        machine: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the reduction pair (tilded compiled matrix, unconstrained matrix) into a directory.
    Reduce {
        machine: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Best-effort equivalence analysis (exit 0 equivalent, 1 not equivalent, 2 unknown).
    Analyze {
        first: String,
        second: String,
        #[arg(long, default_value_t = Budget::default().depth)]
        depth: u32,
        #[arg(long, default_value_t = Budget::default().vars)]
        vars: u32,
        #[arg(long, default_value_t = Budget::default().premises)]
        premises: usize,
        #[arg(long, default_value_t = Budget::default().max_instances)]
        max_instances: u64,
        /// The matrix one of the inputs is claimed to be the tilde of.
        #[arg(long)]
        tilde_of: Option<String>,
    },
    /// Check every rule of a rule set against a matrix (exit 1 if any fails).
    RulesCheck { matrix: String, rules: String },
    /// Inspect the bundled corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Decide `premises |- conclusion` (exit 0 holds, 1 fails).
    Check {
        matrix: String,
        /// Premises separated by `;`.
        #[arg(long, default_value = "")]
        premises: String,
        #[arg(long)]
        conclusion: String,
    },
    /// Tabulate the multi-function a formula expresses over p1..pN.
    Express {
        matrix: String,
        formula: String,
        #[arg(long)]
        arity: usize,
    },
    /// Search for a theorem in canonical order (exit 0 found, 1 none within the bound).
    Thmsearch {
        matrix: String,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        vars: u32,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    /// Print one entry, or write every entry into a directory with `--all -o DIR`.
    Export {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

type CmdResult = Result<u8, Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// Writes to stdout; a closed pipe (as in `nmt ... | head`) is not an error.
fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit(json: bool, value: Value, text: impl FnOnce() -> String) {
    if json {
        out(&format!("{}\n", serde_json::to_string_pretty(&value).expect("json values print")));
    } else {
        out(&text());
    }
}

fn write_or_print(a: &Artifact, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => store_artifact(a, p),
        None => {
            out(&a.to_canonical_json());
            Ok(())
        }
    }
}

fn witness_text(w: &PrevaluationTable) -> String {
    w.iter().map(|(f, v)| format!("  {f} -> {v}\n")).collect()
}

fn hom_text(h: &HomCandidate) -> String {
    let pairs: Vec<String> = h.names.iter().map(|(a, b)| format!("{a}->{b}")).collect();
    let mut tags = vec!["strict"];
    if h.surjective {
        tags.push("surjective");
    }
    if h.strongly_preserving {
        tags.push("strongly-preserving");
    }
    format!("{} [{}]\n", pairs.join(" "), tags.join(", "))
}

fn run(cli: Cli) -> CmdResult {
    let json = cli.json;
    match cli.command {
        Command::Tilde { matrix, output } => {
            let m = tilde(&load_nmatrix(&matrix)?)?;
            write_or_print(&Artifact::NMatrix(m), output.as_deref())?;
            Ok(0)
        }
        Command::Unconstrained { signature, output } => {
            let m = unconstrained(&load_signature(&signature)?);
            write_or_print(&Artifact::NMatrix(m), output.as_deref())?;
            Ok(0)
        }
        Command::Hom { from, to, strong_only } => {
            let (m1, m2) = (load_nmatrix(&from)?, load_nmatrix(&to)?);
            let homs: Vec<HomCandidate> =
                enumerate_strict_homs(&m1, &m2)?.into_iter().filter(|h| !strong_only || h.strongly_preserving).collect();
            emit(json, json!(homs), || homs.iter().map(hom_text).collect());
            Ok(if homs.is_empty() { 1 } else { 0 })
        }
        Command::EqvMatrix { first, second } => {
            let result = decide_matrix_equivalence(&load_nmatrix(&first)?, &load_nmatrix(&second)?)?;
            emit(json, json!(result), || match &result {
                MatrixEquivalence::Equivalent => "equivalent\n".into(),
                MatrixEquivalence::NotEquivalent(s) => format!(
                    "not equivalent: {} |- {} holds only in the {} matrix\n",
                    formulas_text(&s.premises),
                    s.conclusion,
                    if s.holds_in == Side::First { "first" } else { "second" }
                ),
            });
            Ok(match result {
                MatrixEquivalence::Equivalent => 0,
                MatrixEquivalence::NotEquivalent(_) => 1,
            })
        }
        Command::ThmExists { matrix } => {
            let found = matrix_theorem_existence(&load_nmatrix(&matrix)?)?;
            emit(json, json!({ "theorem": found }), || match &found {
                Some(f) => format!("theorem: {f}\n"),
                None => "no theorems\n".into(),
            });
            Ok(if found.is_some() { 0 } else { 1 })
        }
        Command::RunCm { machine, max_steps, counters } => {
            let c = load_machine(&machine)?;
            for w in c.warnings() {
                eprintln!("warning: {w}");
            }
            let start = if counters.is_empty() { vec![0; c.counters()] } else { counters };
            let trace = c.run(&start, max_steps)?;
            let encoded = encode_trace(&trace);
            emit(json, json!({ "trace": trace, "encoding": encoded }), || {
                let mut s: String = trace.configurations.iter().map(|k| format!("{k}\n")).collect();
                s.push_str(if trace.halted { "halted\n" } else { "step budget exhausted\n" });
                s
            });
            Ok(0)
        }
        Command::CompileCm { machine, output } => {
            let c = load_machine(&machine)?;
            for w in c.warnings() {
                eprintln!("warning: {w}");
            }
            write_or_print(&Artifact::NMatrix(compile_machine(&c)), output.as_deref())?;
            Ok(0)
        }
        Command::Reduce { machine, output } => {
            let c = load_machine(&machine)?;
            let (t, u) = build_reduction_pair(&c)?;
            std::fs::create_dir_all(&output)?;
            store_artifact(&Artifact::NMatrix(t), output.join("tilded.json"))?;
            store_artifact(&Artifact::NMatrix(u), output.join("unconstrained.json"))?;
            let files = ["tilded.json", "unconstrained.json"].map(|f| output.join(f).display().to_string());
            emit(json, json!({ "files": files }), || files.iter().map(|f| format!("{f}\n")).collect());
            Ok(0)
        }
        Command::Analyze { first, second, depth, vars, premises, max_instances, tilde_of } => {
            let (m1, m2) = (load_nmatrix(&first)?, load_nmatrix(&second)?);
            let opts = AnalyzeOptions {
                budget: Budget { depth, vars, premises, max_instances },
                tilde_of: tilde_of.as_deref().map(load_nmatrix).transpose()?,
                corpus: deterministic_matrices()?,
            };
            let v = analyze(&m1, &m2, &opts)?;
            out(&format!("{}\n", serde_json::to_string_pretty(&v)?));
            if let Evidence::Counterexample { counterexample } = &v.evidence {
                eprintln!(
                    "witness: {} |- {}",
                    formulas_text(&counterexample.premises),
                    counterexample.conclusion
                );
            }
            Ok(match v.outcome {
                Outcome::Equivalent => 0,
                Outcome::NotEquivalent => 1,
                Outcome::Unknown => 2,
            })
        }
        Command::RulesCheck { matrix, rules } => {
            let m = load_nmatrix(&matrix)?;
            let r = load_rules(&rules, m.signature())?;
            let report = check_rule_set(&m, &r)?;
            emit(json, json!(report), || {
                report
                    .iter()
                    .enumerate()
                    .map(|(i, rep)| {
                        let name = rep.rule.name.clone().unwrap_or_else(|| format!("#{}", i + 1));
                        let verdict = if rep.holds { "holds" } else { "fails" };
                        let mut s = format!(
                            "{name}: {} / {} {verdict}\n",
                            formulas_text(&rep.rule.premises),
                            rep.rule.conclusion
                        );
                        if let Some(w) = &rep.witness {
                            s.push_str(&witness_text(w));
                        }
                        s
                    })
                    .collect()
            });
            Ok(if report.iter().all(|r| r.holds) { 0 } else { 1 })
        }
        Command::Corpus { action } => corpus(json, action),
        Command::Check { matrix, premises, conclusion } => {
            let m = load_nmatrix(&matrix)?;
            let gamma = premises
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_formula(s, m.signature()))
                .collect::<Result<Vec<_>, _>>()?;
            let a = parse_formula(&conclusion, m.signature())?;
            let result = decide_consequence(&m, &gamma, &a)?;
            let witness = result.witness().map(PrevaluationTable::to_json_value);
            emit(json, json!({ "holds": result.holds(), "witness": witness }), || match &result {
                Consequence::Holds => "holds\n".into(),
                Consequence::Fails(w) => format!("fails; countermodel:\n{}", witness_text(w)),
            });
            Ok(if result.holds() { 0 } else { 1 })
        }
        Command::Express { matrix, formula, arity } => {
            let m = load_nmatrix(&matrix)?;
            let a = parse_formula(&formula, m.signature())?;
            let rows = express(&m, &a, arity)?.rows(&m);
            let value: Vec<Value> = rows.iter().map(|(args, out)| json!({ "args": args, "out": out })).collect();
            emit(json, json!(value), || {
                rows.iter().map(|(args, out)| format!("({}) -> {{{}}}\n", args.join(", "), out.join(", "))).collect()
            });
            Ok(0)
        }
        Command::Thmsearch { matrix, depth, vars } => {
            let found = search_theorem_bounded(&load_nmatrix(&matrix)?, depth, vars)?;
            emit(json, json!({ "theorem": found, "depth": depth, "vars": vars }), || match &found {
                Some(f) => format!("theorem: {f}\n"),
                None => format!("no theorem up to depth {depth} over {vars} variable(s)\n"),
            });
            Ok(if found.is_some() { 0 } else { 1 })
        }
    }
}

fn corpus(json: bool, action: CorpusAction) -> CmdResult {
    match action {
        CorpusAction::List => {
            let entries = load_corpus()?;
            let rows: Vec<Value> =
                entries.iter().map(|e| json!({ "name": e.name, "kind": e.artifact.kind(), "note": e.note })).collect();
            emit(json, json!(rows), || {
                entries.iter().map(|e| format!("{:<10} {:<8} {}\n", e.name, e.artifact.kind(), e.note)).collect()
            });
            Ok(0)
        }
        CorpusAction::Export { name, all, output } => {
            if all {
                let dir = output.ok_or_else(|| Error::Artifact("`--all` needs `-o DIR`".into()))?;
                std::fs::create_dir_all(&dir)?;
                for e in load_corpus()? {
                    store_artifact(&e.artifact, dir.join(format!("{}.json", e.name)))?;
                }
                return Ok(0);
            }
            let name = name.ok_or_else(|| Error::Artifact("give an entry name or `--all`".into()))?;
            write_or_print(&corpus_entry(&name)?.artifact, output.as_deref())?;
            Ok(0)
        }
    }
}

fn formulas_text(fs: &[nmt_core::Formula]) -> String {
    if fs.is_empty() {
        "{}".into()
    } else {
        fs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
    }
}
