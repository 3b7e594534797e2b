//! Batch entry point: one subcommand per pipeline stage.
//!
//! * `translate` — pattern file → C++ rewrite-pass file
//! * `gen-tests` — pattern file → JIT test classes with IR annotations
//! * `verify`    — fuzz each pattern's before/after agreement, or rewrite
//!   one concrete expression
//! * `shadow`    — pairwise shadow matrix, optionally cross-checked against
//!   the brute-force oracle
//! * `metrics`   — character/identifier counts per file
//!
//! Exit codes are part of the interface: 0 success, 1 a domain failure
//! (verification counterexample, shadow disagreement), 2 usage or input
//! error, 3 infrastructure error (solver missing or misbehaving). Artifacts
//! are written via a temp file and rename, so a failing run never leaves a
//! truncated output behind, and identical runs produce identical bytes —
//! reports carry no timings.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::lang::{self, ast::Pattern};
use crate::metrics::{count_characters, count_identifiers, Lang};
use crate::rewrite::{
    self, apply_first, parse_concrete, pretty, semantic_fuzz_check, CompiledPattern, FuzzOutcome,
};
use crate::rng;
use crate::shadow::{
    render_matrix, resolve_solver, shadow_matrix, MatrixConfig, OracleParams, ShadowError,
};
use crate::{codegen, testgen};

#[derive(Parser)]
#[command(
    name = "peephole-forge",
    version,
    about = "author JIT peephole rewrites as before/after patterns",
    max_term_width = 100
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a pattern file into a C++ rewrite-pass file.
    Translate {
        /// Pattern file to read.
        #[arg(long)]
        patterns: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate JIT test classes that assert each rewrite fired.
    GenTests {
        /// Pattern file to read.
        #[arg(long)]
        patterns: PathBuf,
        /// Directory for the Test*.java files (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the generated constant operands.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check before/after agreement on random inputs, or rewrite one
    /// expression.
    Verify {
        /// Pattern file to read.
        #[arg(long)]
        patterns: PathBuf,
        /// Random environments per pattern.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Base seed; each pattern derives its own stream from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rewrite this expression with the first matching pattern instead
        /// of fuzzing.
        #[arg(long)]
        expr: Option<String>,
    },
    /// Decide, for every ordered pair, whether one pattern shadows the
    /// other.
    Shadow {
        /// Pattern file to read.
        #[arg(long)]
        patterns: PathBuf,
        /// Report file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// SMT solver executable; scripts run through `node`. Defaults to
        /// $PEEPHOLE_FORGE_SOLVER, then `z3` on PATH, then the bundled
        /// solver next to the executable.
        #[arg(long)]
        solver: Option<PathBuf>,
        /// Per-pair solver budget.
        #[arg(long, default_value_t = 10)]
        timeout_secs: u64,
        /// Counterexample search depth.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Concurrent pair checks (default: logical CPU count).
        #[arg(long)]
        workers: Option<usize>,
        /// Re-test every YES with the brute-force oracle; any disagreement
        /// fails the run.
        #[arg(long)]
        oracle: bool,
    },
    /// Count non-whitespace characters and identifiers per file.
    Metrics {
        /// Files to measure.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Token language; defaults from each file's extension.
        #[arg(long)]
        lang: Option<LangArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LangArg {
    /// Pattern/Java tokens; `@Marker` annotations are not identifiers.
    Pattern,
    /// C++ tokens.
    Cpp,
}

/// A failed run, already reduced to its exit code.
enum Failure {
    /// The tool worked; the inputs are at fault (exit 2).
    Usage(String),
    /// The analysis itself found a problem (exit 1).
    Domain(String),
    /// The tool could not do its job (exit 3).
    Infra(String),
}

impl From<ShadowError> for Failure {
    fn from(e: ShadowError) -> Failure {
        Failure::Infra(e.to_string())
    }
}

/// Parses `std::env::args` and runs one subcommand to completion.
pub fn run() -> std::process::ExitCode {
    let cli = Cli::parse(); // exits 2 by itself on usage errors
    let code = match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Infra(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    std::process::ExitCode::from(code)
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Translate { patterns, out } => {
            let cps = load_compiled(&patterns)?;
            let text = codegen::emit_pass_file(&cps).map_err(Failure::Usage)?;
            emit(out.as_deref(), &text)
        }
        Command::GenTests { patterns, out, seed } => {
            let cps = load_compiled(&patterns)?;
            let (classes, skipped) = testgen::emit_test_classes(&cps, seed);
            for s in &skipped {
                eprintln!("skipped {}: {}", s.name, s.reason);
            }
            match out {
                Some(dir) => {
                    for (name, text) in &classes {
                        write_atomic(&dir.join(format!("{name}.java")), text)?;
                    }
                    Ok(())
                }
                None => {
                    let mut joined = String::new();
                    for (name, text) in &classes {
                        joined.push_str(&format!("// ==== {name}.java ====\n"));
                        joined.push_str(text);
                    }
                    emit(None, &joined)
                }
            }
        }
        Command::Verify { patterns, trials, seed, expr } => {
            let cps = load_compiled(&patterns)?;
            match expr {
                Some(src) => rewrite_once(&cps, &src),
                None => fuzz_all(&cps, trials, seed),
            }
        }
        Command::Shadow { patterns, out, solver, timeout_secs, depth, workers, oracle } => {
            if timeout_secs == 0 {
                return Err(Failure::Usage("--timeout-secs must be positive".into()));
            }
            if workers == Some(0) {
                return Err(Failure::Usage("--workers must be at least 1".into()));
            }
            let cps = load_compiled(&patterns)?;
            let cfg = MatrixConfig {
                solver: Some(resolve_solver(solver.as_deref())?),
                cross_check: oracle,
                timeout: Duration::from_secs(timeout_secs),
                workers: workers.unwrap_or_else(|| {
                    std::thread::available_parallelism().map_or(1, |n| n.get())
                }),
                oracle: OracleParams { depth, ..OracleParams::default() },
            };
            let rows = shadow_matrix(&cps, &cfg)?;
            emit(out.as_deref(), &render_matrix(&rows))?;
            let bad: Vec<_> = rows.iter().filter(|r| r.disagreement).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                for r in &bad {
                    eprintln!(
                        "solver proved `{}` shadows `{}`, but `{}` escapes",
                        r.x,
                        r.y,
                        r.witness.as_deref().unwrap_or("?")
                    );
                }
                Err(Failure::Domain(format!(
                    "{} solver/oracle disagreement(s)",
                    bad.len()
                )))
            }
        }
        Command::Metrics { files, lang } => {
            let mut table = String::new();
            for f in &files {
                let lang = match lang {
                    Some(LangArg::Pattern) => Lang::PatternLang,
                    Some(LangArg::Cpp) => Lang::CppLike,
                    None => lang_from_extension(f)?,
                };
                let text = read_input(f)?;
                table.push_str(&format!(
                    "{}\t{}\t{}\n",
                    f.display(),
                    count_characters(&text),
                    count_identifiers(&text, lang)
                ));
            }
            emit(None, &table)
        }
    }
}

fn fuzz_all(cps: &[CompiledPattern], trials: u64, seed: u64) -> Result<(), Failure> {
    let mut failures = 0usize;
    for cp in cps {
        match semantic_fuzz_check(cp, trials, rng::derive(seed, cp.name())) {
            FuzzOutcome::Pass { trials } => println!("{}: PASS ({trials} trials)", cp.name()),
            FuzzOutcome::Counterexample { env, before, after } => {
                failures += 1;
                let env: Vec<String> = env.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "{}: FAIL at {} (before {before}, after {after})",
                    cp.name(),
                    env.join(" ")
                );
            }
            FuzzOutcome::Unsampleable => {
                failures += 1;
                println!(
                    "{}: UNSAMPLEABLE (no inputs satisfied the precondition; nothing verified)",
                    cp.name()
                );
            }
        }
    }
    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Domain(format!("{failures} pattern(s) failed verification")))
    }
}

fn rewrite_once(cps: &[CompiledPattern], src: &str) -> Result<(), Failure> {
    let (mut arena, id) = parse_concrete(src)
        .map_err(|d| Failure::Usage(format!("--expr {}:{}: {}", d.line, d.col, d.message)))?;
    match apply_first(cps, &mut arena, id) {
        Some((i, rewritten)) => println!(
            "{}: {} => {}",
            cps[i].name(),
            pretty(&arena, id),
            pretty(&arena, rewritten)
        ),
        None => println!("no pattern matches {}", pretty(&arena, id)),
    }
    Ok(())
}

/// Reads, parses, validates and compiles a pattern file; parse problems go
/// to stderr as `file:line:col: message`.
fn load_compiled(path: &Path) -> Result<Vec<CompiledPattern>, Failure> {
    let src = read_input(path)?;
    let pats: Vec<Pattern> = lang::load_patterns(&src).map_err(|diags| {
        for d in &diags {
            eprintln!("{}:{}", path.display(), d);
        }
        Failure::Usage(format!("{} error(s) in {}", diags.len(), path.display()))
    })?;
    for p in &pats {
        if p.trivial_precondition {
            eprintln!("note: {}: constant-true guard dropped", p.name);
        }
    }
    Ok(pats.iter().map(rewrite::compile).collect())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn lang_from_extension(path: &Path) -> Result<Lang, Failure> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pattern" | "java") => Ok(Lang::PatternLang),
        Some("cpp" | "cc" | "cxx" | "c" | "h" | "hpp" | "hh") => Ok(Lang::CppLike),
        _ => Err(Failure::Usage(format!(
            "cannot infer a token language for {}; pass --lang",
            path.display()
        ))),
    }
}

/// Writes to the path (atomically) or to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Write-then-rename, so failures never leave a truncated artifact and
/// concurrent readers only ever see old or new bytes.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Infra(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path)
        .map_err(|e| Failure::Infra(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
