//! Running an external SMT solver with a hard deadline.
//!
//! The solver is any program that takes an `.smt2` file argument and prints
//! `sat`/`unsat`/`unknown`. Native `z3` works as-is; so does a JavaScript
//! wrapper around the z3 WASM build (any `.js`/`.cjs`/`.mjs` solver path is
//! launched through `node`). The timeout is enforced here, by killing the
//! process — not passed to the solver — so a wedged solver cannot stall a
//! whole matrix run.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// How to launch the solver: `program [pre_args…] script.smt2`.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub program: PathBuf,
    pub pre_args: Vec<String>,
}

/// What the solver said (or didn't).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverOutcome {
    Sat,
    Unsat,
    Unknown,
    /// Killed at the deadline.
    TimedOut,
}

/// Infrastructure failures — distinct from any verdict.
#[derive(Debug, Clone, thiserror::Error)]
pub enum ShadowError {
    #[error("no SMT solver found: {0}")]
    SolverMissing(String),
    #[error("solver protocol error: {0}")]
    SolverProtocol(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn is_script(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("js") | Some("cjs") | Some("mjs")
    )
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path) {
        let cand = dir.join(name);
        if cand.is_file() {
            return Some(cand);
        }
    }
    None
}

fn config_for(path: &Path) -> Result<SolverConfig, ShadowError> {
    if !path.is_file() {
        return Err(ShadowError::SolverMissing(format!("`{}` does not exist", path.display())));
    }
    if is_script(path) {
        let node = find_on_path("node").ok_or_else(|| {
            ShadowError::SolverMissing(format!(
                "`{}` is a script but `node` is not on PATH",
                path.display()
            ))
        })?;
        Ok(SolverConfig {
            program: node,
            pre_args: vec![path.to_string_lossy().into_owned()],
        })
    } else {
        Ok(SolverConfig { program: path.to_path_buf(), pre_args: Vec::new() })
    }
}

/// Locates a solver. Tried in order: the explicit path, the
/// `PEEPHOLE_FORGE_SOLVER` environment variable, `z3` on PATH, and finally
/// a `tools/z3wasm/z3smt2.cjs` wrapper found by walking up from the
/// executable (the layout of a source checkout).
pub fn resolve_solver(explicit: Option<&Path>) -> Result<SolverConfig, ShadowError> {
    if let Some(p) = explicit {
        return config_for(p);
    }
    if let Some(env) = std::env::var_os("PEEPHOLE_FORGE_SOLVER") {
        return config_for(Path::new(&env));
    }
    if let Some(z3) = find_on_path("z3") {
        return config_for(&z3);
    }
    if let Ok(exe) = std::env::current_exe() {
        for dir in exe.ancestors().skip(1) {
            let cand = dir.join("tools/z3wasm/z3smt2.cjs");
            if cand.is_file() {
                return config_for(&cand);
            }
        }
    }
    Err(ShadowError::SolverMissing(
        "no --solver given, PEEPHOLE_FORGE_SOLVER unset, no `z3` on PATH, \
         and no tools/z3wasm/z3smt2.cjs near the executable"
            .to_string(),
    ))
}

/// Runs one script through the solver. The first `sat`/`unsat`/`unknown`
/// line of stdout is the outcome; anything else is a protocol error.
pub fn run_solver(
    cfg: &SolverConfig,
    script: &str,
    timeout: Duration,
) -> Result<SolverOutcome, ShadowError> {
    let dir = tempfile::tempdir().map_err(|e| ShadowError::Io(e.to_string()))?;
    let script_path = dir.path().join("query.smt2");
    std::fs::write(&script_path, script).map_err(|e| ShadowError::Io(e.to_string()))?;

    let mut child = Command::new(&cfg.program)
        .args(&cfg.pre_args)
        .arg(&script_path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| {
            ShadowError::SolverMissing(format!(
                "failed to launch `{}`: {e}",
                cfg.program.display()
            ))
        })?;

    // Drain the pipes from threads so a chatty solver can't fill them and
    // deadlock against our try_wait loop.
    let mut stdout_pipe = child.stdout.take().expect("stdout was piped");
    let mut stderr_pipe = child.stderr.take().expect("stderr was piped");
    let out_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout_pipe.read_to_string(&mut buf);
        buf
    });
    let err_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr_pipe.read_to_string(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let timed_out = loop {
        match child.try_wait().map_err(|e| ShadowError::Io(e.to_string()))? {
            Some(_) => break false,
            None => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    break true;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    };
    if timed_out {
        // Killing the solver reaps only the direct child; a wrapper
        // script's grandchildren can keep the pipe write-ends open long
        // after. Nothing on this path reads the output, so leave the
        // drain threads to hit EOF on their own rather than joining.
        return Ok(SolverOutcome::TimedOut);
    }
    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();

    for line in stdout.lines().map(str::trim) {
        match line {
            "sat" => return Ok(SolverOutcome::Sat),
            "unsat" => return Ok(SolverOutcome::Unsat),
            "unknown" => return Ok(SolverOutcome::Unknown),
            "" => {}
            _ => break,
        }
    }
    Err(ShadowError::SolverProtocol(format!(
        "expected sat/unsat/unknown from `{}`; stdout: {:?}; stderr: {:?}",
        cfg.program.display(),
        stdout.trim(),
        stderr.trim()
    )))
}
