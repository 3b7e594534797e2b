//! Shadow detection between patterns.
//!
//! Pattern X *shadows* pattern Y when every expression Y matches is also
//! matched by X — if X is tried first (earlier in the file, or already
//! shipped in the JIT), Y can never fire. Silent shadowing is how a new
//! hand-written rewrite ends up dead on arrival, so this module answers the
//! question for every ordered pair.
//!
//! Two independent routes exist on purpose:
//!
//! * [`determine_shadow`] — the real pipeline: a cheap structural prefilter
//!   ([`same_shape`]), then an SMT proof over all expressions
//!   ([`smt::encode_shadow_smt`]), with the bounded [`oracle`] supplying a
//!   concrete counterexample for every NO.
//! * [`oracle::brute_force_counterexample`] alone — no solver, bounded
//!   universe. Slower and weaker, but with no encoding in the loop, which
//!   is exactly what makes it a useful cross-check of the encoding.

pub mod oracle;
pub mod smt;
pub mod solver;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use crate::east::ENode;
use crate::rewrite::{pretty, CompiledPattern};

pub use oracle::OracleParams;
pub use solver::{resolve_solver, ShadowError, SolverConfig, SolverOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

/// A verdict plus, for NO, a concrete expression Y matches and X misses
/// (when the bounded search can exhibit one).
#[derive(Debug, Clone)]
pub struct ShadowVerdict {
    pub verdict: Verdict,
    pub witness: Option<String>,
}

/// Cheap structural prefilter: can X's shape possibly lie over Y's? False
/// means some Y-instance structurally escapes X (or the widths differ, in
/// which case no expression is shared at all). True decides nothing — the
/// solver still has to speak.
pub fn same_shape(x: &CompiledPattern, y: &CompiledPattern) -> bool {
    if x.width() != y.width() {
        return false;
    }
    fn embed(
        x: &CompiledPattern,
        y: &CompiledPattern,
        xi: crate::east::NodeId,
        yi: crate::east::NodeId,
    ) -> bool {
        match (x.easts.arena.node(xi), y.easts.arena.node(yi)) {
            // X accepts anything here.
            (ENode::FreeVar(_), _) => true,
            // X demands a constant: Y must supply one (a Y-constant or a
            // pinned literal); a free Y position can hold a non-constant.
            (ENode::ConstVar(_), ENode::ConstVar(_) | ENode::Lit(_)) => true,
            (ENode::ConstVar(_), _) => false,
            // X demands one exact value. A Y-constant *could* be pinned to
            // it by a precondition — leave that to the solver.
            (ENode::Lit(v), ENode::Lit(w)) => v == w,
            (ENode::Lit(_), ENode::ConstVar(_)) => true,
            (ENode::Lit(_), _) => false,
            (ENode::Op { op: xo, lhs: xl, rhs: xr }, ENode::Op { op: yo, lhs: yl, rhs: yr }) => {
                xo == yo && embed(x, y, *xl, *yl) && embed(x, y, *xr, *yr)
            }
            // X is deeper than Y here: a Y-instance with a leaf at this
            // position escapes.
            (ENode::Op { .. }, _) => false,
        }
    }
    embed(x, y, x.easts.before, y.easts.before)
}

/// Decides "does X shadow Y" through the full pipeline. The prefilter
/// handles the structurally impossible cases (confirmed by an oracle
/// witness); everything else goes to the solver, with the oracle only
/// decorating a NO with a concrete counterexample.
pub fn determine_shadow(
    x: &CompiledPattern,
    y: &CompiledPattern,
    solver: &SolverConfig,
    timeout: Duration,
    params: &OracleParams,
) -> Result<ShadowVerdict, ShadowError> {
    let witness = || {
        oracle::brute_force_counterexample(x, y, params)
            .map(|(arena, id)| pretty(&arena, id))
    };

    if x.width() != y.width() {
        // Disjoint opcode vocabularies: X matches nothing Y matches. The
        // only escape hatch would be a Y that matches nothing at all.
        return Ok(match witness() {
            Some(w) => ShadowVerdict { verdict: Verdict::No, witness: Some(w) },
            None => ShadowVerdict { verdict: Verdict::Unknown, witness: None },
        });
    }
    if !same_shape(x, y) {
        // Structurally expected to fail; if the bounded search cannot
        // actually exhibit the escapee (e.g. Y's precondition kills every
        // small instance), fall through and let the solver decide.
        if let Some(w) = witness() {
            return Ok(ShadowVerdict { verdict: Verdict::No, witness: Some(w) });
        }
    }

    let script = smt::encode_shadow_smt(x, y).map_err(ShadowError::SolverProtocol)?;
    match solver::run_solver(solver, &script.text, timeout)? {
        SolverOutcome::Unsat => Ok(ShadowVerdict { verdict: Verdict::Yes, witness: None }),
        SolverOutcome::Sat => Ok(ShadowVerdict { verdict: Verdict::No, witness: witness() }),
        SolverOutcome::Unknown | SolverOutcome::TimedOut => {
            Ok(ShadowVerdict { verdict: Verdict::Unknown, witness: None })
        }
    }
}

/// Bounded-universe verdict from the oracle alone: NO with a witness if one
/// exists at these bounds, YES otherwise.
pub fn oracle_shadow(
    x: &CompiledPattern,
    y: &CompiledPattern,
    params: &OracleParams,
) -> ShadowVerdict {
    match oracle::brute_force_counterexample(x, y, params) {
        Some((arena, id)) => {
            ShadowVerdict { verdict: Verdict::No, witness: Some(pretty(&arena, id)) }
        }
        None => ShadowVerdict { verdict: Verdict::Yes, witness: None },
    }
}

/// How to run a whole matrix.
pub struct MatrixConfig {
    /// `None` runs the oracle alone (no solver involved).
    pub solver: Option<SolverConfig>,
    /// Re-test every solver YES with the bounded oracle; a counterexample
    /// marks the row as a disagreement (an encoding or solver bug — the
    /// witness is a concrete disproof).
    pub cross_check: bool,
    pub timeout: Duration,
    pub workers: usize,
    pub oracle: OracleParams,
}

/// One ordered pair's result.
#[derive(Debug, Clone)]
pub struct MatrixRow {
    pub x: String,
    pub y: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
    /// The solver proved YES but the oracle exhibited an escapee.
    pub disagreement: bool,
}

/// Checks every ordered pair (the diagonal is trivially YES and skipped).
/// Row order is input order, regardless of which worker finished first.
pub fn shadow_matrix(
    cps: &[CompiledPattern],
    cfg: &MatrixConfig,
) -> Result<Vec<MatrixRow>, ShadowError> {
    let mut pairs = Vec::new();
    for i in 0..cps.len() {
        for j in 0..cps.len() {
            if i != j {
                pairs.push((i, j));
            }
        }
    }

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<MatrixRow, ShadowError>>>> =
        pairs.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1) {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= pairs.len() {
                    break;
                }
                let (i, j) = pairs[t];
                *slots[t].lock().unwrap() = Some(matrix_cell(&cps[i], &cps[j], cfg));
            });
        }
    });

    let mut rows = Vec::with_capacity(pairs.len());
    for slot in &slots {
        rows.push(slot.lock().unwrap().take().expect("every task ran to completion")?);
    }
    Ok(rows)
}

fn matrix_cell(
    x: &CompiledPattern,
    y: &CompiledPattern,
    cfg: &MatrixConfig,
) -> Result<MatrixRow, ShadowError> {
    let mut cell = match &cfg.solver {
        Some(solver) => determine_shadow(x, y, solver, cfg.timeout, &cfg.oracle)?,
        None => oracle_shadow(x, y, &cfg.oracle),
    };
    let mut disagreement = false;
    if cfg.cross_check && cfg.solver.is_some() && cell.verdict == Verdict::Yes {
        if let Some((arena, id)) = oracle::brute_force_counterexample(x, y, &cfg.oracle) {
            disagreement = true;
            cell.witness = Some(pretty(&arena, id));
        }
    }
    Ok(MatrixRow {
        x: x.name().to_string(),
        y: y.name().to_string(),
        verdict: cell.verdict,
        witness: cell.witness,
        disagreement,
    })
}

/// TSV report: `x  y  verdict  witness` per row (`-` for no witness,
/// `DISAGREE` in the verdict column where solver and oracle conflict),
/// then a `#` summary line. Deliberately timing-free so identical runs
/// produce identical bytes.
pub fn render_matrix(rows: &[MatrixRow]) -> String {
    let mut out = String::from("x\ty\tverdict\twitness\n");
    let mut tally = [0usize; 3];
    let mut disagreements = 0usize;
    for row in rows {
        let verdict = if row.disagreement {
            disagreements += 1;
            "DISAGREE"
        } else {
            tally[row.verdict as usize] += 1;
            row.verdict.as_str()
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.x,
            row.y,
            verdict,
            row.witness.as_deref().unwrap_or("-")
        ));
    }
    out.push_str(&format!(
        "# pairs={} yes={} no={} unknown={} disagree={}\n",
        rows.len(),
        tally[Verdict::Yes as usize],
        tally[Verdict::No as usize],
        tally[Verdict::Unknown as usize],
        disagreements
    ));
    out
}
