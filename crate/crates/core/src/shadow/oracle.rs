//! Brute-force shadow oracle.
//!
//! The solver-free second opinion: search a bounded expression universe for
//! a *counterexample to shadowing* — an expression Y matches that X does
//! not. The universe is every expression of depth ≤ `depth` over the given
//! atoms, constants and operators.
//!
//! Enumerating that universe outright is hopeless (it is ~10^13 at depth 3
//! with three atoms), but only expressions that match Y can be
//! counterexamples, and those are exactly the instantiations of Y's
//! before-shape. So the search enumerates substitutions instead: each free
//! parameter draws from a pool of subexpressions whose depth fits that
//! parameter's deepest position, each `@Constant` parameter draws from the
//! constant list (filtered through Y's preconditions), and every resulting
//! instance — built verbatim, no folding — is tested against X. The result
//! set is identical to enumerate-everything-then-filter, which
//! `all_escaping_matches` exists to double-check on small universes.
//!
//! Candidates are interned into a scratch region of the arena and rolled
//! back after each test, so exhaustive runs stay in constant memory.
//! Substitution pools grow by iterative deepening, which makes the reported
//! counterexample a smallest-pool one and keeps the common case (a shallow
//! witness) fast.

use std::collections::BTreeMap;

use crate::east::{self, ENode, NodeId};
use crate::lang::ast::BinOp;
use crate::rewrite::{
    copy_expr, enumerate_up_to, CExpr, CId, CompiledPattern, ExprArena,
};
use crate::semantics::wrap;

/// The universe the oracle searches.
#[derive(Debug, Clone)]
pub struct OracleParams {
    /// Maximum expression depth (a leaf is depth 0).
    pub depth: usize,
    /// Names available as opaque leaves.
    pub atoms: Vec<String>,
    /// Literal values available as leaves and as `@Constant` bindings.
    pub consts: Vec<i64>,
    /// Operators available inside substituted subexpressions.
    pub ops: Vec<BinOp>,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            depth: 3,
            atoms: vec!["p".to_string(), "q".to_string(), "r".to_string()],
            consts: vec![-1, 0, 1, 2],
            ops: BinOp::ALL.to_vec(),
        }
    }
}

/// Everything the per-candidate hot loop needs, precomputed: slot indices
/// instead of name lookups.
struct Plan<'a> {
    y: &'a CompiledPattern,
    x: &'a CompiledPattern,
    /// Constant-parameter names of Y, declaration order.
    const_names: Vec<String>,
    /// Y eAST node → free slot.
    y_free_slot: Vec<Option<usize>>,
    /// Y eAST node → const slot.
    y_const_slot: Vec<Option<usize>>,
    x_free_slot: Vec<Option<usize>>,
    x_const_slot: Vec<Option<usize>>,
    x_free_count: usize,
    x_const_count: usize,
    /// Pool depth budget per free slot of Y.
    budgets: Vec<usize>,
    widths_match: bool,
}

/// Parameter slots for one pattern: names in declaration order, and per
/// arena node the slot it binds (if it is a variable leaf).
struct SlotTables {
    free_names: Vec<String>,
    const_names: Vec<String>,
    free_slot: Vec<Option<usize>>,
    const_slot: Vec<Option<usize>>,
}

fn slot_tables(cp: &CompiledPattern) -> SlotTables {
    let free_names: Vec<String> =
        cp.pattern.free_params().map(|p| p.name.clone()).collect();
    let const_names: Vec<String> =
        cp.pattern.const_params().map(|p| p.name.clone()).collect();
    let mut free_slot = vec![None; cp.easts.arena.len()];
    let mut const_slot = vec![None; cp.easts.arena.len()];
    for i in 0..cp.easts.arena.len() {
        match cp.easts.arena.node(NodeId(i as u32)) {
            ENode::FreeVar(n) => {
                free_slot[i] = free_names.iter().position(|f| f == n);
            }
            ENode::ConstVar(n) => {
                const_slot[i] = const_names.iter().position(|f| f == n);
            }
            _ => {}
        }
    }
    SlotTables { free_names, const_names, free_slot, const_slot }
}

/// Tree depth of the before-shape and the deepest occurrence of each free
/// parameter (by slot).
fn shape_depths(cp: &CompiledPattern, free_slot: &[Option<usize>], n_free: usize) -> (usize, Vec<usize>) {
    let mut occ = vec![0usize; n_free];
    fn go(
        cp: &CompiledPattern,
        id: NodeId,
        d: usize,
        free_slot: &[Option<usize>],
        occ: &mut [usize],
    ) -> usize {
        match cp.easts.arena.node(id) {
            ENode::Op { lhs, rhs, .. } => {
                let a = go(cp, *lhs, d + 1, free_slot, occ);
                let b = go(cp, *rhs, d + 1, free_slot, occ);
                a.max(b)
            }
            _ => {
                if let Some(s) = free_slot[id.index()] {
                    occ[s] = occ[s].max(d);
                }
                d
            }
        }
    }
    let depth = go(cp, cp.easts.before, 0, free_slot, &mut occ);
    (depth, occ)
}

impl<'a> Plan<'a> {
    fn new(x: &'a CompiledPattern, y: &'a CompiledPattern, params: &OracleParams) -> Option<Plan<'a>> {
        let yt = slot_tables(y);
        let xt = slot_tables(x);
        let (shape_depth, occ) = shape_depths(y, &yt.free_slot, yt.free_names.len());
        if shape_depth > params.depth {
            return None; // no instance of Y fits in the universe at all
        }
        if !yt.const_names.is_empty() && params.consts.is_empty() {
            return None;
        }
        let budgets = occ.iter().map(|d| params.depth - d).collect();
        Some(Plan {
            y,
            x,
            const_names: yt.const_names,
            y_free_slot: yt.free_slot,
            y_const_slot: yt.const_slot,
            x_free_slot: xt.free_slot,
            x_const_slot: xt.const_slot,
            x_free_count: xt.free_names.len(),
            x_const_count: xt.const_names.len(),
            budgets,
            widths_match: x.width() == y.width(),
        })
    }

    /// Builds the Y-instance for one substitution, verbatim (no folding —
    /// the instance must keep Y's shape).
    fn instantiate(&self, id: NodeId, free_vals: &[CId], const_vals: &[i64], arena: &mut ExprArena) -> CId {
        let i = id.index();
        if let Some(s) = self.y_free_slot[i] {
            return free_vals[s];
        }
        if let Some(s) = self.y_const_slot[i] {
            return arena.lit(const_vals[s]);
        }
        match self.y.easts.arena.node(id).clone() {
            ENode::Lit(v) => arena.lit(wrap(self.y.width(), v)),
            ENode::Op { op, lhs, rhs } => {
                let l = self.instantiate(lhs, free_vals, const_vals, arena);
                let r = self.instantiate(rhs, free_vals, const_vals, arena);
                arena.op(op, l, r)
            }
            ENode::FreeVar(_) | ENode::ConstVar(_) => unreachable!("slots cover all variables"),
        }
    }

    /// Slot-array reimplementation of the matcher for the hot loop; agrees
    /// with `rewrite::match_expr` (the slower, map-based one asserts as
    /// much in debug builds).
    fn x_matches(&self, arena: &ExprArena, cid: CId) -> bool {
        let mut free_bind: Vec<Option<CId>> = vec![None; self.x_free_count];
        let mut const_bind: Vec<Option<i64>> = vec![None; self.x_const_count];
        if !self.x_go(self.x.easts.before, cid, arena, &mut free_bind, &mut const_bind) {
            return false;
        }
        if self.x.easts.preconds.is_empty() {
            return true;
        }
        let env: BTreeMap<String, i64> = self
            .x
            .pattern
            .const_params()
            .enumerate()
            .filter_map(|(s, p)| const_bind[s].map(|v| (p.name.clone(), v)))
            .collect();
        self.x
            .easts
            .preconds
            .iter()
            .all(|q| east::evaluate_precond(&self.x.easts.arena, q, &env) == Ok(true))
    }

    fn x_go(
        &self,
        eid: NodeId,
        cid: CId,
        arena: &ExprArena,
        free_bind: &mut [Option<CId>],
        const_bind: &mut [Option<i64>],
    ) -> bool {
        let i = eid.index();
        if let Some(s) = self.x_free_slot[i] {
            return match free_bind[s] {
                Some(prev) => prev == cid,
                None => {
                    free_bind[s] = Some(cid);
                    true
                }
            };
        }
        if let Some(s) = self.x_const_slot[i] {
            return match arena.node(cid) {
                CExpr::Lit(v) => {
                    let v = wrap(self.x.width(), *v);
                    match const_bind[s] {
                        Some(prev) => prev == v,
                        None => {
                            const_bind[s] = Some(v);
                            true
                        }
                    }
                }
                _ => false,
            };
        }
        match self.x.easts.arena.node(eid) {
            ENode::Lit(v) => matches!(arena.node(cid), CExpr::Lit(w)
                if wrap(self.x.width(), *v) == wrap(self.x.width(), *w)),
            ENode::Op { op, lhs, rhs } => match arena.node(cid) {
                CExpr::Op { op: cop, lhs: cl, rhs: cr } => {
                    op == cop
                        && self.x_go(*lhs, *cl, arena, free_bind, const_bind)
                        && self.x_go(*rhs, *cr, arena, free_bind, const_bind)
                }
                _ => false,
            },
            ENode::FreeVar(_) | ENode::ConstVar(_) => unreachable!("slots cover all variables"),
        }
    }

    fn y_preconds_hold(&self, const_vals: &[i64]) -> bool {
        if self.y.easts.preconds.is_empty() {
            return true;
        }
        let env: BTreeMap<String, i64> = self
            .const_names
            .iter()
            .zip(const_vals)
            .map(|(n, v)| (n.clone(), *v))
            .collect();
        self.y
            .easts
            .preconds
            .iter()
            .all(|q| east::evaluate_precond(&self.y.easts.arena, q, &env) == Ok(true))
    }
}

/// Odometer over one pool per slot; calls `f` for each tuple until it asks
/// to stop. Last slot varies fastest. Returns true if stopped early.
fn odometer<T: Copy>(pools: &[Vec<T>], mut f: impl FnMut(&[T]) -> bool) -> bool {
    if pools.iter().any(|p| p.is_empty()) {
        return false;
    }
    let mut idx = vec![0usize; pools.len()];
    let mut vals: Vec<T> = pools.iter().map(|p| p[0]).collect();
    loop {
        if f(&vals) {
            return true;
        }
        let mut k = pools.len();
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < pools[k].len() {
                vals[k] = pools[k][idx[k]];
                break;
            }
            idx[k] = 0;
            vals[k] = pools[k][0];
        }
    }
}

fn scan(
    x: &CompiledPattern,
    y: &CompiledPattern,
    params: &OracleParams,
    pool_cap: Option<usize>,
    visit: &mut dyn FnMut(&ExprArena, CId) -> bool,
) {
    assert!(
        !(params.atoms.is_empty() && params.consts.is_empty()),
        "the universe needs at least one leaf"
    );
    let Some(plan) = Plan::new(x, y, params) else { return };

    let max_budget = plan.budgets.iter().copied().max().unwrap_or(0);
    let deepening: Vec<usize> = match pool_cap {
        Some(k) => vec![k.min(max_budget)],
        None => (0..=max_budget).collect(),
    };

    let mut arena = ExprArena::new();
    // Debug builds cross-check the slot-compiled instantiation against the
    // reference matcher, but only on a prefix of the walk — the point of
    // the slots is to survive ~10^8-tuple passes, and a per-tuple reference
    // match would bring those back to a crawl even in CI.
    let mut checked = 0u32;
    for k in &deepening {
        let pools: Vec<Vec<CId>> = plan
            .budgets
            .iter()
            .map(|b| enumerate_up_to((*b).min(*k), &params.atoms, &params.consts, &params.ops, &mut arena))
            .collect();
        let const_pool: Vec<i64> = params.consts.clone();
        let const_pools: Vec<Vec<i64>> = vec![const_pool; plan.const_names.len()];

        let stopped = odometer(&const_pools, |const_vals| {
            if !plan.y_preconds_hold(const_vals) {
                return false;
            }
            odometer(&pools, |free_vals| {
                let mark = arena.mark();
                let inst = plan.instantiate(y.easts.before, free_vals, const_vals, &mut arena);
                if checked < 4096 {
                    checked += 1;
                    debug_assert!(
                        crate::rewrite::match_expr(y, &arena, inst).is_some(),
                        "a built instance must match its own source pattern"
                    );
                }
                let escapes = !plan.widths_match || !plan.x_matches(&arena, inst);
                let stop = escapes && visit(&arena, inst);
                arena.truncate(mark);
                stop
            })
        });
        if stopped {
            return;
        }
    }
}

/// Searches for an expression that Y matches and X does not. `None` means
/// none exists in the universe — at these bounds, X shadows Y. Patterns of
/// different widths never share a match, so there the first Y-instance
/// wins. The result is deterministic: pools deepen iteratively and tuples
/// advance in a fixed odometer order, so the same pair always yields the
/// same counterexample.
pub fn brute_force_counterexample(
    x: &CompiledPattern,
    y: &CompiledPattern,
    params: &OracleParams,
) -> Option<(ExprArena, CId)> {
    let mut found = None;
    scan(x, y, params, None, &mut |arena, id| {
        let mut out = ExprArena::new();
        let root = copy_expr(arena, id, &mut out);
        found = Some((out, root));
        true
    });
    found
}

/// Collects *every* escaping match in the universe (single full-depth pass,
/// each instance exactly once). This is the cross-check that the guided
/// search equals enumerate-then-filter; keep the universe small.
pub fn all_escaping_matches(
    x: &CompiledPattern,
    y: &CompiledPattern,
    params: &OracleParams,
) -> (ExprArena, Vec<CId>) {
    let mut out = ExprArena::new();
    let mut roots = Vec::new();
    scan(x, y, params, Some(usize::MAX), &mut |arena, id| {
        roots.push(copy_expr(arena, id, &mut out));
        false
    });
    (out, roots)
}
