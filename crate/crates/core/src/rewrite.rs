//! Matching and rewriting of concrete expressions.
//!
//! Concrete expressions live in their own hash-consed [`ExprArena`] (atoms,
//! literals, operators) so that "is this the same subexpression" is id
//! equality — which is exactly what a pattern's repeated variable requires.
//! A [`CompiledPattern`] bundles the surface pattern with its interned
//! expression DAG; [`match_expr`] produces a [`Binding`],
//! [`instantiate_after`] splices the replacement back into the arena, and
//! [`semantic_fuzz_check`] validates before/after agreement on random
//! environments.
//!
//! The arena supports [`ExprArena::mark`]/[`ExprArena::truncate`] so bulk
//! searches (the shadow oracle tries ~10^8 candidate instantiations) can
//! intern a few scratch nodes per candidate and roll them back without the
//! arena growing.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::east::{self, ENode, NodeId, PatternEasts};
use crate::lang::ast::{BinOp, IntWidth, Pattern};
use crate::lang::lexer::{lex, Tok, Token};
use crate::lang::Diagnostic;
use crate::rng::SplitMix64;
use crate::semantics::{apply_binop, wrap};

/// Index into an [`ExprArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CId(pub u32);

impl CId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A concrete expression node. `Atom` is an opaque program value (a method
/// parameter, in JIT terms: a node the matcher treats as unknown).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CExpr {
    Atom(String),
    Lit(i64),
    Op { op: BinOp, lhs: CId, rhs: CId },
}

/// Hash-consing arena for concrete expressions.
#[derive(Debug, Clone, Default)]
pub struct ExprArena {
    nodes: Vec<CExpr>,
    memo: HashMap<CExpr, CId>,
}

impl ExprArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: CId) -> &CExpr {
        &self.nodes[id.index()]
    }

    pub fn intern(&mut self, node: CExpr) -> CId {
        if let CExpr::Op { lhs, rhs, .. } = &node {
            debug_assert!(lhs.index() < self.nodes.len() && rhs.index() < self.nodes.len());
        }
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = CId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.memo.insert(node, id);
        id
    }

    pub fn atom(&mut self, name: &str) -> CId {
        self.intern(CExpr::Atom(name.to_string()))
    }

    pub fn lit(&mut self, v: i64) -> CId {
        self.intern(CExpr::Lit(v))
    }

    pub fn op(&mut self, op: BinOp, lhs: CId, rhs: CId) -> CId {
        self.intern(CExpr::Op { op, lhs, rhs })
    }

    /// Snapshot of the current size, for [`ExprArena::truncate`].
    pub fn mark(&self) -> usize {
        self.nodes.len()
    }

    /// Rolls back every node interned since `mark`. Ids below the mark stay
    /// valid; ids at or above it must not be used afterwards.
    pub fn truncate(&mut self, mark: usize) {
        for node in self.nodes.drain(mark..) {
            self.memo.remove(&node);
        }
    }

    /// Depth of the expression (a leaf has depth 0).
    pub fn depth(&self, id: CId) -> usize {
        match self.node(id) {
            CExpr::Atom(_) | CExpr::Lit(_) => 0,
            CExpr::Op { lhs, rhs, .. } => 1 + self.depth(*lhs).max(self.depth(*rhs)),
        }
    }
}

/// Deep-copies an expression into another arena (re-consing as it goes).
pub fn copy_expr(src: &ExprArena, id: CId, dst: &mut ExprArena) -> CId {
    match src.node(id).clone() {
        CExpr::Atom(n) => dst.atom(&n),
        CExpr::Lit(v) => dst.lit(v),
        CExpr::Op { op, lhs, rhs } => {
            let l = copy_expr(src, lhs, dst);
            let r = copy_expr(src, rhs, dst);
            dst.op(op, l, r)
        }
    }
}

/// Renders an expression in the pattern surface style: every compound
/// operand is parenthesized, the root is bare.
pub fn pretty(arena: &ExprArena, id: CId) -> String {
    fn operand(arena: &ExprArena, id: CId, out: &mut String) {
        if matches!(arena.node(id), CExpr::Op { .. }) {
            out.push('(');
            go(arena, id, out);
            out.push(')');
        } else {
            go(arena, id, out);
        }
    }
    fn go(arena: &ExprArena, id: CId, out: &mut String) {
        match arena.node(id) {
            CExpr::Atom(n) => out.push_str(n),
            CExpr::Lit(v) => out.push_str(&v.to_string()),
            CExpr::Op { op, lhs, rhs } => {
                operand(arena, *lhs, out);
                out.push(' ');
                out.push_str(op.token());
                out.push(' ');
                operand(arena, *rhs, out);
            }
        }
    }
    let mut s = String::new();
    go(arena, id, &mut s);
    s
}

/// Evaluates a concrete expression under `env` (atom name → value) at the
/// given width.
pub fn evaluate(
    arena: &ExprArena,
    id: CId,
    width: IntWidth,
    env: &BTreeMap<String, i64>,
) -> Result<i64, String> {
    match arena.node(id) {
        CExpr::Atom(n) => {
            env.get(n).map(|v| wrap(width, *v)).ok_or_else(|| format!("no value for `{n}`"))
        }
        CExpr::Lit(v) => Ok(wrap(width, *v)),
        CExpr::Op { op, lhs, rhs } => {
            let a = evaluate(arena, *lhs, width, env)?;
            let b = evaluate(arena, *rhs, width, env)?;
            Ok(apply_binop(width, *op, a, b))
        }
    }
}

/// A pattern together with its compiled expression DAG.
#[derive(Debug, Clone)]
pub struct CompiledPattern {
    pub pattern: Pattern,
    pub easts: PatternEasts,
}

pub fn compile(pattern: &Pattern) -> CompiledPattern {
    CompiledPattern { pattern: pattern.clone(), easts: east::build_easts(pattern) }
}

impl CompiledPattern {
    pub fn name(&self) -> &str {
        &self.pattern.name
    }

    pub fn width(&self) -> IntWidth {
        self.pattern.width
    }
}

/// What a successful match binds: free parameters to subexpressions,
/// constant parameters to literal values (wrapped at pattern width).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    pub free: BTreeMap<String, CId>,
    pub consts: BTreeMap<String, i64>,
}

/// Matches `cp`'s before-expression against the concrete expression at
/// `id`. Returns the binding if the structure lines up, repeated variables
/// land on identical subexpressions, and every precondition holds.
pub fn match_expr(cp: &CompiledPattern, arena: &ExprArena, id: CId) -> Option<Binding> {
    let width = cp.width();
    fn go(
        cp: &CompiledPattern,
        arena: &ExprArena,
        eid: NodeId,
        cid: CId,
        b: &mut Binding,
        width: IntWidth,
    ) -> bool {
        match cp.easts.arena.node(eid) {
            ENode::FreeVar(n) => match b.free.get(n) {
                Some(prev) => *prev == cid,
                None => {
                    b.free.insert(n.clone(), cid);
                    true
                }
            },
            ENode::ConstVar(n) => match arena.node(cid) {
                CExpr::Lit(v) => {
                    let v = wrap(width, *v);
                    match b.consts.get(n) {
                        Some(prev) => *prev == v,
                        None => {
                            b.consts.insert(n.clone(), v);
                            true
                        }
                    }
                }
                _ => false,
            },
            ENode::Lit(v) => match arena.node(cid) {
                CExpr::Lit(w) => wrap(width, *v) == wrap(width, *w),
                _ => false,
            },
            ENode::Op { op, lhs, rhs } => match arena.node(cid) {
                CExpr::Op { op: cop, lhs: clhs, rhs: crhs } => {
                    *op == *cop
                        && go(cp, arena, *lhs, *clhs, b, width)
                        && go(cp, arena, *rhs, *crhs, b, width)
                }
                _ => false,
            },
        }
    }

    let mut b = Binding::default();
    if !go(cp, arena, cp.easts.before, id, &mut b, width) {
        return None;
    }
    for pre in &cp.easts.preconds {
        match east::evaluate_precond(&cp.easts.arena, pre, &b.consts) {
            Ok(true) => {}
            _ => return None,
        }
    }
    Some(b)
}

fn instantiate(
    cp: &CompiledPattern,
    root: NodeId,
    b: &Binding,
    arena: &mut ExprArena,
    fold: bool,
) -> CId {
    let width = cp.width();
    match cp.easts.arena.node(root).clone() {
        ENode::FreeVar(n) => b.free[&n],
        ENode::ConstVar(n) => arena.lit(wrap(width, b.consts[&n])),
        ENode::Lit(v) => arena.lit(wrap(width, v)),
        ENode::Op { op, lhs, rhs } => {
            let l = instantiate(cp, lhs, b, arena, fold);
            let r = instantiate(cp, rhs, b, arena, fold);
            if fold {
                if let (CExpr::Lit(a), CExpr::Lit(c)) = (arena.node(l), arena.node(r)) {
                    let v = apply_binop(width, op, *a, *c);
                    return arena.lit(v);
                }
            }
            arena.op(op, l, r)
        }
    }
}

/// Builds the replacement expression for a match. Operator nodes whose
/// operands both came out literal are folded to a literal on the spot, the
/// way a JIT would hand an all-constant subtree to the constant folder.
pub fn instantiate_after(cp: &CompiledPattern, b: &Binding, arena: &mut ExprArena) -> CId {
    instantiate(cp, cp.easts.after, b, arena, true)
}

/// Builds an instance of the *before*-expression, verbatim (no folding) —
/// folding would change its shape and it would no longer match the pattern
/// that produced it. This is how the shadow oracle manufactures candidate
/// matches.
pub fn instantiate_before(cp: &CompiledPattern, b: &Binding, arena: &mut ExprArena) -> CId {
    instantiate(cp, cp.easts.before, b, arena, false)
}

/// Tries each pattern at the root of `id`, in order; rewrites with the
/// first that matches. Returns the pattern index and the replacement.
pub fn apply_first(
    patterns: &[CompiledPattern],
    arena: &mut ExprArena,
    id: CId,
) -> Option<(usize, CId)> {
    for (i, cp) in patterns.iter().enumerate() {
        if let Some(b) = match_expr(cp, arena, id) {
            let out = instantiate_after(cp, &b, arena);
            return Some((i, out));
        }
    }
    None
}

/// Result of randomized before/after agreement checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuzzOutcome {
    /// All trials agreed.
    Pass { trials: u64 },
    /// An environment where before and after disagree.
    Counterexample { env: BTreeMap<String, i64>, before: i64, after: i64 },
    /// Rejection sampling could not find precondition-satisfying inputs
    /// (100 000 draws for one trial, all rejected).
    Unsampleable,
}

/// Values worth over-sampling: identities tend to break at zero, sign
/// boundaries and width extremes.
fn edge_values(width: IntWidth) -> [i64; 7] {
    [0, 1, -1, 2, -2, width.min_value(), width.max_value()]
}

fn draw_value(rng: &mut SplitMix64, width: IntWidth) -> i64 {
    if rng.below(4) == 0 {
        let edges = edge_values(width);
        edges[rng.below(edges.len() as u64) as usize]
    } else {
        wrap(width, rng.next_i64())
    }
}

/// Checks `eval(before) == eval(after)` on `trials` random environments
/// drawn from `seed`. Environments are rejection-sampled until the
/// preconditions hold.
pub fn semantic_fuzz_check(cp: &CompiledPattern, trials: u64, seed: u64) -> FuzzOutcome {
    let width = cp.width();
    let mut rng = SplitMix64::new(seed);
    for _ in 0..trials {
        let mut env = BTreeMap::new();
        let mut accepted = false;
        for _draw in 0..100_000u32 {
            env.clear();
            for p in &cp.pattern.params {
                env.insert(p.name.clone(), draw_value(&mut rng, width));
            }
            let ok = cp
                .easts
                .preconds
                .iter()
                .all(|q| east::evaluate_precond(&cp.easts.arena, q, &env) == Ok(true));
            if ok {
                accepted = true;
                break;
            }
        }
        if !accepted {
            return FuzzOutcome::Unsampleable;
        }
        let before = east::evaluate_node(&cp.easts.arena, cp.easts.before, &env);
        let after = east::evaluate_node(&cp.easts.arena, cp.easts.after, &env);
        match (before, after) {
            (Ok(bv), Ok(av)) if bv == av => {}
            (Ok(bv), Ok(av)) => return FuzzOutcome::Counterexample { env, before: bv, after: av },
            // Unbound variables cannot happen: env covers every parameter.
            _ => unreachable!("evaluation failed on a fully populated environment"),
        }
    }
    FuzzOutcome::Pass { trials }
}

/// Random expression over the given vocabulary, depth at most `max_depth`.
pub fn random_expr(
    rng: &mut SplitMix64,
    max_depth: usize,
    atoms: &[String],
    consts: &[i64],
    ops: &[BinOp],
    arena: &mut ExprArena,
) -> CId {
    let leaves = atoms.len() + consts.len();
    assert!(leaves > 0 && !ops.is_empty());
    if max_depth == 0 || rng.below(3) == 0 {
        let k = rng.below(leaves as u64) as usize;
        if k < atoms.len() {
            arena.atom(&atoms[k])
        } else {
            arena.lit(consts[k - atoms.len()])
        }
    } else {
        let op = ops[rng.below(ops.len() as u64) as usize];
        let lhs = random_expr(rng, max_depth - 1, atoms, consts, ops, arena);
        let rhs = random_expr(rng, max_depth - 1, atoms, consts, ops, arena);
        arena.op(op, lhs, rhs)
    }
}

/// Every distinct expression of depth ≤ `depth` over the vocabulary, in a
/// deterministic order: leaves first (atoms then constants), then each
/// depth level in (operator, left, right) lexicographic order. Consing
/// de-duplicates, so each expression appears exactly once.
pub fn enumerate_up_to(
    depth: usize,
    atoms: &[String],
    consts: &[i64],
    ops: &[BinOp],
    arena: &mut ExprArena,
) -> Vec<CId> {
    let mut pool: Vec<CId> = Vec::new();
    let mut seen: HashSet<CId> = HashSet::new();
    for a in atoms {
        let id = arena.atom(a);
        if seen.insert(id) {
            pool.push(id);
        }
    }
    for &c in consts {
        let id = arena.lit(c);
        if seen.insert(id) {
            pool.push(id);
        }
    }
    for _ in 0..depth {
        let prev: Vec<CId> = pool.clone();
        for &op in ops {
            for &l in &prev {
                for &r in &prev {
                    let id = arena.op(op, l, r);
                    if seen.insert(id) {
                        pool.push(id);
                    }
                }
            }
        }
    }
    pool
}

/// Parses a concrete expression (atoms, integer literals, the pattern
/// operator set, parentheses). Same precedence as the pattern language;
/// any identifier is an atom.
pub fn parse_concrete(src: &str) -> Result<(ExprArena, CId), Diagnostic> {
    let toks = lex(src)?;
    let mut arena = ExprArena::new();
    let mut p = ExprParser { toks: &toks, pos: 0 };
    let id = p.expr(&mut arena, 0)?;
    if p.pos < p.toks.len() {
        let t = &p.toks[p.pos];
        return Err(Diagnostic::new(t.line, t.col, format!("unexpected {}", t.tok.describe())));
    }
    Ok((arena, id))
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
}

// Loosest to tightest, same tiers as the pattern grammar.
const LEVELS: [&[(Tok, BinOp)]; 6] = [
    &[(Tok::Pipe, BinOp::Or)],
    &[(Tok::Caret, BinOp::Xor)],
    &[(Tok::Amp, BinOp::And)],
    &[(Tok::Shl, BinOp::Shl), (Tok::Shr, BinOp::Shr), (Tok::UShr, BinOp::UShr)],
    &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
    &[(Tok::Star, BinOp::Mul)],
];

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err_here(&self, msg: &str) -> Diagnostic {
        match self.toks.get(self.pos) {
            Some(t) => Diagnostic::new(t.line, t.col, msg.to_string()),
            None => {
                let (l, c) = self
                    .toks
                    .last()
                    .map(|t| (t.line, t.col))
                    .unwrap_or((1, 1));
                Diagnostic::new(l, c, format!("{msg} (at end of input)"))
            }
        }
    }

    fn expr(&mut self, arena: &mut ExprArena, level: usize) -> Result<CId, Diagnostic> {
        if level == LEVELS.len() {
            return self.primary(arena);
        }
        let mut lhs = self.expr(arena, level + 1)?;
        'outer: loop {
            for (tok, op) in LEVELS[level] {
                if self.peek() == Some(tok) {
                    self.pos += 1;
                    let rhs = self.expr(arena, level + 1)?;
                    lhs = arena.op(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn primary(&mut self, arena: &mut ExprArena) -> Result<CId, Diagnostic> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr(arena, 0)?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err_here("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Num { value, .. }) => {
                        self.pos += 1;
                        Ok(arena.lit(-(value as i64)))
                    }
                    _ => Err(self.err_here("`-` may only negate an integer literal")),
                }
            }
            Some(Tok::Num { value, .. }) => {
                self.pos += 1;
                Ok(arena.lit(value as i64))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(arena.atom(&name))
            }
            _ => Err(self.err_here("expected an expression")),
        }
    }
}
