//! Hash-consed expression DAGs ("eASTs") for patterns.
//!
//! Each pattern compiles into one arena holding the before-expression, the
//! after-expression and every precondition operand. Interning guarantees
//! full structural sharing: writing `a` twice yields one node, and the
//! matcher's "same variable ⇒ same subexpression" rule falls out of plain
//! node-id equality. Children are always interned before parents, so a
//! node's children have strictly smaller ids and the DAG is acyclic by
//! construction.
//!
//! Nodes reachable from the before-root are addressed by *access paths*:
//! sequences of 1-based child indices (`[2, 1]` = first operand of the
//! second operand). A shared node has several paths; its *canonical* path is
//! the lexicographically smallest one, which is also the first one found by
//! a left-to-right depth-first enumeration.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::lang::ast::{BinOp, CmpOp, ExprAst, IntWidth, Param, ParamKind, Pattern, PrecondAst};

/// Index into an [`EastArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// 1-based child indices from the before-root to a node. The empty path is
/// the root itself.
pub type AccessPath = Vec<u8>;

/// Renders a path in operand-accessor form, e.g. `[2, 1]` → `in(2).in(1)`.
pub fn path_display(path: &AccessPath) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter().map(|i| format!("in({i})")).collect::<Vec<_>>().join(".")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ENode {
    /// Free pattern variable: matches any subexpression.
    FreeVar(String),
    /// `@Constant` pattern variable: matches only literal constants.
    ConstVar(String),
    Lit(i64),
    Op { op: BinOp, lhs: NodeId, rhs: NodeId },
}

impl ENode {
    pub fn is_leaf(&self) -> bool {
        !matches!(self, ENode::Op { .. })
    }
}

/// Interning arena for one pattern's expressions. All nodes share the
/// pattern's width.
#[derive(Debug, Clone)]
pub struct EastArena {
    pub width: IntWidth,
    nodes: Vec<ENode>,
    memo: HashMap<ENode, NodeId>,
}

impl EastArena {
    pub fn new(width: IntWidth) -> Self {
        EastArena { width, nodes: Vec::new(), memo: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &ENode {
        &self.nodes[id.index()]
    }

    /// Looks up an already-interned node without inserting.
    pub fn lookup(&self, node: &ENode) -> Option<NodeId> {
        self.memo.get(node).copied()
    }

    pub fn intern(&mut self, node: ENode) -> NodeId {
        if let ENode::Op { lhs, rhs, .. } = &node {
            debug_assert!(lhs.index() < self.nodes.len() && rhs.index() < self.nodes.len());
        }
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.memo.insert(node, id);
        id
    }

    /// One node per line: `id kind [operands]`, in arena order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let line = match n {
                ENode::FreeVar(v) => format!("{i} var {v}"),
                ENode::ConstVar(v) => format!("{i} const {v}"),
                ENode::Lit(v) => format!("{i} lit {v}"),
                ENode::Op { op, lhs, rhs } => {
                    format!("{i} {} {} {}", op.ir_name().to_lowercase(), lhs.0, rhs.0)
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// A precondition with its arithmetic operands interned into the arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrecondEast {
    Cmp(CmpOp, NodeId, NodeId),
    And(Box<PrecondEast>, Box<PrecondEast>),
    Or(Box<PrecondEast>, Box<PrecondEast>),
    Not(Box<PrecondEast>),
}

/// The compiled expressions of one pattern: a shared arena plus the roots.
#[derive(Debug, Clone)]
pub struct PatternEasts {
    pub arena: EastArena,
    pub before: NodeId,
    pub after: NodeId,
    pub preconds: Vec<PrecondEast>,
}

/// Interns the pattern's expressions into one arena. Identical leaves and
/// identical subexpressions across before/after/preconditions collapse to
/// single nodes.
pub fn build_easts(p: &Pattern) -> PatternEasts {
    let mut arena = EastArena::new(p.width);
    let kinds: HashMap<&str, ParamKind> =
        p.params.iter().map(|Param { name, kind }| (name.as_str(), *kind)).collect();

    fn lower(arena: &mut EastArena, kinds: &HashMap<&str, ParamKind>, e: &ExprAst) -> NodeId {
        match e {
            ExprAst::Var(n) => {
                let node = match kinds.get(n.as_str()) {
                    Some(ParamKind::Constant) => ENode::ConstVar(n.clone()),
                    _ => ENode::FreeVar(n.clone()),
                };
                arena.intern(node)
            }
            ExprAst::Lit(v) => arena.intern(ENode::Lit(*v)),
            ExprAst::Bin { op, lhs, rhs } => {
                let l = lower(arena, kinds, lhs);
                let r = lower(arena, kinds, rhs);
                arena.intern(ENode::Op { op: *op, lhs: l, rhs: r })
            }
        }
    }

    fn lower_precond(
        arena: &mut EastArena,
        kinds: &HashMap<&str, ParamKind>,
        p: &PrecondAst,
    ) -> PrecondEast {
        match p {
            PrecondAst::Cmp(op, l, r) => {
                let l = lower(arena, kinds, l);
                let r = lower(arena, kinds, r);
                PrecondEast::Cmp(*op, l, r)
            }
            PrecondAst::And(a, b) => PrecondEast::And(
                Box::new(lower_precond(arena, kinds, a)),
                Box::new(lower_precond(arena, kinds, b)),
            ),
            PrecondAst::Or(a, b) => PrecondEast::Or(
                Box::new(lower_precond(arena, kinds, a)),
                Box::new(lower_precond(arena, kinds, b)),
            ),
            PrecondAst::Not(a) => PrecondEast::Not(Box::new(lower_precond(arena, kinds, a))),
        }
    }

    let before = lower(&mut arena, &kinds, &p.before);
    let after = lower(&mut arena, &kinds, &p.after);
    let preconds = p.preconds.iter().map(|q| lower_precond(&mut arena, &kinds, q)).collect();
    PatternEasts { arena, before, after, preconds }
}

/// Every root-to-node path reachable from `root`, in depth-first
/// (= lexicographic) order. The root's empty path comes first. A node shared
/// via several operand positions appears once per path.
pub fn all_paths(arena: &EastArena, root: NodeId) -> Vec<(AccessPath, NodeId)> {
    let mut out = Vec::new();
    fn go(arena: &EastArena, id: NodeId, path: &mut AccessPath, out: &mut Vec<(AccessPath, NodeId)>) {
        out.push((path.clone(), id));
        if let ENode::Op { lhs, rhs, .. } = arena.node(id) {
            path.push(1);
            go(arena, *lhs, path, out);
            path.pop();
            path.push(2);
            go(arena, *rhs, path, out);
            path.pop();
        }
    }
    go(arena, root, &mut Vec::new(), &mut out);
    out
}

/// The lexicographically smallest path for every node reachable from `root`.
/// Because [`all_paths`] enumerates in lexicographic order, the first path
/// seen per node is canonical.
pub fn canonical_paths(arena: &EastArena, root: NodeId) -> HashMap<NodeId, AccessPath> {
    let mut map = HashMap::new();
    for (path, id) in all_paths(arena, root) {
        map.entry(id).or_insert(path);
    }
    map
}

/// Nodes reachable from `root` in depth-first first-visit order (the
/// numbering order used by the shadow encoding).
pub fn reachable(arena: &EastArena, root: NodeId) -> Vec<NodeId> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    fn go(arena: &EastArena, id: NodeId, seen: &mut HashSet<NodeId>, order: &mut Vec<NodeId>) {
        if !seen.insert(id) {
            return;
        }
        order.push(id);
        if let ENode::Op { lhs, rhs, .. } = arena.node(id) {
            go(arena, *lhs, seen, order);
            go(arena, *rhs, seen, order);
        }
    }
    go(arena, root, &mut seen, &mut order);
    order
}

/// Multiset of operators among the *distinct* internal nodes reachable from
/// `root`. A DAG-shared node counts once, not once per path.
pub fn opcode_multiset(arena: &EastArena, root: NodeId) -> BTreeMap<BinOp, usize> {
    let mut out = BTreeMap::new();
    for id in reachable(arena, root) {
        if let ENode::Op { op, .. } = arena.node(id) {
            *out.entry(*op).or_insert(0) += 1;
        }
    }
    out
}

/// Evaluates the subtree at `id` under `env` (parameter name → value) with
/// the arena's wrapping width semantics.
pub fn evaluate_node(
    arena: &EastArena,
    id: NodeId,
    env: &BTreeMap<String, i64>,
) -> Result<i64, String> {
    let w = arena.width;
    match arena.node(id) {
        ENode::FreeVar(n) | ENode::ConstVar(n) => env
            .get(n)
            .map(|v| crate::semantics::wrap(w, *v))
            .ok_or_else(|| format!("no value for `{n}` in environment")),
        ENode::Lit(v) => Ok(crate::semantics::wrap(w, *v)),
        ENode::Op { op, lhs, rhs } => {
            let a = evaluate_node(arena, *lhs, env)?;
            let b = evaluate_node(arena, *rhs, env)?;
            Ok(crate::semantics::apply_binop(w, *op, a, b))
        }
    }
}

/// Evaluates a compiled precondition under `env`.
pub fn evaluate_precond(
    arena: &EastArena,
    pre: &PrecondEast,
    env: &BTreeMap<String, i64>,
) -> Result<bool, String> {
    match pre {
        PrecondEast::Cmp(op, l, r) => {
            let a = evaluate_node(arena, *l, env)?;
            let b = evaluate_node(arena, *r, env)?;
            Ok(crate::semantics::apply_cmp(*op, a, b))
        }
        PrecondEast::And(a, b) => {
            Ok(evaluate_precond(arena, a, env)? && evaluate_precond(arena, b, env)?)
        }
        PrecondEast::Or(a, b) => {
            Ok(evaluate_precond(arena, a, env)? || evaluate_precond(arena, b, env)?)
        }
        PrecondEast::Not(a) => Ok(!evaluate_precond(arena, a, env)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_pattern_file;

    fn compile(src: &str) -> (Pattern, PatternEasts) {
        let p = parse_pattern_file(src).unwrap().remove(0);
        let e = build_easts(&p);
        (p, e)
    }

    #[test]
    fn padd6_has_six_nodes_with_shared_a() {
        // (a - b) + (c - a): a, b, a-b, c, c-a, + — six nodes, `a` interned once.
        let (_, e) = compile(
            "@Pattern void pAdd6(long a, long b, long c) { \
             before((a - b) + (c - a)); after(c - b); }",
        );
        let before_nodes = reachable(&e.arena, e.before);
        assert_eq!(before_nodes.len(), 6);
        let frees = before_nodes
            .iter()
            .filter(|id| matches!(e.arena.node(**id), ENode::FreeVar(_)))
            .count();
        assert_eq!(frees, 3);
        // after = c - b reuses both leaves: only one new node in the arena.
        assert_eq!(e.arena.len(), 7);
    }

    #[test]
    fn x_plus_x_shares_the_leaf() {
        let (_, e) = compile("@Pattern void t(int x) { before(x + x); after(x << 1); }");
        assert_eq!(reachable(&e.arena, e.before).len(), 2);
        let ENode::Op { lhs, rhs, .. } = e.arena.node(e.before) else { panic!() };
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_path_of_shared_node_is_smallest() {
        let (_, e) = compile(
            "@Pattern void pAdd6(long a, long b, long c) { \
             before((a - b) + (c - a)); after(c - b); }",
        );
        let canon = canonical_paths(&e.arena, e.before);
        let a = e.arena.lookup(&ENode::FreeVar("a".into())).unwrap();
        assert_eq!(canon[&a], vec![1, 1], "shared `a` is addressed [1,1], never [2,2]");
        let paths = all_paths(&e.arena, e.before);
        let a_paths: Vec<_> =
            paths.iter().filter(|(_, id)| *id == a).map(|(p, _)| p.clone()).collect();
        assert_eq!(a_paths, vec![vec![1, 1], vec![2, 2]]);
    }

    #[test]
    fn all_paths_enumeration_order_is_lexicographic() {
        let (_, e) = compile(
            "@Pattern void pAdd6(long a, long b, long c) { \
             before((a - b) + (c - a)); after(c - b); }",
        );
        let paths: Vec<AccessPath> =
            all_paths(&e.arena, e.before).into_iter().map(|(p, _)| p).collect();
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(paths, sorted);
        assert_eq!(paths.len(), 7); // root + 6 operand positions
    }

    #[test]
    fn opcode_multiset_counts_distinct_nodes() {
        let (_, e) = compile(
            "@Pattern void pAdd6(long a, long b, long c) { \
             before((a - b) + (c - a)); after(c - b); }",
        );
        let ms = opcode_multiset(&e.arena, e.before);
        assert_eq!(ms.get(&BinOp::Add), Some(&1));
        assert_eq!(ms.get(&BinOp::Sub), Some(&2));
        let ms_after = opcode_multiset(&e.arena, e.after);
        assert_eq!(ms_after.get(&BinOp::Sub), Some(&1));
        assert_eq!(ms_after.get(&BinOp::Add), None);
    }

    #[test]
    fn children_have_smaller_ids() {
        let (_, e) = compile(
            "@Pattern void t(int x, @Constant int c) { before((x ^ -1) + c); \
             after((c - 1) - x); }",
        );
        for i in 0..e.arena.len() {
            if let ENode::Op { lhs, rhs, .. } = e.arena.node(NodeId(i as u32)) {
                assert!(lhs.index() < i && rhs.index() < i);
            }
        }
    }

    #[test]
    fn dump_is_one_node_per_line() {
        let (_, e) = compile("@Pattern void t(int x) { before(x + x); after(x << 1); }");
        let dump = e.arena.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "0 var x");
        assert_eq!(lines[1], "1 add 0 0");
        assert_eq!(lines[2], "2 lit 1");
        assert_eq!(lines[3], "3 lshift 0 2");
    }

    #[test]
    fn interning_is_idempotent() {
        let mut arena = EastArena::new(IntWidth::I32);
        let x1 = arena.intern(ENode::FreeVar("x".into()));
        let x2 = arena.intern(ENode::FreeVar("x".into()));
        assert_eq!(x1, x2);
        let s1 = arena.intern(ENode::Op { op: BinOp::Add, lhs: x1, rhs: x2 });
        let s2 = arena.intern(ENode::Op { op: BinOp::Add, lhs: x1, rhs: x1 });
        assert_eq!(s1, s2);
        assert_eq!(arena.len(), 2);
    }
}
