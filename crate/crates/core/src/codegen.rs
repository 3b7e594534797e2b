//! C++ matcher emission.
//!
//! Each pattern becomes a guard-and-rewrite block in the idiom of a JIT's
//! per-node `Ideal` hook: eagerly declare a `_P_in…` pointer for every
//! operand path of the matched shape, test the shape in one `&&` chain, and
//! build the replacement node on success.
//!
//! The clause order inside the `if` is what makes the eager declarations
//! safe. Opcode checks come first, in canonical-path order — a parent's
//! check always precedes its children's, so by the time a child pointer is
//! dereferenced its guarded declaration is known non-NULL. Constant checks,
//! same-node checks (pure pointer comparisons) and precondition clauses
//! follow, in that order.
//!
//! The root's opcode is never tested here: a snippet is meant to live in
//! the `Ideal` body of its root's node class, so the dispatch has already
//! happened. [`emit_pass_file`] does that grouping.

use std::collections::HashMap;

use crate::east::{all_paths, canonical_paths, AccessPath, ENode, NodeId};
use crate::lang::ast::{BinOp, CmpOp, IntWidth, PrecondAst};
use crate::rewrite::CompiledPattern;

/// One pattern's generated matcher, plus the grouping key it belongs under.
#[derive(Debug, Clone)]
pub struct EmittedSnippet {
    /// Pattern name.
    pub pattern: String,
    /// The full snippet: header comment, declarations, guard, rewrite.
    pub text: String,
    pub root_op: BinOp,
    pub width: IntWidth,
    /// Node-class stem, e.g. `SubL` for `SubLNode::Ideal` / `Op_SubL`.
    pub opcode_token: String,
}

fn ptr_name(path: &AccessPath) -> String {
    let digits: String = path.iter().map(|i| i.to_string()).collect();
    format!("_P_in{digits}")
}

fn type_name(path: &AccessPath) -> String {
    let digits: String = path.iter().map(|i| i.to_string()).collect();
    format!("_P_t{digits}")
}

fn opcode_token(op: BinOp, width: IntWidth) -> String {
    format!("{}{}", op.ir_name(), width.opcode_suffix())
}

fn type_class(width: IntWidth) -> &'static str {
    match width {
        IntWidth::I32 => "TypeInt",
        IntWidth::I64 => "TypeLong",
    }
}

fn isa_fn(width: IntWidth) -> &'static str {
    match width {
        IntWidth::I32 => "isa_int",
        IntWidth::I64 => "isa_long",
    }
}

fn con_fn(width: IntWidth) -> &'static str {
    match width {
        IntWidth::I32 => "intcon",
        IntWidth::I64 => "longcon",
    }
}

/// A snippet split into its header comment and indent-0 body lines, so the
/// pass emitter can re-indent it into a scoped block.
struct SnippetParts {
    header: String,
    lines: Vec<String>,
    root_op: BinOp,
    width: IntWidth,
}

fn build_snippet(cp: &CompiledPattern) -> Result<SnippetParts, String> {
    let arena = &cp.easts.arena;
    let width = cp.width();
    let ENode::Op { op: root_op, .. } = arena.node(cp.easts.before) else {
        return Err(format!(
            "pattern `{}`: the matched expression is a bare {}, not an operator; \
             there is no node class to hook",
            cp.name(),
            match arena.node(cp.easts.before) {
                ENode::Lit(_) => "literal",
                _ => "variable",
            }
        ));
    };
    let root_op = *root_op;

    let paths = all_paths(arena, cp.easts.before);
    let canon = canonical_paths(arena, cp.easts.before);

    let mut lines = Vec::new();

    // Operand pointers, one per path. Depth-1 operands of the root always
    // exist; deeper ones are fetched behind an input-count guard. From
    // depth 3 on, the parent pointer itself may be NULL (its own fetch may
    // have failed), so it is tested first.
    for (path, _) in paths.iter().skip(1) {
        let nm = ptr_name(path);
        let idx = *path.last().unwrap();
        if path.len() == 1 {
            lines.push(format!("Node* {nm} = in({idx});"));
        } else {
            let parent = ptr_name(&path[..path.len() - 1].to_vec());
            let guard = if path.len() == 2 {
                format!("{parent}->req() > {idx}")
            } else {
                format!("{parent} != NULL && {parent}->req() > {idx}")
            };
            lines.push(format!("Node* {nm} = {guard} ? {parent}->in({idx}) : NULL;"));
        }
    }

    // Constant leaves (declared-@Constant parameters and literals) get a
    // type view; a shared constant is declared once, at its canonical path.
    let mut const_leaves: Vec<(AccessPath, NodeId)> = canon
        .iter()
        .filter(|(id, _)| matches!(arena.node(**id), ENode::ConstVar(_) | ENode::Lit(_)))
        .map(|(id, path)| (path.clone(), *id))
        .collect();
    const_leaves.sort();
    for (path, _) in &const_leaves {
        let nm = ptr_name(path);
        let tnm = type_name(path);
        let ty = type_class(width);
        let isa = isa_fn(width);
        lines.push(format!(
            "const {ty}* {tnm} = {nm} == NULL ? NULL : phase->type({nm})->{isa}();"
        ));
    }

    // Guard clauses, in dereference-safe order.
    let mut clauses: Vec<String> = Vec::new();

    let mut internal: Vec<(AccessPath, NodeId)> = canon
        .iter()
        .filter(|(id, path)| {
            !path.is_empty() && matches!(arena.node(**id), ENode::Op { .. })
        })
        .map(|(id, path)| (path.clone(), *id))
        .collect();
    internal.sort();
    for (path, id) in &internal {
        let ENode::Op { op, .. } = arena.node(*id) else { unreachable!() };
        clauses.push(format!(
            "{}->Opcode() == Op_{}",
            ptr_name(path),
            opcode_token(*op, width)
        ));
    }

    for (path, id) in &const_leaves {
        let tnm = type_name(path);
        clauses.push(format!("{tnm} != NULL"));
        clauses.push(format!("{tnm}->is_con()"));
        if let ENode::Lit(v) = arena.node(*id) {
            clauses.push(format!("{tnm}->get_con() == {v}"));
        }
    }

    for (path, id) in paths.iter().skip(1) {
        let canonical = &canon[id];
        if canonical != path {
            clauses.push(format!("{} == {}", ptr_name(canonical), ptr_name(path)));
        }
    }

    let const_paths: HashMap<&str, &AccessPath> = const_leaves
        .iter()
        .filter_map(|(path, id)| match arena.node(*id) {
            ENode::ConstVar(n) => Some((n.as_str(), path)),
            _ => None,
        })
        .collect();
    for pre in &cp.pattern.preconds {
        clauses.push(render_precond_clause(pre, &const_paths)?);
    }

    let result = render_after(cp, &canon, cp.easts.after)?;

    if clauses.is_empty() {
        lines.push(format!("return {result};"));
    } else {
        for (i, c) in clauses.iter().enumerate() {
            let first = i == 0;
            let last = i + 1 == clauses.len();
            let mut line = String::new();
            if first {
                line.push_str("if (");
            } else {
                line.push_str("    && ");
            }
            line.push_str(c);
            if last {
                line.push_str(") {");
            }
            lines.push(line);
        }
        lines.push(format!("  return {result};"));
        lines.push("}".to_string());
    }

    let header = cp.pattern.summary();
    Ok(SnippetParts { header, lines, root_op, width })
}

/// Renders the replacement expression: reused operand pointers for matched
/// variables, `new …Node(…)` for fresh operators, and a `phase->intcon` /
/// `phase->longcon` call for any operand the matcher can prove constant.
fn render_after(
    cp: &CompiledPattern,
    canon: &HashMap<NodeId, AccessPath>,
    id: NodeId,
) -> Result<String, String> {
    let arena = &cp.easts.arena;
    let width = cp.width();
    match arena.node(id) {
        ENode::FreeVar(_) | ENode::ConstVar(_) => Ok(ptr_name(&canon[&id])),
        ENode::Lit(v) => Ok(format!("phase->{}({v})", con_fn(width))),
        ENode::Op { op, lhs, rhs } => {
            if const_only(cp, id) {
                let sym = render_const_expr(cp, canon, id, false)?;
                return Ok(format!("phase->{}({sym})", con_fn(width)));
            }
            let l = render_after(cp, canon, *lhs)?;
            let r = render_after(cp, canon, *rhs)?;
            Ok(format!("new {}Node({l}, {r})", opcode_token(*op, width)))
        }
    }
}

fn const_only(cp: &CompiledPattern, id: NodeId) -> bool {
    match cp.easts.arena.node(id) {
        ENode::FreeVar(_) => false,
        ENode::ConstVar(_) | ENode::Lit(_) => true,
        ENode::Op { lhs, rhs, .. } => const_only(cp, *lhs) && const_only(cp, *rhs),
    }
}

/// Renders an all-constant expression as C++ arithmetic over `get_con()`
/// values. `operand` adds parentheses around anything compound.
fn render_const_expr(
    cp: &CompiledPattern,
    canon: &HashMap<NodeId, AccessPath>,
    id: NodeId,
    operand: bool,
) -> Result<String, String> {
    let arena = &cp.easts.arena;
    match arena.node(id) {
        ENode::ConstVar(_) => Ok(format!("{}->get_con()", type_name(&canon[&id]))),
        ENode::Lit(v) => {
            if operand && *v < 0 {
                Ok(format!("({v})"))
            } else {
                Ok(v.to_string())
            }
        }
        ENode::Op { op, lhs, rhs } => {
            if *op == BinOp::UShr {
                return Err(format!(
                    "pattern `{}`: cannot fold `>>>` into a constant operand",
                    cp.name()
                ));
            }
            let l = render_const_expr(cp, canon, *lhs, true)?;
            let r = render_const_expr(cp, canon, *rhs, true)?;
            let text = format!("{l} {} {r}", op.token());
            Ok(if operand { format!("({text})") } else { text })
        }
        ENode::FreeVar(_) => unreachable!("const_only ruled out free variables"),
    }
}

/// Renders a precondition as one clause for the `&&` chain. Constant
/// parameters read through their matched type views.
fn render_precond_clause(
    pre: &PrecondAst,
    const_paths: &HashMap<&str, &AccessPath>,
) -> Result<String, String> {
    let clause = render_precond(pre, const_paths)?;
    // A top-level `||` must not bleed into the surrounding `&&` chain.
    Ok(if matches!(pre, PrecondAst::Or(..)) { format!("({clause})") } else { clause })
}

fn render_precond(
    pre: &PrecondAst,
    const_paths: &HashMap<&str, &AccessPath>,
) -> Result<String, String> {
    match pre {
        PrecondAst::Cmp(op, l, r) => {
            let ls = render_precond_arith(l, const_paths, false)?;
            let rs = render_precond_arith(r, const_paths, false)?;
            let tok = match op {
                CmpOp::Eq => "==",
                CmpOp::Ne => "!=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            Ok(format!("{ls} {tok} {rs}"))
        }
        PrecondAst::And(a, b) => {
            let asx = render_precond(a, const_paths)?;
            let bsx = render_precond(b, const_paths)?;
            let wrap = |p: &PrecondAst, s: String| {
                if matches!(p, PrecondAst::Or(..)) {
                    format!("({s})")
                } else {
                    s
                }
            };
            Ok(format!("{} && {}", wrap(a, asx), wrap(b, bsx)))
        }
        PrecondAst::Or(a, b) => {
            Ok(format!("{} || {}", render_precond(a, const_paths)?, render_precond(b, const_paths)?))
        }
        PrecondAst::Not(a) => Ok(format!("!({})", render_precond(a, const_paths)?)),
    }
}

fn render_precond_arith(
    e: &crate::lang::ast::ExprAst,
    const_paths: &HashMap<&str, &AccessPath>,
    operand: bool,
) -> Result<String, String> {
    use crate::lang::ast::ExprAst;
    match e {
        ExprAst::Var(n) => {
            let path = const_paths
                .get(n.as_str())
                .ok_or_else(|| format!("precondition variable `{n}` has no matched constant"))?;
            Ok(format!("{}->get_con()", type_name(path)))
        }
        ExprAst::Lit(v) => {
            if operand && *v < 0 {
                Ok(format!("({v})"))
            } else {
                Ok(v.to_string())
            }
        }
        ExprAst::Bin { op, lhs, rhs } => {
            let l = render_precond_arith(lhs, const_paths, true)?;
            let r = render_precond_arith(rhs, const_paths, true)?;
            let text = format!("{l} {} {r}", op.token());
            Ok(if operand { format!("({text})") } else { text })
        }
    }
}

/// The standalone matcher snippet for one pattern.
pub fn emit_matcher_snippet(cp: &CompiledPattern) -> Result<EmittedSnippet, String> {
    let parts = build_snippet(cp)?;
    let mut text = format!("// {}\n", parts.header);
    for l in &parts.lines {
        text.push_str(l);
        text.push('\n');
    }
    Ok(EmittedSnippet {
        pattern: cp.name().to_string(),
        text,
        root_op: parts.root_op,
        width: parts.width,
        opcode_token: opcode_token(parts.root_op, parts.width),
    })
}

/// Emits every pattern, grouped into one `Ideal` body per (root operator,
/// width) — the node class whose rewrite hook would host those patterns.
/// Groups appear in first-use order; within a group, earlier patterns are
/// tried first, so file order is priority order.
pub fn emit_pass_file(cps: &[CompiledPattern]) -> Result<String, String> {
    let mut order: Vec<(BinOp, IntWidth)> = Vec::new();
    let mut groups: HashMap<(BinOp, IntWidth), Vec<SnippetParts>> = HashMap::new();
    for cp in cps {
        let parts = build_snippet(cp)?;
        let key = (parts.root_op, parts.width);
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(parts);
    }

    let mut out = String::new();
    out.push_str("// Peephole rewrite pass bodies generated from pattern definitions.\n");
    out.push_str("// Each scoped block matches one pattern; the first hit rewrites and returns.\n");
    for key in order {
        let (op, width) = key;
        out.push('\n');
        out.push_str(&format!(
            "Node* {}Node::Ideal(PhaseGVN* phase, bool can_reshape) {{\n",
            opcode_token(op, width)
        ));
        for parts in &groups[&key] {
            out.push_str(&format!("  {{ // {}\n", parts.header));
            for l in &parts.lines {
                out.push_str("    ");
                out.push_str(l);
                out.push('\n');
            }
            out.push_str("  }\n");
        }
        out.push_str("  return NULL;\n");
        out.push_str("}\n");
    }
    Ok(out)
}
