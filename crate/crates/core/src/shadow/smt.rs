//! SMT encoding of the shadow question.
//!
//! "X shadows Y" means every expression Y matches is already matched by X —
//! Y can never fire if X is tried first. The encoding quantifies over
//! expression trees directly, as a recursive datatype:
//!
//! ```text
//! (declare-datatypes ((T 0)) (((nil (val Int)) (tree (opc Opc) (in1 T) (in2 T)))))
//! ```
//!
//! A `nil` leaf is any program value; its `val` only becomes meaningful
//! when a pattern constrains the leaf to be a constant. Each pattern's
//! shape is a conjunction Φ over one tree variable per distinct DAG node
//! (shared nodes reuse their variable, which is exactly the repeated-
//! variable identity constraint). The claim checked is
//!
//! ```text
//! (not (forall y-nodes. Φ_Y ∧ P_Y ⇒ exists x-nodes. Φ_X ∧ P_X ∧ Ψ))
//! ```
//!
//! where Ψ equates the two patterns' node variables position by position.
//! `unsat` means no Y-match escapes X: X shadows Y.
//!
//! Preconditions translate to *unbounded* integer arithmetic (they are
//! restricted to `+ - *` over constants at parse time); constant leaves are
//! bounded to the pattern width, which keeps the usual "small constant"
//! guards faithful without modeling full wraparound.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::east::{ENode, NodeId, PrecondEast};
use crate::lang::ast::{BinOp, CmpOp, IntWidth};
use crate::rewrite::CompiledPattern;

/// A rendered script plus the variable layout, for inspection and tests.
#[derive(Debug, Clone)]
pub struct SmtScript {
    pub text: String,
    /// Universally quantified tree variables (`y1`…), pre-order.
    pub y_tree_vars: Vec<String>,
    /// Existentially quantified tree variables (`x1`…), pre-order.
    pub x_tree_vars: Vec<String>,
    /// Bounded Int variables for Y's constant leaves (`yw…`).
    pub y_value_vars: Vec<String>,
    /// Bounded Int variables for X's constant leaves (`xw…`).
    pub x_value_vars: Vec<String>,
    /// The Ψ equalities, as (x var, y var) pairs in emission order.
    pub psi: Vec<(String, String)>,
}

fn opc_ctor(op: BinOp, width: IntWidth) -> String {
    format!("op_{}{}", op.ir_name(), width.opcode_suffix())
}

/// All 18 opcode constructors, 32-bit family first.
fn opc_ctors() -> Vec<String> {
    let mut out = Vec::new();
    for width in [IntWidth::I32, IntWidth::I64] {
        for op in BinOp::ALL {
            out.push(opc_ctor(op, width));
        }
    }
    out
}

fn smt_int(v: i64) -> String {
    if v < 0 {
        // i64::MIN has no i64 negation; go through the unsigned magnitude.
        format!("(- {})", (v as i128).unsigned_abs())
    } else {
        v.to_string()
    }
}

/// Per-pattern encoding state: pre-order numbering of the distinct before
/// nodes and the shape/constant conjuncts over them.
struct Side {
    prefix: &'static str,
    /// NodeId → tree variable name.
    var: HashMap<NodeId, String>,
    /// Pre-order list of tree variable names.
    tree_vars: Vec<String>,
    value_vars: Vec<String>,
    conjuncts: Vec<String>,
}

impl Side {
    fn build(prefix: &'static str, cp: &CompiledPattern) -> Result<Side, String> {
        let arena = &cp.easts.arena;
        let width = cp.width();
        let mut side = Side {
            prefix,
            var: HashMap::new(),
            tree_vars: Vec::new(),
            value_vars: Vec::new(),
            conjuncts: Vec::new(),
        };

        // Number distinct nodes in depth-first first-visit order.
        for id in crate::east::reachable(arena, cp.easts.before) {
            let name = format!("{prefix}{}", side.tree_vars.len() + 1);
            side.var.insert(id, name.clone());
            side.tree_vars.push(name);
        }

        for id in crate::east::reachable(arena, cp.easts.before) {
            let v = side.var[&id].clone();
            match arena.node(id) {
                ENode::FreeVar(_) => {}
                ENode::ConstVar(_) => {
                    let w = format!("{prefix}w{}", &v[prefix.len()..]);
                    side.conjuncts.push(format!("((_ is nil) {v})"));
                    side.conjuncts.push(format!("(= (val {v}) {w})"));
                    side.conjuncts.push(format!("(<= {} {w})", smt_int(width.min_value())));
                    side.conjuncts.push(format!("(<= {w} {})", smt_int(width.max_value())));
                    side.value_vars.push(w);
                }
                ENode::Lit(k) => {
                    side.conjuncts.push(format!("((_ is nil) {v})"));
                    side.conjuncts.push(format!("(= (val {v}) {})", smt_int(*k)));
                }
                ENode::Op { op, lhs, rhs } => {
                    side.conjuncts.push(format!("((_ is tree) {v})"));
                    side.conjuncts.push(format!("(= (opc {v}) {})", opc_ctor(*op, width)));
                    side.conjuncts.push(format!("(= (in1 {v}) {})", side.var[lhs]));
                    side.conjuncts.push(format!("(= (in2 {v}) {})", side.var[rhs]));
                }
            }
        }

        for pre in &cp.easts.preconds {
            let rendered = side.render_precond(cp, pre)?;
            side.conjuncts.push(rendered);
        }
        Ok(side)
    }

    /// The value variable of a constant-parameter node.
    fn value_var_of(&self, id: NodeId) -> Result<String, String> {
        let v = self.var.get(&id).ok_or_else(|| {
            "precondition references a constant that the matched shape never binds".to_string()
        })?;
        Ok(format!("{}w{}", self.prefix, &v[self.prefix.len()..]))
    }

    fn render_precond(&self, cp: &CompiledPattern, pre: &PrecondEast) -> Result<String, String> {
        match pre {
            PrecondEast::Cmp(op, l, r) => {
                let ls = self.render_arith(cp, *l)?;
                let rs = self.render_arith(cp, *r)?;
                Ok(match op {
                    CmpOp::Eq => format!("(= {ls} {rs})"),
                    CmpOp::Ne => format!("(distinct {ls} {rs})"),
                    CmpOp::Lt => format!("(< {ls} {rs})"),
                    CmpOp::Le => format!("(<= {ls} {rs})"),
                    CmpOp::Gt => format!("(> {ls} {rs})"),
                    CmpOp::Ge => format!("(>= {ls} {rs})"),
                })
            }
            PrecondEast::And(a, b) => Ok(format!(
                "(and {} {})",
                self.render_precond(cp, a)?,
                self.render_precond(cp, b)?
            )),
            PrecondEast::Or(a, b) => Ok(format!(
                "(or {} {})",
                self.render_precond(cp, a)?,
                self.render_precond(cp, b)?
            )),
            PrecondEast::Not(a) => Ok(format!("(not {})", self.render_precond(cp, a)?)),
        }
    }

    fn render_arith(&self, cp: &CompiledPattern, id: NodeId) -> Result<String, String> {
        match cp.easts.arena.node(id) {
            ENode::ConstVar(_) => self.value_var_of(id),
            ENode::Lit(k) => Ok(smt_int(*k)),
            ENode::Op { op, lhs, rhs } => {
                let tok = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    other => {
                        return Err(format!(
                            "precondition operator `{}` has no integer translation",
                            other.token()
                        ))
                    }
                };
                Ok(format!(
                    "({tok} {} {})",
                    self.render_arith(cp, *lhs)?,
                    self.render_arith(cp, *rhs)?
                ))
            }
            ENode::FreeVar(n) => {
                Err(format!("precondition references non-constant variable `{n}`"))
            }
        }
    }
}

/// Walks both patterns' shapes in lockstep and collects the Ψ equalities.
/// Recursion continues only while both sides are operators; a visited
/// (x node, y node) pair is never emitted twice.
fn psi_pairs(x: &CompiledPattern, y: &CompiledPattern) -> Vec<(NodeId, NodeId)> {
    fn go(
        x: &CompiledPattern,
        y: &CompiledPattern,
        xi: NodeId,
        yi: NodeId,
        seen: &mut HashSet<(NodeId, NodeId)>,
        out: &mut Vec<(NodeId, NodeId)>,
    ) {
        if !seen.insert((xi, yi)) {
            return;
        }
        out.push((xi, yi));
        if let (
            ENode::Op { lhs: xl, rhs: xr, .. },
            ENode::Op { lhs: yl, rhs: yr, .. },
        ) = (x.easts.arena.node(xi), y.easts.arena.node(yi))
        {
            go(x, y, *xl, *yl, seen, out);
            go(x, y, *xr, *yr, seen, out);
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    go(x, y, x.easts.before, y.easts.before, &mut seen, &mut out);
    out
}

fn and_of(conjuncts: &[String], indent: &str) -> String {
    match conjuncts.len() {
        0 => "true".to_string(),
        1 => conjuncts[0].clone(),
        _ => {
            let mut s = String::from("(and");
            for c in conjuncts {
                s.push('\n');
                s.push_str(indent);
                s.push_str(c);
            }
            s.push(')');
            s
        }
    }
}

fn binder_list(tree_vars: &[String], value_vars: &[String]) -> String {
    let mut parts: Vec<String> = tree_vars.iter().map(|v| format!("({v} T)")).collect();
    parts.extend(value_vars.iter().map(|v| format!("({v} Int)")));
    parts.join(" ")
}

/// Encodes "does `x` shadow `y`?" as an SMT-LIB 2 script ending in
/// `(check-sat)`. `unsat` answers yes. Errs if the widths differ — the
/// question is then settled structurally and needs no solver.
pub fn encode_shadow_smt(x: &CompiledPattern, y: &CompiledPattern) -> Result<SmtScript, String> {
    if x.width() != y.width() {
        return Err(format!(
            "`{}` is {} and `{}` is {}: different widths never share matches",
            x.name(),
            x.width().java_name(),
            y.name(),
            y.width().java_name()
        ));
    }

    let xs = Side::build("x", x)?;
    let ys = Side::build("y", y)?;
    let pairs = psi_pairs(x, y);
    let psi: Vec<(String, String)> = pairs
        .iter()
        .map(|(xi, yi)| (xs.var[xi].clone(), ys.var[yi].clone()))
        .collect();

    let mut inner = xs.conjuncts.clone();
    inner.extend(psi.iter().map(|(xv, yv)| format!("(= {xv} {yv})")));

    let mut text = String::new();
    let _ = writeln!(text, "; does {} shadow {}? unsat = yes", x.name(), y.name());
    let _ = writeln!(text, "; x {}", x.pattern.summary());
    let _ = writeln!(text, "; y {}", y.pattern.summary());
    let _ = writeln!(
        text,
        "(declare-datatypes ((Opc 0)) ((({}))))",
        opc_ctors().join(") (")
    );
    let _ = writeln!(
        text,
        "(declare-datatypes ((T 0)) (((nil (val Int)) (tree (opc Opc) (in1 T) (in2 T)))))"
    );
    let _ = writeln!(text, "(assert (not");
    let _ = writeln!(text, "  (forall ({})", binder_list(&ys.tree_vars, &ys.value_vars));
    let _ = writeln!(text, "    (=> {}", and_of(&ys.conjuncts, "          "));
    let _ = writeln!(
        text,
        "        (exists ({})",
        binder_list(&xs.tree_vars, &xs.value_vars)
    );
    let _ = writeln!(text, "          {})))))", and_of(&inner, "            "));
    let _ = writeln!(text, "(check-sat)");

    Ok(SmtScript {
        text,
        y_tree_vars: ys.tree_vars,
        x_tree_vars: xs.tree_vars,
        y_value_vars: ys.value_vars,
        x_value_vars: xs.value_vars,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_pattern_file;
    use crate::rewrite::compile;

    fn cp(src: &str) -> CompiledPattern {
        compile(&parse_pattern_file(src).unwrap().remove(0))
    }

    fn padd2() -> CompiledPattern {
        cp("@Pattern void pAdd2(long a, long b, long c, long d) { \
            before((a - b) + (c - d)); after((a + c) - (b + d)); }")
    }

    fn padd5() -> CompiledPattern {
        cp("@Pattern void pAdd5(long a, long b, long c) { \
            before((a - b) + (b - c)); after(a - c); }")
    }

    #[test]
    fn padd2_padd5_variable_layout() {
        let s = encode_shadow_smt(&padd2(), &padd5()).unwrap();
        // X = (a-b)+(c-d): 7 distinct nodes. Y = (a-b)+(b-c): 6 — b is shared.
        assert_eq!(s.x_tree_vars.len(), 7);
        assert_eq!(s.y_tree_vars.len(), 6);
        assert!(s.x_value_vars.is_empty() && s.y_value_vars.is_empty());
        // Lockstep alignment: X's [2] subtree lands on Y's shared b at [2,1].
        assert_eq!(
            s.psi,
            vec![
                ("x1".into(), "y1".into()),
                ("x2".into(), "y2".into()),
                ("x3".into(), "y3".into()),
                ("x4".into(), "y4".into()),
                ("x5".into(), "y5".into()),
                ("x6".into(), "y4".into()),
                ("x7".into(), "y6".into()),
            ]
        );
    }

    #[test]
    fn reversed_direction_exposes_the_identity_constraint() {
        let s = encode_shadow_smt(&padd5(), &padd2()).unwrap();
        // X = pAdd5 has 6 vars; its shared b aligns with both y4 and y6,
        // which is what forces sat (a counterexample with y4 ≠ y6).
        assert_eq!(s.x_tree_vars.len(), 6);
        assert_eq!(s.y_tree_vars.len(), 7);
        let b_pairs: Vec<&(String, String)> =
            s.psi.iter().filter(|(xv, _)| xv == "x4").collect();
        assert_eq!(b_pairs.len(), 2);
        assert_eq!(b_pairs[0].1, "y4");
        assert_eq!(b_pairs[1].1, "y6");
    }

    #[test]
    fn constants_become_bounded_value_vars() {
        let x = cp("@Pattern void t(int x, @Constant int c) { \
                    before(x + c); if (c != 0) { after(c + x); } }");
        let y = cp("@Pattern void u(int x, int y) { before(x + y); after(y + x); }");
        let s = encode_shadow_smt(&x, &y).unwrap();
        assert_eq!(s.x_value_vars, vec!["xw3"]);
        assert!(s.text.contains("((_ is nil) x3)"));
        assert!(s.text.contains("(= (val x3) xw3)"));
        assert!(s.text.contains("(<= (- 2147483648) xw3)"));
        assert!(s.text.contains("(<= xw3 2147483647)"));
        assert!(s.text.contains("(distinct xw3 0)"), "{}", s.text);
    }

    #[test]
    fn literals_pin_leaf_values() {
        let x = cp("@Pattern void t(int x) { before(x ^ -1); after(x ^ -1); }");
        let y = cp("@Pattern void u(int x, int y) { before(x ^ y); after(y ^ x); }");
        let s = encode_shadow_smt(&x, &y).unwrap();
        assert!(s.text.contains("(= (val x3) (- 1))"), "{}", s.text);
    }

    #[test]
    fn width_mismatch_is_refused() {
        let x = cp("@Pattern void t(int x) { before(x + x); after(x << 1); }");
        let err = encode_shadow_smt(&x, &padd5()).unwrap_err();
        assert!(err.contains("different widths"), "{err}");
    }

    #[test]
    fn script_is_well_parenthesized_and_ends_with_check_sat() {
        let s = encode_shadow_smt(&padd2(), &padd5()).unwrap();
        let mut depth: i64 = 0;
        for ch in s.text.chars() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    assert!(depth >= 0);
                }
                _ => {}
            }
        }
        assert_eq!(depth, 0);
        assert!(s.text.trim_end().ends_with("(check-sat)"));
        // Both widths' opcode vocabularies are declared once.
        assert!(s.text.contains("(op_AddI)"));
        assert!(s.text.contains("(op_URShiftL)"));
        // Every line must be a comment, a command, or an indented
        // continuation — anything else is garbage the solver sees. (The
        // header once interpolated a multi-line rendering; only its first
        // line got the `;`.)
        for line in s.text.lines() {
            assert!(
                line.is_empty()
                    || line.starts_with(';')
                    || line.starts_with('(')
                    || line.starts_with(' '),
                "bare text leaked into the script: {line:?}"
            );
        }
    }
}
