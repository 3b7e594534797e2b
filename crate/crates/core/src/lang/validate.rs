//! Semantic checks that run after parsing.
//!
//! The parser already guarantees structural well-formedness (declared
//! variables, one before/after pair, placement). This pass checks the rules
//! that need the whole pattern:
//!
//! - `after` may only use variables that also occur in `before` (otherwise
//!   they would be unbound at rewrite time);
//! - preconditions range over `@Constant` parameters and literals only, with
//!   `+`, `-`, `*` as the only arithmetic (the precondition theory must stay
//!   translatable to plain integer arithmetic for the shadow prover);
//! - every precondition mentions at least one constant parameter (a guard
//!   over nothing can only be constant-true or constant-false).

use super::ast::*;
use super::Diagnostic;

pub fn validate_pattern(p: &Pattern) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let before_vars = p.before.vars();

    for v in p.after.vars() {
        if !before_vars.contains(&v) {
            diags.push(Diagnostic::new(
                0,
                0,
                format!(
                    "pattern `{}`: after-expression uses `{v}` which does not occur in before",
                    p.name
                ),
            ));
        }
    }

    for pre in &p.preconds {
        let rendered = pretty_precond(pre);
        let mut mentions_const = false;
        for v in pre.vars() {
            match p.param(v).map(|q| q.kind) {
                Some(ParamKind::Constant) => mentions_const = true,
                Some(ParamKind::Free) => diags.push(Diagnostic::new(
                    0,
                    0,
                    format!(
                        "pattern `{}`: precondition `{rendered}` uses free variable `{v}`; \
                         preconditions may only reference @Constant parameters",
                        p.name
                    ),
                )),
                // Unreachable after parsing, but keep validation standalone.
                None => diags.push(Diagnostic::new(
                    0,
                    0,
                    format!("pattern `{}`: precondition uses undeclared `{v}`", p.name),
                )),
            }
        }
        if !mentions_const {
            diags.push(Diagnostic::new(
                0,
                0,
                format!(
                    "pattern `{}`: precondition `{rendered}` references no @Constant parameter",
                    p.name
                ),
            ));
        }
        for term in pre.arith_terms() {
            check_precond_arith(p, term, &rendered, &mut diags);
        }
        // Precondition constants are bound by matching `before`; a variable
        // that never occurs there has no value when the guard is evaluated.
        for v in pre.vars() {
            if !before_vars.contains(&v) && p.param(v).is_some() {
                diags.push(Diagnostic::new(
                    0,
                    0,
                    format!(
                        "pattern `{}`: precondition `{rendered}` uses `{v}` which does not \
                         occur in before, so it is never bound",
                        p.name
                    ),
                ));
            }
        }
    }

    diags
}

fn check_precond_arith(p: &Pattern, e: &ExprAst, rendered: &str, diags: &mut Vec<Diagnostic>) {
    match e {
        ExprAst::Var(_) | ExprAst::Lit(_) => {}
        ExprAst::Bin { op, lhs, rhs } => {
            if !matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul) {
                diags.push(Diagnostic::new(
                    0,
                    0,
                    format!(
                        "pattern `{}`: precondition `{rendered}` uses `{}`; only `+`, `-`, `*` \
                         are supported in precondition arithmetic",
                        p.name,
                        op.token()
                    ),
                ));
            }
            check_precond_arith(p, lhs, rendered, diags);
            check_precond_arith(p, rhs, rendered, diags);
        }
    }
}
