//! Two's-complement integer semantics shared by the evaluator, the fuzzer,
//! the generated-condition interpreter and the shadow oracle.
//!
//! Everything is computed in `i64` and wrapped to the pattern width after
//! each operation, matching Java/JVM behavior:
//!
//! * `+`, `-`, `*` wrap silently at the width.
//! * shift counts are masked to the low 5 (32-bit) or 6 (64-bit) bits of the
//!   count operand, so `x << 33` at 32 bits shifts by 1.
//! * `>>` propagates the sign bit, `>>>` shifts in zeros. At 32 bits the
//!   zero-fill happens on the 32-bit value, not the widened one.

use crate::lang::ast::{BinOp, CmpOp, ExprAst, IntWidth, PrecondAst};
use std::collections::BTreeMap;

/// Truncates `v` to `width` and sign-extends back into `i64`.
pub fn wrap(width: IntWidth, v: i64) -> i64 {
    match width {
        IntWidth::I32 => v as i32 as i64,
        IntWidth::I64 => v,
    }
}

/// Applies one operator to already-wrapped operands; the result is wrapped.
pub fn apply_binop(width: IntWidth, op: BinOp, a: i64, b: i64) -> i64 {
    let shift_mask = match width {
        IntWidth::I32 => 0x1f,
        IntWidth::I64 => 0x3f,
    };
    let r = match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Shl => a.wrapping_shl((b & shift_mask) as u32),
        BinOp::Shr => a.wrapping_shr((b & shift_mask) as u32),
        BinOp::UShr => match width {
            IntWidth::I32 => ((a as i32 as u32) >> (b & 0x1f)) as i64,
            IntWidth::I64 => ((a as u64) >> (b & 0x3f)) as i64,
        },
    };
    wrap(width, r)
}

/// Signed comparison on wrapped values.
pub fn apply_cmp(op: CmpOp, a: i64, b: i64) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
    }
}

/// Evaluates a surface-syntax expression under `env`. Used for preconditions
/// and small fixtures; compiled patterns evaluate through their arenas.
pub fn eval_expr_ast(
    width: IntWidth,
    e: &ExprAst,
    env: &BTreeMap<String, i64>,
) -> Result<i64, String> {
    match e {
        ExprAst::Var(n) => {
            env.get(n).map(|v| wrap(width, *v)).ok_or_else(|| format!("no value for `{n}`"))
        }
        ExprAst::Lit(v) => Ok(wrap(width, *v)),
        ExprAst::Bin { op, lhs, rhs } => {
            let a = eval_expr_ast(width, lhs, env)?;
            let b = eval_expr_ast(width, rhs, env)?;
            Ok(apply_binop(width, *op, a, b))
        }
    }
}

/// Evaluates a precondition under `env`, with wrapping arithmetic inside the
/// comparisons.
pub fn eval_precond_ast(
    width: IntWidth,
    p: &PrecondAst,
    env: &BTreeMap<String, i64>,
) -> Result<bool, String> {
    match p {
        PrecondAst::Cmp(op, l, r) => {
            let a = eval_expr_ast(width, l, env)?;
            let b = eval_expr_ast(width, r, env)?;
            Ok(apply_cmp(*op, a, b))
        }
        PrecondAst::And(a, b) => {
            Ok(eval_precond_ast(width, a, env)? && eval_precond_ast(width, b, env)?)
        }
        PrecondAst::Or(a, b) => {
            Ok(eval_precond_ast(width, a, env)? || eval_precond_ast(width, b, env)?)
        }
        PrecondAst::Not(a) => Ok(!eval_precond_ast(width, a, env)?),
    }
}
