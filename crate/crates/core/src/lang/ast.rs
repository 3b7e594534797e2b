//! Parsed representation of patterns and their expressions.

use std::fmt;

/// Width of every expression in a pattern. Patterns are monomorphic: all
/// parameters, literals and operators of one pattern share a single width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntWidth {
    I32,
    I64,
}

impl IntWidth {
    /// The Java/C++ spelling of the type (`int` / `long`).
    pub fn java_name(self) -> &'static str {
        match self {
            IntWidth::I32 => "int",
            IntWidth::I64 => "long",
        }
    }

    /// Single-letter opcode suffix used by the C1/C2-style IR (`I` / `L`).
    pub fn opcode_suffix(self) -> &'static str {
        match self {
            IntWidth::I32 => "I",
            IntWidth::I64 => "L",
        }
    }

    pub fn min_value(self) -> i64 {
        match self {
            IntWidth::I32 => i32::MIN as i64,
            IntWidth::I64 => i64::MIN,
        }
    }

    pub fn max_value(self) -> i64 {
        match self {
            IntWidth::I32 => i32::MAX as i64,
            IntWidth::I64 => i64::MAX,
        }
    }
}

/// Binary operators of the expression subset, in canonical order. The order
/// is load-bearing: generated artifacts (IR annotation tokens, opcode
/// enumerations) list operators in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    UShr,
}

impl BinOp {
    pub const ALL: [BinOp; 9] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::Shl,
        BinOp::Shr,
        BinOp::UShr,
    ];

    /// Source-level spelling (`+`, `<<`, `>>>`, ...).
    pub fn token(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::UShr => ">>>",
        }
    }

    /// Width-less IR node name (`Add`, `LShift`, ...); combined with
    /// [`IntWidth::opcode_suffix`] this yields opcode tokens like `AddL`.
    pub fn ir_name(self) -> &'static str {
        match self {
            BinOp::Add => "Add",
            BinOp::Sub => "Sub",
            BinOp::Mul => "Mul",
            BinOp::And => "And",
            BinOp::Or => "Or",
            BinOp::Xor => "Xor",
            BinOp::Shl => "LShift",
            BinOp::Shr => "RShift",
            BinOp::UShr => "URShift",
        }
    }

    /// Token used by IR test annotations (`ADD`, `LSHIFT`, ...).
    pub fn ir_test_token(self) -> &'static str {
        match self {
            BinOp::Add => "ADD",
            BinOp::Sub => "SUB",
            BinOp::Mul => "MUL",
            BinOp::And => "AND",
            BinOp::Or => "OR",
            BinOp::Xor => "XOR",
            BinOp::Shl => "LSHIFT",
            BinOp::Shr => "RSHIFT",
            BinOp::UShr => "URSHIFT",
        }
    }
}

/// Comparison operators allowed in preconditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// How a parameter matches: free variables bind arbitrary subexpressions,
/// `@Constant` variables bind only literal constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Free,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

/// An expression tree as written in the source, before DAG construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    Var(String),
    Lit(i64),
    Bin { op: BinOp, lhs: Box<ExprAst>, rhs: Box<ExprAst> },
}

impl ExprAst {
    pub fn bin(op: BinOp, lhs: ExprAst, rhs: ExprAst) -> ExprAst {
        ExprAst::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// Collects variable names in first-occurrence order.
    pub fn vars(&self) -> Vec<&str> {
        fn go<'a>(e: &'a ExprAst, out: &mut Vec<&'a str>) {
            match e {
                ExprAst::Var(n) => {
                    if !out.contains(&n.as_str()) {
                        out.push(n);
                    }
                }
                ExprAst::Lit(_) => {}
                ExprAst::Bin { lhs, rhs, .. } => {
                    go(lhs, out);
                    go(rhs, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

/// A boolean precondition over constant parameters. Kept separate from
/// [`ExprAst`] because comparisons and logical connectives are not
/// expression operators: they may appear only in `if` guards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrecondAst {
    Cmp(CmpOp, ExprAst, ExprAst),
    And(Box<PrecondAst>, Box<PrecondAst>),
    Or(Box<PrecondAst>, Box<PrecondAst>),
    Not(Box<PrecondAst>),
}

impl PrecondAst {
    /// Variable names referenced anywhere in the precondition.
    pub fn vars(&self) -> Vec<&str> {
        fn go<'a>(p: &'a PrecondAst, out: &mut Vec<&'a str>) {
            match p {
                PrecondAst::Cmp(_, l, r) => {
                    for v in l.vars().into_iter().chain(r.vars()) {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                PrecondAst::And(a, b) | PrecondAst::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                PrecondAst::Not(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Arithmetic subexpressions (the comparison operands), left to right.
    pub fn arith_terms(&self) -> Vec<&ExprAst> {
        fn go<'a>(p: &'a PrecondAst, out: &mut Vec<&'a ExprAst>) {
            match p {
                PrecondAst::Cmp(_, l, r) => {
                    out.push(l);
                    out.push(r);
                }
                PrecondAst::And(a, b) | PrecondAst::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                PrecondAst::Not(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

/// One named rewrite pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub name: String,
    pub width: IntWidth,
    pub params: Vec<Param>,
    pub before: ExprAst,
    pub after: ExprAst,
    /// Conjunction of every `if` guard enclosing `before` or `after`.
    pub preconds: Vec<PrecondAst>,
    /// True when the source contained a literal `true` guard (used where the
    /// real precondition calls helper code the language cannot express).
    /// Such guards are dropped from `preconds` and surfaced as a notice.
    pub trivial_precondition: bool,
}

impl Pattern {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn free_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.kind == ParamKind::Free)
    }

    pub fn const_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.kind == ParamKind::Constant)
    }

    /// One-line summary, `name: before => after`, as quoted in generated
    /// comments.
    pub fn summary(&self) -> String {
        format!(
            "{}: {} => {}",
            self.name,
            pretty_expr(&self.before),
            pretty_expr(&self.after)
        )
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing.
//
// Every compound child is parenthesized and the root is bare: `(a - b) +
// (c - a)`, never the precedence-minimal `a - b + (c - a)`. This is the style
// patterns are conventionally written in, and printed text is re-parsed by
// the round-trip tests, embedded in generated Java bodies, and quoted in
// generated comments, so it must stay byte-stable.
// ---------------------------------------------------------------------------

pub fn pretty_expr(e: &ExprAst) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &ExprAst, out: &mut String) {
    match e {
        ExprAst::Var(n) => out.push_str(n),
        ExprAst::Lit(v) => out.push_str(&v.to_string()),
        ExprAst::Bin { op, lhs, rhs } => {
            write_child(lhs, out);
            out.push(' ');
            out.push_str(op.token());
            out.push(' ');
            write_child(rhs, out);
        }
    }
}

fn write_child(e: &ExprAst, out: &mut String) {
    if matches!(e, ExprAst::Bin { .. }) {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

pub fn pretty_precond(p: &PrecondAst) -> String {
    match p {
        PrecondAst::Cmp(op, l, r) => {
            format!("{} {} {}", pretty_cmp_operand(l), op.token(), pretty_cmp_operand(r))
        }
        PrecondAst::And(a, b) => format!("({}) && ({})", pretty_precond(a), pretty_precond(b)),
        PrecondAst::Or(a, b) => format!("({}) || ({})", pretty_precond(a), pretty_precond(b)),
        PrecondAst::Not(a) => format!("!({})", pretty_precond(a)),
    }
}

fn pretty_cmp_operand(e: &ExprAst) -> String {
    match e {
        ExprAst::Bin { .. } => format!("({})", pretty_expr(e)),
        _ => pretty_expr(e),
    }
}

/// Renders a pattern back to source form. `parse(pretty(p)) == p` up to the
/// `trivial_precondition` flag (trivial guards are never printed).
pub fn pretty_pattern(p: &Pattern) -> String {
    let mut s = String::new();
    s.push_str("@Pattern\npublic void ");
    s.push_str(&p.name);
    s.push('(');
    for (i, param) in p.params.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        if param.kind == ParamKind::Constant {
            s.push_str("@Constant ");
        }
        s.push_str(p.width.java_name());
        s.push(' ');
        s.push_str(&param.name);
    }
    s.push_str(") {\n");
    s.push_str(&format!("    before({});\n", pretty_expr(&p.before)));
    let mut indent = String::from("    ");
    for pre in &p.preconds {
        s.push_str(&format!("{indent}if ({}) {{\n", pretty_precond(pre)));
        indent.push_str("    ");
    }
    s.push_str(&format!("{indent}after({});\n", pretty_expr(&p.after)));
    for i in (0..p.preconds.len()).rev() {
        s.push_str(&format!("{}}}\n", "    ".repeat(i + 1)));
    }
    s.push_str("}\n");
    s
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_pattern(self))
    }
}
