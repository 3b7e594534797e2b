//! Generation of JIT regression tests with IR-shape assertions.
//!
//! Every pattern turns into one test method: the body *is* the pattern's
//! before-expression (so the compiler is handed exactly the shape the
//! rewrite targets), and `@IR` annotations assert what the optimized graph
//! must look like — operators the rewrite eliminates entirely go in
//! `failOn`, and the replacement's full operator multiset goes in `counts`.
//!
//! `@Constant` parameters cannot stay method parameters: the JIT only sees
//! them as constants if they are literals in the bytecode. They are
//! substituted with seeded random in-width literals. Patterns with a real
//! precondition are skipped — a random constant cannot be guaranteed to
//! satisfy it, and a test that silently never exercises its rewrite is
//! worse than no test.

use std::collections::BTreeMap;

use crate::east::opcode_multiset;
use crate::lang::ast::{pretty_expr, BinOp, ExprAst, IntWidth, Pattern};
use crate::rewrite::CompiledPattern;
use crate::rng::{derive, SplitMix64};
use crate::semantics::wrap;

/// The IR-shape assertions derived from a pattern's two sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrAnnotations {
    /// Operators present before and gone after — they must not survive.
    pub fail_on: Vec<BinOp>,
    /// The replacement's operator multiset — exact expected counts.
    pub counts: Vec<(BinOp, usize)>,
}

/// Derives `failOn`/`counts` from the distinct-node operator multisets of
/// the two sides (a DAG-shared node counts once, matching a value-numbered
/// graph).
pub fn derive_ir_annotations(cp: &CompiledPattern) -> IrAnnotations {
    let before = opcode_multiset(&cp.easts.arena, cp.easts.before);
    let after = opcode_multiset(&cp.easts.arena, cp.easts.after);
    let fail_on = before
        .keys()
        .filter(|op| !after.contains_key(*op))
        .copied()
        .collect();
    let counts = after.into_iter().collect();
    IrAnnotations { fail_on, counts }
}

/// A pattern that test generation chose not to cover, and why.
#[derive(Debug, Clone)]
pub struct SkippedPattern {
    pub name: String,
    pub reason: String,
}

fn java_literal(width: IntWidth, v: i64) -> String {
    match width {
        IntWidth::I32 => v.to_string(),
        IntWidth::I64 => format!("{v}L"),
    }
}

/// Renders an expression as Java source, with constant parameters replaced
/// by their drawn literals. Same parenthesization as the pattern surface.
fn java_expr(width: IntWidth, e: &ExprAst, consts: &BTreeMap<String, i64>) -> String {
    fn operand(width: IntWidth, e: &ExprAst, consts: &BTreeMap<String, i64>) -> String {
        match e {
            ExprAst::Bin { .. } => format!("({})", go(width, e, consts)),
            _ => go(width, e, consts),
        }
    }
    fn go(width: IntWidth, e: &ExprAst, consts: &BTreeMap<String, i64>) -> String {
        match e {
            ExprAst::Var(n) => match consts.get(n) {
                Some(v) => java_literal(width, *v),
                None => n.clone(),
            },
            ExprAst::Lit(v) => java_literal(width, *v),
            ExprAst::Bin { op, lhs, rhs } => format!(
                "{} {} {}",
                operand(width, lhs, consts),
                op.token(),
                operand(width, rhs, consts)
            ),
        }
    }
    go(width, e, consts)
}

fn ir_node_list(ops: &[BinOp]) -> String {
    ops.iter().map(|op| format!("IRNode.{}", op.ir_test_token())).collect::<Vec<_>>().join(", ")
}

fn ir_counts_list(counts: &[(BinOp, usize)]) -> String {
    counts
        .iter()
        .map(|(op, n)| format!("IRNode.{}, \"{n}\"", op.ir_test_token()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn precondition_skip_reason(p: &Pattern) -> Option<String> {
    if p.preconds.is_empty() {
        None
    } else {
        Some(
            "has a precondition; a randomly drawn constant cannot be guaranteed \
             to satisfy it"
                .to_string(),
        )
    }
}

/// Emits the test method for one pattern. The `seed` fixes the drawn
/// constants; each pattern gets its own stream, keyed by name, so adding a
/// pattern never reshuffles another's constants.
pub fn emit_ir_test(cp: &CompiledPattern, seed: u64) -> Result<String, String> {
    let p = &cp.pattern;
    if let Some(reason) = precondition_skip_reason(p) {
        return Err(format!("pattern `{}` {reason}", p.name));
    }
    let width = p.width;
    let mut rng = SplitMix64::new(derive(seed, &p.name));
    let mut consts: BTreeMap<String, i64> = BTreeMap::new();
    for cparam in p.const_params() {
        consts.insert(cparam.name.clone(), wrap(width, rng.next_i64()));
    }

    let ann = derive_ir_annotations(cp);
    let mut out = String::new();
    out.push_str("@Test\n");
    if !ann.fail_on.is_empty() {
        out.push_str(&format!("@IR(failOn = {{{}}})\n", ir_node_list(&ann.fail_on)));
    }
    if !ann.counts.is_empty() {
        out.push_str(&format!("@IR(counts = {{{}}})\n", ir_counts_list(&ann.counts)));
    }
    out.push_str(&format!("// Checks {} => {}\n", pretty_expr(&p.before), pretty_expr(&p.after)));
    let params = p
        .free_params()
        .map(|q| format!("{} {}", width.java_name(), q.name))
        .collect::<Vec<_>>()
        .join(", ");
    out.push_str(&format!("public {} test{}({params}) {{\n", width.java_name(), p.name));
    out.push_str(&format!("    return {};\n", java_expr(width, &p.before, &consts)));
    out.push_str("}\n");
    Ok(out)
}

/// Emits one test class per (root operator, width) group, named
/// `Test<Op><Width>Node` after the node class the rewrite hooks. Returns
/// `(class name, file text)` pairs in first-use order, plus the skipped
/// patterns.
pub fn emit_test_classes(
    cps: &[CompiledPattern],
    seed: u64,
) -> (Vec<(String, String)>, Vec<SkippedPattern>) {
    let mut order: Vec<String> = Vec::new();
    let mut methods: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut skipped = Vec::new();

    for cp in cps {
        let p = &cp.pattern;
        if let Some(reason) = precondition_skip_reason(p) {
            skipped.push(SkippedPattern { name: p.name.clone(), reason });
            continue;
        }
        let crate::east::ENode::Op { op, .. } = cp.easts.arena.node(cp.easts.before) else {
            skipped.push(SkippedPattern {
                name: p.name.clone(),
                reason: "the matched expression has no root operator to name a test class"
                    .to_string(),
            });
            continue;
        };
        let class = format!("Test{}{}Node", op.ir_name(), p.width.opcode_suffix());
        let method = match emit_ir_test(cp, seed) {
            Ok(m) => m,
            Err(e) => {
                skipped.push(SkippedPattern { name: p.name.clone(), reason: e });
                continue;
            }
        };
        if !methods.contains_key(&class) {
            order.push(class.clone());
        }
        methods.entry(class).or_default().push(method);
    }

    let mut files = Vec::new();
    for class in order {
        let mut text = String::new();
        text.push_str("// JIT rewrite tests generated from pattern definitions.\n");
        text.push_str("// Each method hands the compiler one pattern's input shape; the @IR\n");
        text.push_str("// rules assert the rewritten graph.\n\n");
        text.push_str("import compiler.lib.ir_framework.*;\n\n");
        text.push_str(&format!("public class {class} {{\n"));
        text.push_str("    public static void main(String[] args) {\n");
        text.push_str("        TestFramework.run();\n");
        text.push_str("    }\n");
        for method in &methods[&class] {
            text.push('\n');
            for line in method.lines() {
                if line.is_empty() {
                    text.push('\n');
                } else {
                    text.push_str("    ");
                    text.push_str(line);
                    text.push('\n');
                }
            }
        }
        text.push_str("}\n");
        files.push((class, text));
    }
    (files, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_pattern_file;
    use crate::rewrite::compile;

    fn cp(src: &str) -> CompiledPattern {
        compile(&parse_pattern_file(src).unwrap().remove(0))
    }

    #[test]
    fn padd6_method_exact_text() {
        let p = cp("@Pattern void pAdd6(long a, long b, long c) { \
                    before((a - b) + (c - a)); after(c - b); }");
        let want = "\
@Test
@IR(failOn = {IRNode.ADD})
@IR(counts = {IRNode.SUB, \"1\"})
// Checks (a - b) + (c - a) => c - b
public long testpAdd6(long a, long b, long c) {
    return (a - b) + (c - a);
}
";
        assert_eq!(emit_ir_test(&p, 0).unwrap(), want);
    }

    #[test]
    fn annotations_from_multiset_difference() {
        let p = cp("@Pattern void t(int x, int y) { \
                    before((x | y) - (x ^ y)); after(x & y); }");
        let ann = derive_ir_annotations(&p);
        assert_eq!(ann.fail_on, vec![BinOp::Sub, BinOp::Or, BinOp::Xor]);
        assert_eq!(ann.counts, vec![(BinOp::And, 1)]);
    }

    #[test]
    fn surviving_operator_is_counted_not_failed() {
        let p = cp("@Pattern void pAdd2(long a, long b, long c, long d) { \
                    before((a - b) + (c - d)); after((a + c) - (b + d)); }");
        let text = emit_ir_test(&p, 0).unwrap();
        assert!(!text.contains("failOn"), "both operators survive:\n{text}");
        assert!(text.contains("@IR(counts = {IRNode.ADD, \"2\", IRNode.SUB, \"1\"})"));
    }

    #[test]
    fn constants_become_seeded_literals() {
        let p = cp("@Pattern void t(int x, @Constant int c) { \
                    before((x ^ -1) + c); after((c - 1) - x); }");
        let text = emit_ir_test(&p, 42).unwrap();
        let expected = wrap(IntWidth::I32, SplitMix64::new(derive(42, "t")).next_i64());
        assert!(text.contains(&format!("return (x ^ -1) + {expected};")), "{text}");
        assert!(text.contains("public int testt(int x) {"), "constant is not a parameter");
        assert_eq!(emit_ir_test(&p, 42).unwrap(), text, "same seed, same literal");
        assert_ne!(emit_ir_test(&p, 43).unwrap(), text, "different seed, different literal");
    }

    #[test]
    fn long_constants_get_the_l_suffix() {
        let p = cp("@Pattern void t(long x, @Constant long con) { \
                    before(x + (con - x)); after(con); }");
        let text = emit_ir_test(&p, 1).unwrap();
        let expected = SplitMix64::new(derive(1, "t")).next_i64();
        assert!(text.contains(&format!("{expected}L")), "{text}");
    }

    #[test]
    fn preconditioned_patterns_are_refused() {
        let p = cp("@Pattern void t(int x, @Constant int c) { \
                    before(x + c); if (c != 0) { after(c + x); } }");
        let err = emit_ir_test(&p, 0).unwrap_err();
        assert!(err.contains("precondition"), "{err}");
    }

    #[test]
    fn classes_group_by_node_and_report_skips() {
        let src = "
@Pattern void a1(long a, long b, long c) { before((a - b) + (c - a)); after(c - b); }
@Pattern void a2(long a, long b, long c) { before((a - b) + (b - c)); after(a - c); }
@Pattern void s1(int x, int y) { before((x | y) - (x ^ y)); after(x & y); }
@Pattern void guarded(int x, @Constant int c) { before(x + c); if (c != 0) { after(c + x); } }
";
        let cps: Vec<_> = parse_pattern_file(src).unwrap().iter().map(compile).collect();
        let (files, skipped) = emit_test_classes(&cps, 0);
        assert_eq!(
            files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
            vec!["TestAddLNode", "TestSubINode"]
        );
        let addl = &files[0].1;
        assert!(addl.contains("import compiler.lib.ir_framework.*;"));
        assert!(addl.contains("public class TestAddLNode {"));
        assert!(addl.contains("    public long testa1(long a, long b, long c) {"));
        assert!(addl.contains("    public long testa2(long a, long b, long c) {"));
        assert!(addl.contains("        return (a - b) + (c - a);"));
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].name, "guarded");
    }
}
