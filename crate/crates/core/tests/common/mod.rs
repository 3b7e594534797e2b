//! Shared helpers for the integration suite.
//!
//! The main attraction is a small C++ evaluator that executes an emitted
//! matcher snippet — pointer declarations and guard condition — against a
//! concrete expression, modeling exactly what the JIT would do: `in(i)`
//! walks children, `req()` is 3 for a binary node and 1 for a leaf,
//! `Opcode()` through a null pointer is a crash (here: a panic). Agreement
//! between this evaluator and the library's own matcher is what ties the
//! generated C++ text back to the pattern semantics.

use std::collections::{BTreeMap, HashMap};

use peephole_forge::codegen::{emit_matcher_snippet, EmittedSnippet};
use peephole_forge::lang::ast::{BinOp, IntWidth};
use peephole_forge::lang::load_patterns;
use peephole_forge::rewrite::{
    compile, instantiate_before, match_expr, pretty, random_expr, Binding, CExpr, CId,
    CompiledPattern, ExprArena,
};
use peephole_forge::rng::{derive, SplitMix64};
use peephole_forge::semantics::wrap;

pub const CORPUS: &str = include_str!("../../fixtures/corpus.pattern");

pub fn corpus() -> Vec<CompiledPattern> {
    let pats = load_patterns(CORPUS).expect("fixture corpus parses clean");
    pats.iter().map(compile).collect()
}

#[allow(dead_code)] // not every test binary uses every helper
pub fn corpus_pattern(name: &str) -> CompiledPattern {
    corpus()
        .into_iter()
        .find(|c| c.name() == name)
        .unwrap_or_else(|| panic!("no fixture pattern named {name}"))
}

// ---------------------------------------------------------------------------
// Tokenizer for the emitted C++ subset.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ct {
    Ident(String),
    Int(i64),
    Arrow, // ->
    LPar,
    RPar,
    Query,
    Colon,
    Not,
    AndAnd,
    OrOr,
    EqEq,
    NotEq,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
}

fn cpp_lex(src: &str) -> Vec<Ct> {
    let b: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            ' ' | '\n' | '\t' => i += 1,
            '-' if b.get(i + 1) == Some(&'>') => {
                out.push(Ct::Arrow);
                i += 2;
            }
            '&' if b.get(i + 1) == Some(&'&') => {
                out.push(Ct::AndAnd);
                i += 2;
            }
            '|' if b.get(i + 1) == Some(&'|') => {
                out.push(Ct::OrOr);
                i += 2;
            }
            '=' if b.get(i + 1) == Some(&'=') => {
                out.push(Ct::EqEq);
                i += 2;
            }
            '!' if b.get(i + 1) == Some(&'=') => {
                out.push(Ct::NotEq);
                i += 2;
            }
            '<' if b.get(i + 1) == Some(&'=') => {
                out.push(Ct::Le);
                i += 2;
            }
            '>' if b.get(i + 1) == Some(&'=') => {
                out.push(Ct::Ge);
                i += 2;
            }
            '<' => {
                out.push(Ct::Lt);
                i += 1;
            }
            '>' => {
                out.push(Ct::Gt);
                i += 1;
            }
            '(' => {
                out.push(Ct::LPar);
                i += 1;
            }
            ')' => {
                out.push(Ct::RPar);
                i += 1;
            }
            '?' => {
                out.push(Ct::Query);
                i += 1;
            }
            ':' => {
                out.push(Ct::Colon);
                i += 1;
            }
            '!' => {
                out.push(Ct::Not);
                i += 1;
            }
            '+' => {
                out.push(Ct::Plus);
                i += 1;
            }
            '-' => {
                out.push(Ct::Minus);
                i += 1;
            }
            '*' => {
                out.push(Ct::Star);
                i += 1;
            }
            '0'..='9' => {
                let s = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = b[s..i].iter().collect();
                out.push(Ct::Int(text.parse().unwrap()));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let s = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == '_') {
                    i += 1;
                }
                out.push(Ct::Ident(b[s..i].iter().collect()));
            }
            other => panic!("unexpected character {other:?} in emitted C++: {src}"),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Values and evaluation.
// ---------------------------------------------------------------------------

/// What a C++ subexpression can produce in this model. `Type` mirrors
/// `TypeInt*`/`TypeLong*`: null, or a (is-constant, value) view of a node.
#[derive(Debug, Clone, PartialEq, Eq)]
enum V {
    Int(i64),
    Bool(bool),
    Null,
    Ptr(CId),
    Type(bool, i64),
    /// `Opcode()` result: the node-class token, or a non-matching stand-in
    /// for leaves (a leaf is a Parm/Con node, never an arithmetic class).
    OpTok(String),
    /// The `phase` object itself (only `phase->type(...)` is understood).
    Phase,
    /// `phase->type(p)` before the `isa_int()`/`isa_long()` projection.
    TypeObj(CId),
}

struct Machine<'a> {
    arena: &'a ExprArena,
    width: IntWidth,
    root: CId,
    vars: HashMap<String, V>,
}

impl<'a> Machine<'a> {
    fn node_tok(&self, id: CId) -> String {
        match self.arena.node(id) {
            CExpr::Op { op, .. } => format!("{}{}", op.ir_name(), self.width.opcode_suffix()),
            CExpr::Atom(_) => "Parm".to_string(),
            CExpr::Lit(_) => format!("Con{}", self.width.opcode_suffix()),
        }
    }

    fn deref(&self, v: &V, what: &str) -> CId {
        match v {
            V::Ptr(id) => *id,
            V::Null => panic!("emitted code dereferenced NULL via {what}"),
            other => panic!("emitted code called {what} on {other:?}"),
        }
    }
}

// Precedence-climbing parser over the token list; evaluates as it parses
// (short-circuiting && || and the ternary, since evaluation order is what
// null-safety depends on).
struct Eval<'a, 'b> {
    toks: &'b [Ct],
    pos: usize,
    m: &'b Machine<'a>,
}

impl<'a, 'b> Eval<'a, 'b> {
    fn peek(&self) -> Option<&Ct> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Ct) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Ct) {
        assert!(self.eat(t), "expected {t:?} at {:?}", &self.toks[self.pos..]);
    }

    fn expr(&mut self) -> V {
        let cond = self.or();
        if self.eat(&Ct::Query) {
            // C++ evaluates only the chosen arm; skipping the other arm
            // entirely keeps that true (both arms are side-effect-free
            // here, but a panic in dead code would be a false alarm).
            let taken = match cond {
                V::Bool(b) => b,
                other => panic!("ternary condition was {other:?}, not a bool"),
            };
            if taken {
                let v = self.expr_or_skip(true);
                self.expect(&Ct::Colon);
                self.expr_or_skip(false);
                v.unwrap()
            } else {
                self.expr_or_skip(false);
                self.expect(&Ct::Colon);
                self.expr_or_skip(true).unwrap()
            }
        } else {
            cond
        }
    }

    /// Parses one ternary arm; evaluates it only when `live`.
    fn expr_or_skip(&mut self, live: bool) -> Option<V> {
        if live {
            Some(self.expr())
        } else {
            self.skip_expr();
            None
        }
    }

    /// Skips over one expression without evaluating: consumes tokens until
    /// the arm ends (at `:` or end/`)` at depth 0).
    fn skip_expr(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t {
                Ct::LPar => depth += 1,
                Ct::RPar => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                Ct::Colon | Ct::Query if depth == 0 => return,
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn or(&mut self) -> V {
        let mut v = self.and();
        while self.eat(&Ct::OrOr) {
            if v == V::Bool(true) {
                self.skip_operand(Self::and_skip_marker);
            } else {
                v = self.and();
            }
        }
        v
    }

    fn and(&mut self) -> V {
        let mut v = self.cmp();
        while self.eat(&Ct::AndAnd) {
            if v == V::Bool(false) {
                self.skip_operand(Self::cmp_skip_marker);
            } else {
                v = self.cmp();
            }
        }
        v
    }

    // Skipping one right-hand operand of && / || without evaluating it:
    // re-parse it with a throwaway recursion that never touches values.
    fn skip_operand(&mut self, level: fn(&mut SkipParser) -> ()) {
        let mut sp = SkipParser { toks: self.toks, pos: self.pos };
        level(&mut sp);
        self.pos = sp.pos;
    }

    fn and_skip_marker(sp: &mut SkipParser) {
        sp.and();
    }

    fn cmp_skip_marker(sp: &mut SkipParser) {
        sp.cmp();
    }

    fn cmp(&mut self) -> V {
        let l = self.add();
        let op = match self.peek() {
            Some(Ct::EqEq) => Some(Ct::EqEq),
            Some(Ct::NotEq) => Some(Ct::NotEq),
            Some(Ct::Lt) => Some(Ct::Lt),
            Some(Ct::Le) => Some(Ct::Le),
            Some(Ct::Gt) => Some(Ct::Gt),
            Some(Ct::Ge) => Some(Ct::Ge),
            _ => None,
        };
        let Some(op) = op else { return l };
        self.pos += 1;
        let r = self.add();
        let b = match (op, &l, &r) {
            (Ct::EqEq, a, b) => ptr_eq(a, b),
            (Ct::NotEq, a, b) => !ptr_eq(a, b),
            (o, V::Int(a), V::Int(b)) => match o {
                Ct::Lt => a < b,
                Ct::Le => a <= b,
                Ct::Gt => a > b,
                Ct::Ge => a >= b,
                _ => unreachable!(),
            },
            (o, a, b) => panic!("bad comparison {a:?} {o:?} {b:?}"),
        };
        V::Bool(b)
    }

    fn add(&mut self) -> V {
        let mut v = self.mul();
        loop {
            let op = if self.eat(&Ct::Plus) {
                BinOp::Add
            } else if self.eat(&Ct::Minus) {
                BinOp::Sub
            } else {
                return v;
            };
            let r = self.mul();
            v = arith(self.m.width, op, &v, &r);
        }
    }

    fn mul(&mut self) -> V {
        let mut v = self.unary();
        while self.eat(&Ct::Star) {
            let r = self.unary();
            v = arith(self.m.width, BinOp::Mul, &v, &r);
        }
        v
    }

    fn unary(&mut self) -> V {
        if self.eat(&Ct::Not) {
            match self.unary() {
                V::Bool(b) => V::Bool(!b),
                other => panic!("! applied to {other:?}"),
            }
        } else if self.eat(&Ct::Minus) {
            match self.unary() {
                V::Int(v) => V::Int(wrap(self.m.width, v.wrapping_neg())),
                other => panic!("- applied to {other:?}"),
            }
        } else {
            self.postfix()
        }
    }

    fn postfix(&mut self) -> V {
        let mut v = self.primary();
        while self.eat(&Ct::Arrow) {
            let Some(Ct::Ident(method)) = self.peek().cloned() else {
                panic!("-> not followed by a method");
            };
            self.pos += 1;
            self.expect(&Ct::LPar);
            let arg = if self.peek() == Some(&Ct::RPar) { None } else { Some(self.expr()) };
            self.expect(&Ct::RPar);
            v = self.call(&v, &method, arg);
        }
        v
    }

    fn call(&mut self, recv: &V, method: &str, arg: Option<V>) -> V {
        let m = self.m;
        match method {
            "Opcode" => V::OpTok(m.node_tok(m.deref(recv, "Opcode()"))),
            "req" => match m.arena.node(m.deref(recv, "req()")) {
                // in(0) is the control input; a binary arithmetic node has
                // req() == 3 and a leaf (Parm/Con) just the control.
                CExpr::Op { .. } => V::Int(3),
                _ => V::Int(1),
            },
            "in" => {
                let Some(V::Int(i)) = arg else { panic!("in() needs an index") };
                let id = m.deref(recv, "in()");
                match m.arena.node(id) {
                    CExpr::Op { lhs, rhs, .. } => match i {
                        1 => V::Ptr(*lhs),
                        2 => V::Ptr(*rhs),
                        _ => panic!("in({i}) on a binary node"),
                    },
                    _ => panic!("in({i}) on a leaf (req() guard missing?)"),
                }
            }
            "type" => {
                assert_eq!(recv, &V::Phase, "type() is a phase method");
                let Some(p) = arg else { panic!("type() needs a node") };
                V::TypeObj(m.deref(&p, "phase->type()"))
            }
            "isa_int" | "isa_long" => {
                let V::TypeObj(id) = recv else { panic!("{method}() on {recv:?}") };
                let want = if method == "isa_int" { IntWidth::I32 } else { IntWidth::I64 };
                assert_eq!(
                    m.width, want,
                    "snippet projects {method}() but was emitted for {:?}",
                    m.width
                );
                match m.arena.node(*id) {
                    CExpr::Lit(v) => V::Type(true, *v),
                    _ => V::Type(false, 0),
                }
            }
            "is_con" => match recv {
                V::Type(c, _) => V::Bool(*c),
                V::Null => panic!("is_con() through NULL"),
                other => panic!("is_con() on {other:?}"),
            },
            "get_con" => match recv {
                V::Type(true, v) => V::Int(*v),
                V::Type(false, _) => panic!("get_con() on a non-constant type"),
                V::Null => panic!("get_con() through NULL"),
                other => panic!("get_con() on {other:?}"),
            },
            other => panic!("unmodeled method {other}()"),
        }
    }

    fn primary(&mut self) -> V {
        match self.peek().cloned() {
            Some(Ct::Int(v)) => {
                self.pos += 1;
                V::Int(v)
            }
            Some(Ct::LPar) => {
                self.pos += 1;
                let v = self.expr();
                self.expect(&Ct::RPar);
                v
            }
            Some(Ct::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "NULL" => V::Null,
                    "phase" => V::Phase,
                    _ if name.starts_with("Op_") => {
                        V::OpTok(name["Op_".len()..].to_string())
                    }
                    "in" => {
                        // bare in(i): input of the node Ideal() runs on
                        self.expect(&Ct::LPar);
                        let V::Int(i) = self.expr() else { panic!("in() needs an index") };
                        self.expect(&Ct::RPar);
                        let root = V::Ptr(self.m.root);
                        self.call(&root, "in", Some(V::Int(i)))
                    }
                    _ => self
                        .m
                        .vars
                        .get(&name)
                        .unwrap_or_else(|| panic!("use of undeclared `{name}`"))
                        .clone(),
                }
            }
            other => panic!("unexpected token {other:?}"),
        }
    }
}

/// Parser twin that consumes the same grammar without evaluating — used for
/// the dead arms of `&&`/`||`.
struct SkipParser<'b> {
    toks: &'b [Ct],
    pos: usize,
}

impl<'b> SkipParser<'b> {
    fn peek(&self) -> Option<&Ct> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Ct) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn and(&mut self) {
        self.cmp();
        while self.eat(&Ct::AndAnd) {
            self.cmp();
        }
    }

    fn cmp(&mut self) {
        self.add();
        if matches!(
            self.peek(),
            Some(Ct::EqEq | Ct::NotEq | Ct::Lt | Ct::Le | Ct::Gt | Ct::Ge)
        ) {
            self.pos += 1;
            self.add();
        }
    }

    fn add(&mut self) {
        self.mul();
        while self.eat(&Ct::Plus) || self.eat(&Ct::Minus) {
            self.mul();
        }
    }

    fn mul(&mut self) {
        self.unary();
        while self.eat(&Ct::Star) {
            self.unary();
        }
    }

    fn unary(&mut self) {
        while self.eat(&Ct::Not) || self.eat(&Ct::Minus) {}
        self.postfix();
    }

    fn postfix(&mut self) {
        self.primary();
        while self.eat(&Ct::Arrow) {
            self.pos += 1; // method name
            assert!(self.eat(&Ct::LPar));
            if self.peek() != Some(&Ct::RPar) {
                self.ternary_free_expr();
            }
            assert!(self.eat(&Ct::RPar));
        }
    }

    fn ternary_free_expr(&mut self) {
        self.or();
    }

    fn or(&mut self) {
        self.and();
        while self.eat(&Ct::OrOr) {
            self.and();
        }
    }

    fn primary(&mut self) {
        match self.peek().cloned() {
            Some(Ct::Int(_)) => self.pos += 1,
            Some(Ct::LPar) => {
                self.pos += 1;
                self.or();
                assert!(self.eat(&Ct::RPar));
            }
            Some(Ct::Ident(name)) => {
                self.pos += 1;
                if name == "in" && self.peek() == Some(&Ct::LPar) {
                    self.pos += 1;
                    self.or();
                    assert!(self.eat(&Ct::RPar));
                }
            }
            other => panic!("skip parser stuck at {other:?}"),
        }
    }
}

/// C++ pointer/null comparison: NULL == NULL holds, distinct nodes differ.
/// Hash-consing makes id equality coincide with structural sharing, the
/// same invariant a value-numbered JIT graph gives real pointer equality.
fn ptr_eq(a: &V, b: &V) -> bool {
    match (a, b) {
        (V::Ptr(x), V::Ptr(y)) => x == y,
        (V::Ptr(_), V::Null) | (V::Null, V::Ptr(_)) => false,
        (V::Type(..), V::Null) | (V::Null, V::Type(..)) => false,
        (V::Null, V::Null) => true,
        (V::Int(x), V::Int(y)) => x == y,
        (V::OpTok(x), V::OpTok(y)) => x == y,
        (V::Bool(x), V::Bool(y)) => x == y,
        _ => panic!("bad equality {a:?} == {b:?}"),
    }
}

fn arith(width: IntWidth, op: BinOp, a: &V, b: &V) -> V {
    match (a, b) {
        (V::Int(x), V::Int(y)) => {
            V::Int(peephole_forge::semantics::apply_binop(width, op, *x, *y))
        }
        _ => panic!("arithmetic on {a:?} and {b:?}"),
    }
}

// ---------------------------------------------------------------------------
// Statement-level driver.
// ---------------------------------------------------------------------------

/// Runs a snippet's declarations and guard against a concrete expression,
/// answering "would this matcher block fire on this node". The snippet only
/// runs at all if the expression's root is the node class it was compiled
/// into, which is what hanging it inside `<Op>Node::Ideal` guarantees.
pub fn snippet_fires(s: &EmittedSnippet, arena: &ExprArena, root: CId) -> bool {
    match arena.node(root) {
        CExpr::Op { op, .. } if *op == s.root_op => {}
        _ => return false,
    }

    let mut m = Machine { arena, width: s.width, root, vars: HashMap::new() };

    let mut lines = s.text.lines().peekable();
    while let Some(line) = lines.next() {
        let t = line.trim();
        if t.is_empty() || t.starts_with("//") {
            continue;
        }
        if let Some(rest) = t
            .strip_prefix("Node* ")
            .or_else(|| t.strip_prefix("const TypeInt* "))
            .or_else(|| t.strip_prefix("const TypeLong* "))
        {
            let (name, rhs) = rest.split_once(" = ").expect("declaration shape");
            let rhs = rhs.strip_suffix(';').expect("declaration ends with ;");
            let toks = cpp_lex(rhs);
            let v = Eval { toks: &toks, pos: 0, m: &m }.expr();
            m.vars.insert(name.to_string(), v);
            continue;
        }
        if let Some(rest) = t.strip_prefix("if (") {
            // The condition may span lines: collect until parens balance.
            let mut cond = rest.to_string();
            let balance = |s: &str| {
                s.chars().fold(1i64, |d, c| match c {
                    '(' => d + 1,
                    ')' => d - 1,
                    _ => d,
                })
            };
            while balance(&cond) > 0 {
                cond.push(' ');
                cond.push_str(lines.next().expect("unterminated if condition").trim());
            }
            let cond = cond
                .strip_suffix('{')
                .map(str::trim_end)
                .unwrap_or(&cond)
                .strip_suffix(')')
                .expect("if condition ends with `) {`");
            let toks = cpp_lex(cond);
            return matches!(Eval { toks: &toks, pos: 0, m: &m }.expr(), V::Bool(true));
        }
        if t.starts_with("return ") {
            // No guard at all: the block fires unconditionally.
            return true;
        }
        panic!("unrecognized snippet line: {line}");
    }
    panic!("snippet had no guard and no return");
}

// ---------------------------------------------------------------------------
// Snippet-vs-matcher agreement harness.
// ---------------------------------------------------------------------------

fn tree_size(arena: &ExprArena, id: CId) -> usize {
    match arena.node(id) {
        CExpr::Op { lhs, rhs, .. } => 1 + tree_size(arena, *lhs) + tree_size(arena, *rhs),
        _ => 1,
    }
}

/// Rebuilds the expression with the pre-order `target`-th node swapped for
/// `replacement`.
fn replace_nth(
    arena: &mut ExprArena,
    id: CId,
    target: &mut usize,
    replacement: CId,
) -> CId {
    if *target == 0 {
        *target = usize::MAX;
        return replacement;
    }
    *target -= 1;
    match arena.node(id).clone() {
        CExpr::Op { op, lhs, rhs } => {
            let l = replace_nth(arena, lhs, target, replacement);
            let r = replace_nth(arena, rhs, target, replacement);
            arena.op(op, l, r)
        }
        _ => id,
    }
}

/// Checks that the emitted C++ guard fires on exactly the expressions the
/// library matcher accepts. Trials alternate three generators: arbitrary
/// expressions, faithful pattern instances (guaranteed positives, modulo
/// preconditions), and instances with one random subtree swapped out (the
/// near-misses that catch a wrong same-node or opcode clause). Returns how
/// often the guard fired, so callers can assert the positives were real.
#[allow(dead_code)] // not every test binary uses every helper
pub fn assert_snippet_matcher_agreement(
    cp: &CompiledPattern,
    trials: u64,
    seed: u64,
) -> usize {
    let snippet = emit_matcher_snippet(cp).expect("pattern emits a snippet");
    let atoms: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let consts = [-2i64, -1, 0, 1, 2, 7];
    let ops = BinOp::ALL;
    let mut rng = SplitMix64::new(derive(seed, cp.name()));
    let mut fired_count = 0usize;

    for trial in 0..trials {
        let mut arena = ExprArena::new();
        let id = match trial % 3 {
            0 => random_expr(&mut rng, 4, &atoms, &consts, &ops, &mut arena),
            _ => {
                let mut free = BTreeMap::new();
                for p in cp.pattern.free_params() {
                    let sub = random_expr(&mut rng, 2, &atoms, &consts, &ops, &mut arena);
                    free.insert(p.name.clone(), sub);
                }
                let mut cvals = BTreeMap::new();
                for p in cp.pattern.const_params() {
                    cvals.insert(
                        p.name.clone(),
                        consts[rng.below(consts.len() as u64) as usize],
                    );
                }
                let inst =
                    instantiate_before(cp, &Binding { free, consts: cvals }, &mut arena);
                if trial % 3 == 1 {
                    inst
                } else {
                    let n = tree_size(&arena, inst);
                    let mut target = rng.below(n as u64) as usize;
                    let leaf = random_expr(&mut rng, 0, &atoms, &consts, &ops, &mut arena);
                    replace_nth(&mut arena, inst, &mut target, leaf)
                }
            }
        };
        let fired = snippet_fires(&snippet, &arena, id);
        let matched = match_expr(cp, &arena, id).is_some();
        assert_eq!(
            fired,
            matched,
            "{}: generated guard and matcher disagree on {}",
            cp.name(),
            pretty(&arena, id)
        );
        fired_count += usize::from(fired);
    }
    fired_count
}
