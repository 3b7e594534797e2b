//! Recursive-descent parser for pattern files.
//!
//! Grammar (left-recursive levels written iteratively; every level is
//! left-associative; precedence from loosest to tightest is `|`, `^`, `&`,
//! shifts, additive, multiplicative):
//!
//! ```text
//! file     := pattern*
//! pattern  := '@Pattern' modifier* 'void' IDENT '(' params? ')' block
//! param    := '@Constant'? ('int' | 'long') IDENT
//! block    := '{' stmt* '}'
//! stmt     := 'before' '(' expr ')' ';'
//!           | 'after'  '(' expr ')' ';'
//!           | 'if' '(' precond ')' (block | stmt)
//!           | IDENT '=' expr ';'            // parsed, then rejected
//! expr     := bitor
//! bitor    := bitxor ('|' bitxor)*
//! bitxor   := bitand ('^' bitand)*
//! bitand   := shift ('&' shift)*
//! shift    := additive (('<<' | '>>' | '>>>') additive)*
//! additive := mult (('+' | '-') mult)*
//! mult     := unary ('*' unary)*
//! unary    := '-' NUM | primary             // unary minus only on literals
//! primary  := IDENT | NUM | '(' expr ')'
//! precond  := bor; bor := band ('||' band)*; band := bnot ('&&' bnot)*
//! bnot     := '!' bnot | 'true' | '(' precond ')' | expr CMP expr
//! ```
//!
//! The parser already knows the parameter list when it reads the body, so
//! undeclared variables, method calls (`Lib.helper(...)`), assignments and
//! `else` branches are rejected here with positioned diagnostics. Placement
//! of `after` relative to `before` is checked structurally: `after` must be a
//! later sibling of `before`, or nested inside one (so a guard may wrap
//! `after` alone, or both statements — but never `before` alone).

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

pub fn parse_pattern_file(source: &str) -> Result<Vec<Pattern>, Diagnostic> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, params: HashMap::new(), width: IntWidth::I32 };
    let mut patterns = Vec::new();
    while !p.at_end() {
        patterns.push(p.pattern()?);
    }
    Ok(patterns)
}

/// Statements as written; resolved into (before, after, preconds) afterwards.
enum Stmt {
    Before(ExprAst, (u32, u32)),
    After(ExprAst, (u32, u32)),
    If(Option<PrecondAst>, Vec<Stmt>), // None = literal `true` guard
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Parameters of the pattern currently being parsed.
    params: HashMap<String, ParamKind>,
    width: IntWidth,
}

const MODIFIERS: [&str; 5] = ["public", "private", "protected", "static", "final"];

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn err(&self, message: impl Into<String>) -> Diagnostic {
        let (line, col) = self.here();
        Diagnostic::new(line, col, message)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), Diagnostic> {
        if self.eat(&tok) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(self.err(format!("expected {what}, found {found}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Token { tok: Tok::Ident(name), .. }) = self.bump() else {
                    unreachable!()
                };
                Ok(name)
            }
            _ => Err(self.err(format!(
                "expected {what}, found {}",
                self.peek().map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // -- pattern ------------------------------------------------------------

    fn pattern(&mut self) -> Result<Pattern, Diagnostic> {
        match self.peek() {
            Some(Tok::Marker(m)) if m == "Pattern" => {
                self.pos += 1;
            }
            _ => return Err(self.err("expected `@Pattern`")),
        }
        while matches!(self.peek(), Some(Tok::Ident(s)) if MODIFIERS.contains(&s.as_str())) {
            self.pos += 1;
        }
        if !self.eat_keyword("void") {
            return Err(self.err("expected `void` return type"));
        }
        let name = self.expect_ident("pattern name")?;
        self.expect(Tok::LParen, "`(`")?;

        self.params.clear();
        let mut params = Vec::new();
        let mut width: Option<IntWidth> = None;
        if !self.eat(&Tok::RParen) {
            loop {
                let (param, w) = self.param()?;
                match width {
                    None => width = Some(w),
                    Some(first) if first != w => {
                        return Err(self.err(format!(
                            "parameter `{}` has width {} but the pattern is {}; \
                             all parameters of a pattern must share one width",
                            param.name,
                            w.java_name(),
                            first.java_name()
                        )));
                    }
                    Some(_) => {}
                }
                if self.params.insert(param.name.clone(), param.kind).is_some() {
                    return Err(self.err(format!("duplicate parameter name `{}`", param.name)));
                }
                params.push(param);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        // A pattern with no parameters is all-literal; default to int.
        self.width = width.unwrap_or(IntWidth::I32);

        let stmts = self.block()?;
        let (before, after, preconds, trivial) = self.resolve_stmts(stmts)?;
        Ok(Pattern {
            name,
            width: self.width,
            params,
            before,
            after,
            preconds,
            trivial_precondition: trivial,
        })
    }

    fn param(&mut self) -> Result<(Param, IntWidth), Diagnostic> {
        let kind = match self.peek() {
            Some(Tok::Marker(m)) if m == "Constant" => {
                self.pos += 1;
                ParamKind::Constant
            }
            Some(Tok::Marker(m)) => {
                return Err(self.err(format!("unknown parameter annotation `@{m}`")));
            }
            _ => ParamKind::Free,
        };
        let width = if self.eat_keyword("int") {
            IntWidth::I32
        } else if self.eat_keyword("long") {
            IntWidth::I64
        } else {
            return Err(self.err("expected parameter type `int` or `long`"));
        };
        let name = self.expect_ident("parameter name")?;
        Ok((Param { name, kind }, width))
    }

    // -- statements ----------------------------------------------------------

    fn block(&mut self) -> Result<Vec<Stmt>, Diagnostic> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.at_end() {
                return Err(self.err("expected `}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let at = self.here();
        if self.eat_keyword("before") {
            let e = self.parenthesized_expr_stmt()?;
            return Ok(Stmt::Before(e, at));
        }
        if self.eat_keyword("after") {
            let e = self.parenthesized_expr_stmt()?;
            return Ok(Stmt::After(e, at));
        }
        if self.eat_keyword("if") {
            self.expect(Tok::LParen, "`(` after `if`")?;
            let cond = self.precond_or_true()?;
            self.expect(Tok::RParen, "`)`")?;
            let body = if self.peek() == Some(&Tok::LBrace) {
                self.block()?
            } else {
                vec![self.stmt()?]
            };
            if self.eat_keyword("else") {
                return Err(self.err("`else` branches are unsupported in patterns"));
            }
            return Ok(Stmt::If(cond, body));
        }
        if let Some(Tok::Ident(name)) = self.peek() {
            if self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::Assign) {
                return Err(self.err(format!(
                    "assignment to `{name}` is unsupported; patterns contain only \
                     before/after/if statements"
                )));
            }
        }
        Err(self.err("expected `before`, `after`, or `if` statement"))
    }

    fn parenthesized_expr_stmt(&mut self) -> Result<ExprAst, Diagnostic> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(e)
    }

    /// Turns the statement tree into the single (before, after) pair plus the
    /// conjoined guards of every `if` enclosing either statement.
    fn resolve_stmts(
        &self,
        stmts: Vec<Stmt>,
    ) -> Result<(ExprAst, ExprAst, Vec<PrecondAst>, bool), Diagnostic> {
        // Index paths through nested blocks, e.g. [2, 0] = first statement of
        // the `if` that is the third statement of the body.
        fn find(
            stmts: &[Stmt],
            prefix: &mut Vec<usize>,
            before: &mut Option<(Vec<usize>, (u32, u32))>,
            after: &mut Option<(Vec<usize>, (u32, u32))>,
        ) -> Result<(), Diagnostic> {
            for (i, s) in stmts.iter().enumerate() {
                prefix.push(i);
                match s {
                    Stmt::Before(_, at) => {
                        if before.is_some() {
                            return Err(Diagnostic::new(
                                at.0,
                                at.1,
                                "a pattern must contain exactly one `before` statement",
                            ));
                        }
                        *before = Some((prefix.clone(), *at));
                    }
                    Stmt::After(_, at) => {
                        if after.is_some() {
                            return Err(Diagnostic::new(
                                at.0,
                                at.1,
                                "a pattern must contain exactly one `after` statement",
                            ));
                        }
                        *after = Some((prefix.clone(), *at));
                    }
                    Stmt::If(_, body) => find(body, prefix, before, after)?,
                }
                prefix.pop();
            }
            Ok(())
        }

        let mut before_at = None;
        let mut after_at = None;
        find(&stmts, &mut Vec::new(), &mut before_at, &mut after_at)?;
        let (before_path, _) = before_at.ok_or_else(|| self.err("missing `before` statement"))?;
        let (after_path, after_pos) =
            after_at.ok_or_else(|| self.err("missing `after` statement"))?;

        // `after` must be a later sibling of `before` (possibly nested
        // further inside such a sibling).
        let k = before_path.len();
        let placed_ok = after_path.len() >= k
            && after_path[..k - 1] == before_path[..k - 1]
            && after_path[k - 1] > before_path[k - 1];
        if !placed_ok {
            return Err(Diagnostic::new(
                after_pos.0,
                after_pos.1,
                "`after` must follow `before` as a sibling statement or inside a \
                 guard that follows it; a guard may not enclose `before` alone",
            ));
        }

        // Collect guards of every `if` on the paths to `before` and `after`.
        let mut preconds = Vec::new();
        let mut trivial = false;
        let collect = |path: &[usize], preconds: &mut Vec<PrecondAst>, trivial: &mut bool| {
            let mut stmts: &[Stmt] = &stmts;
            for (depth, &idx) in path.iter().enumerate() {
                if depth + 1 == path.len() {
                    break; // the before/after statement itself
                }
                match &stmts[idx] {
                    Stmt::If(cond, body) => {
                        match cond {
                            Some(c) => {
                                if !preconds.contains(c) {
                                    preconds.push(c.clone());
                                }
                            }
                            None => *trivial = true,
                        }
                        stmts = body;
                    }
                    _ => unreachable!("only `if` statements nest"),
                }
            }
        };
        collect(&before_path, &mut preconds, &mut trivial);
        collect(&after_path, &mut preconds, &mut trivial);

        fn take_exprs(stmts: Vec<Stmt>) -> (Option<ExprAst>, Option<ExprAst>) {
            let mut b = None;
            let mut a = None;
            for s in stmts {
                match s {
                    Stmt::Before(e, _) => b = Some(e),
                    Stmt::After(e, _) => a = Some(e),
                    Stmt::If(_, body) => {
                        let (ib, ia) = take_exprs(body);
                        b = b.or(ib);
                        a = a.or(ia);
                    }
                }
            }
            (b, a)
        }
        let (before, after) = take_exprs(stmts);
        Ok((before.unwrap(), after.unwrap(), preconds, trivial))
    }

    // -- expressions ---------------------------------------------------------

    fn expr(&mut self) -> Result<ExprAst, Diagnostic> {
        self.binary_level(0)
    }

    /// Binary operator tiers, loosest first.
    const LEVELS: [&'static [(Tok, BinOp)]; 6] = [
        &[(Tok::Pipe, BinOp::Or)],
        &[(Tok::Caret, BinOp::Xor)],
        &[(Tok::Amp, BinOp::And)],
        &[(Tok::Shl, BinOp::Shl), (Tok::Shr, BinOp::Shr), (Tok::UShr, BinOp::UShr)],
        &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
        &[(Tok::Star, BinOp::Mul)],
    ];

    fn binary_level(&mut self, level: usize) -> Result<ExprAst, Diagnostic> {
        if level == Self::LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        'outer: loop {
            for (tok, op) in Self::LEVELS[level] {
                if self.eat(tok) {
                    let rhs = self.binary_level(level + 1)?;
                    lhs = ExprAst::bin(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> Result<ExprAst, Diagnostic> {
        if self.peek() == Some(&Tok::Minus) {
            let save = self.pos;
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num { .. }) => {
                    let Some(Token { tok: Tok::Num { value, .. }, .. }) = self.bump() else {
                        unreachable!()
                    };
                    return self.literal(-value);
                }
                _ => {
                    self.pos = save;
                    return Err(self.err(
                        "unary minus is only supported immediately before a numeric literal",
                    ));
                }
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ExprAst, Diagnostic> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Num { value, .. }) => {
                self.pos += 1;
                self.literal(value)
            }
            Some(Tok::Ident(name)) => {
                let at = self.here();
                self.pos += 1;
                if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::LParen)) {
                    return Err(self.err(format!(
                        "method calls are unsupported in pattern expressions (near `{name}`)"
                    )));
                }
                if !self.params.contains_key(&name) {
                    return Err(Diagnostic::new(
                        at.0,
                        at.1,
                        format!("undeclared variable `{name}`"),
                    ));
                }
                Ok(ExprAst::Var(name))
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    fn literal(&mut self, value: i128) -> Result<ExprAst, Diagnostic> {
        let (lo, hi) = (self.width.min_value() as i128, self.width.max_value() as i128);
        if value < lo || value > hi {
            return Err(self.err(format!(
                "literal {value} is out of range for {}",
                self.width.java_name()
            )));
        }
        Ok(ExprAst::Lit(value as i64))
    }

    // -- preconditions --------------------------------------------------------

    /// `None` means the guard was the literal `true`.
    fn precond_or_true(&mut self) -> Result<Option<PrecondAst>, Diagnostic> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "true")
            && self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::RParen)
        {
            self.pos += 1;
            return Ok(None);
        }
        self.precond().map(Some)
    }

    fn precond(&mut self) -> Result<PrecondAst, Diagnostic> {
        let mut lhs = self.precond_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.precond_and()?;
            lhs = PrecondAst::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn precond_and(&mut self) -> Result<PrecondAst, Diagnostic> {
        let mut lhs = self.precond_not()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.precond_not()?;
            lhs = PrecondAst::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn precond_not(&mut self) -> Result<PrecondAst, Diagnostic> {
        if self.eat(&Tok::Bang) {
            return Ok(PrecondAst::Not(Box::new(self.precond_not()?)));
        }
        // `(` is ambiguous: it may group a boolean (`(c != 0) && ...`) or an
        // arithmetic operand (`(c - 1) < x`). Try the boolean reading first
        // and fall back to a comparison.
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.precond() {
                if self.eat(&Tok::RParen) {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<PrecondAst, Diagnostic> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "true" || s == "false") {
            return Err(self.err(
                "boolean literals are not allowed inside compound preconditions",
            ));
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::EqEq) => CmpOp::Eq,
            Some(Tok::NotEq) => CmpOp::Ne,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Ge) => CmpOp::Ge,
            _ => {
                return Err(self.err("preconditions must be boolean: expected a comparison"));
            }
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(PrecondAst::Cmp(op, lhs, rhs))
    }
}
