//! The pattern language: a small Java-flavored DSL for writing peephole
//! optimizations as `before`/`after` expression pairs.
//!
//! A pattern file is a sequence of annotated method-like declarations:
//!
//! ```text
//! @Pattern
//! public void pAdd6(long a, long b, long c) {
//!     before((a - b) + (c - a));
//!     after(c - b);
//! }
//! ```
//!
//! Parameters are *free variables* (match any subexpression; repeated
//! occurrences must bind the same node) unless marked `@Constant`, in which
//! case they match only literal constants. Preconditions over constant
//! parameters are written as `if` conditions guarding the `after` statement.
//!
//! - [`ast`]: parsed representation ([`ast::Pattern`], [`ast::ExprAst`], ...)
//! - [`lexer`]: tokenizer shared by the parser
//! - [`parser`]: recursive-descent parser, [`parser::parse_pattern_file`]
//! - [`validate`]: post-parse semantic checks, [`validate::validate_pattern`]

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod validate;

use std::fmt;

/// A parse or validation problem, positioned at a source line/column
/// (1-based). Rendered as `line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        Diagnostic { line, col, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// Parses a pattern file and runs every semantic check, collecting all
/// diagnostics. This is the entry point the CLI and FFI use; tests that want
/// to inspect individual failures call [`parser::parse_pattern_file`] and
/// [`validate::validate_pattern`] directly.
pub fn load_patterns(source: &str) -> Result<Vec<ast::Pattern>, Vec<Diagnostic>> {
    let patterns = parser::parse_pattern_file(source).map_err(|d| vec![d])?;
    let mut diags = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for p in &patterns {
        if !seen.insert(p.name.clone()) {
            diags.push(Diagnostic::new(
                0,
                0,
                format!("duplicate pattern name `{}`", p.name),
            ));
        }
        diags.extend(validate::validate_pattern(p));
    }
    if diags.is_empty() {
        Ok(patterns)
    } else {
        Err(diags)
    }
}
