//! Tokenizer for pattern files.
//!
//! Produces a flat token stream with 1-based line/column positions. `//`
//! line comments and whitespace are skipped. `@Name` annotations become
//! dedicated marker tokens so the parser can distinguish `@Constant int c`
//! from an identifier.

use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `@Name` with the `@` stripped (`Pattern`, `Constant`).
    Marker(String),
    /// Unsigned digits; a leading `-` is applied by the parser. `long_suffix`
    /// records a trailing `L`/`l`.
    Num { value: i128, long_suffix: bool },
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Plus,
    Minus,
    Star,
    Amp,
    Pipe,
    Caret,
    Shl,
    Shr,
    UShr,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Assign,
}

impl Tok {
    /// Human-readable rendering for error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Marker(s) => format!("`@{s}`"),
            Tok::Num { value, .. } => format!("`{value}`"),
            other => format!(
                "`{}`",
                match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Dot => ".",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Caret => "^",
                    Tok::Shl => "<<",
                    Tok::Shr => ">>",
                    Tok::UShr => ">>>",
                    Tok::EqEq => "==",
                    Tok::NotEq => "!=",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::Gt => ">",
                    Tok::Ge => ">=",
                    Tok::AndAnd => "&&",
                    Tok::OrOr => "||",
                    Tok::Bang => "!",
                    Tok::Assign => "=",
                    _ => unreachable!(),
                }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

pub fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut toks = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            toks.push(Token { tok: $tok, line, col });
            i += $len;
            col += $len as u32;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            _ if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '.' => push!(Tok::Dot, 1),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            '^' => push!(Tok::Caret, 1),
            '&' if next == Some('&') => push!(Tok::AndAnd, 2),
            '&' => push!(Tok::Amp, 1),
            '|' if next == Some('|') => push!(Tok::OrOr, 2),
            '|' => push!(Tok::Pipe, 1),
            '<' if next == Some('<') => push!(Tok::Shl, 2),
            '<' if next == Some('=') => push!(Tok::Le, 2),
            '<' => push!(Tok::Lt, 1),
            '>' if next == Some('>') && chars.get(i + 2) == Some(&'>') => push!(Tok::UShr, 3),
            '>' if next == Some('>') => push!(Tok::Shr, 2),
            '>' if next == Some('=') => push!(Tok::Ge, 2),
            '>' => push!(Tok::Gt, 1),
            '=' if next == Some('=') => push!(Tok::EqEq, 2),
            '=' => push!(Tok::Assign, 1),
            '!' if next == Some('=') => push!(Tok::NotEq, 2),
            '!' => push!(Tok::Bang, 1),
            '@' => {
                let start = i + 1;
                if start >= chars.len() || !is_ident_start(chars[start]) {
                    return Err(Diagnostic::new(line, col, "expected annotation name after `@`"));
                }
                let mut end = start;
                while end < chars.len() && is_ident_part(chars[end]) {
                    end += 1;
                }
                let name: String = chars[start..end].iter().collect();
                let len = end - i;
                push!(Tok::Marker(name), len);
            }
            _ if c.is_ascii_digit() => {
                let mut end = i;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                let digits: String = chars[i..end].iter().collect();
                let value: i128 = digits.parse().map_err(|_| {
                    Diagnostic::new(line, col, format!("numeric literal `{digits}` is too large"))
                })?;
                let long_suffix = matches!(chars.get(end), Some('L') | Some('l'));
                let len = end - i + usize::from(long_suffix);
                push!(Tok::Num { value, long_suffix }, len);
            }
            _ if is_ident_start(c) => {
                let mut end = i;
                while end < chars.len() && is_ident_part(chars[end]) {
                    end += 1;
                }
                let name: String = chars[i..end].iter().collect();
                let len = end - i;
                push!(Tok::Ident(name), len);
            }
            _ => {
                return Err(Diagnostic::new(line, col, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(toks)
}
