//! Size metrics for comparing a pattern against the matcher code it
//! replaces.
//!
//! Two numbers, both deliberately blunt:
//!
//! * **characters** — non-whitespace code points. Layout choices don't
//!   affect the comparison.
//! * **identifiers** — identifier tokens that are not reserved words of the
//!   language. Operators, punctuation and numeric literals don't count;
//!   neither do string/char literal contents. Comment text is scanned like
//!   code — writing a comment is part of writing the matcher, and the
//!   character metric already includes it. In pattern mode, `@Marker`
//!   annotations are framework noise and are excluded.
//!
//! The reserved-word lists live in `data/` as plain text so the exact
//! vocabulary is reviewable; notably `NULL` is *not* a C++ keyword (it is a
//! library macro), so each `NULL` in generated code counts as an
//! identifier, exactly like the `nullptr`-free JIT style it imitates.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Which reserved-word vocabulary and token rules to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lang {
    /// The pattern definition language (Java-flavored).
    PatternLang,
    /// C++ matcher code.
    CppLike,
}

fn reserved(lang: Lang) -> &'static HashSet<&'static str> {
    static JAVA: OnceLock<HashSet<&'static str>> = OnceLock::new();
    static CPP: OnceLock<HashSet<&'static str>> = OnceLock::new();
    let (cell, raw) = match lang {
        Lang::PatternLang => (&JAVA, include_str!("../data/reserved_java.txt")),
        Lang::CppLike => (&CPP, include_str!("../data/reserved_cpp.txt")),
    };
    cell.get_or_init(|| {
        raw.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Non-whitespace code points.
pub fn count_characters(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Identifier tokens that are not reserved words of `lang`.
pub fn count_identifiers(text: &str, lang: Lang) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let words = reserved(lang);
    let mut n = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '"' || c == '\'' {
            // Skip the literal's contents; its delimiters are mere punctuation.
            let quote = c;
            i += 1;
            while i < chars.len() && chars[i] != quote {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i += 1;
        } else if lang == Lang::PatternLang
            && c == '@'
            && i + 1 < chars.len()
            && is_ident_start(chars[i + 1])
        {
            i += 1;
            while i < chars.len() && is_ident_part(chars[i]) {
                i += 1;
            }
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_part(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if !words.contains(word.as_str()) {
                n += 1;
            }
        } else if c.is_ascii_digit() {
            // A numeric literal, including any suffix letters (5L, 0x1F).
            while i < chars.len() && is_ident_part(chars[i]) {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characters_ignore_all_whitespace() {
        assert_eq!(count_characters("a +\n\tb "), 3);
        assert_eq!(count_characters(""), 0);
    }

    #[test]
    fn pattern_mode_skips_markers_and_keywords() {
        let text = "@Pattern public void pAdd6(long a, long b) { before(a - b); }";
        // pAdd6, a, b, before, a, b — @Pattern, public, void, long are out.
        assert_eq!(count_identifiers(text, Lang::PatternLang), 6);
    }

    #[test]
    fn boolean_literals_are_reserved_in_pattern_mode() {
        assert_eq!(count_identifiers("if (true) { x; }", Lang::PatternLang), 1);
    }

    #[test]
    fn cpp_mode_counts_null_and_comment_words() {
        // NULL is a macro, not a keyword: it counts. Comment words count.
        let text = "Node* n = NULL; // reset the node";
        // Node, n, NULL, reset, the, node.
        assert_eq!(count_identifiers(text, Lang::CppLike), 6);
    }

    #[test]
    fn string_contents_are_skipped_even_inside_comments() {
        let text = "// Convert \"(a-b)+(c-a)\" into \"(c-b)\"";
        assert_eq!(count_identifiers(text, Lang::CppLike), 2);
    }

    #[test]
    fn numeric_literals_and_suffixes_do_not_count() {
        assert_eq!(count_identifiers("x + 5L + 0x1F + y", Lang::CppLike), 2);
    }

    #[test]
    fn frozen_fixture_goldens() {
        // Values frozen from the independent counter in tools/oracles.
        let cases: [(&str, Lang, usize, usize); 3] = [
            (
                include_str!("../fixtures/padd6_pattern_fragment.txt"),
                Lang::PatternLang,
                50,
                11,
            ),
            (include_str!("../fixtures/pAdd6.pattern"), Lang::PatternLang, 75, 12),
            (include_str!("../fixtures/padd6_handwritten_fragment.cpp"), Lang::CppLike, 206, 27),
        ];
        for (text, lang, chars, idents) in cases {
            assert_eq!(count_characters(text), chars);
            assert_eq!(count_identifiers(text, lang), idents);
        }
    }
}
