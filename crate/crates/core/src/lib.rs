//! Write a JIT peephole rewrite once, as a before/after pattern, and
//! generate the tedious parts: the C++ matcher the compiler would run,
//! an IR-verified regression test, a seeded fuzz check that the rewrite
//! preserves values, and a pairwise report of which pattern silently
//! hides which.
//!
//! A pattern is a tiny Java-flavored method. `before` is the shape to
//! match, `after` the replacement; parameters are free variables unless
//! marked `@Constant`, and an optional `if` guard constrains the matched
//! constants:
//!
//! ```
//! use peephole_forge::{codegen, lang, rewrite};
//!
//! let pats = lang::load_patterns(
//!     "@Pattern
//!      public void pAdd6(long a, long b, long c) {
//!          before((a - b) + (c - a));
//!          after(c - b);
//!      }",
//! )
//! .unwrap();
//! let cp = rewrite::compile(&pats[0]);
//!
//! // The matcher snippet walks the expression DAG exactly once per
//! // operand and re-checks the shared `a` by pointer identity.
//! let snippet = codegen::emit_matcher_snippet(&cp).unwrap();
//! assert!(snippet.text.contains("_P_in11 == _P_in22"));
//! assert!(snippet.text.contains("return new SubLNode(_P_in21, _P_in12);"));
//! ```
//!
//! The pipeline, in the order the data flows:
//!
//! * [`lang`] parses and validates pattern source into ASTs.
//! * [`east`] interns each pattern into a hash-consed expression DAG and
//!   assigns every node its canonical access path — the machinery behind
//!   both code generation and the shadow encoding.
//! * [`rewrite`] matches and instantiates patterns against concrete
//!   expressions, and fuzz-checks that before and after always agree.
//! * [`codegen`] emits the C++ rewrite pass; [`testgen`] emits JIT test
//!   classes whose IR annotations prove the rewrite fired.
//! * [`shadow`] decides whether one pattern makes another unreachable,
//!   by SMT solver and by an independent bounded brute-force oracle.
//! * [`metrics`] counts characters and identifiers, for comparing the
//!   cost of a pattern against the C++ it replaces.
//! * [`cli`] wires the stages into subcommands; [`semantics`] and
//!   [`rng`] hold the shared wrapping arithmetic and seeded streams
//!   everything above derives from.

pub mod cli;
pub mod codegen;
pub mod east;
pub mod lang;
pub mod metrics;
pub mod rewrite;
pub mod rng;
pub mod semantics;
pub mod shadow;
pub mod testgen;
