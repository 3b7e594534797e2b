//! C ABI for embedding the pattern toolkit in a non-Rust host: parse a
//! pattern file once into an opaque handle, then emit C++ or IR tests,
//! fuzz-verify, or shadow-check through plain functions.
//!
//! Conventions, in the order a caller meets them:
//!
//! * Every fallible call returns a [`PfStatus`]; `PF_STATUS_OK` is 0.
//! * On any other status, [`pf_last_error_message`] returns a
//!   human-readable description (thread-local, valid until the next
//!   failing call on the same thread).
//! * Strings handed out through `*mut c_char` out-parameters are owned by
//!   the caller and must be released with [`pf_string_free`]. Strings
//!   returned as `*const c_char` borrow from the handle and live as long
//!   as it does.
//! * Handles come from [`pf_pattern_set_parse`] and die in
//!   [`pf_pattern_set_free`]; they are not thread-safe to mutate but all
//!   operations here only read them.
//!
//! The generated header lives at `include/peephole_forge.h`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::time::Duration;

use peephole_forge::codegen;
use peephole_forge::lang;
use peephole_forge::metrics::{count_characters, count_identifiers, Lang};
use peephole_forge::rewrite::{self, CompiledPattern, FuzzOutcome};
use peephole_forge::rng;
use peephole_forge::shadow::{self, OracleParams, Verdict};
use peephole_forge::testgen;

/// Result of every fallible call. Zero is success; anything else leaves a
/// message in `pf_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PfStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null, an index out of range, or text not UTF-8.
    InvalidArgument = 1,
    /// The pattern source had diagnostics; the message lists them.
    ParseError = 2,
    /// Verification found an input where before and after disagree.
    VerifyFailed = 3,
    /// No input satisfying the pattern's precondition could be sampled,
    /// so nothing was verified.
    Unsampleable = 4,
    /// The pattern cannot be handled by this operation (for example, a
    /// guarded pattern has no deterministic IR test).
    Unsupported = 5,
}

/// Token language for the counting functions.
#[repr(C)]
#[derive(Clone, Copy)]
pub enum PfLang {
    /// Pattern/Java tokens; `@Marker` annotations are not identifiers.
    Pattern = 0,
    /// C++ tokens; identifiers inside comments count, literals do not.
    Cpp = 1,
}

/// An immutable, parsed and compiled pattern file.
pub struct PfPatternSet {
    cps: Vec<CompiledPattern>,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: PfStatus, msg: impl Into<Vec<u8>>) -> PfStatus {
    let msg = CString::new(msg).unwrap_or_else(|_| c"error message contained NUL".to_owned());
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

/// Hands a Rust string to the caller; released by `pf_string_free`.
fn give(out: *mut *mut c_char, s: String) -> PfStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            PfStatus::Ok
        }
        Err(_) => fail(PfStatus::Unsupported, "output contained NUL"),
    }
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, PfStatus> {
    if p.is_null() {
        return Err(fail(PfStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn set_ref<'a>(set: *const PfPatternSet) -> Result<&'a PfPatternSet, PfStatus> {
    set.as_ref()
        .ok_or_else(|| fail(PfStatus::InvalidArgument, "pattern set handle is null"))
}

unsafe fn pattern_at(set: &PfPatternSet, index: usize) -> Result<&CompiledPattern, PfStatus> {
    set.cps.get(index).ok_or_else(|| {
        fail(
            PfStatus::InvalidArgument,
            format!("pattern index {index} out of range (set has {})", set.cps.len()),
        )
    })
}

/// Message for the most recent failing call on this thread. Borrowed;
/// valid until the next failing call. Never null.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and compiles pattern source text.
///
/// On success writes a new handle to `out`. On `PF_STATUS_PARSE_ERROR`
/// the error message contains one `line:col: description` per diagnostic.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_pattern_set_parse(
    src: *const c_char,
    out: *mut *mut PfPatternSet,
) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    let src = match utf8(src, "pattern source") {
        Ok(s) => s,
        Err(st) => return st,
    };
    match lang::load_patterns(src) {
        Ok(pats) => {
            let names = pats
                .iter()
                .map(|p| CString::new(p.name.as_str()).expect("names have no NUL"))
                .collect();
            let cps = pats.iter().map(rewrite::compile).collect();
            *out = Box::into_raw(Box::new(PfPatternSet { cps, names }));
            PfStatus::Ok
        }
        Err(diags) => {
            let msg = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
            fail(PfStatus::ParseError, msg)
        }
    }
}

/// Releases a handle from `pf_pattern_set_parse`. Null is a no-op.
///
/// # Safety
/// `set` must be a handle from `pf_pattern_set_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_pattern_set_free(set: *mut PfPatternSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of patterns in the set; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_pattern_set_len(set: *const PfPatternSet) -> usize {
    set.as_ref().map_or(0, |s| s.cps.len())
}

/// Name of the pattern at `index`, borrowed from the handle; null when
/// the handle is null or the index is out of range.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_pattern_set_name(
    set: *const PfPatternSet,
    index: usize,
) -> *const c_char {
    match set.as_ref().and_then(|s| s.names.get(index)) {
        Some(name) => name.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Emits the complete C++ rewrite-pass file for the whole set.
///
/// # Safety
/// `set` must be a live handle; `out` must be a valid pointer. The
/// returned string is released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_emit_pass_file(
    set: *const PfPatternSet,
    out: *mut *mut c_char,
) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match codegen::emit_pass_file(&set.cps) {
        Ok(text) => give(out, text),
        Err(e) => fail(PfStatus::Unsupported, e),
    }
}

/// Emits one pattern's matcher snippet (pointer declarations, guard
/// condition, rewrite) as it would appear inside its `Ideal` block.
///
/// # Safety
/// `set` must be a live handle; `out` must be a valid pointer. The
/// returned string is released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_emit_matcher_snippet(
    set: *const PfPatternSet,
    index: usize,
    out: *mut *mut c_char,
) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let cp = match pattern_at(set, index) {
        Ok(cp) => cp,
        Err(st) => return st,
    };
    match codegen::emit_matcher_snippet(cp) {
        Ok(snip) => give(out, snip.text),
        Err(e) => fail(PfStatus::Unsupported, e),
    }
}

/// Emits one pattern's IR-verified JIT test method. Guarded patterns are
/// `PF_STATUS_UNSUPPORTED`: a randomly drawn constant cannot be
/// guaranteed to satisfy the precondition.
///
/// # Safety
/// `set` must be a live handle; `out` must be a valid pointer. The
/// returned string is released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_emit_ir_test(
    set: *const PfPatternSet,
    index: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let cp = match pattern_at(set, index) {
        Ok(cp) => cp,
        Err(st) => return st,
    };
    match testgen::emit_ir_test(cp, seed) {
        Ok(text) => give(out, text),
        Err(e) => fail(PfStatus::Unsupported, e),
    }
}

/// Checks one pattern's before/after agreement on `trials` seeded random
/// environments. `PF_STATUS_VERIFY_FAILED` means a counterexample was
/// found; when `counterexample_out` is non-null it receives its
/// description. The seed derivation matches the `verify` subcommand, so
/// equal seeds reproduce equal trials.
///
/// # Safety
/// `set` must be a live handle; `counterexample_out`, if non-null, must
/// be valid. A returned string is released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_verify(
    set: *const PfPatternSet,
    index: usize,
    trials: u64,
    seed: u64,
    counterexample_out: *mut *mut c_char,
) -> PfStatus {
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let cp = match pattern_at(set, index) {
        Ok(cp) => cp,
        Err(st) => return st,
    };
    match rewrite::semantic_fuzz_check(cp, trials, rng::derive(seed, cp.name())) {
        FuzzOutcome::Pass { .. } => PfStatus::Ok,
        FuzzOutcome::Counterexample { env, before, after } => {
            let env: Vec<String> = env.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let text = format!("{} (before {before}, after {after})", env.join(" "));
            if !counterexample_out.is_null() {
                let st = give(counterexample_out, text.clone());
                if st != PfStatus::Ok {
                    return st;
                }
            }
            fail(PfStatus::VerifyFailed, format!("{}: counterexample {text}", cp.name()))
        }
        FuzzOutcome::Unsampleable => fail(
            PfStatus::Unsampleable,
            format!("{}: no inputs satisfied the precondition", cp.name()),
        ),
    }
}

/// Decides, by bounded exhaustive search, whether pattern `x` shadows
/// pattern `y`: writes 1 to `verdict_out` when every expression matching
/// `y` (up to `depth`, over a fixed small vocabulary) also matches `x`,
/// else 0. With a 0 verdict and a non-null `witness_out`, a concrete
/// escaping expression is returned.
///
/// This is the solver-free route; it is exact up to the bound and needs
/// no external tools.
///
/// # Safety
/// `set` must be a live handle; `verdict_out` must be valid;
/// `witness_out`, if non-null, must be valid. A returned string is
/// released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_shadow_oracle(
    set: *const PfPatternSet,
    x: usize,
    y: usize,
    depth: usize,
    verdict_out: *mut c_int,
    witness_out: *mut *mut c_char,
) -> PfStatus {
    if verdict_out.is_null() {
        return fail(PfStatus::InvalidArgument, "verdict_out is null");
    }
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let (xp, yp) = match (pattern_at(set, x), pattern_at(set, y)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(st), _) | (_, Err(st)) => return st,
    };
    let params = OracleParams { depth, ..OracleParams::default() };
    let v = shadow::oracle_shadow(xp, yp, &params);
    *verdict_out = (v.verdict == Verdict::Yes) as c_int;
    if let (Some(w), false) = (v.witness, witness_out.is_null()) {
        return give(witness_out, w);
    }
    PfStatus::Ok
}

/// Decides shadowing with the SMT solver at `solver_path` (the same
/// contract as the `shadow` subcommand's `--solver`), falling back to an
/// oracle witness for structurally impossible pairs. `verdict_out`
/// receives 1 for YES, 0 for NO, -1 for UNKNOWN (solver timeout or
/// `unknown` answer).
///
/// # Safety
/// `set` must be a live handle; `solver_path` must be NUL-terminated;
/// `verdict_out` must be valid; `witness_out`, if non-null, must be
/// valid. A returned string is released with `pf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pf_shadow_solver(
    set: *const PfPatternSet,
    x: usize,
    y: usize,
    solver_path: *const c_char,
    timeout_secs: u64,
    verdict_out: *mut c_int,
    witness_out: *mut *mut c_char,
) -> PfStatus {
    if verdict_out.is_null() {
        return fail(PfStatus::InvalidArgument, "verdict_out is null");
    }
    let path = match utf8(solver_path, "solver path") {
        Ok(p) => p,
        Err(st) => return st,
    };
    let set = match set_ref(set) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let (xp, yp) = match (pattern_at(set, x), pattern_at(set, y)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(st), _) | (_, Err(st)) => return st,
    };
    let cfg = match shadow::resolve_solver(Some(std::path::Path::new(path))) {
        Ok(c) => c,
        Err(e) => return fail(PfStatus::InvalidArgument, e.to_string()),
    };
    let timeout = Duration::from_secs(timeout_secs.max(1));
    match shadow::determine_shadow(xp, yp, &cfg, timeout, &OracleParams::default()) {
        Ok(v) => {
            *verdict_out = match v.verdict {
                Verdict::Yes => 1,
                Verdict::No => 0,
                Verdict::Unknown => -1,
            };
            if let (Some(w), false) = (v.witness, witness_out.is_null()) {
                return give(witness_out, w);
            }
            PfStatus::Ok
        }
        Err(e) => fail(PfStatus::Unsupported, e.to_string()),
    }
}

/// Counts non-whitespace characters in `text`.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_count_characters(text: *const c_char, out: *mut usize) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    match utf8(text, "text") {
        Ok(t) => {
            *out = count_characters(t);
            PfStatus::Ok
        }
        Err(st) => st,
    }
}

/// Counts identifier tokens in `text` under the given language's rules.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_count_identifiers(
    text: *const c_char,
    lang: PfLang,
    out: *mut usize,
) -> PfStatus {
    if out.is_null() {
        return fail(PfStatus::InvalidArgument, "out pointer is null");
    }
    match utf8(text, "text") {
        Ok(t) => {
            let lang = match lang {
                PfLang::Pattern => Lang::PatternLang,
                PfLang::Cpp => Lang::CppLike,
            };
            *out = count_identifiers(t, lang);
            PfStatus::Ok
        }
        Err(st) => st,
    }
}

/// Releases a string returned through any `*mut c_char` out-parameter.
/// Null is a no-op.
///
/// # Safety
/// `s` must be null or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    const CORPUS: &str = include_str!("../../core/fixtures/corpus.pattern");

    fn parse(src: &str) -> *mut PfPatternSet {
        let c = CString::new(src).unwrap();
        let mut set = ptr::null_mut();
        let st = unsafe { pf_pattern_set_parse(c.as_ptr(), &mut set) };
        assert_eq!(st, PfStatus::Ok, "{}", last_error());
        set
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(pf_last_error_message()) }.to_str().unwrap().to_string()
    }

    fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        unsafe { pf_string_free(p) };
        s
    }

    #[test]
    fn parse_exposes_names_and_len() {
        let set = parse(CORPUS);
        unsafe {
            assert_eq!(pf_pattern_set_len(set), 10);
            let name = CStr::from_ptr(pf_pattern_set_name(set, 9));
            assert_eq!(name.to_str().unwrap(), "pAdd6");
            assert!(pf_pattern_set_name(set, 10).is_null());
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn parse_failure_reports_diagnostics() {
        let c = CString::new("@Pattern\npublic void p(int a) {\n    before(a +);\n}\n").unwrap();
        let mut set = ptr::null_mut();
        let st = unsafe { pf_pattern_set_parse(c.as_ptr(), &mut set) };
        assert_eq!(st, PfStatus::ParseError);
        assert!(set.is_null());
        assert!(last_error().starts_with("3:"), "{}", last_error());
    }

    #[test]
    fn null_arguments_are_rejected_not_crashed() {
        let mut set = ptr::null_mut();
        unsafe {
            assert_eq!(pf_pattern_set_parse(ptr::null(), &mut set), PfStatus::InvalidArgument);
            assert_eq!(pf_pattern_set_len(ptr::null()), 0);
            assert!(pf_pattern_set_name(ptr::null(), 0).is_null());
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_pass_file(ptr::null(), &mut out), PfStatus::InvalidArgument);
            pf_pattern_set_free(ptr::null_mut());
            pf_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn pass_file_and_snippet_come_out_through_the_abi() {
        let set = parse(CORPUS);
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_pass_file(set, &mut out), PfStatus::Ok);
            let pass = take_string(out);
            assert!(pass.contains("AddLNode::Ideal"), "{pass}");

            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_matcher_snippet(set, 9, &mut out), PfStatus::Ok);
            let snip = take_string(out);
            assert!(snip.contains("return new SubLNode(_P_in21, _P_in12);"), "{snip}");
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn ir_test_emission_matches_the_library() {
        let set = parse(CORPUS);
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_ir_test(set, 9, 0, &mut out), PfStatus::Ok);
            let text = take_string(out);
            assert!(text.contains("@IR(failOn = {IRNode.ADD})"), "{text}");

            // Index 0 had a constant-true guard that parsing dropped, so
            // it emits like any unguarded pattern.
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_ir_test(set, 0, 0, &mut out), PfStatus::Ok);
            take_string(out);
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn guarded_patterns_report_unsupported_ir_tests() {
        let set = parse(
            "@Pattern\npublic void g(int x, @Constant int c) {\n    before(x + c);\n    if (c > 0) {\n        after(c + x);\n    }\n}\n",
        );
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_ir_test(set, 0, 0, &mut out), PfStatus::Unsupported);
            assert!(last_error().contains("precondition"), "{}", last_error());
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn verify_passes_sound_patterns_and_fails_unsound_ones() {
        let set = parse(CORPUS);
        unsafe {
            assert_eq!(pf_verify(set, 9, 500, 0, ptr::null_mut()), PfStatus::Ok);
            pf_pattern_set_free(set);
        }

        let bad = parse("@Pattern\npublic void w(int a, int b) {\n    before(a + b);\n    after(a - b);\n}\n");
        unsafe {
            let mut cex = ptr::null_mut();
            assert_eq!(pf_verify(bad, 0, 200, 0, &mut cex), PfStatus::VerifyFailed);
            let text = take_string(cex);
            assert!(text.contains("before"), "{text}");
            pf_pattern_set_free(bad);
        }
    }

    #[test]
    fn oracle_shadow_sees_both_directions() {
        let set = parse(CORPUS);
        let (padd2, padd5) = (7, 8);
        unsafe {
            let mut verdict = -2;
            let mut witness = ptr::null_mut();
            assert_eq!(
                pf_shadow_oracle(set, padd2, padd5, 3, &mut verdict, &mut witness),
                PfStatus::Ok
            );
            assert_eq!(verdict, 1);
            assert!(witness.is_null());

            assert_eq!(
                pf_shadow_oracle(set, padd5, padd2, 3, &mut verdict, &mut witness),
                PfStatus::Ok
            );
            assert_eq!(verdict, 0);
            let w = take_string(witness);
            assert!(!w.is_empty());
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn out_of_range_indices_are_invalid_arguments() {
        let set = parse(CORPUS);
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(pf_emit_ir_test(set, 99, 0, &mut out), PfStatus::InvalidArgument);
            assert!(last_error().contains("out of range"), "{}", last_error());
            pf_pattern_set_free(set);
        }
    }

    #[test]
    fn counting_functions_match_the_reference_values() {
        let pat = CString::new(include_str!("../../core/fixtures/padd6_pattern_fragment.txt")).unwrap();
        let cpp = CString::new(include_str!("../../core/fixtures/padd6_handwritten_fragment.cpp")).unwrap();
        unsafe {
            let mut n = 0usize;
            assert_eq!(pf_count_identifiers(pat.as_ptr(), PfLang::Pattern, &mut n), PfStatus::Ok);
            assert_eq!(n, 11);
            assert_eq!(pf_count_identifiers(cpp.as_ptr(), PfLang::Cpp, &mut n), PfStatus::Ok);
            assert_eq!(n, 27);
            assert_eq!(pf_count_characters(cpp.as_ptr(), &mut n), PfStatus::Ok);
            assert_eq!(n, 206);
        }
    }

    #[test]
    fn generated_header_declares_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include/peephole_forge.h");
        let text = std::fs::read_to_string(header).unwrap();
        assert!(text.contains("#ifndef PEEPHOLE_FORGE_H"));
        for sym in [
            "pf_pattern_set_parse",
            "pf_pattern_set_free",
            "pf_emit_pass_file",
            "pf_emit_ir_test",
            "pf_verify",
            "pf_shadow_oracle",
            "pf_shadow_solver",
            "pf_count_identifiers",
            "pf_string_free",
            "pf_last_error_message",
            "PF_STATUS_OK",
        ] {
            assert!(text.contains(sym), "header must declare {sym}");
        }
    }
}
