/* C interface to the peephole pattern toolkit. Generated; do not edit. */

#ifndef PEEPHOLE_FORGE_H
#define PEEPHOLE_FORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Zero is success; anything else leaves a
// message in `pf_last_error_message`.
typedef enum PfStatus {
  // The call succeeded.
  PF_STATUS_OK = 0,
  // A pointer was null, an index out of range, or text not UTF-8.
  PF_STATUS_INVALID_ARGUMENT = 1,
  // The pattern source had diagnostics; the message lists them.
  PF_STATUS_PARSE_ERROR = 2,
  // Verification found an input where before and after disagree.
  PF_STATUS_VERIFY_FAILED = 3,
  // No input satisfying the pattern's precondition could be sampled,
  // so nothing was verified.
  PF_STATUS_UNSAMPLEABLE = 4,
  // The pattern cannot be handled by this operation (for example, a
  // guarded pattern has no deterministic IR test).
  PF_STATUS_UNSUPPORTED = 5,
} PfStatus;

// Token language for the counting functions.
typedef enum PfLang {
  // Pattern/Java tokens; `@Marker` annotations are not identifiers.
  PF_LANG_PATTERN = 0,
  // C++ tokens; identifiers inside comments count, literals do not.
  PF_LANG_CPP = 1,
} PfLang;

// An immutable, parsed and compiled pattern file.
typedef struct PfPatternSet PfPatternSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failing call on this thread. Borrowed;
// valid until the next failing call. Never null.
const char *pf_last_error_message(void);

// Parses and compiles pattern source text.
//
// On success writes a new handle to `out`. On `PF_STATUS_PARSE_ERROR`
// the error message contains one `line:col: description` per diagnostic.
//
// # Safety
// `src` must be a NUL-terminated string; `out` must be a valid pointer.
enum PfStatus pf_pattern_set_parse(const char *src, struct PfPatternSet **out);

// Releases a handle from `pf_pattern_set_parse`. Null is a no-op.
//
// # Safety
// `set` must be a handle from `pf_pattern_set_parse` not yet freed.
void pf_pattern_set_free(struct PfPatternSet *set);

// Number of patterns in the set; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
uintptr_t pf_pattern_set_len(const struct PfPatternSet *set);

// Name of the pattern at `index`, borrowed from the handle; null when
// the handle is null or the index is out of range.
//
// # Safety
// `set` must be null or a live handle.
const char *pf_pattern_set_name(const struct PfPatternSet *set, uintptr_t index);

// Emits the complete C++ rewrite-pass file for the whole set.
//
// # Safety
// `set` must be a live handle; `out` must be a valid pointer. The
// returned string is released with `pf_string_free`.
enum PfStatus pf_emit_pass_file(const struct PfPatternSet *set, char **out);

// Emits one pattern's matcher snippet (pointer declarations, guard
// condition, rewrite) as it would appear inside its `Ideal` block.
//
// # Safety
// `set` must be a live handle; `out` must be a valid pointer. The
// returned string is released with `pf_string_free`.
enum PfStatus pf_emit_matcher_snippet(const struct PfPatternSet *set, uintptr_t index, char **out);

// Emits one pattern's IR-verified JIT test method. Guarded patterns are
// `PF_STATUS_UNSUPPORTED`: a randomly drawn constant cannot be
// guaranteed to satisfy the precondition.
//
// # Safety
// `set` must be a live handle; `out` must be a valid pointer. The
// returned string is released with `pf_string_free`.
enum PfStatus pf_emit_ir_test(const struct PfPatternSet *set,
                              uintptr_t index,
                              uint64_t seed,
                              char **out);

// Checks one pattern's before/after agreement on `trials` seeded random
// environments. `PF_STATUS_VERIFY_FAILED` means a counterexample was
// found; when `counterexample_out` is non-null it receives its
// description. The seed derivation matches the `verify` subcommand, so
// equal seeds reproduce equal trials.
//
// # Safety
// `set` must be a live handle; `counterexample_out`, if non-null, must
// be valid. A returned string is released with `pf_string_free`.
enum PfStatus pf_verify(const struct PfPatternSet *set,
                        uintptr_t index,
                        uint64_t trials,
                        uint64_t seed,
                        char **counterexample_out);

// Decides, by bounded exhaustive search, whether pattern `x` shadows
// pattern `y`: writes 1 to `verdict_out` when every expression matching
// `y` (up to `depth`, over a fixed small vocabulary) also matches `x`,
// else 0. With a 0 verdict and a non-null `witness_out`, a concrete
// escaping expression is returned.
//
// This is the solver-free route; it is exact up to the bound and needs
// no external tools.
//
// # Safety
// `set` must be a live handle; `verdict_out` must be valid;
// `witness_out`, if non-null, must be valid. A returned string is
// released with `pf_string_free`.
enum PfStatus pf_shadow_oracle(const struct PfPatternSet *set,
                               uintptr_t x,
                               uintptr_t y,
                               uintptr_t depth,
                               int *verdict_out,
                               char **witness_out);

// Decides shadowing with the SMT solver at `solver_path` (the same
// contract as the `shadow` subcommand's `--solver`), falling back to an
// oracle witness for structurally impossible pairs. `verdict_out`
// receives 1 for YES, 0 for NO, -1 for UNKNOWN (solver timeout or
// `unknown` answer).
//
// # Safety
// `set` must be a live handle; `solver_path` must be NUL-terminated;
// `verdict_out` must be valid; `witness_out`, if non-null, must be
// valid. A returned string is released with `pf_string_free`.
enum PfStatus pf_shadow_solver(const struct PfPatternSet *set,
                               uintptr_t x,
                               uintptr_t y,
                               const char *solver_path,
                               uint64_t timeout_secs,
                               int *verdict_out,
                               char **witness_out);

// Counts non-whitespace characters in `text`.
//
// # Safety
// `text` must be NUL-terminated; `out` must be valid.
enum PfStatus pf_count_characters(const char *text, uintptr_t *out);

// Counts identifier tokens in `text` under the given language's rules.
//
// # Safety
// `text` must be NUL-terminated; `out` must be valid.
enum PfStatus pf_count_identifiers(const char *text, enum PfLang lang, uintptr_t *out);

// Releases a string returned through any `*mut c_char` out-parameter.
// Null is a no-op.
//
// # Safety
// `s` must be null or a string obtained from this library, freed once.
void pf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEEPHOLE_FORGE_H */
