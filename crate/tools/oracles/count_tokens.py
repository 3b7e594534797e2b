#!/usr/bin/env python3
"""Independent token counter used to freeze the metrics goldens.

Policy (mirrors the complexity metric the tool implements):
  characters  = count of non-whitespace code points.
  identifiers = occurrences of identifier tokens ([A-Za-z_$][A-Za-z0-9_$]*)
                that are not reserved words of the selected language.
                Numeric literals, operators and punctuation are excluded;
                string/char literal contents are skipped; comment text is
                scanned like code (writing a comment is writing code);
                in pattern mode, `@Marker` annotations are excluded.

Usage: count_tokens.py {pattern|cpp} FILE...
"""

import sys
from pathlib import Path

JAVA_RESERVED = set("""
abstract assert boolean break byte case catch char class const continue
default do double else enum extends final finally float for goto if
implements import instanceof int interface long native new package private
protected public return short static strictfp super switch synchronized this
throw throws transient try void volatile while true false null
""".split())

CPP_RESERVED = set("""
alignas alignof and and_eq asm auto bitand bitor bool break case catch char
char8_t char16_t char32_t class compl concept const consteval constexpr
constinit const_cast continue co_await co_return co_yield decltype default
delete do double dynamic_cast else enum explicit export extern false float
for friend goto if inline int long mutable namespace new noexcept not not_eq
nullptr operator or or_eq private protected public register reinterpret_cast
requires return short signed sizeof static static_assert static_cast struct
switch template this thread_local throw true try typedef typeid typename
union unsigned using virtual void volatile wchar_t while xor xor_eq
""".split())


def is_ident_start(c):
    return c.isalpha() or c in "_$"


def is_ident_part(c):
    return c.isalnum() or c in "_$"


def count_identifiers(text, mode):
    reserved = JAVA_RESERVED if mode == "pattern" else CPP_RESERVED
    n = 0
    i = 0
    while i < len(text):
        c = text[i]
        if c in "\"'":
            quote = c
            i += 1
            while i < len(text) and text[i] != quote:
                i += 2 if text[i] == "\\" else 1
            i += 1
        elif mode == "pattern" and c == "@" and i + 1 < len(text) and is_ident_start(text[i + 1]):
            i += 1
            while i < len(text) and is_ident_part(text[i]):
                i += 1
        elif is_ident_start(c):
            j = i
            while j < len(text) and is_ident_part(text[j]):
                j += 1
            if text[i:j] not in reserved:
                n += 1
            i = j
        elif c.isdigit():
            while i < len(text) and is_ident_part(text[i]):
                i += 1
        else:
            i += 1
    return n


def main():
    mode = sys.argv[1]
    for name in sys.argv[2:]:
        text = Path(name).read_text()
        chars = sum(1 for c in text if not c.isspace())
        idents = count_identifiers(text, mode)
        print(f"{name}\t{chars}\t{idents}")


if __name__ == "__main__":
    main()
