#!/usr/bin/env python3
"""Regenerates include/csalign/unicode_tables.hpp from Python's unicodedata.

Emits three tables:
  - punctuation ranges: all general categories P*, plus S* inside the
    Halfwidth/Fullwidth Forms block (U+FF00-U+FFEF), plus Cf format controls
  - simple lowercase map: codepoints whose one-codepoint lowering differs
  - whitespace list: codepoints with the White_Space property
"""
import sys
import unicodedata

MAX_CP = 0x110000


def is_punct(cp: int) -> bool:
    ch = chr(cp)
    cat = unicodedata.category(ch)
    if cat.startswith("P"):
        return True
    if 0xFF00 <= cp <= 0xFFEF and cat.startswith("S"):
        return True
    if cat == "Cf":
        return True
    return False


def ranges(pred):
    out = []
    lo = None
    for cp in range(MAX_CP):
        if pred(cp):
            if lo is None:
                lo = cp
        elif lo is not None:
            out.append((lo, cp - 1))
            lo = None
    if lo is not None:
        out.append((lo, MAX_CP - 1))
    return out


def main(path: str) -> None:
    punct = ranges(is_punct)

    lower_map = []
    for cp in range(MAX_CP):
        ch = chr(cp)
        low = ch.lower()
        if len(low) == 1 and low != ch:
            lower_map.append((cp, ord(low)))

    ws = [cp for cp in range(MAX_CP) if chr(cp).isspace()]

    with open(path, "w", encoding="utf-8") as f:
        w = f.write
        w("// Generated by tools/gen_unicode_tables.py (unicodedata "
          + unicodedata.unidata_version + "). Do not edit by hand.\n")
        w("#pragma once\n\n")
        w("#include <cstdint>\n#include <cstddef>\n\n")
        w("namespace csalign::unicode_tables {\n\n")
        w("struct CpRange { char32_t lo; char32_t hi; };\n")
        w("struct CpMap { char32_t from; char32_t to; };\n\n")

        w("inline constexpr CpRange kPunctRanges[] = {\n")
        for lo, hi in punct:
            w("    {0x%X, 0x%X},\n" % (lo, hi))
        w("};\n")
        w("inline constexpr std::size_t kPunctRangeCount = %d;\n\n" % len(punct))

        w("inline constexpr CpMap kLowerMap[] = {\n")
        for a, b in lower_map:
            w("    {0x%X, 0x%X},\n" % (a, b))
        w("};\n")
        w("inline constexpr std::size_t kLowerMapCount = %d;\n\n" % len(lower_map))

        w("inline constexpr char32_t kWhitespace[] = {\n")
        for cp in ws:
            w("    0x%X,\n" % cp)
        w("};\n")
        w("inline constexpr std::size_t kWhitespaceCount = %d;\n\n" % len(ws))
        w("}  // namespace csalign::unicode_tables\n")

    print("wrote %s: %d punct ranges, %d lower pairs, %d whitespace"
          % (path, len(punct), len(lower_map), len(ws)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/csalign/unicode_tables.hpp")
