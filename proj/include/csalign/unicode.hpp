#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "csalign/unicode_tables.hpp"

namespace csalign::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence starting at `i`, advancing `i` past it.
// Malformed input yields U+FFFD and advances one byte.
inline char32_t decode_one(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return kReplacement; }
    if (i + len > s.size()) { ++i; return kReplacement; }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) { ++i; return kReplacement; }
        cp = (cp << 6) | (bk & 0x3F);
    }
    // reject overlong encodings and surrogates
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

inline std::u32string decode(std::string_view utf8) {
    std::u32string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) out.push_back(decode_one(utf8, i));
    return out;
}

inline void encode_one(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size() * 3);
    for (char32_t cp : cps) encode_one(cp, out);
    return out;
}

// Unicode categories P* plus fullwidth-form symbols and format controls;
// see tools/gen_unicode_tables.py for the exact membership rule.
inline bool is_punctuation(char32_t cp) {
    using namespace unicode_tables;
    const CpRange* end = kPunctRanges + kPunctRangeCount;
    auto it = std::upper_bound(kPunctRanges, end, cp,
                               [](char32_t v, const CpRange& r) { return v < r.lo; });
    return it != kPunctRanges && cp <= (it - 1)->hi;
}

inline bool is_whitespace(char32_t cp) {
    using namespace unicode_tables;
    const char32_t* end = kWhitespace + kWhitespaceCount;
    return std::binary_search(kWhitespace, end, cp);
}

inline char32_t to_lower(char32_t cp) {
    using namespace unicode_tables;
    const CpMap* end = kLowerMap + kLowerMapCount;
    auto it = std::lower_bound(kLowerMap, end, cp,
                               [](const CpMap& m, char32_t v) { return m.from < v; });
    if (it != end && it->from == cp) return it->to;
    return cp;
}

// CJK Unified Ideographs, base block plus extensions A-G and the
// compatibility URO additions; one codepoint == one Chinese character.
inline bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0x20000 && cp <= 0x2A6DF) || (cp >= 0x2A700 && cp <= 0x2B73F) ||
           (cp >= 0x2B740 && cp <= 0x2B81F) || (cp >= 0x2B820 && cp <= 0x2CEAF) ||
           (cp >= 0x2CEB0 && cp <= 0x2EBEF) || (cp >= 0x30000 && cp <= 0x3134A);
}

// Basic Latin letters and digits; normalization lowercases first, but
// accept uppercase too so raw text can be classed before normalization.
inline bool is_latin_word_char(char32_t cp) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9');
}

}  // namespace csalign::unicode
