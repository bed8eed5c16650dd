#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "csalign/unicode.hpp"

namespace csalign {

enum class LanguageTag { Mandarin, English, Other };

inline const char* to_string(LanguageTag t) {
    switch (t) {
        case LanguageTag::Mandarin: return "mandarin";
        case LanguageTag::English: return "english";
        case LanguageTag::Other: return "other";
    }
    return "other";
}

struct Token {
    std::string surface;  // normalized: non-empty, lowercase, punctuation-free
    LanguageTag lang = LanguageTag::Other;

    bool operator==(const Token&) const = default;
};

struct TokenSequence {
    std::vector<Token> tokens;
    std::string source;  // the string the tokens were produced from

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }

    // Joins tokens back into text: single space between consecutive
    // English tokens, no separator otherwise.
    std::string join() const {
        std::string out;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i > 0 && tokens[i - 1].lang == LanguageTag::English &&
                tokens[i].lang == LanguageTag::English) {
                out.push_back(' ');
            }
            out += tokens[i].surface;
        }
        return out;
    }
};

struct LanguageProfile {
    std::size_t mandarin = 0;
    std::size_t english = 0;
    std::size_t other = 0;

    std::size_t total() const { return mandarin + english + other; }
    bool mixed() const { return mandarin > 0 && english > 0; }
};

// Lowercases, strips punctuation (Unicode P* plus fullwidth-form symbols
// and format controls), collapses whitespace runs to single spaces and
// trims. Idempotent.
inline std::string normalize(std::string_view raw) {
    std::u32string cps = unicode::decode(raw);
    std::u32string out;
    out.reserve(cps.size());
    bool pending_space = false;
    for (char32_t cp : cps) {
        if (unicode::is_punctuation(cp)) continue;
        if (unicode::is_whitespace(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(U' ');
        pending_space = false;
        out.push_back(unicode::to_lower(cp));
    }
    return unicode::encode(out);
}

// A preamble template: literal prefix, optional content slot, literal
// suffix. A line without the slot marker is a bare prefix.
struct PreambleTemplate {
    std::string prefix;
    std::string suffix;
};

inline constexpr std::string_view kPreambleSlot = "{content}";

inline PreambleTemplate parse_preamble_template(std::string_view line) {
    auto pos = line.find(kPreambleSlot);
    if (pos == std::string_view::npos) return {std::string(line), ""};
    return {std::string(line.substr(0, pos)),
            std::string(line.substr(pos + kPreambleSlot.size()))};
}

// One template per line; blank lines and lines starting with '#' skipped.
inline std::vector<PreambleTemplate> load_preamble_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open preamble template file: " + path);
    std::vector<PreambleTemplate> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.push_back(parse_preamble_template(line));
    }
    return out;
}

namespace detail {

// Case-insensitive comparison on the template portion (simple Unicode
// lowering on both sides).
inline bool ieq(std::string_view a, std::string_view b) {
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        char32_t ca = unicode::to_lower(unicode::decode_one(a, ia));
        char32_t cb = unicode::to_lower(unicode::decode_one(b, ib));
        if (ca != cb) return false;
    }
    return ia == a.size() && ib == b.size();
}

inline std::string_view trim_ws(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e) {
        std::size_t i = b;
        if (!unicode::is_whitespace(unicode::decode_one(s, i))) break;
        b = i;
    }
    // trailing: scan from the front since UTF-8 is not reverse-decodable
    std::size_t last_end = b;
    std::size_t i = b;
    while (i < e) {
        std::size_t j = i;
        char32_t cp = unicode::decode_one(s, j);
        if (!unicode::is_whitespace(cp)) last_end = j;
        i = j;
    }
    return s.substr(b, last_end - b);
}

}  // namespace detail

// Strips a model-added wrapper: if `raw` (whitespace-trimmed) matches a
// template's prefix and suffix case-insensitively, returns the content
// slot; first matching template wins, otherwise `raw` unchanged.
inline std::string strip_model_preamble(std::string_view raw,
                                        const std::vector<PreambleTemplate>& patterns) {
    std::string_view text = detail::trim_ws(raw);
    for (const auto& p : patterns) {
        if (p.prefix.empty() && p.suffix.empty()) continue;
        if (text.size() < p.prefix.size() + p.suffix.size()) continue;
        if (!detail::ieq(text.substr(0, p.prefix.size()), p.prefix)) continue;
        if (!p.suffix.empty() &&
            !detail::ieq(text.substr(text.size() - p.suffix.size()), p.suffix)) {
            continue;
        }
        return std::string(
            text.substr(p.prefix.size(), text.size() - p.prefix.size() - p.suffix.size()));
    }
    return std::string(raw);
}

inline LanguageTag classify_codepoint(char32_t cp) {
    if (unicode::is_cjk(cp)) return LanguageTag::Mandarin;
    if (unicode::is_latin_word_char(cp)) return LanguageTag::English;
    return LanguageTag::Other;
}

// Mixed-language tokenization of a normalized string: each CJK codepoint
// is its own Mandarin token; maximal runs of Latin letters/digits between
// boundaries (whitespace or CJK) are single English tokens; runs of any
// remaining characters become Other tokens.
inline TokenSequence tokenize_mixed(std::string_view normalized) {
    TokenSequence seq;
    seq.source = std::string(normalized);
    std::u32string run;
    LanguageTag run_tag = LanguageTag::Other;
    auto flush = [&] {
        if (!run.empty()) {
            seq.tokens.push_back({unicode::encode(run), run_tag});
            run.clear();
        }
    };
    std::size_t i = 0;
    while (i < normalized.size()) {
        char32_t cp = unicode::decode_one(normalized, i);
        if (unicode::is_whitespace(cp)) {
            flush();
            continue;
        }
        LanguageTag tag = classify_codepoint(cp);
        if (tag == LanguageTag::Mandarin) {
            flush();
            std::string one;
            unicode::encode_one(cp, one);
            seq.tokens.push_back({std::move(one), LanguageTag::Mandarin});
            continue;
        }
        if (!run.empty() && tag != run_tag) flush();
        run.push_back(cp);
        run_tag = tag;
    }
    flush();
    return seq;
}

inline TokenSequence tokenize_normalized(std::string_view raw) {
    return tokenize_mixed(normalize(raw));
}

inline LanguageProfile language_profile(const TokenSequence& seq) {
    LanguageProfile p;
    for (const auto& t : seq.tokens) {
        switch (t.lang) {
            case LanguageTag::Mandarin: ++p.mandarin; break;
            case LanguageTag::English: ++p.english; break;
            case LanguageTag::Other: ++p.other; break;
        }
    }
    return p;
}

// A token located in the raw (un-normalized) string, used where output
// text must preserve the original bytes outside edited regions.
struct RawToken {
    std::string surface;      // raw bytes of the token itself
    LanguageTag lang = LanguageTag::Other;
    std::size_t byte_begin = 0;  // into the raw string
    std::size_t byte_end = 0;
};

// Tokenizes the raw string in place: same run rules as tokenize_mixed but
// punctuation acts as a boundary (it belongs to no token) and case is kept.
inline std::vector<RawToken> tokenize_raw(std::string_view raw) {
    std::vector<RawToken> out;
    std::size_t run_begin = 0;
    std::u32string run;
    LanguageTag run_tag = LanguageTag::Other;
    auto flush = [&](std::size_t end) {
        if (!run.empty()) {
            out.push_back({unicode::encode(run), run_tag, run_begin, end});
            run.clear();
        }
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        std::size_t start = i;
        char32_t cp = unicode::decode_one(raw, i);
        if (unicode::is_whitespace(cp) || unicode::is_punctuation(cp)) {
            flush(start);
            continue;
        }
        LanguageTag tag = classify_codepoint(cp);
        if (tag == LanguageTag::Mandarin) {
            flush(start);
            std::string one(raw.substr(start, i - start));
            out.push_back({std::move(one), LanguageTag::Mandarin, start, i});
            continue;
        }
        if (!run.empty() && tag != run_tag) flush(start);
        if (run.empty()) run_begin = start;
        run.push_back(cp);
        run_tag = tag;
    }
    flush(raw.size());
    return out;
}

}  // namespace csalign
