#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "csalign/errors.hpp"
#include "csalign/text.hpp"

namespace csalign {

enum class AlignOp { Hit, Sub, Del, Ins };

inline const char* to_string(AlignOp op) {
    switch (op) {
        case AlignOp::Hit: return "HIT";
        case AlignOp::Sub: return "SUB";
        case AlignOp::Del: return "DEL";
        case AlignOp::Ins: return "INS";
    }
    return "?";
}

struct AlignedPair {
    std::optional<Token> ref;  // absent for INS
    std::optional<Token> hyp;  // absent for DEL
    AlignOp op = AlignOp::Hit;
};

struct AlignmentResult {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t hits = 0;
    std::size_t ref_len = 0;
    std::vector<AlignedPair> alignment;

    std::size_t errors() const { return substitutions + deletions + insertions; }
    std::size_t hyp_len() const { return hits + substitutions + insertions; }
};

struct MerScore {
    double value = 0.0;  // ratio; may exceed 1.0
    AlignmentResult breakdown;

    double percent() const { return value * 100.0; }
};

// Report convention: MER printed with 2 decimals, relative deltas with 1.
inline std::string format_percent(double ratio, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, ratio * 100.0);
    return buf;
}

// Minimal unit-cost alignment with a deterministic backtrace. When costs
// tie the op preference is HIT > SUB > DEL > INS.
inline AlignmentResult align(const TokenSequence& ref, const TokenSequence& hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    const auto idx = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };

    std::vector<unsigned> cost((n + 1) * (m + 1));
    std::vector<AlignOp> from((n + 1) * (m + 1));
    for (std::size_t j = 0; j <= m; ++j) {
        cost[idx(0, j)] = static_cast<unsigned>(j);
        from[idx(0, j)] = AlignOp::Ins;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        cost[idx(i, 0)] = static_cast<unsigned>(i);
        from[idx(i, 0)] = AlignOp::Del;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const bool match = ref.tokens[i - 1] == hyp.tokens[j - 1];
            const unsigned diag = cost[idx(i - 1, j - 1)] + (match ? 0u : 1u);
            const unsigned del = cost[idx(i - 1, j)] + 1u;
            const unsigned ins = cost[idx(i, j - 1)] + 1u;
            unsigned best = diag;
            AlignOp op = match ? AlignOp::Hit : AlignOp::Sub;
            if (del < best) { best = del; op = AlignOp::Del; }
            if (ins < best) { best = ins; op = AlignOp::Ins; }
            cost[idx(i, j)] = best;
            from[idx(i, j)] = op;
        }
    }

    AlignmentResult res;
    res.ref_len = n;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        AlignOp op = from[idx(i, j)];
        if (i == 0) op = AlignOp::Ins;
        if (j == 0) op = AlignOp::Del;
        switch (op) {
            case AlignOp::Hit:
                ++res.hits;
                res.alignment.push_back({ref.tokens[i - 1], hyp.tokens[j - 1], AlignOp::Hit});
                --i; --j;
                break;
            case AlignOp::Sub:
                ++res.substitutions;
                res.alignment.push_back({ref.tokens[i - 1], hyp.tokens[j - 1], AlignOp::Sub});
                --i; --j;
                break;
            case AlignOp::Del:
                ++res.deletions;
                res.alignment.push_back({ref.tokens[i - 1], std::nullopt, AlignOp::Del});
                --i;
                break;
            case AlignOp::Ins:
                ++res.insertions;
                res.alignment.push_back({std::nullopt, hyp.tokens[j - 1], AlignOp::Ins});
                --j;
                break;
        }
    }
    std::reverse(res.alignment.begin(), res.alignment.end());
    return res;
}

// Full scoring pipeline for one utterance: strip the model preamble from
// the hypothesis, normalize both sides, tokenize, align.
inline MerScore mer(std::string_view ref_raw, std::string_view hyp_raw,
                    const std::vector<PreambleTemplate>& preamble_patterns = {},
                    std::string_view row_id = "") {
    TokenSequence ref = tokenize_mixed(normalize(ref_raw));
    if (ref.empty()) {
        throw EmptyReference("reference normalizes to zero tokens", std::string(row_id));
    }
    std::string hyp_text = strip_model_preamble(hyp_raw, preamble_patterns);
    TokenSequence hyp = tokenize_mixed(normalize(hyp_text));
    MerScore score;
    score.breakdown = align(ref, hyp);
    score.value = static_cast<double>(score.breakdown.errors()) /
                  static_cast<double>(score.breakdown.ref_len);
    return score;
}

struct ScoredPair {
    std::string id;
    std::string reference;
    std::string hypothesis;
};

// Pooled (micro-averaged) corpus score: summed errors over summed
// reference lengths, not the mean of per-utterance rates.
inline MerScore corpus_mer(const std::vector<ScoredPair>& pairs,
                           const std::vector<PreambleTemplate>& preamble_patterns = {}) {
    AlignmentResult total;
    for (const auto& p : pairs) {
        MerScore s = mer(p.reference, p.hypothesis, preamble_patterns, p.id);
        total.substitutions += s.breakdown.substitutions;
        total.deletions += s.breakdown.deletions;
        total.insertions += s.breakdown.insertions;
        total.hits += s.breakdown.hits;
        total.ref_len += s.breakdown.ref_len;
    }
    MerScore score;
    score.breakdown = std::move(total);
    score.value = score.breakdown.ref_len == 0
                      ? 0.0
                      : static_cast<double>(score.breakdown.errors()) /
                            static_cast<double>(score.breakdown.ref_len);
    return score;
}

}  // namespace csalign
