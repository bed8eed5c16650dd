#pragma once

#include <algorithm>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "csalign/errors.hpp"
#include "csalign/jsonl.hpp"
#include "csalign/manifest.hpp"
#include "csalign/rng.hpp"
#include "csalign/text.hpp"
#include "csalign/translator.hpp"

namespace csalign {

enum class StrategyKind { GlobalTranslation, PartialTranslation };

inline const char* to_string(StrategyKind k) {
    return k == StrategyKind::GlobalTranslation ? "global_translation"
                                                : "partial_translation";
}

inline StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "global_translation") return StrategyKind::GlobalTranslation;
    if (s == "partial_translation") return StrategyKind::PartialTranslation;
    throw std::runtime_error("unknown strategy kind: " + s);
}

// Half-open range of token indices into tokenize_raw(chosen).tokens.
struct TokenSpan {
    size_t begin = 0;
    size_t end = 0;

    bool operator==(const TokenSpan&) const = default;
};

struct RejectionStrategy {
    StrategyKind kind = StrategyKind::GlobalTranslation;
    Direction direction = Direction::EnToZh;
    std::vector<TokenSpan> spans;  // required for Partial, empty for Global
};

struct PreferencePair {
    std::string id;
    std::string audio_ref;
    std::string prompt;
    std::string chosen;
    std::string rejected;
    RejectionStrategy strategy;
    uint64_t seed = 0;
};

struct SkipRecord {
    std::string id;
    std::string reason;  // error kind or "IneligibleRow"
    std::string detail;
};

struct PairGenResult {
    std::vector<PreferencePair> pairs;
    std::vector<SkipRecord> skips;
};

// ---------------------------------------------------------------------------
// Prompt pool

struct PromptPool {
    std::vector<std::string> english;
    std::vector<std::string> mandarin;
    std::string eval_prompt;

    void validate() const {
        auto check_list = [this](const std::vector<std::string>& list, const char* name) {
            if (list.size() != 20) {
                throw std::runtime_error(std::string(name) + " prompt list must have 20 entries, has " +
                                         std::to_string(list.size()));
            }
            for (size_t i = 0; i < list.size(); ++i) {
                for (size_t j = i + 1; j < list.size(); ++j) {
                    if (list[i] == list[j]) {
                        throw std::runtime_error(std::string(name) + " prompt list has a duplicate: " + list[i]);
                    }
                }
                if (list[i] == eval_prompt) {
                    throw std::runtime_error("eval prompt must not appear in the training pool");
                }
            }
        };
        check_list(english, "english");
        check_list(mandarin, "mandarin");
        if (eval_prompt.empty()) throw std::runtime_error("eval prompt is empty");
    }
};

inline PromptPool load_prompt_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prompt pool: " + path);
    PromptPool pool;
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        line = line.substr(first, last - first + 1);
        if (line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        if (section == "english") {
            pool.english.push_back(line);
        } else if (section == "mandarin") {
            pool.mandarin.push_back(line);
        } else if (section == "eval") {
            pool.eval_prompt = line;
        } else {
            throw std::runtime_error(path + ": prompt outside a known section: " + line);
        }
    }
    pool.validate();
    return pool;
}

inline const std::string& sample_prompt(const PromptPool& pool, Rng& rng) {
    const size_t n = pool.english.size() + pool.mandarin.size();
    const size_t i = static_cast<size_t>(rng.uniform_below(n));
    return i < pool.english.size() ? pool.english[i]
                                   : pool.mandarin[i - pool.english.size()];
}

// ---------------------------------------------------------------------------
// Strategy sampling

// Kind is Global with probability 0.8; direction is uniform over the
// directions that have source-language content to translate.
inline RejectionStrategy sample_strategy(Rng& rng, const LanguageProfile& profile) {
    RejectionStrategy s;
    s.kind = rng.uniform() < 0.8 ? StrategyKind::GlobalTranslation
                                 : StrategyKind::PartialTranslation;
    const bool can_en_to_zh = profile.english > 0;
    const bool can_zh_to_en = profile.mandarin > 0;
    if (can_en_to_zh && can_zh_to_en) {
        s.direction = rng.bernoulli(0.5) ? Direction::EnToZh : Direction::ZhToEn;
    } else if (can_en_to_zh) {
        s.direction = Direction::EnToZh;
    } else if (can_zh_to_en) {
        s.direction = Direction::ZhToEn;
    } else {
        throw DegenerateRejection("utterance has no translatable tokens");
    }
    return s;
}

inline LanguageTag source_language(Direction d) {
    return d == Direction::EnToZh ? LanguageTag::English : LanguageTag::Mandarin;
}

// Picks one random span of 1-3 consecutive source-language tokens.
inline std::vector<TokenSpan> choose_partial_spans(const std::vector<RawToken>& tokens,
                                                   Direction direction, Rng& rng) {
    const LanguageTag src = source_language(direction);
    std::vector<size_t> starts;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].lang == src) starts.push_back(i);
    }
    if (starts.empty()) {
        throw DegenerateRejection("no source-language tokens for partial span");
    }
    const size_t begin = starts[rng.uniform_below(starts.size())];
    size_t max_len = 0;
    while (begin + max_len < tokens.size() && tokens[begin + max_len].lang == src &&
           max_len < 3) {
        ++max_len;
    }
    const size_t len = 1 + static_cast<size_t>(rng.uniform_below(max_len));
    return {TokenSpan{begin, begin + len}};
}

// ---------------------------------------------------------------------------
// Rejected-sample construction

namespace detail {

struct SpliceRange {
    size_t byte_begin = 0;
    size_t byte_end = 0;
};

inline std::string rtrim_spaces(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) {
        s.pop_back();
    }
    return s;
}

inline void validate_partial_spans(const std::vector<RawToken>& tokens,
                                   const RejectionStrategy& strategy) {
    if (strategy.spans.empty()) {
        throw std::invalid_argument("partial strategy requires at least one span");
    }
    size_t covered = 0;
    size_t prev_end = 0;
    for (const auto& span : strategy.spans) {
        if (span.begin >= span.end || span.end > tokens.size()) {
            throw std::invalid_argument("span out of range");
        }
        if (span.begin < prev_end) {
            throw std::invalid_argument("spans overlap or are unsorted");
        }
        for (size_t i = span.begin; i < span.end; ++i) {
            if (tokens[i].lang != source_language(strategy.direction)) {
                throw std::invalid_argument("span covers tokens of the wrong language");
            }
        }
        covered += span.end - span.begin;
        prev_end = span.end;
    }
    if (covered >= tokens.size()) {
        throw std::invalid_argument("spans must cover a strict subset of the utterance");
    }
}

inline std::string translate_validated(TranslatorPort& translator, const std::string& slice,
                                       Direction direction, const std::string& row_id,
                                       int max_attempts) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::string out = translator.translate(slice, direction);
        if (normalize(out) == normalize(slice)) {
            // Echoed content can never produce a usable rejection; dropping
            // the row keeps the strategy ratio unbiased, so do not retry.
            throw DegenerateRejection("translator echoed its input on slice: " + slice,
                                      row_id);
        }
        const auto profile = language_profile(tokenize_mixed(normalize(out)));
        const bool clean = direction == Direction::EnToZh
                               ? (profile.english == 0 && profile.mandarin > 0)
                               : (profile.mandarin == 0 && profile.english > 0);
        if (clean) return out;
    }
    throw TranslatorViolation("translator kept returning " +
                                  std::string(direction == Direction::EnToZh
                                                  ? "Latin content for en_to_zh"
                                                  : "Mandarin content for zh_to_en") +
                                  " on slice: " + slice,
                              row_id);
}

}  // namespace detail

// Builds the corrupted transcript. Global: every maximal run of
// source-language tokens, together with the punctuation up to the next
// other-language token, is replaced by its translation. Partial: only the
// span tokens are replaced; every byte outside the spans is preserved.
inline std::string make_rejected(const std::string& chosen, const RejectionStrategy& strategy,
                                 TranslatorPort& translator, const std::string& row_id = "",
                                 int max_attempts = 3) {
    const std::vector<RawToken> tokens = tokenize_raw(chosen);
    const LanguageTag src = source_language(strategy.direction);

    std::vector<detail::SpliceRange> ranges;
    if (strategy.kind == StrategyKind::GlobalTranslation) {
        size_t i = 0;
        while (i < tokens.size()) {
            if (tokens[i].lang != src) {
                ++i;
                continue;
            }
            size_t j = i;
            while (j + 1 < tokens.size() && tokens[j + 1].lang == src) ++j;
            const size_t end =
                j + 1 < tokens.size() ? tokens[j + 1].byte_begin : chosen.size();
            ranges.push_back({tokens[i].byte_begin, end});
            i = j + 1;
        }
        if (ranges.empty()) {
            throw DegenerateRejection("global translation found no source-language tokens",
                                      row_id);
        }
    } else {
        detail::validate_partial_spans(tokens, strategy);
        for (const auto& span : strategy.spans) {
            ranges.push_back(
                {tokens[span.begin].byte_begin, tokens[span.end - 1].byte_end});
        }
    }

    std::string rejected;
    size_t cursor = 0;
    for (const auto& range : ranges) {
        rejected += chosen.substr(cursor, range.byte_begin - cursor);
        const std::string slice =
            detail::rtrim_spaces(chosen.substr(range.byte_begin, range.byte_end - range.byte_begin));
        rejected += detail::translate_validated(translator, slice, strategy.direction,
                                                row_id, max_attempts);
        cursor = range.byte_end;
    }
    rejected += chosen.substr(cursor);

    if (normalize(rejected) == normalize(chosen)) {
        throw DegenerateRejection("rejected transcript normalizes equal to chosen", row_id);
    }
    return rejected;
}

// ---------------------------------------------------------------------------
// Batch generation

namespace detail {

inline void build_one_pair(const ManifestRow& row, TranslatorPort& translator,
                           const PromptPool& pool, uint64_t master_seed, int max_attempts,
                           std::vector<PreferencePair>& pairs,
                           std::vector<SkipRecord>& skips) {
    const uint64_t row_seed = derive_seed(master_seed, row.id);
    Rng rng(row_seed);

    const auto profile = language_profile(tokenize_mixed(normalize(row.transcript)));
    if (!profile.mixed()) {
        skips.push_back({row.id, "IneligibleRow", "monolingual transcript"});
        return;
    }

    try {
        RejectionStrategy strategy = sample_strategy(rng, profile);
        if (strategy.kind == StrategyKind::PartialTranslation) {
            strategy.spans = choose_partial_spans(tokenize_raw(row.transcript),
                                                  strategy.direction, rng);
        }
        const std::string prompt = sample_prompt(pool, rng);
        const std::string rejected =
            make_rejected(row.transcript, strategy, translator, row.id, max_attempts);
        pairs.push_back({row.id, row.audio_ref, prompt, row.transcript, rejected,
                         std::move(strategy), row_seed});
    } catch (const Error& e) {
        skips.push_back({row.id, e.kind(), e.what()});
    }
}

}  // namespace detail

// One pair per eligible manifest row. Per-row seeds are derived from the
// master seed and the row id, and the output is sorted by id, so the result
// is identical whatever the worker count.
inline PairGenResult build_pairs(const Manifest& manifest, TranslatorPort& translator,
                                 const PromptPool& pool, uint64_t seed, int jobs = 1,
                                 int max_attempts = 3) {
    PairGenResult result;
    if (jobs <= 1 || manifest.size() < 2) {
        for (const auto& row : manifest) {
            detail::build_one_pair(row, translator, pool, seed, max_attempts,
                                   result.pairs, result.skips);
        }
    } else {
        const size_t workers = std::min<size_t>(jobs, manifest.size());
        std::vector<std::vector<PreferencePair>> pair_parts(workers);
        std::vector<std::vector<SkipRecord>> skip_parts(workers);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                for (size_t i = w; i < manifest.size(); i += workers) {
                    detail::build_one_pair(manifest[i], translator, pool, seed,
                                           max_attempts, pair_parts[w], skip_parts[w]);
                }
            });
        }
        for (auto& t : threads) t.join();
        for (size_t w = 0; w < workers; ++w) {
            result.pairs.insert(result.pairs.end(), pair_parts[w].begin(), pair_parts[w].end());
            result.skips.insert(result.skips.end(), skip_parts[w].begin(), skip_parts[w].end());
        }
    }
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(result.skips.begin(), result.skips.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const RejectionStrategy& s) {
    Json spans = Json::array();
    for (const auto& span : s.spans) spans.push_back(Json::array({span.begin, span.end}));
    return Json{{"kind", to_string(s.kind)},
                {"direction", to_string(s.direction)},
                {"spans", spans}};
}

inline RejectionStrategy strategy_from_json(const Json& j) {
    RejectionStrategy s;
    s.kind = strategy_kind_from_string(j.at("kind").get<std::string>());
    s.direction = direction_from_string(j.at("direction").get<std::string>());
    for (const auto& span : j.value("spans", Json::array())) {
        s.spans.push_back({span.at(0).get<size_t>(), span.at(1).get<size_t>()});
    }
    return s;
}

inline Json to_json(const PreferencePair& p) {
    return Json{{"id", p.id},           {"audio_ref", p.audio_ref},
                {"prompt", p.prompt},   {"chosen", p.chosen},
                {"rejected", p.rejected}, {"strategy", to_json(p.strategy)},
                {"seed", p.seed}};
}

inline PreferencePair pair_from_json(const Json& j) {
    PreferencePair p;
    p.id = j.at("id").get<std::string>();
    p.audio_ref = j.value("audio_ref", std::string());
    p.prompt = j.at("prompt").get<std::string>();
    p.chosen = j.at("chosen").get<std::string>();
    p.rejected = j.at("rejected").get<std::string>();
    p.strategy = strategy_from_json(j.at("strategy"));
    p.seed = j.value("seed", uint64_t{0});
    return p;
}

inline Json to_json(const SkipRecord& s) {
    return Json{{"id", s.id}, {"reason", s.reason}, {"detail", s.detail}};
}

inline std::vector<PreferencePair> load_pairs(const std::string& path) {
    std::vector<PreferencePair> out;
    for (const auto& row : read_jsonl(path)) out.push_back(pair_from_json(row));
    return out;
}

inline void save_pairs(const std::string& path, const std::vector<PreferencePair>& pairs,
                       const Json& meta = Json()) {
    std::vector<Json> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) rows.push_back(to_json(p));
    write_jsonl(path, rows, meta);
}

}  // namespace csalign
