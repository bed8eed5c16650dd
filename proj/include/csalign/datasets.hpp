#pragma once

#include <string>
#include <vector>

#include "csalign/errors.hpp"
#include "csalign/manifest.hpp"
#include "csalign/rng.hpp"

namespace csalign {

namespace detail {

inline std::string join_texts(const std::vector<const Utterance*>& parts) {
    std::string out;
    for (const auto* u : parts) {
        if (!out.empty()) out += ' ';
        out += u->text;
    }
    return out;
}

inline ManifestRow make_row(std::string id, ManifestSource source,
                            const std::vector<const Utterance*>& parts) {
    ManifestRow row;
    row.id = std::move(id);
    row.audio_ref = row.id + ".wav";
    row.transcript = join_texts(parts);
    row.source = source;
    double total = 0.0;
    for (const auto* u : parts) {
        row.component_ids.push_back(u->id);
        total += u->duration;
    }
    row.duration = total;
    return row;
}

}  // namespace detail

// Maximal runs of consecutive MIX utterances within one conversation,
// greedily split so no group exceeds max_duration. A single utterance
// longer than the cap is emitted alone and reported via `warnings`.
inline Manifest group_mix_runs(const std::vector<Utterance>& utterances,
                               double max_duration = 30.0,
                               std::vector<std::string>* warnings = nullptr) {
    Manifest out;
    size_t i = 0;
    while (i < utterances.size()) {
        if (utterances[i].lang_tag != UtteranceLang::MIX) {
            ++i;
            continue;
        }
        // Extend the run while consecutive, same conversation, MIX.
        size_t j = i;
        while (j + 1 < utterances.size() &&
               utterances[j + 1].lang_tag == UtteranceLang::MIX &&
               utterances[j + 1].conversation_id == utterances[i].conversation_id) {
            ++j;
        }
        // Greedy split of [i, j] by duration.
        size_t k = i;
        while (k <= j) {
            std::vector<const Utterance*> group{&utterances[k]};
            double total = utterances[k].duration;
            size_t m = k + 1;
            while (m <= j && total + utterances[m].duration <= max_duration) {
                total += utterances[m].duration;
                group.push_back(&utterances[m]);
                ++m;
            }
            if (group.size() == 1 && total > max_duration && warnings) {
                warnings->push_back("utterance " + utterances[k].id + " alone exceeds max_duration (" +
                                    std::to_string(total) + " s)");
            }
            const std::string id = utterances[i].conversation_id + "-mix-" +
                                   std::to_string(out.size());
            out.push_back(detail::make_row(id, ManifestSource::NaturalMix, group));
            k = m;
        }
        i = j + 1;
    }
    return out;
}

// Greedy left-to-right pairing of adjacent EN/CN utterances (either order)
// within the same conversation. Each utterance joins at most one pair.
inline Manifest pair_en_cn(const std::vector<Utterance>& utterances) {
    Manifest out;
    size_t i = 0;
    while (i + 1 < utterances.size()) {
        const Utterance& a = utterances[i];
        const Utterance& b = utterances[i + 1];
        const bool alternates =
            (a.lang_tag == UtteranceLang::EN && b.lang_tag == UtteranceLang::CN) ||
            (a.lang_tag == UtteranceLang::CN && b.lang_tag == UtteranceLang::EN);
        if (alternates && a.conversation_id == b.conversation_id) {
            const std::string id =
                a.conversation_id + "-pair-" + std::to_string(out.size());
            out.push_back(
                detail::make_row(id, ManifestSource::ConcatIntraCorpus, {&a, &b}));
            i += 2;
        } else {
            ++i;
        }
    }
    return out;
}

// Samples one clip per language uniformly with replacement and concatenates
// in uniformly random order (EN-first vs ZH-first).
inline Manifest synth_cross_corpus(const std::vector<Utterance>& en_pool,
                                   const std::vector<Utterance>& zh_pool,
                                   size_t n_pairs, uint64_t rng_seed) {
    if (n_pairs > 0) {
        if (en_pool.empty()) throw EmptyPool("synth_cross_corpus: EN pool is empty");
        if (zh_pool.empty()) throw EmptyPool("synth_cross_corpus: ZH pool is empty");
    }
    Rng rng(rng_seed);
    Manifest out;
    out.reserve(n_pairs);
    for (size_t k = 0; k < n_pairs; ++k) {
        const Utterance& en = en_pool[rng.uniform_below(en_pool.size())];
        const Utterance& zh = zh_pool[rng.uniform_below(zh_pool.size())];
        const bool en_first = rng.bernoulli(0.5);
        std::vector<const Utterance*> parts =
            en_first ? std::vector<const Utterance*>{&en, &zh}
                     : std::vector<const Utterance*>{&zh, &en};
        out.push_back(detail::make_row("synth-" + std::to_string(k),
                                       ManifestSource::ConcatCrossCorpus, parts));
    }
    return out;
}

}  // namespace csalign
