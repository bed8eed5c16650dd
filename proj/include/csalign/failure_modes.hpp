#pragma once

#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csalign/errors.hpp"
#include "csalign/text.hpp"

namespace csalign {

enum class FailureLabel { None, LanguageOmission, Translation, Hallucination };

inline const char* to_string(FailureLabel l) {
    switch (l) {
        case FailureLabel::None: return "None";
        case FailureLabel::LanguageOmission: return "LanguageOmission";
        case FailureLabel::Translation: return "Translation";
        case FailureLabel::Hallucination: return "Hallucination";
    }
    return "None";
}

inline FailureLabel failure_label_from_string(const std::string& s) {
    if (s == "LanguageOmission") return FailureLabel::LanguageOmission;
    if (s == "Translation") return FailureLabel::Translation;
    if (s == "Hallucination") return FailureLabel::Hallucination;
    return FailureLabel::None;
}

struct ClassifierThresholds {
    std::size_t repetition_ngram_max = 4;
    std::size_t repetition_min_repeats = 10;
    double length_blowup_ratio = 3.0;
    double omission_length_slack = 1.3;
};

struct HallucinationEvidence {
    bool repetition = false;      // clause (a): consecutive n-gram repeats
    bool length_blowup = false;   // clause (b): |hyp| > ratio * |ref|
    std::size_t ngram_len = 0;
    std::size_t repeat_count = 0;

    bool fired() const { return repetition || length_blowup; }
};

// Scans for any n-gram (n <= repetition_ngram_max) repeating at least
// repetition_min_repeats times back to back.
inline HallucinationEvidence scan_hallucination(const TokenSequence& hyp,
                                                const TokenSequence& ref,
                                                const ClassifierThresholds& t) {
    HallucinationEvidence ev;
    const auto& toks = hyp.tokens;
    const std::size_t len = toks.size();
    for (std::size_t n = 1; n <= t.repetition_ngram_max && n <= len && !ev.repetition; ++n) {
        for (std::size_t start = 0; start + n * t.repetition_min_repeats <= len; ++start) {
            std::size_t repeats = 1;
            while (start + (repeats + 1) * n <= len) {
                bool same = true;
                for (std::size_t k = 0; k < n; ++k) {
                    if (!(toks[start + repeats * n + k] == toks[start + k])) {
                        same = false;
                        break;
                    }
                }
                if (!same) break;
                ++repeats;
            }
            if (repeats >= t.repetition_min_repeats) {
                ev.repetition = true;
                ev.ngram_len = n;
                ev.repeat_count = repeats;
                break;
            }
        }
    }
    if (static_cast<double>(hyp.size()) >
        t.length_blowup_ratio * static_cast<double>(ref.size())) {
        ev.length_blowup = true;
    }
    return ev;
}

inline bool detect_hallucination(const TokenSequence& hyp, const TokenSequence& ref,
                                 const ClassifierThresholds& t) {
    return scan_hallucination(hyp, ref, t).fired();
}

// Applies only when the reference mixes Mandarin and English while the
// hypothesis keeps exactly one of those languages. Short hypotheses mean
// the other language's content vanished (omission); long ones mean it was
// re-rendered (translation). Other-tagged tokens are ignored in the
// language-composition trigger.
inline FailureLabel detect_monolingual_collapse(const TokenSequence& ref,
                                                const TokenSequence& hyp,
                                                const ClassifierThresholds& t) {
    LanguageProfile rp = language_profile(ref);
    LanguageProfile hp = language_profile(hyp);
    if (!rp.mixed()) return FailureLabel::None;
    const bool hyp_mandarin_only = hp.mandarin > 0 && hp.english == 0;
    const bool hyp_english_only = hp.english > 0 && hp.mandarin == 0;
    if (!hyp_mandarin_only && !hyp_english_only) return FailureLabel::None;
    const std::size_t ref_surviving = hyp_mandarin_only ? rp.mandarin : rp.english;
    if (static_cast<double>(hyp.size()) <=
        t.omission_length_slack * static_cast<double>(ref_surviving)) {
        return FailureLabel::LanguageOmission;
    }
    return FailureLabel::Translation;
}

struct Classification {
    std::set<FailureLabel> labels;
    std::string evidence;
};

// Union of the detectors, with one refinement: when the repetition clause
// fires, the monolingual-collapse label is suppressed (repeated junk is
// not a rendering of the other language), so Table-1-style repetition
// classifies as hallucination alone while a translation-length blowup can
// still carry both labels.
inline Classification classify(std::string_view ref_raw, std::string_view hyp_raw,
                               const ClassifierThresholds& t,
                               const std::vector<PreambleTemplate>& preamble_patterns = {},
                               std::string_view row_id = "") {
    TokenSequence ref = tokenize_mixed(normalize(ref_raw));
    if (ref.empty()) {
        throw EmptyReference("reference normalizes to zero tokens", std::string(row_id));
    }
    TokenSequence hyp =
        tokenize_mixed(normalize(strip_model_preamble(hyp_raw, preamble_patterns)));

    Classification out;
    std::ostringstream ev;
    LanguageProfile rp = language_profile(ref);
    LanguageProfile hp = language_profile(hyp);
    ev << "ref(zh=" << rp.mandarin << ",en=" << rp.english << ",other=" << rp.other
       << ") hyp(zh=" << hp.mandarin << ",en=" << hp.english << ",other=" << hp.other << ")";

    HallucinationEvidence hall = scan_hallucination(hyp, ref, t);
    if (hall.fired()) {
        out.labels.insert(FailureLabel::Hallucination);
        if (hall.repetition) {
            ev << " repetition(n=" << hall.ngram_len << ",x" << hall.repeat_count << ")";
        }
        if (hall.length_blowup) {
            ev << " blowup(" << hyp.size() << ">" << t.length_blowup_ratio << "*"
               << ref.size() << ")";
        }
    }
    FailureLabel collapse = detect_monolingual_collapse(ref, hyp, t);
    if (collapse != FailureLabel::None) {
        if (hall.repetition) {
            ev << " collapse(" << to_string(collapse) << ") suppressed by repetition";
        } else {
            out.labels.insert(collapse);
            ev << " " << to_string(collapse);
        }
    }
    if (out.labels.empty()) out.labels.insert(FailureLabel::None);
    out.evidence = ev.str();
    return out;
}

}  // namespace csalign
