#include "csalign/failure_modes.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "csalign/rng.hpp"

namespace csalign {
namespace {

std::string repeat_phrase(const std::string& phrase, int times, const std::string& sep = " ") {
    std::string out;
    for (int i = 0; i < times; ++i) {
        if (i) out += sep;
        out += phrase;
    }
    return out;
}

ClassifierThresholds defaults() { return {}; }

TEST(DetectHallucination, RepeatedBigramFires) {
    auto ref = tokenize_normalized("我们二月多有 valentine's day");
    auto hyp = tokenize_normalized(repeat_phrase("ah month", 250));
    EXPECT_TRUE(detect_hallucination(hyp, ref, defaults()));
}

TEST(DetectHallucination, ExactMatchDoesNotFire) {
    auto ref = tokenize_normalized("我们二月多有 valentine's day");
    EXPECT_FALSE(detect_hallucination(ref, ref, defaults()));
}

TEST(DetectHallucination, ShortAlternationWithLowThreshold) {
    ClassifierThresholds t;
    t.repetition_min_repeats = 3;
    auto ref = tokenize_normalized("a b c d e f");
    auto hyp = tokenize_normalized("a b a b a b");
    EXPECT_TRUE(detect_hallucination(hyp, ref, t));
    // default min_repeats=10 does not fire on three repeats
    EXPECT_FALSE(detect_hallucination(hyp, ref, defaults()));
}

TEST(DetectHallucination, LengthBlowupFires) {
    auto ref = tokenize_normalized("hello 你好");
    auto hyp = tokenize_normalized("one two three four five six seven eight nine ten");
    EXPECT_TRUE(detect_hallucination(hyp, ref, defaults()));  // 10 > 3.0 * 3
}

TEST(DetectHallucination, BoundaryIsStrict) {
    auto ref = tokenize_normalized("a b c");
    auto hyp9 = tokenize_normalized("p q r s t u v w x");
    EXPECT_FALSE(detect_hallucination(hyp9, ref, defaults()));  // 9 == 3.0 * 3, not >
    auto hyp10 = tokenize_normalized("p q r s t u v w x y");
    EXPECT_TRUE(detect_hallucination(hyp10, ref, defaults()));
}

TEST(DetectMonolingualCollapse, OmissionWhenContentVanishes) {
    auto ref = tokenize_normalized("我住 temasek poly 那边");
    auto hyp = tokenize_normalized("我住那边");
    EXPECT_EQ(detect_monolingual_collapse(ref, hyp, defaults()), FailureLabel::LanguageOmission);
}

TEST(DetectMonolingualCollapse, TranslationWhenContentReRendered) {
    auto ref = tokenize_normalized("我们都应该 pursue a healthy lifestyle");
    auto hyp = tokenize_normalized("我们都应该追求健康的生活方式");
    EXPECT_EQ(detect_monolingual_collapse(ref, hyp, defaults()), FailureLabel::Translation);
}

TEST(DetectMonolingualCollapse, MixedHypothesisDoesNotTrigger) {
    auto ref = tokenize_normalized("我住 temasek poly 那边");
    auto hyp = tokenize_normalized("我住 tamasek poly 那边");
    EXPECT_EQ(detect_monolingual_collapse(ref, hyp, defaults()), FailureLabel::None);
}

TEST(DetectMonolingualCollapse, MonolingualReferenceNeverTriggers) {
    ClassifierThresholds t = defaults();
    auto en_ref = tokenize_normalized("pursue a healthy lifestyle");
    auto zh_ref = tokenize_normalized("我们都应该追求健康");
    std::vector<std::string> hyps = {"我们都应该", "hello world", "我 hello", ""};
    for (const auto& h : hyps) {
        auto hyp = tokenize_normalized(h);
        EXPECT_EQ(detect_monolingual_collapse(en_ref, hyp, t), FailureLabel::None) << h;
        EXPECT_EQ(detect_monolingual_collapse(zh_ref, hyp, t), FailureLabel::None) << h;
    }
}

TEST(DetectMonolingualCollapse, EmptyHypothesisDoesNotTrigger) {
    auto ref = tokenize_normalized("我住 temasek poly 那边");
    EXPECT_EQ(detect_monolingual_collapse(ref, TokenSequence{}, defaults()),
              FailureLabel::None);
}

TEST(DetectMonolingualCollapse, SlackTradesOmissionAgainstTranslation) {
    auto ref = tokenize_normalized("我住 temasek poly 那边");  // 4 zh + 2 en
    auto hyp = tokenize_normalized("我住在那边了");            // 6 zh tokens
    // 6 <= slack * 4 requires slack >= 1.5
    ClassifierThresholds tight = defaults();
    tight.omission_length_slack = 1.3;
    ClassifierThresholds loose = defaults();
    loose.omission_length_slack = 1.6;
    EXPECT_EQ(detect_monolingual_collapse(ref, hyp, tight), FailureLabel::Translation);
    EXPECT_EQ(detect_monolingual_collapse(ref, hyp, loose), FailureLabel::LanguageOmission);
}

// As slack grows, Translation count over a fixed input set is non-increasing.
TEST(DetectMonolingualCollapse, TranslationCountMonotoneInSlack) {
    Rng rng(314);
    std::vector<std::pair<TokenSequence, TokenSequence>> cases;
    const std::vector<std::string> zh = {"我", "住", "那", "边", "好", "的"};
    for (int i = 0; i < 200; ++i) {
        std::string hyp_text;
        for (std::size_t k = rng.uniform_below(12) + 1; k > 0; --k)
            hyp_text += zh[rng.uniform_below(zh.size())];
        cases.emplace_back(tokenize_normalized("我住 temasek poly 那边"),
                           tokenize_normalized(hyp_text));
    }
    std::size_t prev_translation = SIZE_MAX;
    for (double slack : {0.5, 1.0, 1.3, 2.0, 3.0, 5.0}) {
        ClassifierThresholds t = defaults();
        t.omission_length_slack = slack;
        std::size_t translation = 0;
        for (const auto& [r, h] : cases) {
            if (detect_monolingual_collapse(r, h, t) == FailureLabel::Translation)
                ++translation;
        }
        EXPECT_LE(translation, prev_translation) << "slack " << slack;
        prev_translation = translation;
    }
}

TEST(Classify, TableOneVectors) {
    ClassifierThresholds t = defaults();
    auto omission = classify("我住 temasek poly 那边", "我住那边", t);
    EXPECT_EQ(omission.labels, (std::set<FailureLabel>{FailureLabel::LanguageOmission}));

    auto translation =
        classify("我们都应该 pursue a healthy lifestyle", "我们都应该追求健康的生活方式", t);
    EXPECT_EQ(translation.labels, (std::set<FailureLabel>{FailureLabel::Translation}));

    auto hallucination =
        classify("我们二月多有 valentine's day", repeat_phrase("ah month", 250), t);
    EXPECT_EQ(hallucination.labels, (std::set<FailureLabel>{FailureLabel::Hallucination}));
}

TEST(Classify, IdenticalPairIsNone) {
    auto c = classify("我住 temasek poly 那边", "我住 temasek poly 那边", defaults());
    EXPECT_EQ(c.labels, (std::set<FailureLabel>{FailureLabel::None}));
}

TEST(Classify, TranslationRepeatedTenTimesCarriesBothLabels) {
    // no n-gram of length <= 4 cycles inside the repeated sentence, so the
    // hallucination label comes from the length blowup and the translation
    // label survives
    std::string hyp = repeat_phrase("我们都应该追求健康的生活方式", 10, "");
    auto c = classify("我们都应该 pursue a healthy lifestyle", hyp, defaults());
    EXPECT_EQ(c.labels,
              (std::set<FailureLabel>{FailureLabel::Translation, FailureLabel::Hallucination}));
}

TEST(Classify, RepetitionSuppressesCollapseLabel) {
    // monolingual repeated junk: hallucination alone, not translation
    auto c = classify("我们二月多有 valentine's day", repeat_phrase("month", 40), defaults());
    EXPECT_EQ(c.labels, (std::set<FailureLabel>{FailureLabel::Hallucination}));
}

TEST(Classify, SelfClassifiesNoneOnRandomMixedInput) {
    Rng rng(161803);
    const std::vector<std::string> pieces = {"我", "你好", "hello", "ok 了", "天气 nice"};
    for (int i = 0; i < 500; ++i) {
        std::string s;
        for (std::size_t k = rng.uniform_below(6) + 1; k > 0; --k) {
            s += pieces[rng.uniform_below(pieces.size())];
            s += ' ';
        }
        auto c = classify(s, s, defaults());
        EXPECT_EQ(c.labels, (std::set<FailureLabel>{FailureLabel::None})) << s;
    }
}

TEST(Classify, EmptyReferenceThrows) {
    EXPECT_THROW(classify("", "x", defaults()), EmptyReference);
}

TEST(Classify, EvidenceMentionsCounts) {
    auto c = classify("我住 temasek poly 那边", "我住那边", defaults());
    EXPECT_NE(c.evidence.find("ref(zh=4,en=2"), std::string::npos);
}

}  // namespace
}  // namespace csalign
