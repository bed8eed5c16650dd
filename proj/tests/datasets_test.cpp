#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "csalign/datasets.hpp"
#include "csalign/wav.hpp"

namespace fs = std::filesystem;
using namespace csalign;

namespace {

Utterance utt(std::string id, std::string conv, UtteranceLang lang, std::string text,
              double duration = 1.0) {
    Utterance u;
    u.id = std::move(id);
    u.conversation_id = std::move(conv);
    u.speaker_id = "s1";
    u.lang_tag = lang;
    u.text = std::move(text);
    u.duration = duration;
    return u;
}

fs::path make_temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("csalign_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

WavData tone(int sample_rate, double seconds, int channels = 1) {
    WavData w;
    w.sample_rate = sample_rate;
    w.channels = channels;
    const size_t frames = static_cast<size_t>(sample_rate * seconds);
    w.samples.resize(frames * channels);
    for (size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = static_cast<int16_t>(
            8000.0 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / sample_rate));
    }
    return w;
}

}  // namespace

TEST(GroupMixRuns, RunSplitByNonMixUtterance) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::MIX, "我 like 这个"),
        utt("u2", "c1", UtteranceLang::MIX, "okay 好的"),
        utt("u3", "c1", UtteranceLang::EN, "fine"),
        utt("u4", "c1", UtteranceLang::MIX, "那个 project 很难"),
    };
    Manifest rows = group_mix_runs(us);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].component_ids, (std::vector<std::string>{"u1", "u2"}));
    EXPECT_EQ(rows[0].transcript, "我 like 这个 okay 好的");
    EXPECT_EQ(rows[1].component_ids, (std::vector<std::string>{"u4"}));
    EXPECT_EQ(rows[0].source, ManifestSource::NaturalMix);
    EXPECT_DOUBLE_EQ(rows[0].duration, 2.0);
}

TEST(GroupMixRuns, AllEnglishConversationYieldsNothing) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "hello"),
        utt("u2", "c1", UtteranceLang::EN, "world"),
    };
    EXPECT_TRUE(group_mix_runs(us).empty());
}

TEST(GroupMixRuns, ConversationBoundaryBreaksRun) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::MIX, "我 like it"),
        utt("u2", "c2", UtteranceLang::MIX, "真的 nice"),
    };
    Manifest rows = group_mix_runs(us);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].component_ids.size(), 1u);
    EXPECT_EQ(rows[1].component_ids.size(), 1u);
}

TEST(GroupMixRuns, GreedySplitRespectsMaxDuration) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::MIX, "一 a", 12.0),
        utt("u2", "c1", UtteranceLang::MIX, "二 b", 12.0),
        utt("u3", "c1", UtteranceLang::MIX, "三 c", 12.0),
    };
    Manifest rows = group_mix_runs(us, 30.0);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].component_ids, (std::vector<std::string>{"u1", "u2"}));
    EXPECT_EQ(rows[1].component_ids, (std::vector<std::string>{"u3"}));
    EXPECT_DOUBLE_EQ(rows[0].duration, 24.0);
}

TEST(GroupMixRuns, OverlongSingleUtteranceEmittedAloneWithWarning) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::MIX, "很长 long", 45.0),
    };
    std::vector<std::string> warnings;
    Manifest rows = group_mix_runs(us, 30.0, &warnings);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].component_ids, (std::vector<std::string>{"u1"}));
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("u1"), std::string::npos);
}

TEST(PairEnCn, AdjacentPairJoinsInOriginalOrder) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "see you tomorrow"),
        utt("u2", "c1", UtteranceLang::CN, "明天见"),
    };
    Manifest rows = pair_en_cn(us);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].transcript, "see you tomorrow 明天见");
    EXPECT_EQ(rows[0].source, ManifestSource::ConcatIntraCorpus);
    EXPECT_EQ(rows[0].component_ids, (std::vector<std::string>{"u1", "u2"}));
    EXPECT_TRUE(language_profile(tokenize_mixed(normalize(rows[0].transcript))).mixed());
}

TEST(PairEnCn, CnFirstAlsoPairsAndKeepsOrder) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::CN, "明天见"),
        utt("u2", "c1", UtteranceLang::EN, "see you"),
    };
    Manifest rows = pair_en_cn(us);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].transcript, "明天见 see you");
}

TEST(PairEnCn, SameLanguageNeighborsDoNotPair) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "hello"),
        utt("u2", "c1", UtteranceLang::EN, "again"),
    };
    EXPECT_TRUE(pair_en_cn(us).empty());
}

TEST(PairEnCn, EachUtteranceUsedAtMostOnce) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "one"),
        utt("u2", "c1", UtteranceLang::CN, "二"),
        utt("u3", "c1", UtteranceLang::EN, "three"),
    };
    Manifest rows = pair_en_cn(us);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].component_ids, (std::vector<std::string>{"u1", "u2"}));
}

TEST(PairEnCn, CrossConversationNeighborsDoNotPair) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "hello"),
        utt("u2", "c2", UtteranceLang::CN, "你好"),
    };
    EXPECT_TRUE(pair_en_cn(us).empty());
}

TEST(PairEnCn, MixUtteranceBlocksPairing) {
    std::vector<Utterance> us = {
        utt("u1", "c1", UtteranceLang::EN, "hello"),
        utt("u2", "c1", UtteranceLang::MIX, "好 ok"),
        utt("u3", "c1", UtteranceLang::CN, "你好"),
    };
    EXPECT_TRUE(pair_en_cn(us).empty());
}

TEST(SynthCrossCorpus, ZeroPairsYieldsEmpty) {
    std::vector<Utterance> en = {utt("e1", "p", UtteranceLang::EN, "hi")};
    std::vector<Utterance> zh = {utt("z1", "p", UtteranceLang::CN, "嗨")};
    EXPECT_TRUE(synth_cross_corpus(en, zh, 0, 1).empty());
}

TEST(SynthCrossCorpus, EmptyPoolThrows) {
    std::vector<Utterance> en = {utt("e1", "p", UtteranceLang::EN, "hi")};
    std::vector<Utterance> none;
    EXPECT_THROW(synth_cross_corpus(none, en, 3, 1), EmptyPool);
    EXPECT_THROW(synth_cross_corpus(en, none, 3, 1), EmptyPool);
}

TEST(SynthCrossCorpus, SingletonPoolsAlwaysUseBothClips) {
    std::vector<Utterance> en = {utt("e1", "p", UtteranceLang::EN, "good luck")};
    std::vector<Utterance> zh = {utt("z1", "p", UtteranceLang::CN, "加油")};
    Manifest rows = synth_cross_corpus(en, zh, 64, 7);
    ASSERT_EQ(rows.size(), 64u);
    size_t en_first = 0;
    for (const auto& r : rows) {
        ASSERT_EQ(r.component_ids.size(), 2u);
        EXPECT_TRUE((r.component_ids[0] == "e1" && r.component_ids[1] == "z1") ||
                    (r.component_ids[0] == "z1" && r.component_ids[1] == "e1"));
        EXPECT_EQ(r.source, ManifestSource::ConcatCrossCorpus);
        EXPECT_TRUE(language_profile(tokenize_mixed(normalize(r.transcript))).mixed());
        if (r.component_ids[0] == "e1") ++en_first;
    }
    // Order is uniform; with 64 draws both orders should appear.
    EXPECT_GT(en_first, 0u);
    EXPECT_LT(en_first, 64u);
}

TEST(SynthCrossCorpus, SeededRunsAreIdentical) {
    std::vector<Utterance> en = {utt("e1", "p", UtteranceLang::EN, "a"),
                                 utt("e2", "p", UtteranceLang::EN, "b"),
                                 utt("e3", "p", UtteranceLang::EN, "c")};
    std::vector<Utterance> zh = {utt("z1", "p", UtteranceLang::CN, "一"),
                                 utt("z2", "p", UtteranceLang::CN, "二")};
    Manifest a = synth_cross_corpus(en, zh, 50, 42);
    Manifest b = synth_cross_corpus(en, zh, 50, 42);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].component_ids, b[i].component_ids);
        EXPECT_EQ(a[i].transcript, b[i].transcript);
    }
    Manifest c = synth_cross_corpus(en, zh, 50, 43);
    bool any_diff = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].component_ids != c[i].component_ids) any_diff = true;
    }
    EXPECT_TRUE(any_diff);
}

TEST(ManifestJsonl, RoundTripPreservesRowsAndSkipsMeta) {
    fs::path dir = make_temp_dir("manifest");
    Manifest rows = {
        {"r1", "r1.wav", "hello 你好", ManifestSource::ConcatIntraCorpus, {"u1", "u2"}, 2.5},
        {"r2", "r2.wav", "我 like it", ManifestSource::NaturalMix, {"u3"}, 1.25},
    };
    const std::string path = (dir / "m.jsonl").string();
    save_manifest(path, rows, Json{{"seed", 7}});

    Manifest back = load_manifest(path);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].id, "r1");
    EXPECT_EQ(back[0].transcript, "hello 你好");
    EXPECT_EQ(back[0].source, ManifestSource::ConcatIntraCorpus);
    EXPECT_EQ(back[0].component_ids, (std::vector<std::string>{"u1", "u2"}));
    EXPECT_DOUBLE_EQ(back[1].duration, 1.25);

    Json meta = read_jsonl_meta(path);
    ASSERT_FALSE(meta.is_null());
    EXPECT_EQ(meta["seed"], 7);
}

TEST(Wav, RoundTripIsSampleExact) {
    fs::path dir = make_temp_dir("wav_rt");
    WavData w = tone(16000, 0.25);
    const std::string path = (dir / "t.wav").string();
    write_wav(path, w);
    WavData back = read_wav(path);
    EXPECT_EQ(back.sample_rate, 16000);
    EXPECT_EQ(back.channels, 1);
    EXPECT_EQ(back.samples, w.samples);
}

TEST(Wav, ConcatTwoOneSecondClipsNoGap) {
    fs::path dir = make_temp_dir("wav_cat0");
    write_wav((dir / "a.wav").string(), tone(16000, 1.0));
    write_wav((dir / "b.wav").string(), tone(16000, 1.0));
    const std::string out = (dir / "out.wav").string();
    double dur = concat_audio({(dir / "a.wav").string(), (dir / "b.wav").string()}, 0, out);
    EXPECT_DOUBLE_EQ(dur, 2.0);
    WavData joined = read_wav(out);
    EXPECT_EQ(joined.samples.size(), 32000u);
}

TEST(Wav, ConcatWithHundredMsGapInsertsSilence) {
    fs::path dir = make_temp_dir("wav_cat100");
    write_wav((dir / "a.wav").string(), tone(16000, 1.0));
    write_wav((dir / "b.wav").string(), tone(16000, 1.0));
    const std::string out = (dir / "out.wav").string();
    double dur =
        concat_audio({(dir / "a.wav").string(), (dir / "b.wav").string()}, 100, out);
    EXPECT_DOUBLE_EQ(dur, 2.1);
    WavData joined = read_wav(out);
    ASSERT_EQ(joined.samples.size(), 33600u);
    for (size_t i = 16000; i < 17600; ++i) EXPECT_EQ(joined.samples[i], 0);
}

TEST(Wav, SampleRateMismatchNamesOffendingFile) {
    fs::path dir = make_temp_dir("wav_sr");
    write_wav((dir / "a.wav").string(), tone(16000, 0.1));
    write_wav((dir / "b.wav").string(), tone(24000, 0.1));
    try {
        concat_audio({(dir / "a.wav").string(), (dir / "b.wav").string()}, 0,
                     (dir / "out.wav").string());
        FAIL() << "expected SampleRateMismatch";
    } catch (const SampleRateMismatch& e) {
        EXPECT_NE(std::string(e.what()).find("b.wav"), std::string::npos);
        EXPECT_EQ(e.kind(), "SampleRateMismatch");
    }
}

TEST(Wav, ChannelMismatchNamesOffendingFile) {
    fs::path dir = make_temp_dir("wav_ch");
    write_wav((dir / "a.wav").string(), tone(16000, 0.1, 1));
    write_wav((dir / "b.wav").string(), tone(16000, 0.1, 2));
    try {
        concat_audio({(dir / "a.wav").string(), (dir / "b.wav").string()}, 0,
                     (dir / "out.wav").string());
        FAIL() << "expected ChannelMismatch";
    } catch (const ChannelMismatch& e) {
        EXPECT_NE(std::string(e.what()).find("b.wav"), std::string::npos);
    }
}

TEST(Wav, StereoConcatKeepsInterleavedFrames) {
    fs::path dir = make_temp_dir("wav_stereo");
    write_wav((dir / "a.wav").string(), tone(16000, 0.5, 2));
    write_wav((dir / "b.wav").string(), tone(16000, 0.5, 2));
    const std::string out = (dir / "out.wav").string();
    double dur = concat_audio({(dir / "a.wav").string(), (dir / "b.wav").string()}, 0, out);
    EXPECT_DOUBLE_EQ(dur, 1.0);
    WavData joined = read_wav(out);
    EXPECT_EQ(joined.channels, 2);
    EXPECT_EQ(joined.samples.size(), 32000u);  // 16000 frames * 2 channels
}

TEST(Wav, GarbageFileIsUnreadable) {
    fs::path dir = make_temp_dir("wav_bad");
    const std::string path = (dir / "bad.wav").string();
    std::ofstream(path) << "this is not audio";
    EXPECT_THROW(read_wav(path), UnreadableAudio);
    EXPECT_THROW(read_wav((dir / "missing.wav").string()), UnreadableAudio);
}
