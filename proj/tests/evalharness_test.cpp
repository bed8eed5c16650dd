#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "csalign/evalharness.hpp"
#include "csalign/evalharness_http.hpp"
#include "csalign/translator_http.hpp"

namespace fs = std::filesystem;
using namespace csalign;

namespace {

ManifestRow make_row(std::string id, std::string transcript) {
    ManifestRow row;
    row.id = std::move(id);
    row.audio_ref = row.id + ".wav";
    row.transcript = std::move(transcript);
    row.source = ManifestSource::NaturalMix;
    return row;
}

BenchmarkRun make_run(std::map<std::string, std::string> hyps,
                      std::string benchmark = "toy", std::string model = "base") {
    BenchmarkRun run;
    run.benchmark_name = std::move(benchmark);
    run.model_name = std::move(model);
    run.hypotheses = std::move(hyps);
    run.provenance = "inline";
    return run;
}

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "csalign_test_eval";
    fs::create_directories(dir);
    return dir / name;
}

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string endpoint(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

}  // namespace

TEST(Evaluate, IdenticalHypothesesScoreZeroWithNoneLabels) {
    Manifest manifest = {make_row("u1", "我们都应该 pursue a healthy lifestyle"),
                         make_row("u2", "基本每天就是做题刷题"),
                         make_row("u3", "it's so boring and dull")};
    std::map<std::string, std::string> hyps;
    for (const auto& r : manifest) hyps[r.id] = r.transcript;

    EvalReport report = evaluate(manifest, make_run(hyps));
    ASSERT_EQ(report.rows.size(), 3u);
    for (const auto& row : report.rows) {
        EXPECT_DOUBLE_EQ(row.mer, 0.0);
        EXPECT_EQ(row.labels, std::vector<std::string>{"None"});
        EXPECT_FALSE(row.hypothesis_missing);
    }
    EXPECT_DOUBLE_EQ(report.summary.pooled_mer, 0.0);
    EXPECT_EQ(report.summary.label_frequencies.at("None"), 3u);
    EXPECT_EQ(report.summary.rows_scored, 3u);
    EXPECT_EQ(report.summary.missing_hypotheses, 0u);
}

TEST(Evaluate, MissingHypothesesScoreAsAllDeletions) {
    Manifest manifest = {make_row("u1", "今天 weather 不错"),
                         make_row("u2", "我们 today 去 library"),
                         make_row("u3", "hello 你好"),
                         make_row("u4", "一起 study 吧")};
    EvalReport report = evaluate(
        manifest, make_run({{"u1", "今天 weather 不错"}, {"u3", "hello 你好"}}));

    const EvalRow& u2 = report.rows[1];
    EXPECT_TRUE(u2.hypothesis_missing);
    EXPECT_DOUBLE_EQ(u2.mer, 1.0);
    EXPECT_EQ(u2.deletions, 5u);  // 我,们,today,去,library
    EXPECT_EQ(u2.substitutions, 0u);
    EXPECT_EQ(u2.insertions, 0u);
    EXPECT_EQ(report.summary.missing_hypotheses, 2u);
    EXPECT_EQ(report.summary.rows_scored, 4u);
    EXPECT_TRUE(report.summary.missing_scored_as_empty);
    // pooled = (0 + 5 + 0 + 4 errors) / (5 + 5 + 3 + 4 ref tokens)
    EXPECT_DOUBLE_EQ(report.summary.pooled_mer, 9.0 / 17.0);
}

TEST(Evaluate, QualitativeExampleRowsScoreAndLabel) {
    Manifest manifest = {make_row("ex1", "我们都应该 pursue a healthy lifestyle"),
                         make_row("ex2", "我们二月多有 valentine's day"),
                         make_row("ex3", "我住 temasek poly 那边")};
    std::string repeated;
    for (int i = 0; i < 250; ++i) repeated += "ah month ";
    EvalReport report = evaluate(
        manifest, make_run({{"ex1", "我们都应该追求健康的生活方式"},
                            {"ex2", repeated},
                            {"ex3", "我住达马士科波利那边"}}));

    EXPECT_EQ(format_percent(report.rows[0].mer), "100.00");
    EXPECT_EQ(report.rows[0].labels, std::vector<std::string>{"Translation"});

    EXPECT_GT(report.rows[1].mer, 1.0);
    EXPECT_EQ(report.rows[1].labels, std::vector<std::string>{"Hallucination"});

    EXPECT_EQ(format_percent(report.rows[2].mer), "100.00");
    EXPECT_EQ(report.rows[2].labels, std::vector<std::string>{"Translation"});

    EXPECT_EQ(report.summary.label_frequencies.at("Translation"), 2u);
    EXPECT_EQ(report.summary.label_frequencies.at("Hallucination"), 1u);
    EXPECT_EQ(report.summary.label_frequencies.count("None"), 0u);
}

TEST(Evaluate, EmptyReferenceRowsReportedAndExcludedFromPool) {
    Manifest manifest = {make_row("ok", "今天 weather 不错"),
                         make_row("blank", "。。。")};
    EvalReport report =
        evaluate(manifest, make_run({{"ok", "今天 weather 很 好"}, {"blank", "anything"}}));

    EXPECT_FALSE(report.rows[0].empty_reference);
    EXPECT_TRUE(report.rows[1].empty_reference);
    EXPECT_TRUE(report.rows[1].labels.empty());
    EXPECT_EQ(report.summary.empty_reference_rows, 1u);
    EXPECT_EQ(report.summary.rows_scored, 1u);
    // pooled covers only the scored row: 2 substitutions over 5 ref tokens
    EXPECT_DOUBLE_EQ(report.summary.pooled_mer, 2.0 / 5.0);
}

TEST(Evaluate, DuplicateManifestIdsRejected) {
    Manifest manifest = {make_row("dup", "今天 weather 不错"),
                         make_row("dup", "hello 你好")};
    EXPECT_THROW(evaluate(manifest, make_run({})), std::invalid_argument);
}

TEST(Evaluate, PooledMerEqualsDirectCorpusMer) {
    Manifest manifest = {make_row("a", "我们都应该 pursue a healthy lifestyle"),
                         make_row("b", "基本每天就是做题刷题 it's so boring"),
                         make_row("c", "今天 weather 不错"),
                         make_row("d", "一起 study 吧")};
    std::map<std::string, std::string> hyps = {
        {"a", "我们都应该追求健康的生活方式"},
        {"b", "基本每天就是做题刷题 it is very boring"},
        {"c", "今天天气不错"}};  // "d" missing

    EvalReport report = evaluate(manifest, make_run(hyps));
    std::vector<ScoredPair> pairs;
    for (const auto& row : manifest) {
        auto it = hyps.find(row.id);
        pairs.push_back({row.id, row.transcript, it == hyps.end() ? "" : it->second});
    }
    EXPECT_DOUBLE_EQ(report.summary.pooled_mer, corpus_mer(pairs).value);
}

TEST(Evaluate, ParallelRowsMatchSerialByteForByte) {
    Manifest manifest;
    std::map<std::string, std::string> hyps;
    for (int i = 0; i < 40; ++i) {
        const std::string id = "row-" + std::to_string(i);
        manifest.push_back(make_row(id, "我们 today 去 library 自习"));
        if (i % 3 != 0) hyps[id] = "我们今天去图书馆自习";
    }
    EvalReport serial = evaluate(manifest, make_run(hyps));
    EvalReport parallel = evaluate(manifest, make_run(hyps), {}, {}, 4);

    const auto p1 = temp_file("report_serial.jsonl");
    const auto p2 = temp_file("report_parallel.jsonl");
    write_report_jsonl(p1.string(), serial);
    write_report_jsonl(p2.string(), parallel);
    EXPECT_EQ(read_file(p1.string()), read_file(p2.string()));

    write_report_jsonl(p2.string(), evaluate(manifest, make_run(hyps)));
    EXPECT_EQ(read_file(p1.string()), read_file(p2.string()));
}

TEST(Compare, SignedDeltaRelNegativeMeansImprovement) {
    Manifest manifest = {make_row("u", "a b c d")};
    EvalReport base = evaluate(manifest, make_run({{"u", "a b x y"}}, "toy", "base"));
    EvalReport treat = evaluate(manifest, make_run({{"u", "a b c x"}}, "toy", "dpo"));

    ComparisonRow row = compare(base, treat);
    EXPECT_EQ(row.benchmark, "toy");
    EXPECT_EQ(row.base_model, "base");
    EXPECT_EQ(row.treatment_model, "dpo");
    EXPECT_DOUBLE_EQ(row.base_mer, 50.0);
    EXPECT_DOUBLE_EQ(row.treatment_mer, 25.0);
    EXPECT_DOUBLE_EQ(row.delta_rel, -50.0);

    ComparisonRow same = compare(base, base);
    EXPECT_DOUBLE_EQ(same.delta_rel, 0.0);

    ComparisonRow worse = compare(treat, base);
    EXPECT_GT(worse.delta_rel, 0.0);
}

TEST(Compare, MismatchedReportsRejected) {
    EvalReport base = evaluate({make_row("u1", "a b")}, make_run({{"u1", "a b"}}));
    EvalReport other = evaluate({make_row("u2", "a b")}, make_run({{"u2", "a b"}}));
    EXPECT_THROW(compare(base, other), ManifestMismatch);

    EvalReport renamed =
        evaluate({make_row("u1", "a b")}, make_run({{"u1", "a x"}}, "other-bench"));
    EXPECT_THROW(compare(base, renamed), ManifestMismatch);
}

TEST(Compare, DeltaRelMatchesPublishedComparisonRows) {
    struct Vector {
        double base, treatment, printed;
        const char* formatted;
    };
    // Row 1's printed -2.0% does not reproduce from its own printed MERs
    // (exact recomputation gives -1.9%); it is held to the 0.1 slop only.
    const std::vector<Vector> rows = {
        {32.38, 31.75, -2.0, nullptr}, {25.79, 25.61, -0.7, "-0.7"},
        {32.01, 30.41, -5.0, "-5.0"},  {25.41, 22.58, -11.1, "-11.1"},
        {69.97, 61.09, -12.7, "-12.7"}, {51.97, 46.63, -10.3, "-10.3"},
        {70.98, 7.38, -89.6, "-89.6"}, {49.61, 10.65, -78.5, "-78.5"},
        {95.11, 85.52, -10.1, "-10.1"}, {72.89, 58.30, -20.0, "-20.0"},
        {44.70, 42.08, -5.9, "-5.9"},  {38.91, 31.40, -19.3, "-19.3"},
    };
    for (const auto& v : rows) {
        const double computed = delta_rel_percent(v.base, v.treatment);
        EXPECT_NEAR(computed, v.printed, 0.1) << v.base << " -> " << v.treatment;
        if (v.formatted) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.1f", computed);
            EXPECT_STREQ(buf, v.formatted);
        }
    }
    EXPECT_THROW(delta_rel_percent(0.0, 5.0), std::invalid_argument);
}

TEST(Compare, CsvUsesTableFormatting) {
    ComparisonRow row;
    row.benchmark = "seame_dev_man";
    row.base_model = "qwen2-audio";
    row.treatment_model = "qwen2-audio-dpo";
    row.base_mer = 72.89;
    row.treatment_mer = 58.30;
    row.delta_rel = delta_rel_percent(72.89, 58.30);

    const auto path = temp_file("comparison.csv");
    write_comparison_csv(path.string(), {row});
    std::ifstream in(path);
    std::string line;
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_EQ(line, "benchmark,base_model,treatment_model,base_mer,treatment_mer,delta_rel");
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_EQ(line, "seame_dev_man,qwen2-audio,qwen2-audio-dpo,72.89,58.30,-20.0%");
}

TEST(HypothesesFile, RoundTripsRowsAndMeta) {
    BenchmarkRun run = make_run({{"u1", "raw text 1"}, {"u2", "  Transcription: kept verbatim "}},
                                "seame_dev_sge", "phi4");
    const auto path = temp_file("hyps.jsonl");
    save_hypotheses(path.string(), run);

    BenchmarkRun loaded = load_hypotheses(path.string());
    EXPECT_EQ(loaded.hypotheses, run.hypotheses);
    EXPECT_EQ(loaded.benchmark_name, "seame_dev_sge");
    EXPECT_EQ(loaded.model_name, "phi4");
    EXPECT_EQ(loaded.provenance, path.string());
}

TEST(HypothesesFile, AcceptsTextFieldAndNamesRowOnMissingField) {
    const auto path = temp_file("hyps_text.jsonl");
    {
        std::ofstream out(path);
        out << Json{{"id", "u1"}, {"text", "from a text column"}}.dump() << "\n";
        out << Json{{"id", "u2"}, {"hypothesis", "from a hypothesis column"}}.dump() << "\n";
    }
    BenchmarkRun loaded = load_hypotheses(path.string());
    EXPECT_EQ(loaded.hypotheses.at("u1"), "from a text column");
    EXPECT_EQ(loaded.hypotheses.at("u2"), "from a hypothesis column");

    {
        std::ofstream out(path);
        out << Json{{"id", "u3"}, {"transcript", "wrong column"}}.dump() << "\n";
    }
    try {
        load_hypotheses(path.string());
        FAIL() << "expected MissingField";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "MissingField");
        EXPECT_EQ(e.row_id(), "u3");
    }
}

TEST(Fetch, LocalServerRoundTripArchivesRawHypotheses) {
    LocalServer srv;
    std::atomic<int> requests{0};
    srv.server.Post("/transcribe", [&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        EXPECT_EQ(req.get_header_value("Authorization"), "Bearer tok-1");
        Json body = Json::parse(req.body);
        EXPECT_EQ(body.at("prompt"), "Please transcribe this speech.");
        res.set_content(
            Json{{"text", "Transcription: heard " + body.at("audio_ref").get<std::string>()}}
                .dump(),
            "application/json");
    });
    srv.start();

    Manifest manifest = {make_row("u1", "今天 weather 不错"),
                         make_row("u2", "hello 你好"),
                         make_row("u3", "一起 study 吧")};
    TranscriberConfig cfg;
    cfg.endpoint = srv.endpoint("/transcribe");
    cfg.api_token = "tok-1";
    cfg.backoff_initial_ms = 10;
    const auto cache = temp_file("fetched.jsonl");

    BenchmarkRun run = fetch_hypotheses(cfg, manifest, "Please transcribe this speech.",
                                        cache.string(), "toy", "remote");
    EXPECT_EQ(requests.load(), 3);
    EXPECT_EQ(run.hypotheses.at("u2"), "Transcription: heard u2.wav");
    EXPECT_EQ(run.provenance, cfg.endpoint);

    BenchmarkRun replay = load_hypotheses(cache.string());
    EXPECT_EQ(replay.hypotheses, run.hypotheses);

    // Preamble survives the archive verbatim and is stripped at scoring time.
    Manifest echo = {make_row("u9", "heard u9")};
    BenchmarkRun echo_run = make_run({{"u9", "Transcription: heard u9"}});
    EvalReport stripped =
        evaluate(echo, echo_run, {}, {parse_preamble_template("Transcription: {content}")});
    EXPECT_DOUBLE_EQ(stripped.rows[0].mer, 0.0);
}

TEST(Fetch, PerRowFailuresRecordedAsMissing) {
    LocalServer srv;
    srv.server.Post("/transcribe", [&](const httplib::Request& req, httplib::Response& res) {
        Json body = Json::parse(req.body);
        if (body.at("audio_ref").get<std::string>().find("bad") != std::string::npos) {
            res.status = 500;
            return;
        }
        res.set_content(Json{{"text", "ok"}}.dump(), "application/json");
    });
    srv.start();

    Manifest manifest = {make_row("good-1", "今天 weather 不错"),
                         make_row("bad-1", "hello 你好"),
                         make_row("good-2", "一起 study 吧")};
    TranscriberConfig cfg;
    cfg.endpoint = srv.endpoint("/transcribe");
    cfg.max_attempts = 2;
    cfg.backoff_initial_ms = 10;
    const auto cache = temp_file("partial.jsonl");

    BenchmarkRun run =
        fetch_hypotheses(cfg, manifest, "Please transcribe this speech.", cache.string());
    EXPECT_EQ(run.hypotheses.size(), 2u);
    EXPECT_EQ(run.hypotheses.count("bad-1"), 0u);

    EvalReport report = evaluate(manifest, run);
    EXPECT_TRUE(report.rows[1].hypothesis_missing);
    EXPECT_DOUBLE_EQ(report.rows[1].mer, 1.0);
}

TEST(Fetch, AbortsOnlyWhenEveryRowFails) {
    LocalServer srv;
    srv.server.Post("/transcribe", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    srv.start();

    Manifest manifest = {make_row("u1", "今天 weather 不错"),
                         make_row("u2", "hello 你好")};
    TranscriberConfig cfg;
    cfg.endpoint = srv.endpoint("/transcribe");
    cfg.max_attempts = 2;
    cfg.backoff_initial_ms = 10;
    EXPECT_THROW(fetch_hypotheses(cfg, manifest, "p", temp_file("dead.jsonl").string()),
                 TransportError);
}

TEST(Fetch, FallsBackToCompleteCacheWhenUnreachable) {
    Manifest manifest = {make_row("u1", "今天 weather 不错"),
                         make_row("u2", "hello 你好")};
    const auto cache = temp_file("cache.jsonl");
    save_hypotheses(cache.string(),
                    make_run({{"u1", "今天 weather 不错"}, {"u2", "hello 你好"}},
                             "toy", "cached"));

    TranscriberConfig cfg;
    cfg.endpoint = "http://127.0.0.1:9";  // discard port, refuses connections
    cfg.max_attempts = 1;
    cfg.backoff_initial_ms = 10;
    cfg.timeout_sec = 1;

    BenchmarkRun run = fetch_or_load(cfg, manifest, "p", cache.string());
    EXPECT_EQ(run.model_name, "cached");
    EXPECT_EQ(run.hypotheses.size(), 2u);

    Manifest wider = manifest;
    wider.push_back(make_row("u3", "一起 study 吧"));
    EXPECT_THROW(fetch_or_load(cfg, wider, "p", cache.string()), TransportError);
}

TEST(WireTranslator, LocalServerRoundTripAndRetry) {
    LocalServer srv;
    std::atomic<int> calls{0};
    srv.server.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++calls;
        Json body = Json::parse(req.body);
        EXPECT_EQ(body.at("source_lang"), "en");
        EXPECT_EQ(body.at("target_lang"), "zh");
        if (n == 1) {
            res.status = 503;  // first attempt fails, retry should heal it
            return;
        }
        res.set_content(Json{{"text", "你几年级？"}}.dump(), "application/json");
    });
    srv.start();

    HttpTranslatorConfig cfg;
    cfg.endpoint = srv.endpoint("/translate");
    cfg.backoff_initial_ms = 10;
    HttpTranslator translator(cfg);
    EXPECT_EQ(translator.translate("what grade are you", Direction::EnToZh), "你几年级？");
    EXPECT_EQ(calls.load(), 2);
}

TEST(WireTranslator, ClientErrorsDoNotRetry) {
    LocalServer srv;
    std::atomic<int> calls{0};
    srv.server.Post("/translate", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 404;
    });
    srv.start();

    HttpTranslatorConfig cfg;
    cfg.endpoint = srv.endpoint("/translate");
    cfg.backoff_initial_ms = 10;
    HttpTranslator translator(cfg);
    EXPECT_THROW(translator.translate("boring", Direction::EnToZh), TransportError);
    EXPECT_EQ(calls.load(), 1);
}
