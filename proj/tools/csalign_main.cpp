// csalign: command-line front end for the code-switching alignment toolkit.
// Every pipeline stage is a subcommand; stages compose via JSONL files.

#include <cinttypes>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csalign/datasets.hpp"
#include "csalign/dpo.hpp"
#include "csalign/evalharness.hpp"
#include "csalign/evalharness_http.hpp"
#include "csalign/failure_modes.hpp"
#include "csalign/manifest.hpp"
#include "csalign/mer.hpp"
#include "csalign/pairgen.hpp"
#include "csalign/translator.hpp"
#include "csalign/translator_http.hpp"
#include "csalign/wav.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using csalign::Json;

uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

std::string config_hash(const Json& fields) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, csalign::fnv1a64(fields.dump()));
    return buf;
}

// Metadata stamped into every randomized output: enough to reproduce the
// run (seed), detect config drift (hash), and trace the producer (version).
Json run_meta(uint64_t seed, const Json& config_fields) {
    return Json{{"seed", seed},
                {"config_hash", config_hash(config_fields)},
                {"tool_version", kToolVersion}};
}

struct TextRow {
    std::string id;
    std::string text;
};

// Reads JSONL rows carrying an id plus the first present text-ish field.
std::vector<TextRow> load_text_rows(const std::string& path,
                                    std::initializer_list<const char*> fields) {
    std::vector<TextRow> out;
    size_t n = 0;
    for (const Json& row : csalign::read_jsonl(path)) {
        TextRow r;
        r.id = row.value("id", "row-" + std::to_string(n));
        bool found = false;
        for (const char* f : fields) {
            if (row.contains(f)) {
                r.text = row.at(f).get<std::string>();
                found = true;
                break;
            }
        }
        if (!found) {
            throw csalign::Error("MissingField",
                                 path + ": row has none of the expected text fields", r.id);
        }
        out.push_back(std::move(r));
        ++n;
    }
    return out;
}

std::map<std::string, std::string> index_by_id(const std::vector<TextRow>& rows) {
    std::map<std::string, std::string> out;
    for (const auto& r : rows) out[r.id] = r.text;
    return out;
}

std::vector<csalign::PreambleTemplate> load_templates_opt(const std::string& path) {
    if (path.empty()) return {};
    return csalign::load_preamble_templates(path);
}

csalign::ClassifierThresholds load_thresholds_opt(const std::string& path) {
    if (path.empty()) return {};
    const Json j = Json::parse(csalign::read_file(path));
    csalign::ClassifierThresholds t;
    t.repetition_ngram_max = j.value("repetition_ngram_max", t.repetition_ngram_max);
    t.repetition_min_repeats = j.value("repetition_min_repeats", t.repetition_min_repeats);
    t.length_blowup_ratio = j.value("length_blowup_ratio", t.length_blowup_ratio);
    t.omission_length_slack = j.value("omission_length_slack", t.omission_length_slack);
    return t;
}

void write_json_file(const std::string& path, const Json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << value.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// normalize

struct NormalizeOpts {
    std::string text;
    std::string in_path;
    std::string out_path;
};

void run_normalize(const NormalizeOpts& o) {
    if (!o.text.empty() || o.in_path.empty()) {
        std::cout << csalign::normalize(o.text) << "\n";
        return;
    }
    std::vector<Json> rows;
    for (const TextRow& r : load_text_rows(o.in_path, {"text", "transcript"})) {
        const std::string norm = csalign::normalize(r.text);
        Json tokens = Json::array();
        for (const auto& t : csalign::tokenize_mixed(norm).tokens) tokens.push_back(t.surface);
        rows.push_back(Json{{"id", r.id}, {"text", norm}, {"tokens", tokens}});
    }
    if (o.out_path.empty()) {
        for (const auto& r : rows) std::cout << r.dump() << "\n";
    } else {
        csalign::write_jsonl(o.out_path, rows);
    }
}

// ---------------------------------------------------------------------------
// mer / classify

struct ScoreOpts {
    std::string ref_path;
    std::string hyp_path;
    std::string templates_path;
    std::string thresholds_path;
    std::string out_path;
};

void run_mer(const ScoreOpts& o) {
    const auto refs = load_text_rows(o.ref_path, {"text", "transcript", "reference"});
    const auto hyps = index_by_id(load_text_rows(o.hyp_path, {"text", "hypothesis"}));
    const auto patterns = load_templates_opt(o.templates_path);

    std::vector<csalign::ScoredPair> pairs;
    for (const auto& r : refs) {
        auto it = hyps.find(r.id);
        pairs.push_back({r.id, r.text, it == hyps.end() ? "" : it->second});
    }
    std::vector<Json> rows;
    for (const auto& p : pairs) {
        const csalign::MerScore s = csalign::mer(p.reference, p.hypothesis, patterns, p.id);
        rows.push_back(Json{{"id", p.id},
                            {"mer", s.value},
                            {"mer_percent", csalign::format_percent(s.value)},
                            {"substitutions", s.breakdown.substitutions},
                            {"deletions", s.breakdown.deletions},
                            {"insertions", s.breakdown.insertions}});
    }
    const csalign::MerScore pooled = csalign::corpus_mer(pairs, patterns);
    if (!o.out_path.empty()) {
        csalign::write_jsonl(o.out_path, rows,
                             Json{{"pooled_mer", pooled.value},
                                  {"pooled_mer_percent", csalign::format_percent(pooled.value)},
                                  {"tool_version", kToolVersion}});
    }
    std::cout << "MER " << csalign::format_percent(pooled.value) << "% (S="
              << pooled.breakdown.substitutions << " D=" << pooled.breakdown.deletions
              << " I=" << pooled.breakdown.insertions << " refs=" << pairs.size() << ")\n";
}

void run_classify(const ScoreOpts& o) {
    const auto refs = load_text_rows(o.ref_path, {"text", "transcript", "reference"});
    const auto hyps = index_by_id(load_text_rows(o.hyp_path, {"text", "hypothesis"}));
    const auto patterns = load_templates_opt(o.templates_path);
    const auto thresholds = load_thresholds_opt(o.thresholds_path);

    std::vector<Json> rows;
    std::map<std::string, size_t> counts;
    for (const auto& r : refs) {
        auto it = hyps.find(r.id);
        const std::string hyp = it == hyps.end() ? "" : it->second;
        const csalign::Classification c =
            csalign::classify(r.text, hyp, thresholds, patterns, r.id);
        Json labels = Json::array();
        for (csalign::FailureLabel l : c.labels) {
            labels.push_back(csalign::to_string(l));
            ++counts[csalign::to_string(l)];
        }
        rows.push_back(Json{{"id", r.id}, {"labels", labels}, {"evidence", c.evidence}});
    }
    if (!o.out_path.empty()) csalign::write_jsonl(o.out_path, rows);
    for (const auto& [label, n] : counts) std::cout << label << " " << n << "\n";
}

// ---------------------------------------------------------------------------
// pairgen

struct PairgenOpts {
    std::string manifest_path;
    std::string out_path;
    std::string skips_path;
    std::string pool_path = "configs/prompt_pool.txt";
    std::string translator = "stub";
    uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
    int max_attempts = 3;
};

void run_pairgen(const PairgenOpts& o) {
    const csalign::Manifest manifest = csalign::load_manifest(o.manifest_path);
    const csalign::PromptPool pool = csalign::load_prompt_pool(o.pool_path);
    const uint64_t seed = o.seed_given ? o.seed : fresh_seed();

    csalign::DictionaryTranslator stub;
    std::unique_ptr<csalign::HttpTranslator> wire;
    csalign::TranslatorPort* translator = &stub;
    if (o.translator == "http") {
        wire = std::make_unique<csalign::HttpTranslator>(
            csalign::HttpTranslatorConfig::from_env());
        translator = wire.get();
    }

    const csalign::PairGenResult result =
        csalign::build_pairs(manifest, *translator, pool, seed, o.jobs, o.max_attempts);

    const Json meta = run_meta(
        seed, Json{{"subcommand", "pairgen"},
                   {"pool_hash", config_hash(Json(csalign::read_file(o.pool_path)))},
                   {"translator", o.translator},
                   {"max_attempts", o.max_attempts}});
    csalign::save_pairs(o.out_path, result.pairs, meta);
    if (!o.skips_path.empty()) {
        std::vector<Json> rows;
        for (const auto& s : result.skips) rows.push_back(csalign::to_json(s));
        csalign::write_jsonl(o.skips_path, rows, meta);
    }
    std::cout << "pairs=" << result.pairs.size() << " skips=" << result.skips.size()
              << " seed=" << seed << "\n";
}

// ---------------------------------------------------------------------------
// dataset

struct DatasetOpts {
    std::string utterances_path;
    std::string manifest_path;
    std::string out_path;
    std::string out_dir;
    double max_duration = 30.0;
    size_t n_pairs = 0;
    uint64_t seed = 0;
    bool seed_given = false;
    int gap_ms = 0;
};

void run_mix_runs(const DatasetOpts& o) {
    const auto utterances = csalign::load_utterances(o.utterances_path);
    std::vector<std::string> warnings;
    const csalign::Manifest manifest =
        csalign::group_mix_runs(utterances, o.max_duration, &warnings);
    csalign::save_manifest(o.out_path, manifest,
                           Json{{"tool_version", kToolVersion},
                                {"source", "mix-runs"},
                                {"max_duration", o.max_duration}});
    for (const auto& w : warnings) std::cerr << w << "\n";
    std::cout << "rows=" << manifest.size() << "\n";
}

void run_pair_encn(const DatasetOpts& o) {
    const auto utterances = csalign::load_utterances(o.utterances_path);
    const csalign::Manifest manifest = csalign::pair_en_cn(utterances);
    csalign::save_manifest(o.out_path, manifest,
                           Json{{"tool_version", kToolVersion}, {"source", "pair-encn"}});
    std::cout << "rows=" << manifest.size() << "\n";
}

void run_synth(const DatasetOpts& o) {
    const auto utterances = csalign::load_utterances(o.utterances_path);
    std::vector<csalign::Utterance> en, cn;
    for (const auto& u : utterances) {
        if (u.lang_tag == csalign::UtteranceLang::EN) en.push_back(u);
        if (u.lang_tag == csalign::UtteranceLang::CN) cn.push_back(u);
    }
    const uint64_t seed = o.seed_given ? o.seed : fresh_seed();
    const csalign::Manifest manifest = csalign::synth_cross_corpus(en, cn, o.n_pairs, seed);
    csalign::save_manifest(
        o.out_path, manifest,
        run_meta(seed, Json{{"subcommand", "dataset synth"}, {"n", o.n_pairs}}));
    std::cout << "rows=" << manifest.size() << " seed=" << seed << "\n";
}

void run_concat(const DatasetOpts& o) {
    const auto utterances = csalign::load_utterances(o.utterances_path);
    std::map<std::string, const csalign::Utterance*> by_id;
    for (const auto& u : utterances) by_id[u.id] = &u;

    csalign::Manifest manifest = csalign::load_manifest(o.manifest_path);
    size_t written = 0;
    for (auto& row : manifest) {
        if (row.component_ids.empty()) continue;
        std::vector<std::string> paths;
        for (const auto& id : row.component_ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw csalign::Error("UnknownComponent",
                                     "manifest row references unknown utterance " + id,
                                     row.id);
            }
            paths.push_back(it->second->audio_path);
        }
        const std::string out_path =
            o.out_dir.empty() ? row.audio_ref : o.out_dir + "/" + row.audio_ref;
        row.duration = csalign::concat_audio(paths, o.gap_ms, out_path);
        ++written;
    }
    csalign::save_manifest(o.out_path, manifest,
                           Json{{"tool_version", kToolVersion},
                                {"source", "concat"},
                                {"gap_ms", o.gap_ms}});
    std::cout << "rows=" << manifest.size() << " audio_written=" << written << "\n";
}

// ---------------------------------------------------------------------------
// train-toy / behavior-exp

struct TrainOpts {
    double beta = 0.3;
    double learning_rate = 0.1;
    int steps = 500;
    uint64_t seed = 0;
    size_t contexts = 1;
    int samples = 200;
    std::string out_path;
    std::string report_path;
};

void run_train_toy(const TrainOpts& o) {
    const csalign::DpoConfig config{o.beta, o.learning_rate, o.steps, o.seed};
    config.validate();
    csalign::BehaviorSetup setup = csalign::make_biased_transcriber(o.contexts);
    const csalign::ReferencePolicy ref(setup.policy);
    const csalign::TrainResult result =
        csalign::train(setup.policy, ref, setup.batch, config);
    csalign::write_trace_csv(o.out_path, result.trace);

    double min_p_verbatim = 1.0;
    for (size_t x = 0; x < result.policy.n_contexts(); ++x) {
        min_p_verbatim = std::min(min_p_verbatim, result.policy.distribution(x)[0]);
    }
    if (!o.report_path.empty()) {
        write_json_file(o.report_path,
                        Json{{"config", csalign::to_json(config)},
                             {"final_loss", result.trace.back().loss},
                             {"min_p_verbatim", min_p_verbatim},
                             {"meta", run_meta(o.seed, Json{{"subcommand", "train-toy"},
                                                            {"contexts", o.contexts}})}});
    }
    std::cout << "final_loss=" << result.trace.back().loss
              << " min_p_verbatim=" << min_p_verbatim << "\n";
}

void run_behavior_exp(const TrainOpts& o) {
    const csalign::DpoConfig config{o.beta, o.learning_rate, o.steps, o.seed};
    const csalign::BehaviorReport report =
        csalign::behavior_experiment(config, o.contexts, o.samples);
    Json j = csalign::to_json(report);
    j["meta"] = run_meta(o.seed, Json{{"subcommand", "behavior-exp"},
                                      {"contexts", o.contexts},
                                      {"samples", o.samples},
                                      {"beta", o.beta},
                                      {"learning_rate", o.learning_rate},
                                      {"steps", o.steps}});
    write_json_file(o.out_path, j);
    std::cout << "p_verbatim " << report.min_p_verbatim_pre << " -> "
              << report.min_p_verbatim_post << "; sampled MER "
              << csalign::format_percent(report.mer_pre) << "% -> "
              << csalign::format_percent(report.mer_post) << "%\n";
}

// ---------------------------------------------------------------------------
// evaluate / compare / fetch

struct EvaluateOpts {
    std::string manifest_path;
    std::string hyp_path;
    std::string out_path;
    std::string thresholds_path;
    std::string templates_path;
    std::string benchmark;
    std::string model;
    int jobs = 1;
};

void run_evaluate(const EvaluateOpts& o) {
    const csalign::Manifest manifest = csalign::load_manifest(o.manifest_path);
    csalign::BenchmarkRun run = csalign::load_hypotheses(o.hyp_path);
    if (!o.benchmark.empty()) run.benchmark_name = o.benchmark;
    if (!o.model.empty()) run.model_name = o.model;

    const csalign::EvalReport report =
        csalign::evaluate(manifest, run, load_thresholds_opt(o.thresholds_path),
                          load_templates_opt(o.templates_path),
                          static_cast<unsigned>(std::max(1, o.jobs)));
    if (!o.out_path.empty()) csalign::write_report_jsonl(o.out_path, report);
    std::cout << "pooled MER " << csalign::format_percent(report.summary.pooled_mer)
              << "% rows=" << report.summary.rows_scored
              << " missing=" << report.summary.missing_hypotheses
              << " empty_ref=" << report.summary.empty_reference_rows << "\n";
}

struct CompareOpts {
    std::string base_path;
    std::string treatment_path;
    std::string out_path;
};

void run_compare(const CompareOpts& o) {
    const csalign::EvalReport base = csalign::load_report_jsonl(o.base_path);
    const csalign::EvalReport treatment = csalign::load_report_jsonl(o.treatment_path);
    const csalign::ComparisonRow row = csalign::compare(base, treatment);
    if (!o.out_path.empty()) csalign::write_comparison_csv(o.out_path, {row});
    std::cout << csalign::format_comparison_row(row) << "\n";
}

struct FetchOpts {
    std::string manifest_path;
    std::string out_path;
    std::string pool_path = "configs/prompt_pool.txt";
    std::string benchmark;
    std::string model;
    int jobs = 4;
    int max_attempts = 3;
    bool cache_fallback = false;
};

void run_fetch(const FetchOpts& o) {
    const csalign::Manifest manifest = csalign::load_manifest(o.manifest_path);
    const csalign::PromptPool pool = csalign::load_prompt_pool(o.pool_path);
    csalign::TranscriberConfig cfg = csalign::TranscriberConfig::from_env();
    cfg.max_in_flight = static_cast<unsigned>(std::max(1, o.jobs));
    cfg.max_attempts = o.max_attempts;

    const csalign::BenchmarkRun run =
        o.cache_fallback
            ? csalign::fetch_or_load(cfg, manifest, pool.eval_prompt, o.out_path,
                                     o.benchmark, o.model)
            : csalign::fetch_hypotheses(cfg, manifest, pool.eval_prompt, o.out_path,
                                        o.benchmark, o.model);
    std::cout << "hypotheses=" << run.hypotheses.size() << "/" << manifest.size()
              << " provenance=" << run.provenance << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"English-Mandarin code-switching ASR alignment toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    auto norm_opts = std::make_shared<NormalizeOpts>();
    CLI::App* norm = app.add_subcommand("normalize", "Normalize text or JSONL rows");
    auto* norm_text = norm->add_option("--text", norm_opts->text, "Normalize one string");
    norm->add_option("--in", norm_opts->in_path, "Input JSONL with id/text rows")
        ->excludes(norm_text);
    norm->add_option("--out", norm_opts->out_path, "Output JSONL (stdout if omitted)");
    norm->callback([norm_opts] { run_normalize(*norm_opts); });

    auto mer_opts = std::make_shared<ScoreOpts>();
    CLI::App* mer_cmd = app.add_subcommand("mer", "Score hypotheses with mixed error rate");
    mer_cmd->add_option("--ref", mer_opts->ref_path, "Reference JSONL")->required();
    mer_cmd->add_option("--hyp", mer_opts->hyp_path, "Hypothesis JSONL")->required();
    mer_cmd->add_option("--templates", mer_opts->templates_path, "Preamble template file");
    mer_cmd->add_option("--out", mer_opts->out_path, "Per-row score JSONL");
    mer_cmd->callback([mer_opts] { run_mer(*mer_opts); });

    auto cls_opts = std::make_shared<ScoreOpts>();
    CLI::App* cls = app.add_subcommand("classify", "Label failure modes per row");
    cls->add_option("--ref", cls_opts->ref_path, "Reference JSONL")->required();
    cls->add_option("--hyp", cls_opts->hyp_path, "Hypothesis JSONL")->required();
    cls->add_option("--thresholds", cls_opts->thresholds_path, "Classifier thresholds JSON");
    cls->add_option("--templates", cls_opts->templates_path, "Preamble template file");
    cls->add_option("--out", cls_opts->out_path, "Per-row label JSONL");
    cls->callback([cls_opts] { run_classify(*cls_opts); });

    auto pg_opts = std::make_shared<PairgenOpts>();
    CLI::App* pg = app.add_subcommand("pairgen", "Build DPO preference pairs from a manifest");
    pg->add_option("--manifest", pg_opts->manifest_path, "Input manifest JSONL")->required();
    pg->add_option("--out", pg_opts->out_path, "Output pairs JSONL")->required();
    pg->add_option("--skips", pg_opts->skips_path, "Skipped-row JSONL");
    pg->add_option("--pool", pg_opts->pool_path, "Prompt pool file")
        ->capture_default_str();
    pg->add_option("--translator", pg_opts->translator, "Translator backend")
        ->check(CLI::IsMember({"stub", "http"}))
        ->capture_default_str();
    pg->add_option("--seed", pg_opts->seed, "Master seed (random if omitted, recorded in meta)");
    pg->add_option("--jobs", pg_opts->jobs, "Worker threads")->capture_default_str();
    pg->add_option("--max-attempts", pg_opts->max_attempts, "Translator retries")
        ->capture_default_str();
    pg->callback([pg, pg_opts] {
        pg_opts->seed_given = pg->count("--seed") > 0;
        run_pairgen(*pg_opts);
    });

    CLI::App* ds = app.add_subcommand("dataset", "Manifest construction utilities");
    ds->require_subcommand(1);
    auto ds_opts = std::make_shared<DatasetOpts>();

    CLI::App* mix = ds->add_subcommand("mix-runs", "Group consecutive MIX utterances");
    mix->add_option("--utterances", ds_opts->utterances_path, "Utterance JSONL")->required();
    mix->add_option("--out", ds_opts->out_path, "Output manifest JSONL")->required();
    mix->add_option("--max-duration", ds_opts->max_duration, "Split threshold in seconds")
        ->capture_default_str();
    mix->callback([ds_opts] { run_mix_runs(*ds_opts); });

    CLI::App* pen = ds->add_subcommand("pair-encn", "Pair adjacent EN/CN utterances");
    pen->add_option("--utterances", ds_opts->utterances_path, "Utterance JSONL")->required();
    pen->add_option("--out", ds_opts->out_path, "Output manifest JSONL")->required();
    pen->callback([ds_opts] { run_pair_encn(*ds_opts); });

    CLI::App* synth = ds->add_subcommand("synth", "Sample synthetic cross-corpus pairs");
    synth->add_option("--utterances", ds_opts->utterances_path, "Utterance JSONL")->required();
    synth->add_option("--out", ds_opts->out_path, "Output manifest JSONL")->required();
    synth->add_option("--n", ds_opts->n_pairs, "Number of synthetic rows")->required();
    synth->add_option("--seed", ds_opts->seed, "Master seed (random if omitted, recorded in meta)");
    synth->callback([synth, ds_opts] {
        ds_opts->seed_given = synth->count("--seed") > 0;
        run_synth(*ds_opts);
    });

    CLI::App* cc = ds->add_subcommand("concat", "Concatenate component audio per manifest row");
    cc->add_option("--manifest", ds_opts->manifest_path, "Manifest JSONL")->required();
    cc->add_option("--utterances", ds_opts->utterances_path, "Utterance JSONL")->required();
    cc->add_option("--out", ds_opts->out_path, "Updated manifest JSONL")->required();
    cc->add_option("--out-dir", ds_opts->out_dir, "Directory for concatenated audio");
    cc->add_option("--gap-ms", ds_opts->gap_ms, "Silence between clips in ms")
        ->capture_default_str();
    cc->callback([ds_opts] { run_concat(*ds_opts); });

    auto tt_opts = std::make_shared<TrainOpts>();
    CLI::App* tt = app.add_subcommand("train-toy", "Train the tabular DPO policy");
    tt->add_option("--beta", tt_opts->beta, "Preference strength")->capture_default_str();
    tt->add_option("--lr", tt_opts->learning_rate, "Learning rate")->capture_default_str();
    tt->add_option("--steps", tt_opts->steps, "Gradient steps")->capture_default_str();
    tt->add_option("--seed", tt_opts->seed, "Seed")->capture_default_str();
    tt->add_option("--contexts", tt_opts->contexts, "Toy transcriber contexts")
        ->capture_default_str();
    tt->add_option("--out", tt_opts->out_path, "Trace CSV path")->required();
    tt->add_option("--report", tt_opts->report_path, "Summary JSON path");
    tt->callback([tt_opts] { run_train_toy(*tt_opts); });

    auto be_opts = std::make_shared<TrainOpts>();
    be_opts->learning_rate = 0.5;
    be_opts->steps = 800;
    be_opts->contexts = 3;
    CLI::App* be = app.add_subcommand("behavior-exp", "Run the behavior-alignment experiment");
    be->add_option("--beta", be_opts->beta, "Preference strength")->capture_default_str();
    be->add_option("--lr", be_opts->learning_rate, "Learning rate")->capture_default_str();
    be->add_option("--steps", be_opts->steps, "Gradient steps")->capture_default_str();
    be->add_option("--seed", be_opts->seed, "Seed")->capture_default_str();
    be->add_option("--contexts", be_opts->contexts, "Toy transcriber contexts")
        ->capture_default_str();
    be->add_option("--samples", be_opts->samples, "Sampled outputs per context")
        ->capture_default_str();
    be->add_option("--out", be_opts->out_path, "Report JSON path")->required();
    be->callback([be_opts] { run_behavior_exp(*be_opts); });

    auto ev_opts = std::make_shared<EvaluateOpts>();
    CLI::App* ev = app.add_subcommand("evaluate", "Score a hypothesis file against a manifest");
    ev->add_option("--manifest", ev_opts->manifest_path, "Reference manifest JSONL")->required();
    ev->add_option("--hyp", ev_opts->hyp_path, "Hypothesis JSONL")->required();
    ev->add_option("--out", ev_opts->out_path, "Report JSONL");
    ev->add_option("--thresholds", ev_opts->thresholds_path, "Classifier thresholds JSON");
    ev->add_option("--templates", ev_opts->templates_path, "Preamble template file");
    ev->add_option("--benchmark", ev_opts->benchmark, "Benchmark name override");
    ev->add_option("--model", ev_opts->model, "Model name override");
    ev->add_option("--jobs", ev_opts->jobs, "Worker threads")->capture_default_str();
    ev->callback([ev_opts] { run_evaluate(*ev_opts); });

    auto cmp_opts = std::make_shared<CompareOpts>();
    CLI::App* cmp = app.add_subcommand("compare", "Base-vs-treatment comparison row");
    cmp->add_option("--base", cmp_opts->base_path, "Base report JSONL")->required();
    cmp->add_option("--treatment", cmp_opts->treatment_path, "Treatment report JSONL")
        ->required();
    cmp->add_option("--out", cmp_opts->out_path, "Comparison CSV path");
    cmp->callback([cmp_opts] { run_compare(*cmp_opts); });

    auto fx_opts = std::make_shared<FetchOpts>();
    CLI::App* fx = app.add_subcommand("fetch", "Fetch hypotheses from a transcription endpoint");
    fx->add_option("--manifest", fx_opts->manifest_path, "Manifest JSONL")->required();
    fx->add_option("--out", fx_opts->out_path, "Hypothesis JSONL (also the cache)")->required();
    fx->add_option("--pool", fx_opts->pool_path, "Prompt pool file (for the eval prompt)")
        ->capture_default_str();
    fx->add_option("--benchmark", fx_opts->benchmark, "Benchmark name");
    fx->add_option("--model", fx_opts->model, "Model name");
    fx->add_option("--jobs", fx_opts->jobs, "Concurrent requests")->capture_default_str();
    fx->add_option("--max-attempts", fx_opts->max_attempts, "Retries per row")
        ->capture_default_str();
    fx->add_flag("--cache-fallback", fx_opts->cache_fallback,
                 "Reuse the cache file when the endpoint is unreachable");
    fx->callback([fx_opts] { run_fetch(*fx_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const csalign::Error& e) {
        std::cerr << Json{{"error", e.kind()}, {"message", e.what()}, {"row_id", e.row_id()}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "Error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
