#pragma once

// Benchmark evaluation: score a hypothesis set against a reference manifest,
// classify per-row failures, and build base-vs-treatment comparison rows.

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "csalign/failure_modes.hpp"
#include "csalign/jsonl.hpp"
#include "csalign/manifest.hpp"
#include "csalign/mer.hpp"

namespace csalign {

struct BenchmarkRun {
    std::string benchmark_name;
    std::string model_name;
    std::map<std::string, std::string> hypotheses;  // id -> raw hypothesis
    std::string provenance;                         // file path or endpoint
};

struct EvalRow {
    std::string id;
    double mer = 0.0;  // ratio; may exceed 1.0
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::vector<std::string> labels;  // {"None"} when the row is clean
    bool hypothesis_missing = false;
    bool empty_reference = false;
};

struct EvalSummary {
    double pooled_mer = 0.0;  // ratio over all scored rows
    AlignmentResult pooled;
    std::map<std::string, std::size_t> label_frequencies;
    std::size_t rows_scored = 0;
    std::size_t missing_hypotheses = 0;
    std::size_t empty_reference_rows = 0;
    // Policy flag surfaced in report metadata: rows without a hypothesis are
    // scored against the empty string (all deletions), never dropped.
    bool missing_scored_as_empty = true;
};

struct EvalReport {
    std::string benchmark_name;
    std::string model_name;
    std::string provenance;
    std::vector<EvalRow> rows;  // manifest order
    EvalSummary summary;
};

namespace detail {

inline EvalRow score_row(const ManifestRow& mrow, const BenchmarkRun& run,
                         const ClassifierThresholds& thresholds,
                         const std::vector<PreambleTemplate>& patterns) {
    EvalRow row;
    row.id = mrow.id;
    std::string hyp;
    if (auto it = run.hypotheses.find(mrow.id); it != run.hypotheses.end()) {
        hyp = it->second;
    } else {
        row.hypothesis_missing = true;
    }
    try {
        MerScore s = mer(mrow.transcript, hyp, patterns, mrow.id);
        row.mer = s.value;
        row.substitutions = s.breakdown.substitutions;
        row.deletions = s.breakdown.deletions;
        row.insertions = s.breakdown.insertions;
        Classification c = classify(mrow.transcript, hyp, thresholds, patterns, mrow.id);
        for (FailureLabel l : c.labels) row.labels.push_back(to_string(l));
    } catch (const EmptyReference&) {
        row.empty_reference = true;
    }
    return row;
}

}  // namespace detail

inline EvalReport evaluate(const Manifest& manifest, const BenchmarkRun& run,
                           const ClassifierThresholds& thresholds = {},
                           const std::vector<PreambleTemplate>& patterns = {},
                           unsigned jobs = 1) {
    std::set<std::string> seen;
    for (const auto& mrow : manifest) {
        if (!seen.insert(mrow.id).second) {
            throw std::invalid_argument("duplicate manifest id: " + mrow.id);
        }
    }

    EvalReport report;
    report.benchmark_name = run.benchmark_name;
    report.model_name = run.model_name;
    report.provenance = run.provenance;
    report.rows.resize(manifest.size());

    const auto score_stripe = [&](unsigned stripe, unsigned stride) {
        for (std::size_t i = stripe; i < manifest.size(); i += stride) {
            report.rows[i] = detail::score_row(manifest[i], run, thresholds, patterns);
        }
    };
    if (jobs <= 1 || manifest.size() < 2) {
        score_stripe(0, 1);
    } else {
        const unsigned n = std::min<unsigned>(jobs, manifest.size());
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < n; ++w) workers.emplace_back(score_stripe, w, n);
        for (auto& t : workers) t.join();
    }

    // Pooled totals accumulate per-row breakdowns in manifest order, which
    // is exactly the corpus_mer composition over the scored rows.
    auto& sum = report.summary;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const EvalRow& row = report.rows[i];
        if (row.empty_reference) {
            ++sum.empty_reference_rows;
            continue;
        }
        ++sum.rows_scored;
        if (row.hypothesis_missing) ++sum.missing_hypotheses;
        const MerScore s = mer(manifest[i].transcript,
                               row.hypothesis_missing
                                   ? std::string()
                                   : run.hypotheses.at(row.id),
                               patterns, row.id);
        sum.pooled.substitutions += s.breakdown.substitutions;
        sum.pooled.deletions += s.breakdown.deletions;
        sum.pooled.insertions += s.breakdown.insertions;
        sum.pooled.hits += s.breakdown.hits;
        sum.pooled.ref_len += s.breakdown.ref_len;
        for (const auto& l : row.labels) ++sum.label_frequencies[l];
    }
    sum.pooled_mer = sum.pooled.ref_len == 0
                         ? 0.0
                         : static_cast<double>(sum.pooled.errors()) /
                               static_cast<double>(sum.pooled.ref_len);
    return report;
}

// ---------------------------------------------------------------------------
// Comparison (base vs treatment)

struct ComparisonRow {
    std::string benchmark;
    std::string base_model;
    std::string treatment_model;
    double base_mer = 0.0;       // percent
    double treatment_mer = 0.0;  // percent
    double delta_rel = 0.0;      // signed percent, negative = improvement
};

inline double delta_rel_percent(double base, double treatment) {
    if (base == 0.0) {
        throw std::invalid_argument("relative delta undefined for zero base");
    }
    return (treatment - base) / base * 100.0;
}

inline ComparisonRow compare(const EvalReport& base, const EvalReport& treatment) {
    std::set<std::string> base_ids, treatment_ids;
    for (const auto& r : base.rows) base_ids.insert(r.id);
    for (const auto& r : treatment.rows) treatment_ids.insert(r.id);
    if (base_ids != treatment_ids) {
        throw ManifestMismatch("base and treatment reports cover different utterance ids");
    }
    if (base.benchmark_name != treatment.benchmark_name) {
        throw ManifestMismatch("base and treatment reports name different benchmarks: " +
                               base.benchmark_name + " vs " + treatment.benchmark_name);
    }
    ComparisonRow row;
    row.benchmark = base.benchmark_name;
    row.base_model = base.model_name;
    row.treatment_model = treatment.model_name;
    row.base_mer = base.summary.pooled_mer * 100.0;
    row.treatment_mer = treatment.summary.pooled_mer * 100.0;
    row.delta_rel = delta_rel_percent(row.base_mer, row.treatment_mer);
    return row;
}

inline std::string format_comparison_row(const ComparisonRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.2f,%.2f,%.1f%%", r.benchmark.c_str(),
                  r.base_model.c_str(), r.treatment_model.c_str(), r.base_mer,
                  r.treatment_mer, r.delta_rel);
    return buf;
}

inline void write_comparison_csv(const std::string& path,
                                 const std::vector<ComparisonRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open comparison output: " + path);
    out << "benchmark,base_model,treatment_model,base_mer,treatment_mer,delta_rel\n";
    for (const auto& r : rows) out << format_comparison_row(r) << "\n";
}

// ---------------------------------------------------------------------------
// Hypothesis files (JSONL {id, hypothesis}; raw text archived verbatim)

inline void save_hypotheses(const std::string& path, const BenchmarkRun& run) {
    std::vector<Json> rows;
    for (const auto& [id, hyp] : run.hypotheses) {
        rows.push_back(Json{{"id", id}, {"hypothesis", hyp}});
    }
    write_jsonl(path, rows,
                Json{{"benchmark", run.benchmark_name},
                     {"model", run.model_name},
                     {"provenance", run.provenance}});
}

inline BenchmarkRun load_hypotheses(const std::string& path) {
    BenchmarkRun run;
    run.provenance = path;
    const Json meta = read_jsonl_meta(path);
    if (meta.is_object()) {
        run.benchmark_name = meta.value("benchmark", "");
        run.model_name = meta.value("model", "");
    }
    for (const Json& row : read_jsonl(path)) {
        const std::string id = row.at("id").get<std::string>();
        if (row.contains("hypothesis")) {
            run.hypotheses[id] = row["hypothesis"].get<std::string>();
        } else if (row.contains("text")) {
            run.hypotheses[id] = row["text"].get<std::string>();
        } else {
            throw Error("MissingField",
                        path + ": row needs a 'hypothesis' or 'text' field", id);
        }
    }
    return run;
}

// ---------------------------------------------------------------------------
// Report output

inline Json to_json(const EvalRow& r) {
    return Json{{"id", r.id},
                {"mer", r.mer},
                {"mer_percent", format_percent(r.mer)},
                {"substitutions", r.substitutions},
                {"deletions", r.deletions},
                {"insertions", r.insertions},
                {"labels", r.labels},
                {"hypothesis_missing", r.hypothesis_missing},
                {"empty_reference", r.empty_reference}};
}

inline Json summary_json(const EvalReport& report) {
    const auto& s = report.summary;
    return Json{{"benchmark", report.benchmark_name},
                {"model", report.model_name},
                {"provenance", report.provenance},
                {"pooled_mer", s.pooled_mer},
                {"pooled_mer_percent", format_percent(s.pooled_mer)},
                {"pooled_counts",
                 Json{{"substitutions", s.pooled.substitutions},
                      {"deletions", s.pooled.deletions},
                      {"insertions", s.pooled.insertions},
                      {"hits", s.pooled.hits},
                      {"ref_len", s.pooled.ref_len}}},
                {"label_frequencies", s.label_frequencies},
                {"rows_scored", s.rows_scored},
                {"missing_hypotheses", s.missing_hypotheses},
                {"empty_reference_rows", s.empty_reference_rows},
                {"missing_scored_as_empty", s.missing_scored_as_empty}};
}

inline void write_report_jsonl(const std::string& path, const EvalReport& report) {
    std::vector<Json> rows;
    for (const auto& r : report.rows) rows.push_back(to_json(r));
    write_jsonl(path, rows, summary_json(report));
}

inline EvalReport load_report_jsonl(const std::string& path) {
    EvalReport report;
    const Json meta = read_jsonl_meta(path);
    if (meta.is_object()) {
        report.benchmark_name = meta.value("benchmark", "");
        report.model_name = meta.value("model", "");
        report.provenance = meta.value("provenance", "");
        auto& s = report.summary;
        s.pooled_mer = meta.value("pooled_mer", 0.0);
        if (meta.contains("pooled_counts")) {
            const Json& c = meta["pooled_counts"];
            s.pooled.substitutions = c.value("substitutions", std::size_t{0});
            s.pooled.deletions = c.value("deletions", std::size_t{0});
            s.pooled.insertions = c.value("insertions", std::size_t{0});
            s.pooled.hits = c.value("hits", std::size_t{0});
            s.pooled.ref_len = c.value("ref_len", std::size_t{0});
        }
        if (meta.contains("label_frequencies")) {
            s.label_frequencies =
                meta["label_frequencies"].get<std::map<std::string, std::size_t>>();
        }
        s.rows_scored = meta.value("rows_scored", std::size_t{0});
        s.missing_hypotheses = meta.value("missing_hypotheses", std::size_t{0});
        s.empty_reference_rows = meta.value("empty_reference_rows", std::size_t{0});
        s.missing_scored_as_empty = meta.value("missing_scored_as_empty", true);
    }
    for (const Json& j : read_jsonl(path)) {
        EvalRow r;
        r.id = j.at("id").get<std::string>();
        r.mer = j.value("mer", 0.0);
        r.substitutions = j.value("substitutions", std::size_t{0});
        r.deletions = j.value("deletions", std::size_t{0});
        r.insertions = j.value("insertions", std::size_t{0});
        if (j.contains("labels")) r.labels = j["labels"].get<std::vector<std::string>>();
        r.hypothesis_missing = j.value("hypothesis_missing", false);
        r.empty_reference = j.value("empty_reference", false);
        report.rows.push_back(std::move(r));
    }
    return report;
}

}  // namespace csalign
