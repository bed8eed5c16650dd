#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "csalign/jsonl.hpp"
#include "csalign/mer.hpp"
#include "csalign/pairgen.hpp"
#include "csalign/rng.hpp"

namespace csalign {

// ---------------------------------------------------------------------------
// Policies

struct ToyPolicy {
    std::vector<std::string> contexts;
    std::vector<std::string> responses;
    std::vector<std::vector<double>> theta;  // logits, [context][response]

    static ToyPolicy zeros(std::vector<std::string> contexts,
                           std::vector<std::string> responses) {
        ToyPolicy p;
        p.contexts = std::move(contexts);
        p.responses = std::move(responses);
        p.theta.assign(p.contexts.size(),
                       std::vector<double>(p.responses.size(), 0.0));
        return p;
    }

    size_t n_contexts() const { return contexts.size(); }
    size_t n_responses() const { return responses.size(); }

    double logprob(size_t x, size_t y) const {
        return theta[x][y] - logsumexp(theta[x]);
    }

    std::vector<double> distribution(size_t x) const {
        const double lse = logsumexp(theta[x]);
        std::vector<double> p(theta[x].size());
        for (size_t y = 0; y < p.size(); ++y) p[y] = std::exp(theta[x][y] - lse);
        return p;
    }

    static double logsumexp(const std::vector<double>& v) {
        const double m = *std::max_element(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += std::exp(x - m);
        return m + std::log(s);
    }
};

class ReferencePolicy {
public:
    explicit ReferencePolicy(const ToyPolicy& p) : theta_(p.theta) {}

    double logprob(size_t x, size_t y) const {
        return theta_[x][y] - ToyPolicy::logsumexp(theta_[x]);
    }

private:
    const std::vector<std::vector<double>> theta_;
};

// ---------------------------------------------------------------------------
// Batches and configs

struct PreferenceItem {
    size_t x = 0;    // context
    size_t y_c = 0;  // chosen response
    size_t y_r = 0;  // rejected response
};

using PreferenceBatch = std::vector<PreferenceItem>;

inline void validate_batch(const ToyPolicy& policy, const PreferenceBatch& batch) {
    if (batch.empty()) throw std::invalid_argument("preference batch is empty");
    for (const auto& item : batch) {
        if (item.x >= policy.n_contexts() || item.y_c >= policy.n_responses() ||
            item.y_r >= policy.n_responses()) {
            throw std::invalid_argument("preference item indexes out of range");
        }
        if (item.y_c == item.y_r) {
            throw std::invalid_argument("chosen and rejected response must differ");
        }
    }
}

struct DpoConfig {
    double beta = 0.3;
    double learning_rate = 0.1;
    int steps = 500;
    uint64_t seed = 0;

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
        if (!(learning_rate > 0.0)) {
            throw std::invalid_argument("learning rate must be positive");
        }
        if (steps < 0) throw std::invalid_argument("steps must be non-negative");
    }
};

// ---------------------------------------------------------------------------
// Loss and gradient

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

using Gradient = std::vector<std::vector<double>>;

namespace detail {

struct BatchEval {
    double loss = 0.0;
    double mean_margin = 0.0;  // mean of beta * delta
    Gradient grad;
};

inline double item_delta(const ToyPolicy& policy, const ReferencePolicy& ref,
                         const PreferenceItem& it) {
    return (policy.logprob(it.x, it.y_c) - ref.logprob(it.x, it.y_c)) -
           (policy.logprob(it.x, it.y_r) - ref.logprob(it.x, it.y_r));
}

// One pass over the batch in the given order, producing loss, margin, and
// the analytic gradient: per item −β·σ(−βΔ)·(∇logπ(y_c) − ∇logπ(y_r)),
// with ∇_θ logπ(y|x) = onehot(y) − softmax(θ[x,·]) on row x.
inline BatchEval evaluate_batch(const ToyPolicy& policy, const ReferencePolicy& ref,
                                const PreferenceBatch& batch,
                                const std::vector<size_t>& order, double beta) {
    BatchEval ev;
    ev.grad.assign(policy.n_contexts(),
                   std::vector<double>(policy.n_responses(), 0.0));
    for (size_t k : order) {
        const PreferenceItem& it = batch[k];
        const double delta = item_delta(policy, ref, it);
        ev.loss += -log_sigmoid(beta * delta);
        ev.mean_margin += beta * delta;

        const double coef = -beta * sigmoid(-beta * delta);
        const std::vector<double> p = policy.distribution(it.x);
        for (size_t y = 0; y < p.size(); ++y) {
            const double d_chosen = (y == it.y_c ? 1.0 : 0.0) - p[y];
            const double d_rejected = (y == it.y_r ? 1.0 : 0.0) - p[y];
            ev.grad[it.x][y] += coef * (d_chosen - d_rejected);
        }
    }
    const double n = static_cast<double>(batch.size());
    ev.loss /= n;
    ev.mean_margin /= n;
    for (auto& row : ev.grad) {
        for (double& g : row) g /= n;
    }
    return ev;
}

inline std::vector<size_t> identity_order(size_t n) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    return order;
}

}  // namespace detail

inline double dpo_loss(const ToyPolicy& policy, const ReferencePolicy& ref,
                       const PreferenceBatch& batch, double beta) {
    validate_batch(policy, batch);
    double total = 0.0;
    for (const auto& it : batch) {
        total += -log_sigmoid(beta * detail::item_delta(policy, ref, it));
    }
    return total / static_cast<double>(batch.size());
}

inline Gradient dpo_grad(const ToyPolicy& policy, const ReferencePolicy& ref,
                         const PreferenceBatch& batch, double beta) {
    validate_batch(policy, batch);
    return detail::evaluate_batch(policy, ref, batch,
                                  detail::identity_order(batch.size()), beta)
        .grad;
}

// ---------------------------------------------------------------------------
// Training

struct TraceRow {
    int step = 0;
    double loss = 0.0;
    double mean_margin = 0.0;
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<TraceRow> trace;  // steps + 1 rows; last row is the final state
};

// Plain full-batch gradient descent. The per-step summation order is
// seed-shuffled; beta = 0 is tolerated here (diagnostic use) but rejected
// by DpoConfig::validate.
inline TrainResult train(const ToyPolicy& start, const ReferencePolicy& ref,
                         const PreferenceBatch& batch, const DpoConfig& config) {
    if (config.beta < 0.0) throw std::invalid_argument("beta must be non-negative");
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (config.steps < 0) throw std::invalid_argument("steps must be non-negative");
    validate_batch(start, batch);

    TrainResult out;
    out.policy = start;
    Rng rng(config.seed);
    std::vector<size_t> order = detail::identity_order(batch.size());
    for (int step = 0; step < config.steps; ++step) {
        rng.shuffle(order.begin(), order.end());
        const auto ev =
            detail::evaluate_batch(out.policy, ref, batch, order, config.beta);
        out.trace.push_back({step, ev.loss, ev.mean_margin});
        for (size_t x = 0; x < out.policy.n_contexts(); ++x) {
            for (size_t y = 0; y < out.policy.n_responses(); ++y) {
                out.policy.theta[x][y] -= config.learning_rate * ev.grad[x][y];
            }
        }
    }
    const auto final_ev = detail::evaluate_batch(
        out.policy, ref, batch, detail::identity_order(batch.size()), config.beta);
    out.trace.push_back({config.steps, final_ev.loss, final_ev.mean_margin});
    return out;
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace output: " + path);
    out << "step,loss,mean_margin\n";
    char buf[128];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", row.step, row.loss,
                      row.mean_margin);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Behavior-alignment experiment

// The toy transcriber: for each synthetic mixed utterance the policy picks
// one of five behaviors. Initial logits put most of the mass on the two
// translation behaviors, mimicking the failure profile of unaligned models.
struct BehaviorSetup {
    std::vector<std::string> contexts;             // utterance texts
    std::vector<std::string> response_names;       // behavior labels
    std::vector<std::vector<std::string>> outputs; // [context][response] texts
    ToyPolicy policy;
    PreferenceBatch batch;  // per context: 8 global-rejected + 2 partial-rejected
};

inline const std::vector<std::string>& behavior_response_names() {
    static const std::vector<std::string> names = {
        "verbatim", "global_translation", "partial_translation", "omission",
        "hallucination"};
    return names;
}

inline constexpr double kBehaviorInitLogits[5] = {0.0, 1.0, 0.5, -2.0, -2.0};

inline BehaviorSetup make_biased_transcriber(size_t n_contexts = 3) {
    static const std::vector<std::string> bank = {
        "我们 today 去 library 自习。",
        "这个 project 的 deadline 很赶。",
        "老师 said 这次 exam 会很难。",
        "他 always 迟到 morning 的课。",
        "那家 shop 的 coffee 真不错。",
        "我 weekend 要去 airport 接人。",
    };
    if (n_contexts == 0 || n_contexts > bank.size()) {
        throw std::invalid_argument("n_contexts out of range");
    }

    BehaviorSetup setup;
    setup.response_names = behavior_response_names();
    DictionaryTranslator stub;
    for (size_t i = 0; i < n_contexts; ++i) {
        const std::string& utterance = bank[i];
        setup.contexts.push_back(utterance);

        const auto tokens = tokenize_raw(utterance);
        size_t first_en = tokens.size();
        std::string mandarin_only;
        for (size_t t = 0; t < tokens.size(); ++t) {
            if (tokens[t].lang == LanguageTag::English && first_en == tokens.size()) {
                first_en = t;
            }
            if (tokens[t].lang == LanguageTag::Mandarin) mandarin_only += tokens[t].surface;
        }

        const std::string global = make_rejected(
            utterance, {StrategyKind::GlobalTranslation, Direction::EnToZh, {}}, stub);
        const std::string partial = make_rejected(
            utterance,
            {StrategyKind::PartialTranslation, Direction::EnToZh,
             {TokenSpan{first_en, first_en + 1}}},
            stub);
        std::string hallucinated;
        const std::string seed_gram = mandarin_only.substr(0, 6);  // two CJK chars
        for (int r = 0; r < 12; ++r) hallucinated += seed_gram;

        setup.outputs.push_back({utterance, global, partial, mandarin_only, hallucinated});
    }

    setup.policy = ToyPolicy::zeros(setup.contexts, setup.response_names);
    for (size_t x = 0; x < n_contexts; ++x) {
        for (size_t y = 0; y < 5; ++y) setup.policy.theta[x][y] = kBehaviorInitLogits[y];
        for (int g = 0; g < 8; ++g) setup.batch.push_back({x, 0, 1});
        for (int p = 0; p < 2; ++p) setup.batch.push_back({x, 0, 2});
    }
    return setup;
}

struct BehaviorReport {
    DpoConfig config;
    std::vector<std::string> contexts;
    std::vector<std::string> response_names;
    std::vector<std::vector<double>> pre_distribution;
    std::vector<std::vector<double>> post_distribution;
    double min_p_verbatim_pre = 0.0;
    double min_p_verbatim_post = 0.0;
    double translation_mass_pre = 0.0;  // min over contexts
    double mer_pre = 0.0;
    double mer_post = 0.0;
    std::vector<TraceRow> trace;
};

namespace detail {

inline size_t sample_categorical(const std::vector<double>& probs, Rng& rng) {
    const double r = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (r < acc) return i;
    }
    return probs.size() - 1;
}

inline double sampled_mer(const BehaviorSetup& setup, const ToyPolicy& policy,
                          uint64_t seed, int samples_per_context) {
    Rng rng(seed);
    std::vector<ScoredPair> scored;
    for (size_t x = 0; x < setup.contexts.size(); ++x) {
        const std::vector<double> probs = policy.distribution(x);
        for (int k = 0; k < samples_per_context; ++k) {
            const size_t y = sample_categorical(probs, rng);
            scored.push_back({setup.contexts[x] + "#" + std::to_string(k),
                              setup.outputs[x][0], setup.outputs[x][y]});
        }
    }
    return corpus_mer(scored).value;
}

}  // namespace detail

// Trains the biased toy transcriber on verbatim-over-translation preference
// pairs and reports the behavior shift plus sampled-output MER.
inline BehaviorReport behavior_experiment(const DpoConfig& config, size_t n_contexts = 3,
                                          int samples_per_context = 200) {
    BehaviorSetup setup = make_biased_transcriber(n_contexts);
    const ReferencePolicy ref(setup.policy);

    BehaviorReport report;
    report.config = config;
    report.contexts = setup.contexts;
    report.response_names = setup.response_names;

    report.min_p_verbatim_pre = 1.0;
    report.translation_mass_pre = 1.0;
    for (size_t x = 0; x < n_contexts; ++x) {
        const auto probs = setup.policy.distribution(x);
        report.pre_distribution.push_back(probs);
        report.min_p_verbatim_pre = std::min(report.min_p_verbatim_pre, probs[0]);
        report.translation_mass_pre =
            std::min(report.translation_mass_pre, probs[1] + probs[2]);
    }
    report.mer_pre = detail::sampled_mer(setup, setup.policy,
                                         derive_seed(config.seed, "pre-sampling"),
                                         samples_per_context);

    TrainResult trained = train(setup.policy, ref, setup.batch, config);
    report.trace = std::move(trained.trace);

    report.min_p_verbatim_post = 1.0;
    for (size_t x = 0; x < n_contexts; ++x) {
        const auto probs = trained.policy.distribution(x);
        report.post_distribution.push_back(probs);
        report.min_p_verbatim_post = std::min(report.min_p_verbatim_post, probs[0]);
    }
    report.mer_post = detail::sampled_mer(setup, trained.policy,
                                          derive_seed(config.seed, "post-sampling"),
                                          samples_per_context);
    return report;
}

// Per-beta settings used by the experiment sweep. The beta values are the
// three reference-config values; learning rate and steps are toy-scale
// settings sized so every beta aligns within 1,000 steps.
inline std::vector<DpoConfig> behavior_reference_configs(uint64_t seed = 0) {
    return {
        {0.5, 0.5, 1000, seed},
        {0.05, 2.0, 800, seed},
        {0.3, 0.5, 800, seed},
    };
}

inline Json to_json(const DpoConfig& c) {
    return Json{{"beta", c.beta},
                {"learning_rate", c.learning_rate},
                {"steps", c.steps},
                {"seed", c.seed}};
}

inline Json to_json(const BehaviorReport& r) {
    Json trace = Json::array();
    for (const auto& row : r.trace) {
        trace.push_back(Json{{"step", row.step},
                             {"loss", row.loss},
                             {"mean_margin", row.mean_margin}});
    }
    return Json{{"config", to_json(r.config)},
                {"contexts", r.contexts},
                {"responses", r.response_names},
                {"pre_distribution", r.pre_distribution},
                {"post_distribution", r.post_distribution},
                {"min_p_verbatim_pre", r.min_p_verbatim_pre},
                {"min_p_verbatim_post", r.min_p_verbatim_post},
                {"translation_mass_pre", r.translation_mass_pre},
                {"mer_pre", r.mer_pre},
                {"mer_post", r.mer_post},
                {"final_loss", r.trace.empty() ? 0.0 : r.trace.back().loss},
                {"trace_tail", trace.empty() ? Json() : trace.back()}};
}

}  // namespace csalign
