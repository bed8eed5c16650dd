#pragma once

// Wire client for a remote transcription service, plus the cache-aware
// fetch used by the evaluation CLI. Kept out of evalharness.hpp so
// offline scoring does not pull in the HTTP stack.

#include <chrono>
#include <filesystem>
#include <optional>
#include <thread>

#include <httplib.h>

#include "csalign/evalharness.hpp"

namespace csalign {

struct TranscriberConfig {
    std::string endpoint;   // e.g. "http://localhost:8080/transcribe"
    std::string api_token;  // sent as a bearer token when non-empty
    int max_attempts = 3;
    int backoff_initial_ms = 200;  // doubles per retry
    int timeout_sec = 60;
    unsigned max_in_flight = 4;

    // Reads CSALIGN_TRANSCRIBE_ENDPOINT and CSALIGN_API_TOKEN.
    static TranscriberConfig from_env() {
        TranscriberConfig cfg;
        if (const char* e = std::getenv("CSALIGN_TRANSCRIBE_ENDPOINT")) cfg.endpoint = e;
        if (const char* t = std::getenv("CSALIGN_API_TOKEN")) cfg.api_token = t;
        return cfg;
    }
};

class HttpTranscriber {
public:
    explicit HttpTranscriber(TranscriberConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty()) {
            throw TransportError("transcription endpoint not configured "
                                 "(set CSALIGN_TRANSCRIBE_ENDPOINT)");
        }
        split_endpoint(cfg_.endpoint, base_, path_);
    }

    std::string transcribe(const std::string& audio_ref, const std::string& prompt) {
        const Json request{{"audio_ref", audio_ref}, {"prompt", prompt}};
        const std::string body = request.dump();

        std::string last_error;
        int delay_ms = cfg_.backoff_initial_ms;
        for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms *= 2;
            }
            httplib::Client client(base_);
            client.set_connection_timeout(cfg_.timeout_sec, 0);
            client.set_read_timeout(cfg_.timeout_sec, 0);
            httplib::Headers headers;
            if (!cfg_.api_token.empty()) {
                headers.emplace("Authorization", "Bearer " + cfg_.api_token);
            }
            auto res = client.Post(path_, headers, body, "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "http status " + std::to_string(res->status);
                if (res->status >= 400 && res->status < 500 && res->status != 429) {
                    break;  // client errors will not heal on retry
                }
                continue;
            }
            Json parsed = Json::parse(res->body, nullptr, false);
            if (parsed.is_discarded() || !parsed.contains("text")) {
                last_error = "malformed response body";
                continue;
            }
            return parsed["text"].get<std::string>();
        }
        throw TransportError("transcribe " + audio_ref + " via " + cfg_.endpoint +
                                 " failed: " + last_error,
                             audio_ref);
    }

private:
    static void split_endpoint(const std::string& endpoint, std::string& base,
                               std::string& path) {
        const auto scheme = endpoint.find("://");
        const auto slash =
            endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (slash == std::string::npos) {
            base = endpoint;
            path = "/";
        } else {
            base = endpoint.substr(0, slash);
            path = endpoint.substr(slash);
        }
    }

    TranscriberConfig cfg_;
    std::string base_;
    std::string path_;
};

// Posts every manifest row to the endpoint with the fixed eval prompt.
// Hypotheses are archived verbatim to cache_path (raw text; stripping and
// normalization belong to scoring). Per-row transport failures are recorded
// as missing hypotheses; the fetch aborts only when every row fails.
inline BenchmarkRun fetch_hypotheses(const TranscriberConfig& cfg, const Manifest& manifest,
                                     const std::string& eval_prompt,
                                     const std::string& cache_path,
                                     const std::string& benchmark_name = "",
                                     const std::string& model_name = "") {
    HttpTranscriber client(cfg);
    std::vector<std::optional<std::string>> results(manifest.size());

    const auto fetch_stripe = [&](unsigned stripe, unsigned stride) {
        for (std::size_t i = stripe; i < manifest.size(); i += stride) {
            try {
                results[i] = client.transcribe(manifest[i].audio_ref, eval_prompt);
            } catch (const TransportError&) {
                results[i] = std::nullopt;
            }
        }
    };
    const unsigned n =
        std::max<unsigned>(1, std::min<unsigned>(cfg.max_in_flight, manifest.size()));
    if (n == 1) {
        fetch_stripe(0, 1);
    } else {
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < n; ++w) workers.emplace_back(fetch_stripe, w, n);
        for (auto& t : workers) t.join();
    }

    BenchmarkRun run;
    run.benchmark_name = benchmark_name;
    run.model_name = model_name;
    run.provenance = cfg.endpoint;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (results[i]) run.hypotheses[manifest[i].id] = *results[i];
    }
    if (!manifest.empty() && run.hypotheses.empty()) {
        throw TransportError("all " + std::to_string(manifest.size()) +
                             " transcription requests failed: " + cfg.endpoint);
    }
    save_hypotheses(cache_path, run);
    return run;
}

// Fetch, falling back to a previously archived hypothesis file when the
// endpoint is unreachable and the cache covers the whole manifest.
inline BenchmarkRun fetch_or_load(const TranscriberConfig& cfg, const Manifest& manifest,
                                  const std::string& eval_prompt,
                                  const std::string& cache_path,
                                  const std::string& benchmark_name = "",
                                  const std::string& model_name = "") {
    try {
        return fetch_hypotheses(cfg, manifest, eval_prompt, cache_path, benchmark_name,
                                model_name);
    } catch (const TransportError&) {
        if (!std::filesystem::exists(cache_path)) throw;
        BenchmarkRun cached = load_hypotheses(cache_path);
        for (const auto& row : manifest) {
            if (!cached.hypotheses.count(row.id)) throw;
        }
        if (cached.benchmark_name.empty()) cached.benchmark_name = benchmark_name;
        if (cached.model_name.empty()) cached.model_name = model_name;
        return cached;
    }
}

}  // namespace csalign
