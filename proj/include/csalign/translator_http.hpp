#pragma once

// Wire client for an external translation service. Kept out of
// translator.hpp so stub-only users do not pull in the HTTP stack.

#include <string>

#include <httplib.h>

#include "csalign/jsonl.hpp"
#include "csalign/translator.hpp"

namespace csalign {

struct HttpTranslatorConfig {
    std::string endpoint;   // e.g. "http://localhost:8080/translate"
    std::string api_token;  // sent as a bearer token when non-empty
    int max_attempts = 3;
    int backoff_initial_ms = 200;  // doubles per retry
    int timeout_sec = 30;

    // Reads CSALIGN_TRANSLATE_ENDPOINT and CSALIGN_API_TOKEN.
    static HttpTranslatorConfig from_env() {
        HttpTranslatorConfig cfg;
        if (const char* e = std::getenv("CSALIGN_TRANSLATE_ENDPOINT")) cfg.endpoint = e;
        if (const char* t = std::getenv("CSALIGN_API_TOKEN")) cfg.api_token = t;
        return cfg;
    }
};

class HttpTranslator : public TranslatorPort {
public:
    explicit HttpTranslator(HttpTranslatorConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty()) {
            throw TransportError("translator endpoint not configured "
                                 "(set CSALIGN_TRANSLATE_ENDPOINT)");
        }
        split_endpoint(cfg_.endpoint, base_, path_);
    }

    std::string translate(const std::string& text, Direction direction) override {
        const Json request{{"text", text},
                           {"source_lang", direction == Direction::EnToZh ? "en" : "zh"},
                           {"target_lang", direction == Direction::EnToZh ? "zh" : "en"}};
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
        throw TransportError("translate via " + cfg_.endpoint + " failed: " + last_error);
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

    HttpTranslatorConfig cfg_;
    std::string base_;
    std::string path_;
};

}  // namespace csalign
