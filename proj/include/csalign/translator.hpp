#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "csalign/errors.hpp"
#include "csalign/rng.hpp"
#include "csalign/text.hpp"

namespace csalign {

enum class Direction { EnToZh, ZhToEn };

inline const char* to_string(Direction d) {
    return d == Direction::EnToZh ? "en_to_zh" : "zh_to_en";
}

inline Direction direction_from_string(const std::string& s) {
    if (s == "en_to_zh") return Direction::EnToZh;
    if (s == "zh_to_en") return Direction::ZhToEn;
    throw std::runtime_error("unknown direction: " + s);
}

// Port for the rejected-sample generator. Implementations translate `text`
// (a slice of a transcript, punctuation included) into the other language.
class TranslatorPort {
public:
    virtual ~TranslatorPort() = default;
    virtual std::string translate(const std::string& text, Direction direction) = 0;
};

// Deterministic stub translator. Known phrases resolve through a dictionary
// keyed on normalized text; anything else maps token-by-token onto fixed
// banks so output language is always valid and runs are reproducible.
class DictionaryTranslator : public TranslatorPort {
public:
    DictionaryTranslator() {
        add("what grade are you", "你几年级？");
        add("boring", "无聊");
    }

    void add(const std::string& phrase, const std::string& translation) {
        dict_[normalize(phrase)] = translation;
    }

    std::string translate(const std::string& text, Direction direction) override {
        const std::string key = normalize(text);
        auto it = dict_.find(key);
        if (it != dict_.end()) return it->second;
        return direction == Direction::EnToZh ? fallback_zh(key) : fallback_en(key);
    }

private:
    static std::string fallback_zh(const std::string& normalized) {
        static const std::vector<std::string> bank = {
            "的", "一", "是", "了", "我", "不", "在", "有", "这", "他",
            "们", "中", "文", "说", "好", "天", "时", "去", "来", "学",
            "想", "知", "道", "很", "多", "大", "小", "见", "面", "话"};
        std::string out;
        for (const auto& tok : tokenize_mixed(normalized).tokens) {
            if (tok.lang != LanguageTag::English) continue;
            uint64_t h = fnv1a64(tok.surface);
            out += bank[h % bank.size()];
            if (tok.surface.size() > 3) out += bank[splitmix64(h) % bank.size()];
        }
        if (out.empty()) out = bank[fnv1a64(normalized) % bank.size()];
        return out;
    }

    static std::string fallback_en(const std::string& normalized) {
        static const std::vector<std::string> bank = {
            "shan", "wei", "ming", "tian", "hao", "ren",  "xue", "sheng",
            "dao",  "li",  "mei",  "guo",  "yan", "jiu",  "wen", "lao",
            "shi",  "kan", "shu",  "xin",  "gao", "xing", "lu",  "kou"};
        std::string out;
        for (const auto& tok : tokenize_mixed(normalized).tokens) {
            if (tok.lang != LanguageTag::Mandarin) continue;
            if (!out.empty()) out += ' ';
            out += bank[fnv1a64(tok.surface) % bank.size()];
        }
        if (out.empty()) out = bank[fnv1a64(normalized) % bank.size()];
        return out;
    }

    std::map<std::string, std::string> dict_;
};

// Adapter for ad-hoc translators in tests.
class FnTranslator : public TranslatorPort {
public:
    using Fn = std::function<std::string(const std::string&, Direction)>;
    explicit FnTranslator(Fn fn) : fn_(std::move(fn)) {}
    std::string translate(const std::string& text, Direction direction) override {
        return fn_(text, direction);
    }

private:
    Fn fn_;
};

}  // namespace csalign
