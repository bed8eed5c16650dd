#pragma once

#include <string>
#include <vector>

#include "csalign/jsonl.hpp"
#include "csalign/text.hpp"

namespace csalign {

enum class UtteranceLang { EN, CN, MIX };

inline const char* to_string(UtteranceLang l) {
    switch (l) {
        case UtteranceLang::EN: return "EN";
        case UtteranceLang::CN: return "CN";
        case UtteranceLang::MIX: return "MIX";
    }
    return "EN";
}

inline UtteranceLang utterance_lang_from_string(const std::string& s) {
    if (s == "EN") return UtteranceLang::EN;
    if (s == "CN") return UtteranceLang::CN;
    if (s == "MIX") return UtteranceLang::MIX;
    throw std::runtime_error("unknown lang_tag: " + s);
}

struct Utterance {
    std::string id;
    std::string conversation_id;
    std::string speaker_id;
    UtteranceLang lang_tag = UtteranceLang::EN;
    std::string text;
    std::string audio_path;
    double duration = 0.0;  // seconds
    int sample_rate = 16000;
};

enum class ManifestSource { NaturalMix, ConcatIntraCorpus, ConcatCrossCorpus };

inline const char* to_string(ManifestSource s) {
    switch (s) {
        case ManifestSource::NaturalMix: return "natural_mix";
        case ManifestSource::ConcatIntraCorpus: return "concat_intra_corpus";
        case ManifestSource::ConcatCrossCorpus: return "concat_cross_corpus";
    }
    return "natural_mix";
}

inline ManifestSource manifest_source_from_string(const std::string& s) {
    if (s == "natural_mix") return ManifestSource::NaturalMix;
    if (s == "concat_intra_corpus") return ManifestSource::ConcatIntraCorpus;
    if (s == "concat_cross_corpus") return ManifestSource::ConcatCrossCorpus;
    throw std::runtime_error("unknown manifest source: " + s);
}

struct ManifestRow {
    std::string id;
    std::string audio_ref;
    std::string transcript;
    ManifestSource source = ManifestSource::NaturalMix;
    std::vector<std::string> component_ids;
    double duration = 0.0;
};

using Manifest = std::vector<ManifestRow>;

inline Json to_json(const Utterance& u) {
    return Json{{"id", u.id},
                {"conversation_id", u.conversation_id},
                {"speaker_id", u.speaker_id},
                {"lang_tag", to_string(u.lang_tag)},
                {"text", u.text},
                {"audio_path", u.audio_path},
                {"duration", u.duration},
                {"sample_rate", u.sample_rate}};
}

inline Utterance utterance_from_json(const Json& j) {
    Utterance u;
    u.id = j.at("id").get<std::string>();
    u.conversation_id = j.value("conversation_id", std::string());
    u.speaker_id = j.value("speaker_id", std::string());
    u.lang_tag = utterance_lang_from_string(j.at("lang_tag").get<std::string>());
    u.text = j.at("text").get<std::string>();
    u.audio_path = j.value("audio_path", std::string());
    u.duration = j.value("duration", 0.0);
    u.sample_rate = j.value("sample_rate", 16000);
    return u;
}

inline Json to_json(const ManifestRow& r) {
    return Json{{"id", r.id},
                {"audio_ref", r.audio_ref},
                {"transcript", r.transcript},
                {"source", to_string(r.source)},
                {"component_ids", r.component_ids},
                {"duration", r.duration}};
}

inline ManifestRow manifest_row_from_json(const Json& j) {
    ManifestRow r;
    r.id = j.at("id").get<std::string>();
    r.audio_ref = j.value("audio_ref", std::string());
    r.transcript = j.at("transcript").get<std::string>();
    r.source = manifest_source_from_string(j.value("source", std::string("natural_mix")));
    if (j.contains("component_ids")) {
        r.component_ids = j["component_ids"].get<std::vector<std::string>>();
    }
    r.duration = j.value("duration", 0.0);
    return r;
}

inline std::vector<Utterance> load_utterances(const std::string& path) {
    std::vector<Utterance> out;
    for (const auto& row : read_jsonl(path)) out.push_back(utterance_from_json(row));
    return out;
}

inline Manifest load_manifest(const std::string& path) {
    Manifest out;
    for (const auto& row : read_jsonl(path)) out.push_back(manifest_row_from_json(row));
    return out;
}

inline void save_manifest(const std::string& path, const Manifest& rows,
                          const Json& meta = Json()) {
    std::vector<Json> js;
    js.reserve(rows.size());
    for (const auto& r : rows) js.push_back(to_json(r));
    write_jsonl(path, js, meta);
}

}  // namespace csalign
