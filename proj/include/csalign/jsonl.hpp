#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace csalign {

using Json = nlohmann::ordered_json;

// Rows with {"type":"meta"} carry run metadata (seed, config hash, tool
// version) and are skipped by data readers.
inline bool is_meta_row(const Json& row) {
    return row.is_object() && row.contains("type") && row["type"] == "meta";
}

inline std::vector<Json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open jsonl file: " + path);
    std::vector<Json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Json row;
        try {
            row = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": invalid json: " + e.what());
        }
        if (is_meta_row(row)) continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json read_jsonl_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open jsonl file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json row = Json::parse(line, nullptr, false);
        if (row.is_discarded()) return Json();
        if (is_meta_row(row)) return row;
        return Json();
    }
    return Json();
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
    }

    void write(const Json& row) { out_ << row.dump() << "\n"; }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

inline Json make_meta_row(const Json& fields) {
    Json row{{"type", "meta"}};
    if (fields.is_object()) {
        for (auto it = fields.begin(); it != fields.end(); ++it) row[it.key()] = it.value();
    }
    return row;
}

inline void write_jsonl(const std::string& path, const std::vector<Json>& rows,
                        const Json& meta = Json()) {
    JsonlWriter w(path);
    if (!meta.is_null()) w.write(make_meta_row(meta));
    for (const auto& r : rows) w.write(r);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace csalign
