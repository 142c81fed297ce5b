#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialectkit/errors.hpp"

namespace dialectkit {

/// Class names are open-ended strings; "Standard" and "Unknown" are the two
/// reserved non-dialect classes.
using DialectLabel = std::string;

inline const DialectLabel kStandardLabel = "Standard";
inline const DialectLabel kUnknownLabel = "Unknown";

inline bool is_dialect_class(const DialectLabel& label) {
    return label != kStandardLabel && label != kUnknownLabel;
}

/// One standard/dialect sentence pair. The unit of curation, training and
/// testing.
struct CorpusRecord {
    std::string id;
    std::string standard;
    std::string dialect;
    DialectLabel label;
};

/// The sentence a classifier sees for a record.
inline const std::string& classified_text(const CorpusRecord& r) {
    return r.label == kStandardLabel ? r.standard : r.dialect;
}

inline void to_json(nlohmann::json& j, const CorpusRecord& r) {
    j = nlohmann::json{{"id", r.id}, {"standard", r.standard}, {"dialect", r.dialect}, {"label", r.label}};
}

inline void from_json(const nlohmann::json& j, CorpusRecord& r) {
    j.at("id").get_to(r.id);
    j.at("standard").get_to(r.standard);
    j.at("dialect").get_to(r.dialect);
    j.at("label").get_to(r.label);
}

template <typename T = CorpusRecord>
std::vector<T> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
void write_jsonl(const std::string& path, const std::vector<T>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

} // namespace dialectkit
