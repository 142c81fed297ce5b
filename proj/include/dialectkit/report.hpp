#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dialectkit/engine.hpp"
#include "dialectkit/errors.hpp"
#include "dialectkit/metrics.hpp"

namespace dialectkit::report {

inline std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

using Row = std::vector<std::string>;

/// Markdown grid with padded cells so the raw text is readable too.
inline std::string markdown_table(const Row& headers, const std::vector<Row>& rows) {
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < headers.size() && c < r.size(); ++c)
            width[c] = std::max(width[c], r[c].size());
    const auto emit = [&](const Row& r) {
        std::string line = "|";
        for (std::size_t c = 0; c < headers.size(); ++c) {
            const std::string& v = c < r.size() ? r[c] : headers[c];
            line += " " + v + std::string(width[c] - v.size(), ' ') + " |";
        }
        return line + "\n";
    };
    std::string out = emit(headers);
    out += "|";
    for (std::size_t c = 0; c < headers.size(); ++c) out += std::string(width[c] + 2, '-') + "|";
    out += "\n";
    for (const auto& r : rows) out += emit(r);
    return out;
}

inline std::string csv_escape(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (const char ch : v) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string csv_table(const Row& headers, const std::vector<Row>& rows) {
    std::string out;
    const auto emit = [&](const Row& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c > 0) out += ',';
            out += csv_escape(r[c]);
        }
        out += '\n';
    };
    emit(headers);
    for (const auto& r : rows) emit(r);
    return out;
}

inline Row metric_row(const metrics::MetricReport& r) {
    return {r.method,        r.dialect,        fmt(r.chrf_pp, 2),      fmt(r.bleu, 2),
            fmt(r.dfs_mean, 4), fmt(r.tdr, 4), fmt(r.mean_attempts, 2)};
}

inline const Row kMetricHeaders = {"Method", "Dialect", "chrF++", "BLEU",
                                   "DFS",    "TDR",     "Mean attempts"};

/// Full results grid, one row per (method, dialect) in the given order.
inline std::string method_metric_table(const std::vector<metrics::MetricReport>& reports) {
    std::vector<Row> rows;
    for (const auto& r : reports) rows.push_back(metric_row(r));
    return markdown_table(kMetricHeaders, rows);
}

inline std::string method_metric_csv(const std::vector<metrics::MetricReport>& reports) {
    std::vector<Row> rows;
    for (const auto& r : reports) rows.push_back(metric_row(r));
    return csv_table(kMetricHeaders, rows);
}

/// TDR pivot: methods down, dialects across, plus a cross-dialect mean.
inline std::string tdr_matrix(const std::vector<metrics::MetricReport>& reports) {
    std::vector<std::string> methods, dialects;
    std::map<std::string, std::map<std::string, double>> cell;
    for (const auto& r : reports) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
        if (std::find(dialects.begin(), dialects.end(), r.dialect) == dialects.end())
            dialects.push_back(r.dialect);
        cell[r.method][r.dialect] = r.tdr;
    }
    Row headers{"Method"};
    for (const auto& d : dialects) headers.push_back(d);
    headers.push_back("Avg");
    std::vector<Row> rows;
    for (const auto& m : methods) {
        Row row{m};
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& d : dialects) {
            const auto it = cell[m].find(d);
            if (it == cell[m].end()) {
                row.push_back("-");
            } else {
                row.push_back(fmt(it->second, 4));
                sum += it->second;
                ++n;
            }
        }
        row.push_back(n == 0 ? "-" : fmt(sum / static_cast<double>(n), 4));
        rows.push_back(std::move(row));
    }
    return markdown_table(headers, rows);
}

/// Reproducibility footer: every knob that shaped the run, no timestamps.
inline std::string metadata_footer(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out = "### Run metadata\n\n";
    for (const auto& [k, v] : entries) out += "- " + k + ": " + v + "\n";
    return out;
}

/// Re-derives a method's aggregate row from its trace file content alone.
inline metrics::MetricReport report_from_traces(const std::vector<engine::RefineTrace>& traces) {
    if (traces.empty()) throw DataError("report_from_traces: no traces");
    return engine::aggregate_traces(traces, traces.front().target);
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << content;
}

} // namespace dialectkit::report
