#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialectkit/errors.hpp"
#include "dialectkit/rng.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::corpus {

/// Unit-cost edit distance over Unicode scalar sequences.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::u32string ua = text::decode_utf8(a);
    const std::u32string ub = text::decode_utf8(b);
    const std::size_t n = ua.size(), m = ub.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

/// Yujian-Bo normalized edit distance: 2d / (|a| + |b| + d), in [0,1],
/// 0 for two empty strings. A true metric.
inline double normalized_levenshtein(std::string_view a, std::string_view b) {
    const auto d = levenshtein(a, b);
    if (d == 0) return 0.0;
    const double la = static_cast<double>(text::length(a));
    const double lb = static_cast<double>(text::length(b));
    return 2.0 * static_cast<double>(d) / (la + lb + static_cast<double>(d));
}

struct CurationConfig {
    std::size_t per_class_cap = 10000;
    double divergence_threshold = 0.1;
    double train_fraction = 0.9;
    std::size_t test_pair_count = 300;
    std::size_t min_test_chars = 30;
    std::uint64_t seed = 1337;
};

inline void validate(const CurationConfig& c) {
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ConfigError("curation: train_fraction must be in (0,1)");
    if (c.divergence_threshold < 0.0 || c.divergence_threshold > 1.0)
        throw ConfigError("curation: divergence_threshold must be in [0,1]");
    if (c.per_class_cap == 0 || c.test_pair_count == 0)
        throw ConfigError("curation: caps and counts must be positive");
}

struct SplitDataset {
    std::vector<CorpusRecord> train;
    std::vector<CorpusRecord> eval;
    std::vector<CorpusRecord> icl_pool;
    std::vector<CorpusRecord> test;
};

/// Filters divergence-poor dialect pairs, caps each class with a seeded
/// shuffle, splits train/eval, then draws the per-dialect translation test
/// set from the eval side so it can never overlap train or the ICL pool.
/// Output is independent of input record order for a fixed seed.
inline SplitDataset curate(const std::vector<CorpusRecord>& records, const CurationConfig& config) {
    validate(config);

    std::map<DialectLabel, std::vector<CorpusRecord>> by_class;
    for (const auto& r : records) {
        if (is_dialect_class(r.label) &&
            normalized_levenshtein(r.standard, r.dialect) < config.divergence_threshold)
            continue;
        by_class[r.label].push_back(r);
    }

    SplitDataset out;
    for (auto& [label, recs] : by_class) {
        if (recs.size() < config.per_class_cap)
            throw InsufficientData("class " + label + ": " + std::to_string(recs.size()) +
                                   " eligible records, cap " + std::to_string(config.per_class_cap));
        // id sort first so the seeded shuffle is input-order invariant
        std::sort(recs.begin(), recs.end(),
                  [](const CorpusRecord& a, const CorpusRecord& b) { return a.id < b.id; });
        Rng rng(mix_seed(config.seed, fnv1a64(label)));
        rng.shuffle(recs);
        recs.resize(config.per_class_cap);

        const auto n_train = static_cast<std::size_t>(
            static_cast<double>(config.per_class_cap) * config.train_fraction);
        for (std::size_t i = 0; i < recs.size(); ++i)
            (i < n_train ? out.train : out.eval).push_back(recs[i]);

        if (is_dialect_class(label)) {
            std::vector<CorpusRecord> eligible;
            for (std::size_t i = n_train; i < recs.size(); ++i)
                if (text::length(recs[i].dialect) >= config.min_test_chars) eligible.push_back(recs[i]);
            if (eligible.size() < config.test_pair_count)
                throw InsufficientData("class " + label + ": " + std::to_string(eligible.size()) +
                                       " test-eligible records, need " +
                                       std::to_string(config.test_pair_count));
            Rng test_rng(mix_seed(config.seed, fnv1a64(label), 0x7e57));
            test_rng.shuffle(eligible);
            eligible.resize(config.test_pair_count);
            out.test.insert(out.test.end(), eligible.begin(), eligible.end());
        }
    }

    for (const auto& r : out.train)
        if (is_dialect_class(r.label)) out.icl_pool.push_back(r);
    return out;
}

/// TF-IDF over whitespace tokens where each class's concatenated text is one
/// document. Score = tf * ln(N / df). Ties broken lexicographically.
inline std::vector<std::pair<std::string, double>> extract_salient_terms(
    const std::vector<CorpusRecord>& train, const DialectLabel& cls, std::size_t top_n) {
    std::map<DialectLabel, std::map<std::string, std::size_t>> tf;
    for (const auto& r : train)
        for (const auto& tok : text::tokenize(classified_text(r))) tf[r.label][tok]++;
    auto it = tf.find(cls);
    if (it == tf.end()) throw UnknownClass("extract_salient_terms: no training records for " + cls);

    const double n_docs = static_cast<double>(tf.size());
    std::map<std::string, std::size_t> df;
    for (const auto& [label, counts] : tf)
        for (const auto& [term, c] : counts) df[term]++;

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(it->second.size());
    for (const auto& [term, count] : it->second) {
        const double idf = std::log(n_docs / static_cast<double>(df[term]));
        scored.emplace_back(term, static_cast<double>(count) * idf);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > top_n) scored.resize(top_n);
    return scored;
}

inline constexpr std::size_t kSalientPoolSize = 20;

/// Builds the hard-negative Unknown class: a Standard carrier sentence with
/// salient terms from two distinct dialect classes spliced in at seeded token
/// positions.
inline std::vector<CorpusRecord> synthesize_unknown(const std::vector<CorpusRecord>& train,
                                                    std::size_t count, std::uint64_t seed) {
    std::vector<DialectLabel> dialect_classes;
    std::vector<const CorpusRecord*> carriers;
    {
        std::set<DialectLabel> seen;
        for (const auto& r : train) {
            if (is_dialect_class(r.label)) seen.insert(r.label);
            if (r.label == kStandardLabel) carriers.push_back(&r);
        }
        dialect_classes.assign(seen.begin(), seen.end());
    }
    if (dialect_classes.size() < 2)
        throw InsufficientData("synthesize_unknown: need >= 2 dialect classes, have " +
                               std::to_string(dialect_classes.size()));
    if (carriers.empty()) throw InsufficientData("synthesize_unknown: no Standard carrier sentences");

    std::map<DialectLabel, std::vector<std::string>> salient;
    for (const auto& cls : dialect_classes) {
        auto ranked = extract_salient_terms(train, cls, kSalientPoolSize);
        auto& terms = salient[cls];
        for (auto& [term, score] : ranked) terms.push_back(std::move(term));
        if (terms.empty())
            throw InsufficientData("synthesize_unknown: class " + cls + " has no terms");
    }

    std::vector<CorpusRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(mix_seed(seed, 0x9a7d, i));
        const CorpusRecord& carrier = *carriers[rng.below(carriers.size())];
        const std::size_t a = rng.below(dialect_classes.size());
        std::size_t b = rng.below(dialect_classes.size() - 1);
        if (b >= a) ++b;
        auto tokens = text::tokenize(carrier.standard);
        for (const auto& cls : {dialect_classes[a], dialect_classes[b]}) {
            const auto& terms = salient[cls];
            const std::string& term = terms[rng.below(terms.size())];
            const std::size_t pos = rng.below(tokens.size() + 1);
            tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), term);
        }
        CorpusRecord rec;
        rec.id = "unk-" + std::to_string(i);
        rec.standard = carrier.standard;
        rec.dialect = text::join(tokens);
        rec.label = kUnknownLabel;
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace dialectkit::corpus
