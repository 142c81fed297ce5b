#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialectkit/errors.hpp"
#include "dialectkit/serialize.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::retrieval {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

inline void validate(const Bm25Params& p) {
    if (p.k1 < 0.0 || p.b < 0.0 || p.b > 1.0)
        throw ConfigError("bm25: need k1 >= 0 and b in [0,1]");
}

struct ScoredDoc {
    std::size_t doc = 0; // position in the indexed pool
    double score = 0.0;
};

/// BM25 over whitespace tokens of the pool's standard sentences, with the
/// non-negative idf variant ln(1 + (N - df + 0.5) / (df + 0.5)). Scores
/// accumulate per document in first-occurrence query-term order; repeated
/// query terms count once. Ties break on ascending record id.
class Bm25Index {
  public:
    Bm25Index() = default;

    Bm25Index(std::vector<CorpusRecord> pool, Bm25Params params)
        : params_(params), pool_(std::move(pool)) {
        validate(params_);
        if (pool_.empty()) throw EmptyPool("bm25: empty document pool");
        doc_len_.resize(pool_.size());
        double total_len = 0.0;
        for (std::size_t d = 0; d < pool_.size(); ++d) {
            const auto tokens = text::tokenize(pool_[d].standard);
            doc_len_[d] = static_cast<double>(tokens.size());
            total_len += doc_len_[d];
            std::map<std::string, std::uint32_t> tf;
            for (const auto& t : tokens) tf[t]++;
            for (const auto& [term, count] : tf)
                postings_[term].push_back({static_cast<std::uint32_t>(d), count});
        }
        avg_len_ = total_len / static_cast<double>(pool_.size());
    }

    const std::vector<CorpusRecord>& pool() const { return pool_; }
    const Bm25Params& params() const { return params_; }

    double idf(const std::string& term) const {
        const auto it = postings_.find(term);
        const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
        const double n = static_cast<double>(pool_.size());
        return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    }

    std::vector<ScoredDoc> top_k(std::string_view query, std::size_t k) const {
        std::vector<std::string> terms;
        {
            std::set<std::string> seen;
            for (auto& t : text::tokenize(query))
                if (seen.insert(t).second) terms.push_back(std::move(t));
        }
        std::vector<double> score(pool_.size(), 0.0);
        std::vector<bool> hit(pool_.size(), false);
        for (const auto& term : terms) {
            const auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            const double w = idf(term);
            for (const auto& [d, tf] : it->second) {
                const double tfd = static_cast<double>(tf);
                const double denom =
                    tfd + params_.k1 * (1.0 - params_.b + params_.b * doc_len_[d] / avg_len_);
                score[d] += w * tfd * (params_.k1 + 1.0) / denom;
                hit[d] = true;
            }
        }
        std::vector<ScoredDoc> out;
        for (std::size_t d = 0; d < pool_.size(); ++d)
            if (hit[d]) out.push_back({d, score[d]});
        std::sort(out.begin(), out.end(), [this](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return pool_[a.doc].id < pool_[b.doc].id;
        });
        if (out.size() > k) out.resize(k);
        return out;
    }

    void save(std::ostream& os) const {
        io::put_magic(os, "DKIX");
        io::put_f64(os, params_.k1);
        io::put_f64(os, params_.b);
        io::put_u32(os, static_cast<std::uint32_t>(pool_.size()));
        for (const auto& r : pool_) {
            io::put_str(os, r.id);
            io::put_str(os, r.standard);
            io::put_str(os, r.dialect);
            io::put_str(os, r.label);
        }
    }

    /// Postings rebuild deterministically from the pool, so only the pool
    /// and parameters are persisted.
    static Bm25Index load(std::istream& is) {
        io::expect_magic(is, "DKIX", "bm25 index");
        Bm25Params params;
        params.k1 = io::get_f64(is);
        params.b = io::get_f64(is);
        const auto n = io::get_u32(is);
        std::vector<CorpusRecord> pool;
        pool.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            CorpusRecord r;
            r.id = io::get_str(is);
            r.standard = io::get_str(is);
            r.dialect = io::get_str(is);
            r.label = io::get_str(is);
            pool.push_back(std::move(r));
        }
        return Bm25Index(std::move(pool), params);
    }

  private:
    Bm25Params params_;
    std::vector<CorpusRecord> pool_;
    std::vector<double> doc_len_;
    double avg_len_ = 0.0;
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
};

} // namespace dialectkit::retrieval
