#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dialectkit/errors.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::metrics {

using Vec = std::vector<double>;

inline double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw LengthMismatch("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine: zero-norm vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

struct DfsInput {
    Vec e_h;
    Vec e_r;
    Vec e_s;
    double epsilon = 1e-6;
};

/// Dialect fidelity score: ln((1 + cos(e_h,e_r) + eps) / (1 + cos(e_h,e_s) + eps)).
/// Positive iff the hypothesis is closer to the dialect reference than to the
/// standard source. Computed as a difference of logs so that swapping r and s
/// negates the result exactly.
inline double dfs(const DfsInput& in) {
    if (in.epsilon <= 0.0) throw ConfigError("dfs: epsilon must be positive");
    const double num = 1.0 + cosine(in.e_h, in.e_r) + in.epsilon;
    const double den = 1.0 + cosine(in.e_h, in.e_s) + in.epsilon;
    return std::log(num) - std::log(den);
}

inline double dfs(const Vec& e_h, const Vec& e_r, const Vec& e_s, double epsilon = 1e-6) {
    return dfs(DfsInput{e_h, e_r, e_s, epsilon});
}

/// Target dialect ratio: fraction of predictions equal to the target label.
inline double tdr(const std::vector<DialectLabel>& predictions, const DialectLabel& target) {
    if (predictions.empty()) throw EmptyHypothesisSet("tdr: no predictions");
    std::size_t hits = 0;
    for (const auto& p : predictions)
        if (p == target) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

enum class Tokenizer { Whitespace, Codepoints };

struct BleuConfig {
    int max_order = 4;
    Tokenizer tokenizer = Tokenizer::Whitespace;
    bool floor_smoothing = true;
    double floor = 1e-9;
};

namespace detail {

inline std::vector<std::string> bleu_tokens(std::string_view s, Tokenizer t) {
    if (t == Tokenizer::Whitespace) return text::tokenize(s);
    std::vector<std::string> out;
    for (char32_t cp : text::decode_utf8(s)) {
        std::string tok;
        text::append_utf8(tok, cp);
        out.push_back(std::move(tok));
    }
    return out;
}

template <typename Seq>
std::map<Seq, std::size_t> ngram_counts(const Seq& seq, std::size_t n) {
    std::map<Seq, std::size_t> counts;
    if (seq.size() < n) return counts;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) counts[Seq(seq.begin() + i, seq.begin() + i + n)]++;
    return counts;
}

struct PrCounts {
    std::size_t hyp_total = 0;
    std::size_t ref_total = 0;
    std::size_t matched = 0;
};

template <typename Seq>
void accumulate_overlap(const Seq& hyp, const Seq& ref, std::size_t n, PrCounts& acc) {
    const auto hc = ngram_counts(hyp, n);
    const auto rc = ngram_counts(ref, n);
    for (const auto& [g, c] : hc) {
        acc.hyp_total += c;
        auto it = rc.find(g);
        if (it != rc.end()) acc.matched += std::min(c, it->second);
    }
    for (const auto& [g, c] : rc) acc.ref_total += c;
}

} // namespace detail

/// Corpus BLEU on a 0-100 scale: modified n-gram precision up to max_order,
/// geometric mean, multiplied by the brevity penalty. Zero precisions are
/// floored when smoothing is on, otherwise force the score to 0.
inline double bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   const BleuConfig& config = {}) {
    if (hypotheses.size() != references.size())
        throw LengthMismatch("bleu: hypothesis/reference count mismatch");
    if (hypotheses.empty()) throw LengthMismatch("bleu: need at least one pair");

    const std::size_t orders = static_cast<std::size_t>(config.max_order);
    std::vector<detail::PrCounts> stats(orders);
    std::size_t hyp_len = 0, ref_len = 0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const auto hyp = detail::bleu_tokens(hypotheses[i], config.tokenizer);
        const auto ref = detail::bleu_tokens(references[i], config.tokenizer);
        hyp_len += hyp.size();
        ref_len += ref.size();
        for (std::size_t n = 1; n <= orders; ++n)
            detail::accumulate_overlap(hyp, ref, n, stats[n - 1]);
    }

    double log_sum = 0.0;
    for (const auto& s : stats) {
        double p = s.hyp_total == 0 ? 0.0 : static_cast<double>(s.matched) / static_cast<double>(s.hyp_total);
        if (p == 0.0) {
            if (!config.floor_smoothing) return 0.0;
            p = config.floor;
        }
        log_sum += std::log(p);
    }
    const double geo_mean = std::exp(log_sum / static_cast<double>(orders));
    double bp = 1.0;
    if (hyp_len == 0) return 0.0;
    if (hyp_len < ref_len)
        bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * bp * geo_mean;
}

struct ChrfConfig {
    int char_order = 6;
    int word_order = 2;
    double beta = 2.0;
};

/// chrF++ on a 0-100 scale: F-scores of character 1..6-grams (whitespace
/// removed) and word 1..2-grams, averaged over all orders with equal weight.
/// An order with no n-grams on either side is skipped; an order with no
/// matches contributes 0.
inline double chrf_pp(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                      const ChrfConfig& config = {}) {
    if (hypotheses.size() != references.size())
        throw LengthMismatch("chrf_pp: hypothesis/reference count mismatch");
    if (hypotheses.empty()) throw LengthMismatch("chrf_pp: need at least one pair");

    const std::size_t n_char = static_cast<std::size_t>(config.char_order);
    const std::size_t n_word = static_cast<std::size_t>(config.word_order);
    std::vector<detail::PrCounts> stats(n_char + n_word);

    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const std::u32string hyp_chars = text::squash(hypotheses[i]);
        const std::u32string ref_chars = text::squash(references[i]);
        for (std::size_t n = 1; n <= n_char; ++n)
            detail::accumulate_overlap(hyp_chars, ref_chars, n, stats[n - 1]);
        const auto hyp_words = text::tokenize(hypotheses[i]);
        const auto ref_words = text::tokenize(references[i]);
        for (std::size_t n = 1; n <= n_word; ++n)
            detail::accumulate_overlap(hyp_words, ref_words, n, stats[n_char + n - 1]);
    }

    const double b2 = config.beta * config.beta;
    double f_sum = 0.0;
    std::size_t effective = 0;
    for (const auto& s : stats) {
        if (s.hyp_total == 0 && s.ref_total == 0) continue;
        ++effective;
        if (s.matched == 0 || s.hyp_total == 0 || s.ref_total == 0) continue;
        const double p = static_cast<double>(s.matched) / static_cast<double>(s.hyp_total);
        const double r = static_cast<double>(s.matched) / static_cast<double>(s.ref_total);
        f_sum += (1.0 + b2) * p * r / (b2 * p + r);
    }
    if (effective == 0) return 0.0;
    return 100.0 * f_sum / static_cast<double>(effective);
}

/// One row of the per-method evaluation table.
struct MetricReport {
    std::string method;
    DialectLabel dialect;
    double chrf_pp = 0.0;
    double bleu = 0.0;
    double dfs_mean = 0.0;
    double tdr = 0.0;
    double mean_attempts = 1.0;
};

} // namespace dialectkit::metrics
