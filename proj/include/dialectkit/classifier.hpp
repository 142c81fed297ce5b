#pragma once

#include <algorithm>
#include <bit>
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
#include "dialectkit/rng.hpp"
#include "dialectkit/serialize.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::classifier {

struct FeaturizerConfig {
    int ngram_min = 2;
    int ngram_max = 4;
    std::uint32_t hash_dim = 1u << 15;
    bool word_unigrams = true;
};

inline void validate(const FeaturizerConfig& c) {
    if (c.ngram_min < 1 || c.ngram_max < c.ngram_min || c.ngram_max > 8)
        throw ConfigError("featurizer: need 1 <= ngram_min <= ngram_max <= 8");
    if (c.hash_dim < 256 || !std::has_single_bit(c.hash_dim))
        throw ConfigError("featurizer: hash_dim must be a power of two >= 256");
}

/// Sparse feature vector, sorted by index with unique indices, so dot
/// products accumulate in one fixed order.
using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

/// Char n-grams over the codepoint sequence plus optional word unigrams,
/// folded into hash_dim buckets. Kind tags keep the two feature families
/// from colliding on identical byte strings.
inline SparseVec featurize(const FeaturizerConfig& cfg, std::string_view raw) {
    const std::uint32_t mask = cfg.hash_dim - 1;
    std::map<std::uint32_t, double> acc;
    const std::u32string cps = text::decode_utf8(raw);
    std::string key;
    for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
        if (cps.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i) {
            key.assign(1, 'c');
            for (int j = 0; j < n; ++j) text::append_utf8(key, cps[i + static_cast<std::size_t>(j)]);
            acc[static_cast<std::uint32_t>(fnv1a64(key)) & mask] += 1.0;
        }
    }
    if (cfg.word_unigrams) {
        for (const auto& tok : text::tokenize(raw)) {
            key.assign(1, 'w');
            key += tok;
            acc[static_cast<std::uint32_t>(fnv1a64(key)) & mask] += 1.0;
        }
    }
    return SparseVec(acc.begin(), acc.end());
}

inline void l2_normalize(SparseVec& v) {
    double sq = 0.0;
    for (const auto& [i, x] : v) sq += x * x;
    if (sq <= 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [i, x] : v) x *= inv;
}

struct TrainConfig {
    int epochs = 4;
    double learning_rate = 0.5;
    double weight_decay = 0.01;
    int batch_size = 16;
    std::uint64_t seed = 1337;
};

inline void validate(const TrainConfig& c) {
    if (c.epochs < 1 || c.batch_size < 1) throw ConfigError("trainer: epochs and batch_size must be >= 1");
    if (c.learning_rate <= 0.0 || c.weight_decay < 0.0)
        throw ConfigError("trainer: learning_rate must be > 0 and weight_decay >= 0");
}

struct Prediction {
    DialectLabel label;
    std::size_t label_index = 0;
    std::vector<double> posterior;
    std::vector<double> logits;
};

enum class EmbedMode { Raw, Logit };

namespace detail {

inline std::vector<double> softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
        p[c] = std::exp(z[c] - zmax);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace detail

/// Multinomial logistic regression over hashed features, trained with seeded
/// mini-batch gradient descent and per-step L2 decay. Inputs are
/// L2-normalized at both train and predict time.
class BaseClassifier {
  public:
    BaseClassifier() = default;

    static BaseClassifier train(const std::vector<CorpusRecord>& records,
                                const FeaturizerConfig& feat, const TrainConfig& tc) {
        validate(feat);
        validate(tc);
        BaseClassifier m;
        m.feat_ = feat;
        m.train_ = tc;
        {
            std::set<DialectLabel> seen;
            for (const auto& r : records) seen.insert(r.label);
            m.labels_.assign(seen.begin(), seen.end());
        }
        if (m.labels_.size() < 2) throw DegenerateData("classifier train: need >= 2 classes");

        const std::size_t n_cls = m.labels_.size();
        std::vector<SparseVec> x(records.size());
        std::vector<std::size_t> y(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            x[i] = featurize(feat, classified_text(records[i]));
            l2_normalize(x[i]);
            y[i] = m.label_index(records[i].label);
        }

        m.w_.assign(n_cls, std::vector<double>(feat.hash_dim, 0.0));
        m.b_.assign(n_cls, 0.0);

        std::vector<std::size_t> order(records.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::vector<double> err(n_cls);

        const double n_batches = std::ceil(static_cast<double>(order.size()) /
                                           static_cast<double>(tc.batch_size));
        for (int epoch = 0; epoch < tc.epochs; ++epoch) {
            // Harmonic decay keeps the last iterate near the regularized optimum
            // instead of bouncing at the initial step size.
            const double lr = tc.learning_rate / (1.0 + static_cast<double>(epoch));
            // weight_decay is a per-epoch shrink rate; dividing by the batch count
            // keeps the effective regularization independent of dataset size.
            const double shrink = 1.0 - lr * tc.weight_decay / n_batches;
            Rng rng(mix_seed(tc.seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
            rng.shuffle(order);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(tc.batch_size)) {
                const std::size_t stop =
                    std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
                const double inv_batch = 1.0 / static_cast<double>(stop - start);
                for (auto& row : m.w_)
                    for (auto& wj : row) wj *= shrink;
                for (std::size_t k = start; k < stop; ++k) {
                    const std::size_t i = order[k];
                    const auto z = m.scores(x[i]);
                    const auto p = detail::softmax(z);
                    for (std::size_t c = 0; c < n_cls; ++c)
                        err[c] = (p[c] - (y[i] == c ? 1.0 : 0.0)) * lr * inv_batch;
                    for (std::size_t c = 0; c < n_cls; ++c) {
                        for (const auto& [j, v] : x[i]) m.w_[c][j] -= err[c] * v;
                        m.b_[c] -= err[c];
                    }
                }
            }
        }
        return m;
    }

    const std::vector<DialectLabel>& labels() const { return labels_; }
    const FeaturizerConfig& featurizer() const { return feat_; }
    const TrainConfig& train_config() const { return train_; }

    std::size_t label_index(const DialectLabel& label) const {
        const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
        if (it == labels_.end() || *it != label)
            throw UnknownClass("classifier: unknown class " + label);
        return static_cast<std::size_t>(it - labels_.begin());
    }

    Prediction predict_proba(std::string_view raw) const {
        auto x = featurize(feat_, raw);
        l2_normalize(x);
        Prediction pr;
        pr.logits = scores(x);
        pr.posterior = detail::softmax(pr.logits);
        pr.label_index = detail::argmax_lowest(pr.posterior);
        pr.label = labels_[pr.label_index];
        return pr;
    }

    /// Raw mode: the L2-normalized hashed feature vector, densified.
    /// Logit mode: pre-softmax class scores.
    std::vector<double> embed(std::string_view raw, EmbedMode mode) const {
        auto x = featurize(feat_, raw);
        l2_normalize(x);
        if (mode == EmbedMode::Raw) {
            std::vector<double> dense(feat_.hash_dim, 0.0);
            for (const auto& [j, v] : x) dense[j] = v;
            return dense;
        }
        return scores(x);
    }

    void save(std::ostream& os) const {
        io::put_magic(os, "DKC1");
        io::put_u32(os, static_cast<std::uint32_t>(feat_.ngram_min));
        io::put_u32(os, static_cast<std::uint32_t>(feat_.ngram_max));
        io::put_u32(os, feat_.hash_dim);
        io::put_u8(os, feat_.word_unigrams ? 1 : 0);
        io::put_u32(os, static_cast<std::uint32_t>(train_.epochs));
        io::put_f64(os, train_.learning_rate);
        io::put_f64(os, train_.weight_decay);
        io::put_u32(os, static_cast<std::uint32_t>(train_.batch_size));
        io::put_u64(os, train_.seed);
        io::put_u32(os, static_cast<std::uint32_t>(labels_.size()));
        for (const auto& l : labels_) io::put_str(os, l);
        for (const auto& row : w_)
            for (const double wj : row) io::put_f64(os, wj);
        for (const double bc : b_) io::put_f64(os, bc);
    }

    static BaseClassifier load(std::istream& is) {
        io::expect_magic(is, "DKC1", "base classifier");
        BaseClassifier m;
        m.feat_.ngram_min = static_cast<int>(io::get_u32(is));
        m.feat_.ngram_max = static_cast<int>(io::get_u32(is));
        m.feat_.hash_dim = io::get_u32(is);
        m.feat_.word_unigrams = io::get_u8(is) != 0;
        m.train_.epochs = static_cast<int>(io::get_u32(is));
        m.train_.learning_rate = io::get_f64(is);
        m.train_.weight_decay = io::get_f64(is);
        m.train_.batch_size = static_cast<int>(io::get_u32(is));
        m.train_.seed = io::get_u64(is);
        const auto n_cls = io::get_u32(is);
        m.labels_.resize(n_cls);
        for (auto& l : m.labels_) l = io::get_str(is);
        m.w_.assign(n_cls, std::vector<double>(m.feat_.hash_dim, 0.0));
        for (auto& row : m.w_)
            for (auto& wj : row) wj = io::get_f64(is);
        m.b_.resize(n_cls);
        for (auto& bc : m.b_) bc = io::get_f64(is);
        return m;
    }

  private:
    std::vector<double> scores(const SparseVec& x) const {
        std::vector<double> z(b_);
        for (std::size_t c = 0; c < z.size(); ++c)
            for (const auto& [j, v] : x) z[c] += w_[c][j] * v;
        return z;
    }

    FeaturizerConfig feat_;
    TrainConfig train_;
    std::vector<DialectLabel> labels_;
    std::vector<std::vector<double>> w_;
    std::vector<double> b_;
};

/// Unweighted mean of member posteriors (and of member logits). All members
/// must share one label set.
class Ensemble {
  public:
    Ensemble() = default;

    explicit Ensemble(std::vector<BaseClassifier> members) : members_(std::move(members)) {
        if (members_.empty()) throw ConfigError("ensemble: no members");
        for (const auto& m : members_)
            if (m.labels() != members_.front().labels())
                throw ConfigError("ensemble: members disagree on the label set");
    }

    const std::vector<BaseClassifier>& members() const { return members_; }
    const std::vector<DialectLabel>& labels() const { return members_.front().labels(); }
    std::size_t label_index(const DialectLabel& label) const {
        return members_.front().label_index(label);
    }

    Prediction predict_proba(std::string_view raw) const {
        const std::size_t n_cls = labels().size();
        Prediction pr;
        pr.posterior.assign(n_cls, 0.0);
        pr.logits.assign(n_cls, 0.0);
        for (const auto& m : members_) {
            const auto mp = m.predict_proba(raw);
            for (std::size_t c = 0; c < n_cls; ++c) {
                pr.posterior[c] += mp.posterior[c];
                pr.logits[c] += mp.logits[c];
            }
        }
        const double inv = 1.0 / static_cast<double>(members_.size());
        for (std::size_t c = 0; c < n_cls; ++c) {
            pr.posterior[c] *= inv;
            pr.logits[c] *= inv;
        }
        pr.label_index = detail::argmax_lowest(pr.posterior);
        pr.label = labels()[pr.label_index];
        return pr;
    }

    /// Raw mode concatenates the members' unit vectors and renormalizes, so
    /// ensemble cosine equals the mean of member cosines. Logit mode is the
    /// mean of member logits.
    std::vector<double> embed(std::string_view raw, EmbedMode mode) const {
        if (mode == EmbedMode::Raw) {
            std::vector<double> out;
            for (const auto& m : members_) {
                const auto e = m.embed(raw, EmbedMode::Raw);
                out.insert(out.end(), e.begin(), e.end());
            }
            double sq = 0.0;
            for (const double v : out) sq += v * v;
            if (sq > 0.0) {
                const double inv = 1.0 / std::sqrt(sq);
                for (auto& v : out) v *= inv;
            }
            return out;
        }
        std::vector<double> z(labels().size(), 0.0);
        for (const auto& m : members_) {
            const auto e = m.embed(raw, EmbedMode::Logit);
            for (std::size_t c = 0; c < z.size(); ++c) z[c] += e[c];
        }
        const double inv = 1.0 / static_cast<double>(members_.size());
        for (auto& v : z) v *= inv;
        return z;
    }

    void save(std::ostream& os) const {
        io::put_magic(os, "DKE1");
        io::put_u32(os, static_cast<std::uint32_t>(members_.size()));
        for (const auto& m : members_) m.save(os);
    }

    static Ensemble load(std::istream& is) {
        io::expect_magic(is, "DKE1", "ensemble");
        const auto n = io::get_u32(is);
        std::vector<BaseClassifier> members;
        members.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) members.push_back(BaseClassifier::load(is));
        return Ensemble(std::move(members));
    }

  private:
    std::vector<BaseClassifier> members_;
};

struct ClassMetrics {
    DialectLabel label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion; // [gold][pred]
};

namespace detail {

inline EvalMetrics metrics_from_confusion(const std::vector<DialectLabel>& labels,
                                          std::vector<std::vector<std::size_t>> confusion) {
    const std::size_t n_cls = labels.size();
    EvalMetrics em;
    em.confusion = std::move(confusion);
    std::size_t total = 0, correct = 0;
    for (std::size_t g = 0; g < n_cls; ++g)
        for (std::size_t p = 0; p < n_cls; ++p) {
            total += em.confusion[g][p];
            if (g == p) correct += em.confusion[g][p];
        }
    em.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    for (std::size_t c = 0; c < n_cls; ++c) {
        std::size_t tp = em.confusion[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < n_cls; ++o) {
            if (o == c) continue;
            fp += em.confusion[o][c];
            fn += em.confusion[c][o];
        }
        ClassMetrics cm;
        cm.label = labels[c];
        cm.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        cm.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        cm.f1 = cm.precision + cm.recall == 0.0
                    ? 0.0
                    : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
        em.macro_f1 += cm.f1;
        em.per_class.push_back(cm);
    }
    em.macro_f1 /= static_cast<double>(n_cls);
    return em;
}

} // namespace detail

template <typename Model>
EvalMetrics evaluate_classifier(const Model& model, const std::vector<CorpusRecord>& eval_set) {
    if (eval_set.empty()) throw EmptyEvalSet("evaluate_classifier: empty eval set");
    const auto& labels = model.labels();
    std::vector<std::vector<std::size_t>> confusion(labels.size(),
                                                    std::vector<std::size_t>(labels.size(), 0));
    for (const auto& r : eval_set) {
        const auto gold = model.label_index(r.label);
        const auto pred = model.predict_proba(classified_text(r)).label_index;
        confusion[gold][pred]++;
    }
    return detail::metrics_from_confusion(labels, std::move(confusion));
}

struct SearchEntry {
    std::uint32_t mask = 0;
    std::vector<std::size_t> member_indices;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

/// Evaluates every non-empty member subset on the eval set. Member
/// posteriors are computed once and reused. Ranking: accuracy desc,
/// macro-F1 desc, fewer members, then bitmask ascending.
inline std::vector<SearchEntry> ensemble_search(const std::vector<BaseClassifier>& members,
                                                const std::vector<CorpusRecord>& eval_set) {
    if (members.empty()) throw ConfigError("ensemble_search: no members");
    if (members.size() > 12) throw ConfigError("ensemble_search: more than 12 members");
    if (eval_set.empty()) throw EmptyEvalSet("ensemble_search: empty eval set");
    const auto& labels = members.front().labels();
    for (const auto& m : members)
        if (m.labels() != labels) throw ConfigError("ensemble_search: members disagree on labels");

    const std::size_t n_cls = labels.size();
    std::vector<std::size_t> gold(eval_set.size());
    std::vector<std::vector<std::vector<double>>> post(
        members.size(), std::vector<std::vector<double>>(eval_set.size()));
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        gold[i] = members.front().label_index(eval_set[i].label);
        for (std::size_t m = 0; m < members.size(); ++m)
            post[m][i] = members[m].predict_proba(classified_text(eval_set[i])).posterior;
    }

    std::vector<SearchEntry> entries;
    std::vector<double> mean(n_cls);
    for (std::uint32_t mask = 1; mask < (1u << members.size()); ++mask) {
        SearchEntry e;
        e.mask = mask;
        for (std::size_t m = 0; m < members.size(); ++m)
            if (mask & (1u << m)) e.member_indices.push_back(m);
        std::vector<std::vector<std::size_t>> confusion(n_cls, std::vector<std::size_t>(n_cls, 0));
        for (std::size_t i = 0; i < eval_set.size(); ++i) {
            std::fill(mean.begin(), mean.end(), 0.0);
            for (const auto m : e.member_indices)
                for (std::size_t c = 0; c < n_cls; ++c) mean[c] += post[m][i][c];
            confusion[gold[i]][detail::argmax_lowest(mean)]++;
        }
        const auto em = detail::metrics_from_confusion(labels, std::move(confusion));
        e.accuracy = em.accuracy;
        e.macro_f1 = em.macro_f1;
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const SearchEntry& a, const SearchEntry& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.macro_f1 != b.macro_f1) return a.macro_f1 > b.macro_f1;
        if (a.member_indices.size() != b.member_indices.size())
            return a.member_indices.size() < b.member_indices.size();
        return a.mask < b.mask;
    });
    return entries;
}

inline Ensemble make_ensemble(const std::vector<BaseClassifier>& members,
                              const std::vector<std::size_t>& indices) {
    std::vector<BaseClassifier> picked;
    for (const auto i : indices) {
        if (i >= members.size()) throw ConfigError("make_ensemble: member index out of range");
        picked.push_back(members[i]);
    }
    return Ensemble(std::move(picked));
}

struct MemberSpec {
    FeaturizerConfig feat;
    TrainConfig train;
};

/// Five members varying n-gram span, hash width, word-feature use, and seed.
inline std::vector<MemberSpec> default_member_specs() {
    std::vector<MemberSpec> specs(5);
    specs[0].feat = {2, 4, 1u << 15, true};
    specs[0].train.seed = 1337;
    specs[1].feat = {1, 3, 1u << 14, true};
    specs[1].train.seed = 2023;
    specs[2].feat = {3, 5, 1u << 16, false};
    specs[2].train.seed = 7331;
    specs[3].feat = {2, 5, 1u << 15, true};
    specs[3].train.seed = 4242;
    specs[4].feat = {1, 4, 1u << 14, false};
    specs[4].train.seed = 9091;
    return specs;
}

} // namespace dialectkit::classifier
