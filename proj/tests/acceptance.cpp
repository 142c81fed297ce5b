// Acceptance gate for the library: eight end-to-end criteria, each printed
// as a single PASS/FAIL line with its measurements. Exit status is nonzero
// if any criterion fails. No test framework; this binary is the record.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialectkit/classifier.hpp"
#include "dialectkit/corpus.hpp"
#include "dialectkit/engine.hpp"
#include "dialectkit/llm_client.hpp"
#include "dialectkit/metrics.hpp"
#include "dialectkit/retrieval.hpp"
#include "dialectkit/synthlang.hpp"
#include "dialectkit/text.hpp"

using namespace dialectkit;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct Criterion {
    bool ok = true;
    std::vector<std::string> notes;

    void check(bool cond, const std::string& what) {
        if (!cond) ok = false;
        notes.push_back(std::string(cond ? "    ok   " : "    MISS ") + what);
    }
    void note(const std::string& what) { notes.push_back("    .    " + what); }
};

// ---------------------------------------------------------------- criterion 1

void criterion_published_scores(Criterion& c) {
    const std::string ref = "제주도는 특별한 약초들이 많이 엇이난 그냥 그냥 넘긴 거 닮아";
    const std::string hyp1 = "제주도엔 특별한 약초덜이 많이 읎응께 그냥 그냥 넘긴 거 같아";
    const std::string hyp2 = "제주도는 특별한 약초들이 많이 없으니깐 그냥 그냥 넘긴 거 같아";

    const double chrf2 = metrics::chrf_pp({hyp2}, {ref});
    const double chrf1 = metrics::chrf_pp({hyp1}, {ref});
    const double bleu2 = metrics::bleu({hyp2}, {ref});
    const double bleu1 = metrics::bleu({hyp1}, {ref});

    c.check(std::abs(chrf2 - 67.82) <= 2.0, "chrF++(hyp2) = " + num(chrf2) + ", band 67.82 +/- 2.0");
    c.check(std::abs(chrf1 - 36.80) <= 2.0, "chrF++(hyp1) = " + num(chrf1) + ", band 36.80 +/- 2.0");
    c.check(std::abs(bleu2 - 52.54) <= 3.0, "BLEU(hyp2) = " + num(bleu2) + ", band 52.54 +/- 3.0");
    c.check(std::abs(bleu1 - 27.78) <= 3.0, "BLEU(hyp1) = " + num(bleu1) + ", band 27.78 +/- 3.0");
    c.check(chrf2 > chrf1, "ordering chrF++(hyp2) > chrF++(hyp1)");
    c.check(bleu2 > bleu1, "ordering BLEU(hyp2) > BLEU(hyp1)");
}

// ---------------------------------------------------------------- criterion 2

void criterion_divergence_identities(Criterion& c) {
    std::mt19937_64 gen(20240816);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const auto vec = [&] {
        metrics::Vec v(8);
        for (auto& x : v) x = dist(gen);
        return v;
    };

    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto h = vec(), r = vec(), s = vec();
        worst = std::max(worst, std::abs(metrics::dfs(h, r, s) + metrics::dfs(h, s, r)));
    }
    c.check(worst <= 1e-12, "antisymmetry over 1000 random triples, worst residual " + num(worst));

    bool zeros = true;
    for (int i = 0; i < 100; ++i) {
        const auto h = vec(), r = vec();
        if (metrics::dfs(h, r, r) != 0.0) zeros = false;
    }
    c.check(zeros, "dfs is exactly zero whenever the two anchors coincide");

    const double hand = metrics::dfs({1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0});
    c.check(std::abs(hand - 0.6931466805603205) <= 1e-12,
            "aligned-vs-orthogonal closed form = " + num(hand) + " (ln((2+eps)/(1+eps)))");
}

// ------------------------------------------------------- shared trained setup

struct TrainedSetup {
    std::vector<synthlang::SyntheticDialectSpec> specs = synthlang::default_specs();
    std::vector<CorpusRecord> train, eval, dialect_eval;
    classifier::BaseClassifier model;
};

TrainedSetup build_setup() {
    TrainedSetup s;
    synthlang::SynthConfig cfg;
    const std::size_t per_class = 500, train_per_class = 400;
    const auto corpus = synthlang::generate_labeled_corpus(s.specs, per_class, cfg);
    std::map<DialectLabel, std::size_t> seen;
    for (const auto& r : corpus)
        (seen[r.label]++ < train_per_class ? s.train : s.eval).push_back(r);
    s.model = classifier::BaseClassifier::train(s.train, classifier::FeaturizerConfig{},
                                                classifier::TrainConfig{});
    for (const auto& r : s.eval)
        if (is_dialect_class(r.label)) s.dialect_eval.push_back(r);
    return s;
}

// ---------------------------------------------------------------- criterion 3

void criterion_false_success(Criterion& c, const TrainedSetup& s, double setup_seconds) {
    const auto t0 = Clock::now();
    std::vector<std::string> copies, refs;
    std::size_t copy_hits = 0, rule_hits = 0;
    double copy_dfs = 0.0, rule_dfs = 0.0;
    for (const auto& r : s.dialect_eval) {
        copies.push_back(r.standard);
        refs.push_back(r.dialect);
        const auto e_r = s.model.embed(r.dialect, classifier::EmbedMode::Logit);
        const auto e_s = s.model.embed(r.standard, classifier::EmbedMode::Logit);
        copy_dfs += metrics::dfs(e_s, e_r, e_s);
        rule_dfs += metrics::dfs(e_r, e_r, e_s);
        if (s.model.predict_proba(r.standard).label == r.label) ++copy_hits;
        if (s.model.predict_proba(r.dialect).label == r.label) ++rule_hits;
    }
    const double n = static_cast<double>(s.dialect_eval.size());
    const double copy_bleu = metrics::bleu(copies, refs);
    const double copy_tdr = static_cast<double>(copy_hits) / n;
    const double rule_tdr = static_cast<double>(rule_hits) / n;
    const double elapsed = setup_seconds + seconds_since(t0);

    c.note("hypothesis sets: " + std::to_string(s.dialect_eval.size()) + " held-out pairs");
    c.check(copy_bleu >= 80.0, "source-copy BLEU = " + num(copy_bleu) + " >= 80");
    c.check(copy_tdr <= 0.05, "source-copy TDR = " + num(copy_tdr) + " <= 0.05");
    c.check(copy_dfs / n < 0.0, "source-copy DFS mean = " + num(copy_dfs / n) + " < 0");
    c.check(rule_tdr >= 0.9, "rule-applied TDR = " + num(rule_tdr) + " >= 0.9");
    c.check(rule_dfs / n > 0.0, "rule-applied DFS mean = " + num(rule_dfs / n) + " > 0");
    c.check(elapsed < 120.0, "runtime " + num(elapsed) + " s < 120 s (training included)");
}

// ---------------------------------------------------------------- criterion 4

void criterion_embedding_contrast(Criterion& c, const TrainedSetup& s) {
    const auto gap_for = [&](classifier::EmbedMode mode) {
        double ref_sum = 0.0, copy_sum = 0.0;
        for (const auto& r : s.dialect_eval) {
            const auto e_r = s.model.embed(r.dialect, mode);
            const auto e_s = s.model.embed(r.standard, mode);
            ref_sum += metrics::dfs(e_r, e_r, e_s);
            copy_sum += metrics::dfs(e_s, e_r, e_s);
        }
        return (ref_sum - copy_sum) / static_cast<double>(s.dialect_eval.size());
    };
    const double raw_gap = gap_for(classifier::EmbedMode::Raw);
    const double logit_gap = gap_for(classifier::EmbedMode::Logit);
    c.note("reference-vs-copy separation: raw " + num(raw_gap) + ", logit " + num(logit_gap));
    c.check(raw_gap > 0.0, "raw-mode gap is positive");
    c.check(logit_gap >= 5.0 * raw_gap,
            "logit-mode gap is at least 5x the raw-mode gap (ratio " +
                num(raw_gap > 0.0 ? logit_gap / raw_gap : 0.0) + ")");
}

// ---------------------------------------------------------------- criterion 5

void criterion_classifier_ensemble(Criterion& c, const TrainedSetup& s) {
    const double acc = classifier::evaluate_classifier(s.model, s.eval).accuracy;
    c.check(acc >= 0.90, "five-class held-out accuracy = " + num(acc) + " >= 0.90");

    std::vector<classifier::BaseClassifier> members;
    double best_single = 0.0;
    for (const auto& spec : classifier::default_member_specs()) {
        members.push_back(classifier::BaseClassifier::train(s.train, spec.feat, spec.train));
        const double a = classifier::evaluate_classifier(members.back(), s.eval).accuracy;
        best_single = std::max(best_single, a);
        c.note("member seed " + std::to_string(spec.train.seed) + ": accuracy " + num(a));
    }
    const auto entries = classifier::ensemble_search(members, s.eval);
    c.check(entries.size() == 31,
            "search over 5 members evaluated " + std::to_string(entries.size()) + " subsets (want 31)");
    c.check(entries.front().accuracy >= best_single,
            "top subset accuracy " + num(entries.front().accuracy) + " >= best single " +
                num(best_single));
}

// ---------------------------------------------------------------- criterion 6

struct StubModel {
    std::vector<DialectLabel> labels_{"Standard", "jeju", "other"};
    std::map<std::string, std::vector<double>> posterior_of;

    const std::vector<DialectLabel>& labels() const { return labels_; }
    std::size_t label_index(const DialectLabel& l) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == l) return i;
        throw UnknownClass("stub model: " + l);
    }
    classifier::Prediction predict_proba(std::string_view raw) const {
        const auto it = posterior_of.find(std::string(raw));
        classifier::Prediction pr;
        pr.posterior =
            it == posterior_of.end() ? std::vector<double>{1.0, 0.0, 0.0} : it->second;
        pr.logits = pr.posterior;
        std::size_t best = 0;
        for (std::size_t i = 1; i < pr.posterior.size(); ++i)
            if (pr.posterior[i] > pr.posterior[best]) best = i;
        pr.label_index = best;
        pr.label = labels_[best];
        return pr;
    }
    metrics::Vec embed(std::string_view, classifier::EmbedMode) const { return {1.0, 0.0}; }
};

struct ScriptBackend final : llm::Backend {
    std::map<std::string, std::vector<std::vector<std::string>>> script;
    std::map<std::string, std::size_t> attempt_no;

    std::string name() const override { return "script"; }
    void begin_run() override { attempt_no.clear(); }
    std::vector<std::string> generate(const llm::GenerationRequest& req) override {
        const auto pos = req.user.rfind("Input sentence: ");
        const auto end = req.user.find("\nTranslation:", pos);
        if (pos == std::string::npos || end == std::string::npos)
            throw BackendFailure("script backend: no input line");
        const std::string source = req.user.substr(pos + 16, end - pos - 16);
        const std::size_t a = attempt_no[source]++;
        const auto& per = script.at(source);
        auto base = per[std::min(a, per.size() - 1)];
        while (base.size() < static_cast<std::size_t>(req.n))
            base.push_back(base.back() + "+pad" + std::to_string(base.size()));
        base.resize(static_cast<std::size_t>(req.n));
        return base;
    }
};

void criterion_engine_protocol(Criterion& c) {
    StubModel model;
    model.posterior_of["S"] = {1.0, 0.0, 0.0}; // wrong: Standard
    model.posterior_of["O"] = {0.0, 0.0, 1.0}; // wrong: other
    model.posterior_of["J"] = {0.0, 1.0, 0.0}; // verified: jeju

    engine::MethodConfig single;
    single.name = "single";
    single.refine_mode = engine::RefineMode::Single;
    engine::MethodConfig multi = single;
    multi.name = "multi";
    multi.refine_mode = engine::RefineMode::Multi;

    bool exhausted = true;
    for (int i = 0; i < 5; ++i) {
        const CorpusRecord item{"rej-" + std::to_string(i), "reject " + std::to_string(i), "ref",
                                "jeju"};
        ScriptBackend bk;
        bk.script[item.standard] = {{"S"}, {"S"}, {"S"}};
        const auto& cfg = i % 2 == 0 ? single : multi;
        const auto tr = engine::refine(item, bk, model, cfg, {}, 99);
        if (tr.attempts_used != 3 || tr.success) exhausted = false;
    }
    c.check(exhausted, "always-rejecting verifier: every trace uses exactly 3 attempts");

    {
        const CorpusRecord item{"sched", "schedule case", "ref", "jeju"};
        ScriptBackend bk;
        bk.script[item.standard] = {{"S"}, {"S"}, {"S"}};
        const auto tr = engine::refine(item, bk, model, multi, {}, 99);
        const bool sizes_ok = tr.attempts.size() == 3 && tr.attempts[0].candidates.size() == 3 &&
                              tr.attempts[1].candidates.size() == 4 &&
                              tr.attempts[2].candidates.size() == 5;
        c.check(sizes_ok, "multi mode requested exactly 3/4/5 candidates by attempt");
    }

    bool flags_ok = true, notices_ok = true;
    for (int mask = 0; mask < 8; ++mask) {
        const std::string s0 = (mask & 1) ? "O" : "S";
        const std::string s1 = (mask & 2) ? "O" : "S";
        const std::string s2 = (mask & 4) ? "O" : "S";
        const CorpusRecord item{"osc-" + std::to_string(mask), "osc " + std::to_string(mask), "ref",
                                "jeju"};
        ScriptBackend bk;
        bk.script[item.standard] = {{s0}, {s1}, {s2}};
        const auto tr = engine::refine(item, bk, model, single, {}, 99);
        if (tr.oscillation_flagged != (s0 != s1 || s1 != s2)) flags_ok = false;

        const std::string label0 = s0 == "S" ? "Standard" : "other";
        const std::string label1 = s1 == "S" ? "Standard" : "other";
        const bool has_exact =
            tr.attempts[2].user.find("The output oscillates between " + label0 + " and " + label1 +
                                     ".") != std::string::npos;
        const bool has_any = tr.attempts[2].user.find("oscillates") != std::string::npos;
        if (s0 != s1 ? !has_exact : has_any) notices_ok = false;
    }
    {
        // Early success must not flag, and a flag set before a late success
        // must survive.
        const CorpusRecord early{"osc-e", "osc early", "ref", "jeju"};
        ScriptBackend bk;
        bk.script[early.standard] = {{"S"}, {"J"}};
        const auto tr = engine::refine(early, bk, model, single, {}, 99);
        if (tr.oscillation_flagged || !tr.success || tr.attempts_used != 2) flags_ok = false;

        const CorpusRecord late{"osc-l", "osc late", "ref", "jeju"};
        ScriptBackend bk2;
        bk2.script[late.standard] = {{"S"}, {"O"}, {"J"}};
        const auto tr2 = engine::refine(late, bk2, model, single, {}, 99);
        if (!tr2.oscillation_flagged || !tr2.success || tr2.attempts_used != 3) flags_ok = false;
    }
    c.check(flags_ok, "oscillation flag set iff consecutive wrong labels differ (all scripted runs)");
    c.check(notices_ok, "oscillation notice reaches the third prompt iff attempts 1 and 2 disagree");
}

// ---------------------------------------------------------------- criterion 7

void criterion_method_trend(Criterion& c) {
    const auto t0 = Clock::now();
    const auto specs = synthlang::default_specs();
    synthlang::SynthConfig scfg;
    const auto corpus = synthlang::generate_labeled_corpus(specs, 700, scfg);

    corpus::CurationConfig ccfg;
    ccfg.per_class_cap = 700;
    ccfg.train_fraction = 0.8;
    ccfg.test_pair_count = 100;
    const auto split = corpus::curate(corpus, ccfg);
    c.note("test items: " + std::to_string(split.test.size()) + " across " +
           std::to_string(specs.size()) + " dialects");

    const auto model = classifier::BaseClassifier::train(split.train, classifier::FeaturizerConfig{},
                                                         classifier::TrainConfig{});
    const retrieval::Bm25Index index(split.icl_pool, retrieval::Bm25Params{});
    llm::ScriptedBackend backend(llm::responsive_persona(), specs);

    std::map<std::string, std::vector<engine::RefineTrace>> traces;
    for (const auto& m : engine::method_grid()) {
        const auto* icl = m.prompt_mode == engine::PromptMode::InContext ? &index : nullptr;
        traces[m.name] = engine::run_method(split.test, backend, model, m, icl, 20240817, 1);
    }

    const auto tdr = [&](const std::string& name) {
        const auto& trs = traces.at(name);
        std::size_t hits = 0;
        for (const auto& t : trs) hits += t.success ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(trs.size());
    };
    for (const auto& [name, trs] : traces) c.note("TDR " + name + " = " + num(tdr(name)));

    c.check(tdr("ZS") < tdr("ZS+Refine-S") && tdr("ZS+Refine-S") < tdr("ZS+Refine-M"),
            "TDR strictly increases ZS -> ZS+Refine-S -> ZS+Refine-M");
    c.check(tdr("ICL") < tdr("ICL+Refine-S") && tdr("ICL+Refine-S") < tdr("ICL+Refine-M"),
            "TDR strictly increases ICL -> ICL+Refine-S -> ICL+Refine-M");
    bool is_max = true;
    for (const auto& [name, trs] : traces)
        if (tdr(name) > tdr("ICL+Refine-M")) is_max = false;
    c.check(is_max, "ICL+Refine-M attains the maximum TDR of the grid");

    const auto hard = engine::hard_subset(split.test, traces.at("ICL"));
    std::set<std::string> hard_ids;
    for (const auto& h : hard) hard_ids.insert(h.id);
    const auto mean_attempts_on = [&](const std::string& name) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& t : traces.at(name))
            if (hard_ids.count(t.item_id)) {
                sum += t.attempts_used;
                ++n;
            }
        return n == 0 ? 0.0 : sum / static_cast<double>(n);
    };
    const double hard_s = mean_attempts_on("ICL+Refine-S");
    const double hard_m = mean_attempts_on("ICL+Refine-M");
    c.note("hard subset (" + std::to_string(hard.size()) + " items, where plain ICL failed): " +
           "mean attempts single " + num(hard_s) + ", multi " + num(hard_m));
    c.check(!hard.empty(), "hard subset is non-empty");
    c.check(hard_m < hard_s, "multi-candidate refinement converges in fewer attempts on it");

    const double elapsed = seconds_since(t0);
    c.check(elapsed < 300.0, "runtime " + num(elapsed) + " s < 300 s");
}

// ---------------------------------------------------------------- criterion 8

std::size_t lev_brute(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t del = lev_brute(a.substr(1), b) + 1;
    const std::size_t ins = lev_brute(a, b.substr(1)) + 1;
    const std::size_t sub = lev_brute(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
    return std::min(del, std::min(ins, sub));
}

// Full-scan BM25 mirroring the index's accumulation order term by term, so
// agreement is bitwise.
std::vector<retrieval::ScoredDoc> bm25_brute(const std::vector<CorpusRecord>& pool,
                                             const retrieval::Bm25Params& params,
                                             std::string_view query, std::size_t k) {
    const std::size_t n_docs = pool.size();
    std::vector<std::vector<std::string>> docs(n_docs);
    std::vector<double> len(n_docs);
    double total_len = 0.0;
    for (std::size_t d = 0; d < n_docs; ++d) {
        docs[d] = text::tokenize(pool[d].standard);
        len[d] = static_cast<double>(docs[d].size());
        total_len += len[d];
    }
    const double avg_len = total_len / static_cast<double>(n_docs);

    std::vector<std::string> terms;
    {
        std::set<std::string> seen;
        for (auto& t : text::tokenize(query))
            if (seen.insert(t).second) terms.push_back(std::move(t));
    }

    std::vector<retrieval::ScoredDoc> out;
    for (std::size_t d = 0; d < n_docs; ++d) {
        double score = 0.0;
        bool hit = false;
        for (const auto& term : terms) {
            double tf = 0.0, df = 0.0;
            for (std::size_t o = 0; o < n_docs; ++o) {
                bool present = false;
                for (const auto& t : docs[o]) {
                    if (t != term) continue;
                    present = true;
                    if (o == d) tf += 1.0;
                }
                if (present) df += 1.0;
            }
            if (tf == 0.0) continue;
            const double n = static_cast<double>(n_docs);
            const double w = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double denom = tf + params.k1 * (1.0 - params.b + params.b * len[d] / avg_len);
            score += w * tf * (params.k1 + 1.0) / denom;
            hit = true;
        }
        if (hit) out.push_back({d, score});
    }
    std::sort(out.begin(), out.end(),
              [&](const retrieval::ScoredDoc& a, const retrieval::ScoredDoc& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return pool[a.doc].id < pool[b.doc].id;
              });
    if (out.size() > k) out.resize(k);
    return out;
}

struct HashModel {
    std::vector<DialectLabel> labels_{"A", "B", "C"};
    const std::vector<DialectLabel>& labels() const { return labels_; }
    std::size_t label_index(const DialectLabel& l) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == l) return i;
        throw UnknownClass("hash model: " + l);
    }
    classifier::Prediction predict_proba(std::string_view raw) const {
        Rng rng(mix_seed(fnv1a64(raw), 0xbeef));
        classifier::Prediction pr;
        pr.posterior = {rng.real() + 0.25, rng.real() + 0.25, rng.real() + 0.25};
        double sum = pr.posterior[0] + pr.posterior[1] + pr.posterior[2];
        for (auto& p : pr.posterior) p /= sum;
        pr.logits = pr.posterior;
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (pr.posterior[i] > pr.posterior[best]) best = i;
        pr.label_index = best;
        pr.label = labels_[best];
        return pr;
    }
};

void criterion_oracle_equivalence(Criterion& c) {
    std::vector<std::string> strings{""};
    std::vector<std::string> frontier{""};
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const auto& p : frontier) {
            next.push_back(p + "a");
            next.push_back(p + "b");
        }
        strings.insert(strings.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::size_t lev_checked = 0;
    bool lev_ok = true;
    for (const auto& a : strings)
        for (const auto& b : strings) {
            ++lev_checked;
            const std::size_t bd = lev_brute(a, b);
            if (corpus::levenshtein(a, b) != bd) lev_ok = false;
            const double want = bd == 0 ? 0.0
                                        : 2.0 * static_cast<double>(bd) /
                                              (static_cast<double>(a.size()) +
                                               static_cast<double>(b.size()) +
                                               static_cast<double>(bd));
            if (corpus::normalized_levenshtein(a, b) != want) lev_ok = false;
        }
    c.check(lev_ok, "edit distance matches brute force on all " + std::to_string(lev_checked) +
                        " pairs of a/b strings up to length 4");

    Rng rng(97531);
    bool bm25_ok = true;
    std::size_t queries = 0;
    for (int corpus_i = 0; corpus_i < 100; ++corpus_i) {
        const std::size_t n_docs = 1 + rng.below(12);
        std::vector<CorpusRecord> pool;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string text;
            const std::size_t n_tok = 1 + rng.below(8);
            for (std::size_t t = 0; t < n_tok; ++t)
                text += (t ? " " : "") + ("w" + std::to_string(rng.below(10)));
            pool.push_back({"r" + std::to_string(corpus_i) + "-" + std::to_string(rng.below(90)) +
                                "-" + std::to_string(d),
                            text, text, "Standard"});
        }
        retrieval::Bm25Params params;
        if (rng.bernoulli(0.5)) {
            params.k1 = rng.real() * 3.0;
            params.b = rng.real();
        }
        const retrieval::Bm25Index index(pool, params);
        for (int q = 0; q < 5; ++q) {
            std::string query;
            const std::size_t n_tok = 1 + rng.below(5);
            for (std::size_t t = 0; t < n_tok; ++t)
                query += (t ? " " : "") +
                         (rng.bernoulli(0.15) ? std::string("zz") : "w" + std::to_string(rng.below(10)));
            const std::size_t k = 1 + rng.below(n_docs + 2);
            const auto got = index.top_k(query, k);
            const auto want = bm25_brute(pool, params, query, k);
            ++queries;
            if (got.size() != want.size()) {
                bm25_ok = false;
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i)
                if (got[i].doc != want[i].doc || got[i].score != want[i].score) bm25_ok = false;
        }
    }
    c.check(bm25_ok, "bm25 top_k matches the full scan bitwise on 100 corpora (" +
                         std::to_string(queries) + " queries)");

    const HashModel hm;
    bool select_ok = true;
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::string> cands;
        const std::size_t n = 1 + static_cast<std::size_t>(i % 8);
        for (std::size_t j = 0; j < n; ++j)
            cands.push_back("cand-" + std::to_string(i) + "-" + std::to_string(j));
        const auto target = hm.labels()[static_cast<std::size_t>(i) % 3];
        const auto [idx, pred] = engine::select_best(cands, hm, target);

        const std::size_t t = hm.label_index(target);
        std::size_t best = 0;
        double best_mass = -1.0;
        for (std::size_t j = 0; j < cands.size(); ++j) {
            const auto p = hm.predict_proba(cands[j]);
            if (p.posterior[t] > best_mass) {
                best_mass = p.posterior[t];
                best = j;
            }
        }
        if (idx != best || pred.posterior[t] != best_mass) select_ok = false;
    }
    c.check(select_ok, "select_best agrees with a linear scan on 1000 candidate sets");
}

} // namespace

int main() {
    std::printf("dialectkit acceptance run\n");

    int failures = 0;
    const auto run = [&](int n, const std::string& title,
                         const std::function<void(Criterion&)>& fn) {
        Criterion c;
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.note(std::string("exception: ") + e.what());
        }
        if (!c.ok) ++failures;
        std::printf("[%s] criterion %d: %s\n", c.ok ? "PASS" : "FAIL", n, title.c_str());
        for (const auto& note : c.notes) std::printf("%s\n", note.c_str());
        std::fflush(stdout);
    };

    run(1, "surface scores on the worked example triple", criterion_published_scores);
    run(2, "dialect-feature score identities", criterion_divergence_identities);

    std::optional<TrainedSetup> setup;
    double setup_seconds = 0.0;
    run(3, "false-success inversion of surface vs feature metrics", [&](Criterion& c) {
        const auto t0 = Clock::now();
        setup.emplace(build_setup());
        setup_seconds = seconds_since(t0);
        criterion_false_success(c, *setup, setup_seconds);
    });
    run(4, "logit embeddings sharpen the reference/copy contrast", [&](Criterion& c) {
        if (!setup) {
            c.check(false, "trained setup unavailable (criterion 3 setup failed)");
            return;
        }
        criterion_embedding_contrast(c, *setup);
    });
    run(5, "classifier accuracy and exhaustive ensemble search", [&](Criterion& c) {
        if (!setup) {
            c.check(false, "trained setup unavailable (criterion 3 setup failed)");
            return;
        }
        criterion_classifier_ensemble(c, *setup);
    });
    run(6, "retry protocol: attempt cap, candidate schedule, oscillation", criterion_engine_protocol);
    run(7, "detection rate climbs the method ladder", criterion_method_trend);
    run(8, "optimized implementations match their oracles", criterion_oracle_equivalence);

    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
