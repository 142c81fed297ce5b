#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialectkit/classifier.hpp"
#include "dialectkit/errors.hpp"
#include "dialectkit/llm_client.hpp"
#include "dialectkit/metrics.hpp"
#include "dialectkit/retrieval.hpp"
#include "dialectkit/rng.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::engine {

enum class PromptMode { ZeroShot, InContext };
enum class RefineMode { None, Single, Multi };

struct MethodConfig {
    std::string name;
    PromptMode prompt_mode = PromptMode::ZeroShot;
    RefineMode refine_mode = RefineMode::None;
    int max_attempts = 3;
    std::vector<int> k_schedule{3, 4, 5};
    int icl_k = 10;
    double temperature = 0.7;
};

inline void validate(const MethodConfig& cfg) {
    if (cfg.max_attempts < 1) throw ConfigError("method " + cfg.name + ": max_attempts must be >= 1");
    if (cfg.prompt_mode == PromptMode::InContext && cfg.icl_k < 1)
        throw ConfigError("method " + cfg.name + ": icl_k must be >= 1");
    if (cfg.temperature < 0.0) throw ConfigError("method " + cfg.name + ": temperature must be >= 0");
    if (cfg.refine_mode == RefineMode::Multi) {
        if (cfg.k_schedule.size() < static_cast<std::size_t>(cfg.max_attempts))
            throw ConfigError("method " + cfg.name + ": k_schedule shorter than max_attempts");
        for (std::size_t i = 0; i < cfg.k_schedule.size(); ++i) {
            if (cfg.k_schedule[i] < 1)
                throw ConfigError("method " + cfg.name + ": k_schedule entries must be >= 1");
            if (i > 0 && cfg.k_schedule[i] <= cfg.k_schedule[i - 1])
                throw ConfigError("method " + cfg.name + ": k_schedule must be strictly increasing");
        }
    }
}

/// The standard six-method grid.
inline std::vector<MethodConfig> method_grid(int icl_k = 10, int max_attempts = 3,
                                             std::vector<int> k_schedule = {3, 4, 5},
                                             double temperature = 0.7) {
    std::vector<MethodConfig> grid;
    const auto add = [&](std::string name, PromptMode pm, RefineMode rm) {
        MethodConfig c;
        c.name = std::move(name);
        c.prompt_mode = pm;
        c.refine_mode = rm;
        c.max_attempts = max_attempts;
        c.k_schedule = k_schedule;
        c.icl_k = icl_k;
        c.temperature = temperature;
        validate(c);
        grid.push_back(std::move(c));
    };
    add("ZS", PromptMode::ZeroShot, RefineMode::None);
    add("ZS+Refine-S", PromptMode::ZeroShot, RefineMode::Single);
    add("ZS+Refine-M", PromptMode::ZeroShot, RefineMode::Multi);
    add("ICL", PromptMode::InContext, RefineMode::None);
    add("ICL+Refine-S", PromptMode::InContext, RefineMode::Single);
    add("ICL+Refine-M", PromptMode::InContext, RefineMode::Multi);
    return grid;
}

struct Prompt {
    std::string system;
    std::string user;
};

struct FeedbackState {
    DialectLabel wrong_label;
    std::string prev_output;
    bool oscillation = false;
    DialectLabel last_wrong_label;
};

using Example = std::pair<std::string, std::string>; // (standard, dialect)

/// Prompt text is a fixed contract; every byte below is load-bearing for
/// scripted-backend parsing and trace reproducibility.
inline Prompt build_prompt(PromptMode mode, const std::string& source, const DialectLabel& target,
                           const std::vector<Example>& examples, const FeedbackState* feedback) {
    Prompt p;
    p.system = "You are a translation assistant that translates standard Korean into " + target +
               ".\nOutput only the translated sentence; do not include any explanations.";
    std::string base;
    if (mode == PromptMode::InContext) {
        if (examples.empty()) throw MissingExamples("build_prompt: in-context mode with no examples");
        for (const auto& [std_side, dia_side] : examples)
            base += "Example:\nA: " + std_side + "\nB: " + dia_side + "\n\n";
    }
    base += "Input sentence: " + source + "\nTranslation:";
    if (feedback == nullptr) {
        p.user = std::move(base);
        return p;
    }
    std::string block = "[Feedback]\n- The previous output was classified as " +
                        feedback->wrong_label + " instead of the target dialect " + target +
                        ".\n- Please revise the translation to clearly reflect " + target +
                        " features.\n- Previous output : " + feedback->prev_output;
    if (feedback->oscillation)
        block += "\nThe output oscillates between " + feedback->last_wrong_label + " and " +
                 feedback->wrong_label + ".\nPlease make the " + target +
                 "-specific features more explicit.";
    p.user = block + "\n\n" + base;
    return p;
}

/// Highest posterior mass on the target class wins; ties go to the lowest
/// index.
template <typename Model>
std::pair<std::size_t, classifier::Prediction> select_best(const std::vector<std::string>& candidates,
                                                           const Model& model,
                                                           const DialectLabel& target) {
    if (candidates.empty()) throw DataError("select_best: no candidates");
    const std::size_t t = model.label_index(target);
    std::size_t best = 0;
    classifier::Prediction best_pred;
    double best_mass = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto pred = model.predict_proba(candidates[i]);
        if (pred.posterior[t] > best_mass) {
            best_mass = pred.posterior[t];
            best = i;
            best_pred = std::move(pred);
        }
    }
    return {best, std::move(best_pred)};
}

struct Attempt {
    int index = 1; // 1-based
    std::string system;
    std::string user;
    std::vector<std::string> candidates;
    std::size_t selected_index = 0;
    std::string selected;
    DialectLabel predicted;
    std::map<DialectLabel, double> posterior;
    bool verified = false;
};

struct RefineTrace {
    std::string item_id;
    std::string source;
    std::string reference;
    DialectLabel target;
    std::string method;
    std::vector<Attempt> attempts;
    std::string final_output;
    bool success = false;
    int attempts_used = 0;
    bool oscillation_flagged = false;
    double dfs = 0.0; // logit-space divergence of final_output
};

inline int candidates_for_attempt(const MethodConfig& cfg, int attempt) {
    if (cfg.refine_mode == RefineMode::Multi)
        return cfg.k_schedule[static_cast<std::size_t>(attempt - 1)];
    return 1;
}

/// One item through the verify-feedback-retry loop. Feedback carries only
/// the latest wrong label and output; the oscillation notice is added to the
/// prompt following any two consecutive failures with distinct wrong labels.
/// On total failure the final output is the last attempt's selection.
template <typename Model>
RefineTrace refine(const CorpusRecord& item, llm::Backend& backend, const Model& model,
                   const MethodConfig& cfg, const std::vector<Example>& examples,
                   std::uint64_t run_seed) {
    validate(cfg);
    RefineTrace tr;
    tr.item_id = item.id;
    tr.source = item.standard;
    tr.reference = item.dialect;
    tr.target = item.label;
    tr.method = cfg.name;

    const auto& labels = model.labels();
    std::optional<FeedbackState> fb;
    const int attempts_max = cfg.refine_mode == RefineMode::None ? 1 : cfg.max_attempts;
    for (int a = 1; a <= attempts_max; ++a) {
        const Prompt prompt =
            build_prompt(cfg.prompt_mode, item.standard, item.label, examples, fb ? &*fb : nullptr);
        llm::GenerationRequest req;
        req.system = prompt.system;
        req.user = prompt.user;
        req.n = candidates_for_attempt(cfg, a);
        req.temperature = cfg.temperature;
        req.seed = mix_seed(run_seed, fnv1a64(item.id), static_cast<std::uint64_t>(a));
        auto candidates = backend.generate(req);
        if (candidates.size() != static_cast<std::size_t>(req.n))
            throw BackendFailure("refine: backend returned " + std::to_string(candidates.size()) +
                                 " of " + std::to_string(req.n) + " candidates");
        auto [sel, pred] = select_best(candidates, model, item.label);

        Attempt at;
        at.index = a;
        at.system = prompt.system;
        at.user = prompt.user;
        at.candidates = std::move(candidates);
        at.selected_index = sel;
        at.selected = at.candidates[sel];
        at.predicted = pred.label;
        for (std::size_t c = 0; c < labels.size(); ++c) at.posterior[labels[c]] = pred.posterior[c];
        at.verified = pred.label == item.label;
        tr.attempts.push_back(std::move(at));
        if (tr.attempts.back().verified) break;

        FeedbackState next;
        next.wrong_label = pred.label;
        next.prev_output = tr.attempts.back().selected;
        if (fb && fb->wrong_label != next.wrong_label) {
            next.oscillation = true;
            next.last_wrong_label = fb->wrong_label;
            tr.oscillation_flagged = true;
        }
        fb = std::move(next);
    }
    tr.attempts_used = static_cast<int>(tr.attempts.size());
    tr.success = tr.attempts.back().verified;
    tr.final_output = tr.attempts.back().selected;
    return tr;
}

template <typename Model>
double trace_dfs(const Model& model, const RefineTrace& tr) {
    metrics::DfsInput in;
    in.e_h = model.embed(tr.final_output, classifier::EmbedMode::Logit);
    in.e_r = model.embed(tr.reference, classifier::EmbedMode::Logit);
    in.e_s = model.embed(tr.source, classifier::EmbedMode::Logit);
    return metrics::dfs(in);
}

/// Runs one method over the test items, bounded-concurrently, preserving
/// item order in the returned traces. In-context examples come from the
/// index, queried with the item's standard side.
template <typename Model>
std::vector<RefineTrace> run_method(const std::vector<CorpusRecord>& test_items,
                                    llm::Backend& backend, const Model& model,
                                    const MethodConfig& cfg, const retrieval::Bm25Index* icl_index,
                                    std::uint64_t run_seed, std::size_t max_inflight = 1) {
    validate(cfg);
    if (cfg.prompt_mode == PromptMode::InContext && icl_index == nullptr)
        throw ConfigError("run_method " + cfg.name + ": in-context mode needs a retrieval index");
    if (max_inflight == 0) throw ConfigError("run_method: max_inflight must be >= 1");

    backend.begin_run();
    std::vector<RefineTrace> traces(test_items.size());
    std::vector<std::exception_ptr> errors(test_items.size());

    const auto work = [&](std::size_t i) {
        try {
            std::vector<Example> examples;
            if (cfg.prompt_mode == PromptMode::InContext) {
                for (const auto& hit :
                     icl_index->top_k(test_items[i].standard, static_cast<std::size_t>(cfg.icl_k))) {
                    const auto& rec = icl_index->pool()[hit.doc];
                    examples.emplace_back(rec.standard, rec.dialect);
                }
            }
            traces[i] = refine(test_items[i], backend, model, cfg, examples, run_seed);
            traces[i].dfs = trace_dfs(model, traces[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    for (std::size_t start = 0; start < test_items.size(); start += max_inflight) {
        const std::size_t stop = std::min(test_items.size(), start + max_inflight);
        if (stop - start == 1) {
            work(start);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t i = start; i < stop; ++i) pool.emplace_back(work, i);
            for (auto& t : pool) t.join();
        }
        for (std::size_t i = start; i < stop; ++i)
            if (errors[i]) std::rethrow_exception(errors[i]);
    }
    return traces;
}

/// Corpus metrics over a finished run. TDR counts final outputs whose
/// recorded prediction hit the target class.
inline metrics::MetricReport aggregate_traces(const std::vector<RefineTrace>& traces,
                                              const DialectLabel& target) {
    if (traces.empty()) throw DataError("aggregate_traces: no traces");
    metrics::MetricReport rep;
    rep.method = traces.front().method;
    rep.dialect = target;
    std::vector<std::string> hyps, refs;
    std::vector<DialectLabel> finals;
    double dfs_sum = 0.0, attempts_sum = 0.0;
    for (const auto& tr : traces) {
        hyps.push_back(tr.final_output);
        refs.push_back(tr.reference);
        finals.push_back(tr.attempts.back().predicted);
        dfs_sum += tr.dfs;
        attempts_sum += tr.attempts_used;
    }
    rep.chrf_pp = metrics::chrf_pp(hyps, refs);
    rep.bleu = metrics::bleu(hyps, refs);
    rep.tdr = metrics::tdr(finals, target);
    rep.dfs_mean = dfs_sum / static_cast<double>(traces.size());
    rep.mean_attempts = attempts_sum / static_cast<double>(traces.size());
    return rep;
}

inline void to_json(nlohmann::json& j, const Attempt& a) {
    j = nlohmann::json{{"index", a.index},
                       {"system", a.system},
                       {"user", a.user},
                       {"candidates", a.candidates},
                       {"selected_index", a.selected_index},
                       {"selected", a.selected},
                       {"predicted", a.predicted},
                       {"posterior", a.posterior},
                       {"verified", a.verified}};
}

inline void from_json(const nlohmann::json& j, Attempt& a) {
    j.at("index").get_to(a.index);
    j.at("system").get_to(a.system);
    j.at("user").get_to(a.user);
    j.at("candidates").get_to(a.candidates);
    j.at("selected_index").get_to(a.selected_index);
    j.at("selected").get_to(a.selected);
    j.at("predicted").get_to(a.predicted);
    j.at("posterior").get_to(a.posterior);
    j.at("verified").get_to(a.verified);
}

inline void to_json(nlohmann::json& j, const RefineTrace& t) {
    j = nlohmann::json{{"item_id", t.item_id},
                       {"source", t.source},
                       {"reference", t.reference},
                       {"target", t.target},
                       {"method", t.method},
                       {"attempts", t.attempts},
                       {"final_output", t.final_output},
                       {"success", t.success},
                       {"attempts_used", t.attempts_used},
                       {"oscillation_flagged", t.oscillation_flagged},
                       {"dfs", t.dfs}};
}

inline void from_json(const nlohmann::json& j, RefineTrace& t) {
    j.at("item_id").get_to(t.item_id);
    j.at("source").get_to(t.source);
    j.at("reference").get_to(t.reference);
    j.at("target").get_to(t.target);
    j.at("method").get_to(t.method);
    j.at("attempts").get_to(t.attempts);
    j.at("final_output").get_to(t.final_output);
    j.at("success").get_to(t.success);
    j.at("attempts_used").get_to(t.attempts_used);
    j.at("oscillation_flagged").get_to(t.oscillation_flagged);
    j.at("dfs").get_to(t.dfs);
}

inline void write_traces(const std::string& path, const std::vector<RefineTrace>& traces) {
    write_jsonl(path, traces);
}

inline std::vector<RefineTrace> read_traces(const std::string& path) {
    return read_jsonl<RefineTrace>(path);
}

/// Items some baseline run failed to verify; the working set for targeted
/// re-runs.
inline std::vector<CorpusRecord> hard_subset(const std::vector<CorpusRecord>& test_items,
                                             const std::vector<RefineTrace>& baseline) {
    std::map<std::string, const CorpusRecord*> by_id;
    for (const auto& item : test_items) by_id[item.id] = &item;
    std::vector<CorpusRecord> out;
    for (const auto& tr : baseline) {
        if (tr.success) continue;
        const auto it = by_id.find(tr.item_id);
        if (it == by_id.end())
            throw MismatchedTestSets("hard_subset: trace item " + tr.item_id + " not in test set");
        out.push_back(*it->second);
    }
    return out;
}

} // namespace dialectkit::engine
