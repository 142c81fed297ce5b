#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dialectkit/dialectkit.hpp"
#include "dialectkit/http_backend.hpp"

namespace dk = dialectkit;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

dk::config::ExperimentConfig resolve_config(const CommonOpts& opts) {
    dk::config::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = dk::config::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    dk::config::validate(cfg);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--seed", opts.seed, "Override the experiment seed");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw dk::DataError("cannot create directory " + dir + ": " + ec.message());
}

dk::synthlang::SynthConfig synth_config(const dk::config::ExperimentConfig& cfg) {
    return {cfg.synth.vocab_size, cfg.synth.min_tokens, cfg.synth.max_tokens, cfg.seed};
}

dk::corpus::CurationConfig curation_config(const dk::config::ExperimentConfig& cfg) {
    dk::corpus::CurationConfig cc;
    cc.per_class_cap = cfg.curation.per_class_cap;
    cc.divergence_threshold = cfg.curation.divergence_threshold;
    cc.train_fraction = cfg.curation.train_fraction;
    cc.test_pair_count = cfg.curation.test_pair_count;
    cc.min_test_chars = cfg.curation.min_test_chars;
    cc.seed = cfg.seed;
    return cc;
}

std::vector<dk::classifier::MemberSpec> member_specs(const dk::config::ExperimentConfig& cfg) {
    auto specs = dk::classifier::default_member_specs();
    for (auto& s : specs) {
        s.train.epochs = cfg.classifier.epochs;
        s.train.learning_rate = cfg.classifier.learning_rate;
        s.train.weight_decay = cfg.classifier.weight_decay;
        s.train.batch_size = cfg.classifier.batch_size;
    }
    return specs;
}

std::unique_ptr<dk::llm::Backend> make_backend(const dk::config::ExperimentConfig& cfg) {
    if (cfg.backend.kind == "http") return std::make_unique<dk::llm::HttpBackend>(cfg.backend.http);
    const auto persona = dk::llm::persona_by_name(cfg.backend.persona);
    if (!persona) throw dk::ConfigError("unknown persona " + cfg.backend.persona);
    return std::make_unique<dk::llm::ScriptedBackend>(*persona, dk::synthlang::default_specs());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string model_fingerprint(const dk::classifier::Ensemble& model) {
    std::ostringstream os(std::ios::binary);
    model.save(os);
    return hex64(dk::fnv1a64(os.str()));
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> run_metadata(
    const dk::config::ExperimentConfig& cfg, const dk::llm::Backend& backend,
    const dk::classifier::Ensemble& model) {
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("seed", std::to_string(cfg.seed));
    meta.emplace_back("backend", backend.name());
    if (cfg.backend.kind == "scripted") {
        const auto p = *dk::llm::persona_by_name(cfg.backend.persona);
        meta.emplace_back("persona",
                          p.name + " (p_base=" + dk::report::fmt(p.p_base, 2) +
                              ", icl_boost=" + dk::report::fmt(p.icl_boost, 2) +
                              ", feedback_boost=" + dk::report::fmt(p.feedback_boost, 2) +
                              ", confusion_p=" + dk::report::fmt(p.confusion_p, 2) + ")");
    }
    meta.emplace_back("ensemble_fingerprint", model_fingerprint(model));
    meta.emplace_back("ensemble_members", std::to_string(model.members().size()));
    meta.emplace_back("bm25", "k1=" + dk::report::fmt(cfg.retrieval.k1, 2) +
                                  ", b=" + dk::report::fmt(cfg.retrieval.b, 2));
    meta.emplace_back("icl_k", std::to_string(cfg.engine.icl_k));
    meta.emplace_back("max_attempts", std::to_string(cfg.engine.max_attempts));
    meta.emplace_back("k_schedule", join_ints(cfg.engine.k_schedule));
    meta.emplace_back("temperature", dk::report::fmt(cfg.engine.temperature, 2));
    return meta;
}

std::string method_file_tag(std::string name) {
    for (auto& c : name)
        if (c == '+') c = '_';
    return name;
}

int cmd_synth(const CommonOpts& common, const std::string& out_path) {
    const auto cfg = resolve_config(common);
    const auto records = dk::synthlang::generate_labeled_corpus(dk::synthlang::default_specs(),
                                                                cfg.synth.per_class,
                                                                synth_config(cfg));
    dk::write_jsonl(out_path, records);
    std::cout << "wrote " << records.size() << " records to " << out_path << "\n";
    return 0;
}

int cmd_curate(const CommonOpts& common, const std::string& in_path, const std::string& out_dir) {
    const auto cfg = resolve_config(common);
    const auto records = dk::read_jsonl(in_path);
    const auto split = dk::corpus::curate(records, curation_config(cfg));
    ensure_dir(out_dir);
    dk::write_jsonl(out_dir + "/train.jsonl", split.train);
    dk::write_jsonl(out_dir + "/eval.jsonl", split.eval);
    dk::write_jsonl(out_dir + "/icl_pool.jsonl", split.icl_pool);
    dk::write_jsonl(out_dir + "/test.jsonl", split.test);
    std::cout << "train=" << split.train.size() << " eval=" << split.eval.size()
              << " icl_pool=" << split.icl_pool.size() << " test=" << split.test.size() << " -> "
              << out_dir << "\n";
    return 0;
}

int cmd_train(const CommonOpts& common, const std::string& train_path, const std::string& out_dir) {
    const auto cfg = resolve_config(common);
    const auto train_set = dk::read_jsonl(train_path);
    const auto specs = member_specs(cfg);
    ensure_dir(out_dir);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto model = dk::classifier::BaseClassifier::train(train_set, specs[i].feat,
                                                                 specs[i].train);
        const std::string path = out_dir + "/member_" + std::to_string(i) + ".bin";
        dk::io::save_file(path, [&](std::ostream& os) { model.save(os); });
        std::cout << "member " << i << ": ngrams " << specs[i].feat.ngram_min << "-"
                  << specs[i].feat.ngram_max << ", dim " << specs[i].feat.hash_dim << ", words "
                  << (specs[i].feat.word_unigrams ? "on" : "off") << ", seed "
                  << specs[i].train.seed << " -> " << path << "\n";
    }
    return 0;
}

std::vector<dk::classifier::BaseClassifier> load_members(const std::string& models_dir) {
    std::vector<std::string> paths;
    if (!fs::is_directory(models_dir)) throw dk::DataError("not a directory: " + models_dir);
    for (const auto& entry : fs::directory_iterator(models_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("member_", 0) == 0 && entry.path().extension() == ".bin")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw dk::DataError("no member_*.bin models in " + models_dir);
    std::vector<dk::classifier::BaseClassifier> members;
    for (const auto& p : paths)
        members.push_back(dk::io::load_file(
            p, [](std::istream& is) { return dk::classifier::BaseClassifier::load(is); }));
    return members;
}

int cmd_ensemble_search(const CommonOpts& common, const std::string& models_dir,
                        const std::string& eval_path, const std::string& out_dir) {
    resolve_config(common);
    const auto members = load_members(models_dir);
    const auto eval_set = dk::read_jsonl(eval_path);
    const auto entries = dk::classifier::ensemble_search(members, eval_set);

    dk::report::Row headers{"Rank", "Members", "Accuracy", "Macro-F1"};
    std::vector<dk::report::Row> rows;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::string ms;
        for (const auto m : entries[i].member_indices) {
            if (!ms.empty()) ms += "+";
            ms += std::to_string(m);
        }
        rows.push_back({std::to_string(i + 1), ms, dk::report::fmt(entries[i].accuracy, 4),
                        dk::report::fmt(entries[i].macro_f1, 4)});
    }
    ensure_dir(out_dir);
    dk::report::write_text(out_dir + "/search.md",
                           "## Ensemble subset search\n\n" +
                               dk::report::markdown_table(headers, rows));
    dk::report::write_text(out_dir + "/search.csv", dk::report::csv_table(headers, rows));

    const auto best = dk::classifier::make_ensemble(members, entries.front().member_indices);
    dk::io::save_file(out_dir + "/best_ensemble.bin", [&](std::ostream& os) { best.save(os); });

    const auto em = dk::classifier::evaluate_classifier(best, eval_set);
    std::cout << "best subset {" << rows.front()[1] << "}: accuracy "
              << dk::report::fmt(em.accuracy, 4) << ", macro-F1 " << dk::report::fmt(em.macro_f1, 4)
              << " -> " << out_dir << "/best_ensemble.bin\n";
    return 0;
}

int cmd_index(const CommonOpts& common, const std::string& pool_path, const std::string& dialect,
              const std::string& out_path) {
    const auto cfg = resolve_config(common);
    auto pool = dk::read_jsonl(pool_path);
    if (!dialect.empty()) {
        std::vector<dk::CorpusRecord> filtered;
        for (auto& r : pool)
            if (r.label == dialect) filtered.push_back(std::move(r));
        pool = std::move(filtered);
    }
    const dk::retrieval::Bm25Index index(std::move(pool),
                                         {cfg.retrieval.k1, cfg.retrieval.b});
    dk::io::save_file(out_path, [&](std::ostream& os) { index.save(os); });
    std::cout << "indexed " << index.pool().size() << " documents -> " << out_path << "\n";
    return 0;
}

struct RefineArgs {
    std::string test_path;
    std::string model_path;
    std::string pool_path;
    std::string method = "all";
    std::string dialect = "all";
    std::optional<int> icl_k;
    std::string out_dir;
};

int cmd_refine(const CommonOpts& common, const RefineArgs& args) {
    auto cfg = resolve_config(common);
    if (args.icl_k) cfg.engine.icl_k = *args.icl_k;
    dk::config::validate(cfg);

    const auto test_set = dk::read_jsonl(args.test_path);
    const auto model = dk::io::load_file(
        args.model_path, [](std::istream& is) { return dk::classifier::Ensemble::load(is); });
    const auto pool = dk::read_jsonl(args.pool_path);

    auto grid = dk::engine::method_grid(cfg.engine.icl_k, cfg.engine.max_attempts,
                                        cfg.engine.k_schedule, cfg.engine.temperature);
    if (args.method != "all") {
        const auto it = std::find_if(grid.begin(), grid.end(),
                                     [&](const auto& m) { return m.name == args.method; });
        if (it == grid.end()) throw dk::ConfigError("unknown method " + args.method);
        grid = {*it};
    }

    std::vector<dk::DialectLabel> dialects;
    {
        std::set<dk::DialectLabel> seen;
        for (const auto& r : test_set)
            if (dk::is_dialect_class(r.label)) seen.insert(r.label);
        if (args.dialect == "all") {
            dialects.assign(seen.begin(), seen.end());
        } else {
            if (seen.count(args.dialect) == 0)
                throw dk::DataError("test set has no items for dialect " + args.dialect);
            dialects = {args.dialect};
        }
    }
    if (dialects.empty()) throw dk::DataError("test set has no dialect-class items");

    ensure_dir(args.out_dir);
    std::vector<dk::metrics::MetricReport> reports;
    for (const auto& mcfg : grid) {
        for (const auto& dialect : dialects) {
            std::vector<dk::CorpusRecord> subset;
            for (const auto& r : test_set)
                if (r.label == dialect) subset.push_back(r);

            const auto backend = make_backend(cfg);
            std::optional<dk::retrieval::Bm25Index> icl_index;
            if (mcfg.prompt_mode == dk::engine::PromptMode::InContext) {
                std::vector<dk::CorpusRecord> dialect_pool;
                for (const auto& r : pool)
                    if (r.label == dialect) dialect_pool.push_back(r);
                icl_index.emplace(std::move(dialect_pool),
                                  dk::retrieval::Bm25Params{cfg.retrieval.k1, cfg.retrieval.b});
            }
            const auto run_seed =
                dk::mix_seed(cfg.seed, dk::fnv1a64(mcfg.name), dk::fnv1a64(dialect));
            const auto traces =
                dk::engine::run_method(subset, *backend, model, mcfg,
                                       icl_index ? &*icl_index : nullptr, run_seed,
                                       cfg.engine.max_inflight);
            dk::engine::write_traces(args.out_dir + "/traces_" + method_file_tag(mcfg.name) + "_" +
                                         dialect + ".jsonl",
                                     traces);
            reports.push_back(dk::engine::aggregate_traces(traces, dialect));
        }
    }

    const auto backend = make_backend(cfg);
    std::string md = "## Refinement results\n\n" + dk::report::method_metric_table(reports) +
                     "\n" + dk::report::tdr_matrix(reports) + "\n" +
                     dk::report::metadata_footer(run_metadata(cfg, *backend, model));
    dk::report::write_text(args.out_dir + "/report.md", md);
    dk::report::write_text(args.out_dir + "/report.csv", dk::report::method_metric_csv(reports));
    std::cout << dk::report::method_metric_table(reports);
    return 0;
}

struct ScoredRow {
    std::string source;
    std::string reference;
    std::string hypothesis;
    std::string prediction;
};

void from_json(const nlohmann::json& j, ScoredRow& r) {
    j.at("source").get_to(r.source);
    j.at("reference").get_to(r.reference);
    j.at("hypothesis").get_to(r.hypothesis);
    r.prediction = j.value("prediction", "");
}

void to_json(nlohmann::json& j, const ScoredRow& r) {
    j = nlohmann::json{{"source", r.source},
                       {"reference", r.reference},
                       {"hypothesis", r.hypothesis},
                       {"prediction", r.prediction}};
}

struct EvaluateArgs {
    std::string in_path;
    std::string model_path;
    std::string dialect;
    std::string out_dir;
};

int cmd_evaluate(const CommonOpts& common, const EvaluateArgs& args) {
    resolve_config(common);
    const auto rows = dk::read_jsonl<ScoredRow>(args.in_path);
    if (rows.empty()) throw dk::EmptyHypothesisSet("evaluate: no rows in " + args.in_path);

    std::optional<dk::classifier::Ensemble> model;
    if (!args.model_path.empty())
        model = dk::io::load_file(args.model_path, [](std::istream& is) {
            return dk::classifier::Ensemble::load(is);
        });

    std::vector<std::string> hyps, refs;
    for (const auto& r : rows) {
        hyps.push_back(r.hypothesis);
        refs.push_back(r.reference);
    }

    dk::report::Row headers{"#", "BLEU", "chrF++"};
    if (model) headers.push_back("DFS");
    std::vector<dk::report::Row> table;
    double dfs_sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        dk::report::Row row{std::to_string(i + 1),
                            dk::report::fmt(dk::metrics::bleu({rows[i].hypothesis},
                                                              {rows[i].reference}),
                                            2),
                            dk::report::fmt(dk::metrics::chrf_pp({rows[i].hypothesis},
                                                                 {rows[i].reference}),
                                            2)};
        if (model) {
            const double d = dk::metrics::dfs(
                model->embed(rows[i].hypothesis, dk::classifier::EmbedMode::Logit),
                model->embed(rows[i].reference, dk::classifier::EmbedMode::Logit),
                model->embed(rows[i].source, dk::classifier::EmbedMode::Logit));
            dfs_sum += d;
            row.push_back(dk::report::fmt(d, 4));
        }
        table.push_back(std::move(row));
    }

    std::string summary = "corpus BLEU " + dk::report::fmt(dk::metrics::bleu(hyps, refs), 2) +
                          ", corpus chrF++ " + dk::report::fmt(dk::metrics::chrf_pp(hyps, refs), 2);
    if (model) summary += ", mean DFS " +
                          dk::report::fmt(dfs_sum / static_cast<double>(rows.size()), 4);
    if (!args.dialect.empty()) {
        if (!model) throw dk::ConfigError("evaluate: --dialect needs --model for predictions");
        std::vector<dk::DialectLabel> preds;
        for (const auto& r : rows)
            preds.push_back(r.prediction.empty() ? model->predict_proba(r.hypothesis).label
                                                 : r.prediction);
        summary += ", TDR " + dk::report::fmt(dk::metrics::tdr(preds, args.dialect), 4);
    }

    const std::string md =
        "## Scored pairs\n\n" + dk::report::markdown_table(headers, table) + "\n" + summary + "\n";
    if (!args.out_dir.empty()) {
        ensure_dir(args.out_dir);
        dk::report::write_text(args.out_dir + "/evaluate.md", md);
        dk::report::write_text(args.out_dir + "/evaluate.csv",
                               dk::report::csv_table(headers, table));
    }
    std::cout << md;
    return 0;
}

int cmd_report(const CommonOpts& common, const std::vector<std::string>& trace_paths,
               const std::string& out_dir) {
    resolve_config(common);
    std::vector<dk::metrics::MetricReport> reports;
    for (const auto& path : trace_paths) {
        const auto traces = dk::engine::read_traces(path);
        reports.push_back(dk::report::report_from_traces(traces));
    }
    const std::string md = "## Aggregated runs\n\n" + dk::report::method_metric_table(reports) +
                           "\n" + dk::report::tdr_matrix(reports);
    ensure_dir(out_dir);
    dk::report::write_text(out_dir + "/report.md", md);
    dk::report::write_text(out_dir + "/report.csv", dk::report::method_metric_csv(reports));
    std::cout << md;
    return 0;
}

int cmd_hard_subset(const CommonOpts& common, const std::string& traces_path,
                    const std::string& test_path, const std::string& out_path) {
    resolve_config(common);
    const auto traces = dk::engine::read_traces(traces_path);
    const auto test_set = dk::read_jsonl(test_path);
    const auto hard = dk::engine::hard_subset(test_set, traces);
    dk::write_jsonl(out_path, hard);
    std::cout << "hard subset: " << hard.size() << " of " << traces.size() << " items -> "
              << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dialect translation refinement toolkit"};
    app.require_subcommand(0, 1);
    bool print_config = false;
    app.add_flag("--print-config", print_config, "Print the effective config as JSON and exit");
    CommonOpts root_common;
    app.add_option("--config", root_common.config_path, "JSON config file");
    app.add_option("--seed", root_common.seed, "Override the experiment seed");

    CommonOpts common;
    std::string synth_out = "records.jsonl";
    auto* synth = app.add_subcommand("synth", "Generate the synthetic labeled corpus");
    add_common(synth, common);
    synth->add_option("--out", synth_out, "Output JSONL path");

    std::string curate_in, curate_out = "data";
    auto* curate = app.add_subcommand("curate", "Filter, split, and sample the corpus");
    add_common(curate, common);
    curate->add_option("--in", curate_in, "Input records JSONL")->required();
    curate->add_option("--out-dir", curate_out, "Output directory");

    std::string train_in, train_out = "models";
    auto* train = app.add_subcommand("train", "Train the classifier members");
    add_common(train, common);
    train->add_option("--train", train_in, "Training split JSONL")->required();
    train->add_option("--out-dir", train_out, "Model output directory");

    std::string search_models = "models", search_eval, search_out = "models";
    auto* search = app.add_subcommand("ensemble-search", "Rank all member subsets on the eval split");
    add_common(search, common);
    search->add_option("--models-dir", search_models, "Directory with member_*.bin");
    search->add_option("--eval", search_eval, "Eval split JSONL")->required();
    search->add_option("--out-dir", search_out, "Output directory");

    std::string index_pool, index_dialect, index_out = "index.bin";
    auto* index = app.add_subcommand("index", "Build a retrieval index over a pool");
    add_common(index, common);
    index->add_option("--pool", index_pool, "Pool JSONL")->required();
    index->add_option("--dialect", index_dialect, "Keep only this class");
    index->add_option("--out", index_out, "Output index path");

    RefineArgs refine_args;
    auto* refine = app.add_subcommand("refine", "Run the translation experiment grid");
    add_common(refine, common);
    refine->add_option("--test", refine_args.test_path, "Test pairs JSONL")->required();
    refine->add_option("--model", refine_args.model_path, "Ensemble model file")->required();
    refine->add_option("--pool", refine_args.pool_path, "ICL pool JSONL")->required();
    refine->add_option("--method", refine_args.method, "Method name or 'all'");
    refine->add_option("--dialect", refine_args.dialect, "Dialect name or 'all'");
    refine->add_option("--icl-k", refine_args.icl_k, "In-context examples per prompt");
    refine->add_option("--out-dir", refine_args.out_dir, "Output directory")->required();

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score source/reference/hypothesis rows");
    add_common(evaluate, common);
    evaluate->add_option("--in", eval_args.in_path, "Scored rows JSONL")->required();
    evaluate->add_option("--model", eval_args.model_path, "Ensemble model for DFS and predictions");
    evaluate->add_option("--dialect", eval_args.dialect, "Target class for TDR");
    evaluate->add_option("--out-dir", eval_args.out_dir, "Output directory");

    std::vector<std::string> report_traces;
    std::string report_out = "reports";
    auto* report = app.add_subcommand("report", "Aggregate trace files into result tables");
    add_common(report, common);
    report->add_option("--traces", report_traces, "Trace JSONL files")->required();
    report->add_option("--out-dir", report_out, "Output directory");

    std::string hard_traces, hard_test, hard_out = "hard.jsonl";
    auto* hard = app.add_subcommand("hard-subset", "Extract items a baseline run failed to verify");
    add_common(hard, common);
    hard->add_option("--traces", hard_traces, "Baseline trace JSONL")->required();
    hard->add_option("--test", hard_test, "Test pairs JSONL")->required();
    hard->add_option("--out", hard_out, "Output JSONL path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (print_config) {
            std::cout << dk::config::dump_config(resolve_config(root_common));
            return 0;
        }
        if (synth->parsed()) return cmd_synth(common, synth_out);
        if (curate->parsed()) return cmd_curate(common, curate_in, curate_out);
        if (train->parsed()) return cmd_train(common, train_in, train_out);
        if (search->parsed()) return cmd_ensemble_search(common, search_models, search_eval, search_out);
        if (index->parsed()) return cmd_index(common, index_pool, index_dialect, index_out);
        if (refine->parsed()) return cmd_refine(common, refine_args);
        if (evaluate->parsed()) return cmd_evaluate(common, eval_args);
        if (report->parsed()) return cmd_report(common, report_traces, report_out);
        if (hard->parsed()) return cmd_hard_subset(common, hard_traces, hard_test, hard_out);
        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dk::exit_code_for(e);
    }
}
