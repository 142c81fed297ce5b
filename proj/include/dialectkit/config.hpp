#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialectkit/classifier.hpp"
#include "dialectkit/corpus.hpp"
#include "dialectkit/engine.hpp"
#include "dialectkit/errors.hpp"
#include "dialectkit/llm_client.hpp"
#include "dialectkit/retrieval.hpp"
#include "dialectkit/synthlang.hpp"

namespace dialectkit::config {

struct SynthSection {
    std::size_t vocab_size = 200;
    std::size_t per_class = 1200;
    std::size_t min_tokens = 12;
    std::size_t max_tokens = 18;
};

struct CurationSection {
    std::size_t per_class_cap = 1000;
    double divergence_threshold = 0.1;
    double train_fraction = 0.9;
    std::size_t test_pair_count = 100;
    std::size_t min_test_chars = 30;
};

struct ClassifierSection {
    int epochs = 4;
    double learning_rate = 0.5;
    double weight_decay = 0.01;
    int batch_size = 16;
};

struct RetrievalSection {
    double k1 = 1.2;
    double b = 0.75;
};

struct EngineSection {
    int max_attempts = 3;
    std::vector<int> k_schedule{3, 4, 5};
    int icl_k = 10;
    double temperature = 0.7;
    std::size_t max_inflight = 1;
};

struct BackendSection {
    std::string kind = "scripted"; // "scripted" or "http"
    std::string persona = "responsive";
    llm::HttpBackendConfig http;
};

struct ExperimentConfig {
    std::uint64_t seed = 1337;
    SynthSection synth;
    CurationSection curation;
    ClassifierSection classifier;
    RetrievalSection retrieval;
    EngineSection engine;
    BackendSection backend;
};

inline void to_json(nlohmann::json& j, const SynthSection& s) {
    j = {{"vocab_size", s.vocab_size},
         {"per_class", s.per_class},
         {"min_tokens", s.min_tokens},
         {"max_tokens", s.max_tokens}};
}

inline void from_json(const nlohmann::json& j, SynthSection& s) {
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.per_class = j.value("per_class", s.per_class);
    s.min_tokens = j.value("min_tokens", s.min_tokens);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
}

inline void to_json(nlohmann::json& j, const CurationSection& s) {
    j = {{"per_class_cap", s.per_class_cap},
         {"divergence_threshold", s.divergence_threshold},
         {"train_fraction", s.train_fraction},
         {"test_pair_count", s.test_pair_count},
         {"min_test_chars", s.min_test_chars}};
}

inline void from_json(const nlohmann::json& j, CurationSection& s) {
    s.per_class_cap = j.value("per_class_cap", s.per_class_cap);
    s.divergence_threshold = j.value("divergence_threshold", s.divergence_threshold);
    s.train_fraction = j.value("train_fraction", s.train_fraction);
    s.test_pair_count = j.value("test_pair_count", s.test_pair_count);
    s.min_test_chars = j.value("min_test_chars", s.min_test_chars);
}

inline void to_json(nlohmann::json& j, const ClassifierSection& s) {
    j = {{"epochs", s.epochs},
         {"learning_rate", s.learning_rate},
         {"weight_decay", s.weight_decay},
         {"batch_size", s.batch_size}};
}

inline void from_json(const nlohmann::json& j, ClassifierSection& s) {
    s.epochs = j.value("epochs", s.epochs);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.weight_decay = j.value("weight_decay", s.weight_decay);
    s.batch_size = j.value("batch_size", s.batch_size);
}

inline void to_json(nlohmann::json& j, const RetrievalSection& s) {
    j = {{"k1", s.k1}, {"b", s.b}};
}

inline void from_json(const nlohmann::json& j, RetrievalSection& s) {
    s.k1 = j.value("k1", s.k1);
    s.b = j.value("b", s.b);
}

inline void to_json(nlohmann::json& j, const EngineSection& s) {
    j = {{"max_attempts", s.max_attempts},
         {"k_schedule", s.k_schedule},
         {"icl_k", s.icl_k},
         {"temperature", s.temperature},
         {"max_inflight", s.max_inflight}};
}

inline void from_json(const nlohmann::json& j, EngineSection& s) {
    s.max_attempts = j.value("max_attempts", s.max_attempts);
    s.k_schedule = j.value("k_schedule", s.k_schedule);
    s.icl_k = j.value("icl_k", s.icl_k);
    s.temperature = j.value("temperature", s.temperature);
    s.max_inflight = j.value("max_inflight", s.max_inflight);
}

inline void to_json(nlohmann::json& j, const BackendSection& s) {
    j = {{"kind", s.kind},
         {"persona", s.persona},
         {"http",
          {{"host", s.http.host},
           {"port", s.http.port},
           {"path", s.http.path},
           {"model", s.http.model},
           {"api_key_env", s.http.api_key_env},
           {"timeout_ms", s.http.timeout_ms},
           {"max_retries", s.http.max_retries},
           {"backoff_ms", s.http.backoff_ms}}}};
}

inline void from_json(const nlohmann::json& j, BackendSection& s) {
    s.kind = j.value("kind", s.kind);
    s.persona = j.value("persona", s.persona);
    if (j.contains("http")) {
        const auto& h = j.at("http");
        s.http.host = h.value("host", s.http.host);
        s.http.port = h.value("port", s.http.port);
        s.http.path = h.value("path", s.http.path);
        s.http.model = h.value("model", s.http.model);
        s.http.api_key_env = h.value("api_key_env", s.http.api_key_env);
        s.http.timeout_ms = h.value("timeout_ms", s.http.timeout_ms);
        s.http.max_retries = h.value("max_retries", s.http.max_retries);
        s.http.backoff_ms = h.value("backoff_ms", s.http.backoff_ms);
    }
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = {{"seed", c.seed},          {"synth", c.synth},
         {"curation", c.curation},  {"classifier", c.classifier},
         {"retrieval", c.retrieval}, {"engine", c.engine},
         {"backend", c.backend}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c.seed = j.value("seed", c.seed);
    if (j.contains("synth")) j.at("synth").get_to(c.synth);
    if (j.contains("curation")) j.at("curation").get_to(c.curation);
    if (j.contains("classifier")) j.at("classifier").get_to(c.classifier);
    if (j.contains("retrieval")) j.at("retrieval").get_to(c.retrieval);
    if (j.contains("engine")) j.at("engine").get_to(c.engine);
    if (j.contains("backend")) j.at("backend").get_to(c.backend);
}

inline void validate(const ExperimentConfig& c) {
    synthlang::SynthConfig sc{c.synth.vocab_size, c.synth.min_tokens, c.synth.max_tokens, c.seed};
    synthlang::validate(sc);
    corpus::CurationConfig cc;
    cc.per_class_cap = c.curation.per_class_cap;
    cc.divergence_threshold = c.curation.divergence_threshold;
    cc.train_fraction = c.curation.train_fraction;
    cc.test_pair_count = c.curation.test_pair_count;
    cc.min_test_chars = c.curation.min_test_chars;
    corpus::validate(cc);
    classifier::TrainConfig tc;
    tc.epochs = c.classifier.epochs;
    tc.learning_rate = c.classifier.learning_rate;
    tc.weight_decay = c.classifier.weight_decay;
    tc.batch_size = c.classifier.batch_size;
    classifier::validate(tc);
    retrieval::validate(retrieval::Bm25Params{c.retrieval.k1, c.retrieval.b});
    if (c.backend.kind != "scripted" && c.backend.kind != "http")
        throw ConfigError("config: backend.kind must be scripted or http");
    if (c.backend.kind == "scripted" && !llm::persona_by_name(c.backend.persona))
        throw ConfigError("config: unknown persona " + c.backend.persona);
    if (c.backend.kind == "http") llm::validate(c.backend.http);
    for (const auto& m : engine::method_grid(c.engine.icl_k, c.engine.max_attempts,
                                             c.engine.k_schedule, c.engine.temperature))
        engine::validate(m);
    if (c.engine.max_inflight == 0) throw ConfigError("config: engine.max_inflight must be >= 1");
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    ExperimentConfig c;
    try {
        in >> j;
        c = j.get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    validate(c);
    return c;
}

inline std::string dump_config(const ExperimentConfig& c) {
    return nlohmann::json(c).dump(2) + "\n";
}

} // namespace dialectkit::config
