#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dialectkit/errors.hpp"
#include "dialectkit/rng.hpp"
#include "dialectkit/synthlang.hpp"
#include "dialectkit/text.hpp"

namespace dialectkit::llm {

struct GenerationRequest {
    std::string system;
    std::string user;
    int n = 1;
    double temperature = 0.0;
    std::uint64_t seed = 0;
};

inline void validate(const GenerationRequest& r) {
    if (r.n < 1) throw ConfigError("generation request: n must be >= 1");
    if (r.temperature < 0.0) throw ConfigError("generation request: temperature must be >= 0");
}

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Called once before a method run; clears any per-run state.
    virtual void begin_run() {}
    virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;
};

struct HttpBackendConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/v1/chat/completions";
    std::string model = "local-model";
    std::string api_key_env = "DIALECTKIT_API_KEY";
    int timeout_ms = 30000;
    int max_retries = 2; // transport retries beyond the first try
    int backoff_ms = 250;
};

inline void validate(const HttpBackendConfig& c) {
    if (c.host.empty() || c.path.empty() || c.model.empty())
        throw ConfigError("http backend: host, path, and model are required");
    if (c.port < 1 || c.port > 65535) throw ConfigError("http backend: port out of range");
    if (c.timeout_ms < 1 || c.max_retries < 0 || c.backoff_ms < 0)
        throw ConfigError("http backend: invalid timeout or retry settings");
}

/// Behavior knobs for the scripted translator. Compliance per rewrite site is
/// p_base, plus icl_boost when the prompt carries examples, plus
/// feedback_boost per prior attempt, clamped to [0,1]. With probability
/// confusion_p a candidate is produced in a wrong dialect entirely.
struct ScriptedPersona {
    std::string name = "responsive";
    double p_base = 0.06;
    double icl_boost = 0.14;
    double feedback_boost = 0.22;
    double confusion_p = 0.15;
};

inline void validate(const ScriptedPersona& p) {
    for (const double v : {p.p_base, p.icl_boost, p.feedback_boost, p.confusion_p})
        if (v < 0.0 || v > 1.0) throw ConfigError("persona " + p.name + ": rates must be in [0,1]");
}

inline ScriptedPersona responsive_persona() { return ScriptedPersona{}; }

/// Ignores all guidance and parrots the input.
inline ScriptedPersona copying_persona() { return ScriptedPersona{"copying", 0.0, 0.0, 0.0, 0.0}; }

inline std::optional<ScriptedPersona> persona_by_name(std::string_view name) {
    if (name == "responsive") return responsive_persona();
    if (name == "copying") return copying_persona();
    return std::nullopt;
}

/// Deterministic stand-in for a hosted model. It reads the target dialect,
/// source sentence, example blocks, and feedback markers straight out of the
/// prompt, then rewrites the source with the persona's compliance rate.
///
/// The attempt number feeds the feedback boost but is not recoverable from
/// the prompt (only the latest feedback block is ever present), so it is
/// inferred by counting distinct request seeds per source. Identical
/// (source, seed) requests reuse their memoized attempt, keeping generate()
/// idempotent. Use one backend per method run, or call begin_run() between
/// runs, so the counters start fresh.
class ScriptedBackend final : public Backend {
  public:
    ScriptedBackend(ScriptedPersona persona, std::vector<synthlang::SyntheticDialectSpec> specs)
        : persona_(std::move(persona)), specs_(std::move(specs)) {
        validate(persona_);
        synthlang::validate(specs_);
    }

    std::string name() const override { return "scripted:" + persona_.name; }

    void begin_run() override {
        const std::lock_guard<std::mutex> lock(mu_);
        seen_.clear();
    }

    std::vector<std::string> generate(const GenerationRequest& req) override {
        validate(req);
        const std::string source = parse_source(req.user);
        const bool icl = has_line(req.user, "Example:");
        const std::string target = parse_target_dialect(req.system);
        const synthlang::SyntheticDialectSpec* spec = find_spec(target);
        if (spec == nullptr)
            throw BackendFailure("scripted backend: prompt targets unknown dialect " + target);

        const std::size_t attempt = attempt_number(source, req.seed);
        double p = persona_.p_base + (icl ? persona_.icl_boost : 0.0) +
                   persona_.feedback_boost * static_cast<double>(attempt - 1);
        p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);

        std::vector<std::string> out;
        out.reserve(static_cast<std::size_t>(req.n));
        for (int c = 0; c < req.n; ++c) {
            Rng rng(mix_seed(req.seed, 0xca9d, static_cast<std::uint64_t>(c)));
            const synthlang::SyntheticDialectSpec* used = spec;
            if (specs_.size() > 1 && rng.bernoulli(persona_.confusion_p)) {
                std::size_t other = rng.below(specs_.size() - 1);
                const std::size_t self = spec_index(target);
                if (other >= self) ++other;
                used = &specs_[other];
            }
            out.push_back(render(source, *used, p, rng));
        }
        return out;
    }

  private:
    /// Zero applied sites returns the source verbatim, untouched by
    /// tokenization.
    static std::string render(const std::string& source,
                              const synthlang::SyntheticDialectSpec& spec, double p, Rng& rng) {
        auto tokens = text::tokenize(source);
        std::size_t applied = 0;
        for (auto& tok : tokens) {
            const auto* rule = synthlang::match_rule(spec, tok);
            if (rule != nullptr && rng.bernoulli(p)) {
                tok = synthlang::apply_rule(*rule, tok);
                ++applied;
            }
        }
        if (applied == 0) return source;
        return text::join(tokens);
    }

    static std::string parse_source(const std::string& user) {
        static constexpr std::string_view prefix = "Input sentence: ";
        std::size_t pos = user.rfind(prefix);
        while (pos != std::string::npos && pos != 0 && user[pos - 1] != '\n')
            pos = pos == 0 ? std::string::npos : user.rfind(prefix, pos - 1);
        if (pos == std::string::npos)
            throw BackendFailure("scripted backend: prompt has no input sentence line");
        const std::size_t start = pos + prefix.size();
        const std::size_t end = user.find('\n', start);
        return user.substr(start, end == std::string::npos ? std::string::npos : end - start);
    }

    static bool has_line(const std::string& user, std::string_view line) {
        std::size_t pos = 0;
        while (pos <= user.size()) {
            const std::size_t end = user.find('\n', pos);
            const std::size_t stop = end == std::string::npos ? user.size() : end;
            if (std::string_view(user).substr(pos, stop - pos) == line) return true;
            if (end == std::string::npos) break;
            pos = end + 1;
        }
        return false;
    }

    static std::string parse_target_dialect(const std::string& system) {
        static constexpr std::string_view marker = " into ";
        const std::size_t pos = system.find(marker);
        if (pos == std::string::npos)
            throw BackendFailure("scripted backend: system prompt names no target dialect");
        const std::size_t start = pos + marker.size();
        const std::size_t end = system.find_first_of(".\n", start);
        return system.substr(start, end == std::string::npos ? std::string::npos : end - start);
    }

    const synthlang::SyntheticDialectSpec* find_spec(const std::string& name) const {
        for (const auto& s : specs_)
            if (s.name == name) return &s;
        return nullptr;
    }

    std::size_t spec_index(const std::string& name) const {
        for (std::size_t i = 0; i < specs_.size(); ++i)
            if (specs_[i].name == name) return i;
        return 0;
    }

    std::size_t attempt_number(const std::string& source, std::uint64_t seed) {
        const std::lock_guard<std::mutex> lock(mu_);
        auto& seeds = seen_[source];
        for (std::size_t i = 0; i < seeds.size(); ++i)
            if (seeds[i] == seed) return i + 1;
        seeds.push_back(seed);
        return seeds.size();
    }

    ScriptedPersona persona_;
    std::vector<synthlang::SyntheticDialectSpec> specs_;
    std::mutex mu_;
    std::map<std::string, std::vector<std::uint64_t>> seen_;
};

} // namespace dialectkit::llm
