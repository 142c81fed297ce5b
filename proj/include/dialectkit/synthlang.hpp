#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialectkit/errors.hpp"
#include "dialectkit/rng.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"

namespace dialectkit::synthlang {

enum class RuleKind { Suffix, Token };

struct RewriteRule {
    std::string pattern;
    std::string replacement;
    RuleKind kind = RuleKind::Suffix;
};

struct SyntheticDialectSpec {
    DialectLabel name;
    std::vector<RewriteRule> rules;
    std::vector<std::string> marker_tokens;
};

inline void validate(const SyntheticDialectSpec& spec) {
    if (spec.name.empty()) throw ConfigError("dialect spec: empty name");
    if (spec.rules.empty()) throw ConfigError("dialect spec " + spec.name + ": no rules");
    std::set<std::string> patterns;
    for (const auto& r : spec.rules) {
        if (r.pattern.empty()) throw ConfigError("dialect spec " + spec.name + ": empty pattern");
        if (r.replacement == r.pattern)
            throw ConfigError("dialect spec " + spec.name + ": identity rule " + r.pattern);
        if (!patterns.insert(r.pattern).second)
            throw ConfigError("dialect spec " + spec.name + ": duplicate pattern " + r.pattern);
    }
}

/// Marker tokens must be unique across specs so class membership stays
/// decidable from surface text alone.
inline void validate(const std::vector<SyntheticDialectSpec>& specs) {
    std::set<std::string> markers;
    for (const auto& s : specs) {
        validate(s);
        for (const auto& m : s.marker_tokens)
            if (!markers.insert(m).second)
                throw ConfigError("dialect specs: marker " + m + " appears in two specs");
    }
}

/// The synthetic standard language: content words followed by a two-particle
/// ender cluster drawn from {da, yo, ne, sa}. The cluster is the rewrite
/// surface the dialect rules target; keeping both sites adjacent at the end
/// bounds how many n-gram windows a full rewrite can break.
inline const std::vector<std::string>& ender_particles() {
    static const std::vector<std::string> e{"da", "yo", "ne", "sa"};
    return e;
}

/// Replacements are 15-char dialect-branded tokens. None contains any ender
/// particle as a substring, so applying a spec twice is a no-op and marker
/// counts stay exact.
inline std::vector<SyntheticDialectSpec> default_specs() {
    auto make = [](std::string name, std::string m_da, std::string m_yo, std::string m_ne) {
        SyntheticDialectSpec s;
        s.name = std::move(name);
        s.rules = {{"da", m_da, RuleKind::Suffix},
                   {"yo", m_yo, RuleKind::Suffix},
                   {"ne", m_ne, RuleKind::Suffix},
                   {"sa", m_da, RuleKind::Suffix}};
        s.marker_tokens = {m_da, m_yo, m_ne};
        return s;
    };
    std::vector<SyntheticDialectSpec> specs;
    specs.push_back(make("ravel", "ravelkorimsutol", "raveltunagorbek", "ravelpindroksun"));
    specs.push_back(make("zumpet", "zumpetkarilmost", "zumpetdurilvask", "zumpetmirgalhot"));
    specs.push_back(make("golsha", "golshaturimvelk", "golshaprindekor", "golshamukeltorv"));
    validate(specs);
    return specs;
}

/// Deterministic CV-syllable vocabulary; words that end in an ender particle
/// are rejected so rewrite sites occur only where the grammar puts them.
inline std::vector<std::string> generate_vocab(std::size_t size, std::uint64_t seed) {
    static constexpr std::string_view consonants = "bdfghklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    std::vector<std::string> vocab;
    std::set<std::string> seen;
    Rng rng(mix_seed(seed, 0x70cab));
    while (vocab.size() < size) {
        const std::size_t syllables = 2 + rng.below(2);
        std::string w;
        for (std::size_t s = 0; s < syllables; ++s) {
            w += consonants[rng.below(consonants.size())];
            w += vowels[rng.below(vowels.size())];
        }
        bool bad = false;
        for (const auto& e : ender_particles())
            if (text::ends_with(w, e)) bad = true;
        if (bad || !seen.insert(w).second) continue;
        vocab.push_back(std::move(w));
    }
    return vocab;
}

struct SynthConfig {
    std::size_t vocab_size = 200;
    std::size_t min_tokens = 12;
    std::size_t max_tokens = 18;
    std::uint64_t seed = 1337;
};

inline void validate(const SynthConfig& c) {
    if (c.vocab_size < 10) throw ConfigError("synthlang: vocab_size must be >= 10");
    if (c.min_tokens < 4 || c.min_tokens > c.max_tokens)
        throw ConfigError("synthlang: need 4 <= min_tokens <= max_tokens");
}

inline std::vector<std::string> generate_standard_corpus(const SynthConfig& cfg,
                                                         std::size_t sentence_count) {
    validate(cfg);
    const auto vocab = generate_vocab(cfg.vocab_size, cfg.seed);
    const auto& enders = ender_particles();
    std::vector<std::string> out;
    out.reserve(sentence_count);
    for (std::size_t i = 0; i < sentence_count; ++i) {
        Rng rng(mix_seed(cfg.seed, 0x5e27, i));
        const std::size_t len = cfg.min_tokens + rng.below(cfg.max_tokens - cfg.min_tokens + 1);
        std::vector<std::string> tokens;
        tokens.reserve(len);
        for (std::size_t t = 0; t + 2 < len; ++t) tokens.push_back(vocab[rng.below(vocab.size())]);
        tokens.push_back(enders[rng.below(enders.size())]);
        tokens.push_back(enders[rng.below(enders.size())]);
        out.push_back(text::join(tokens));
    }
    return out;
}

inline const RewriteRule* match_rule(const SyntheticDialectSpec& spec, std::string_view token) {
    for (const auto& r : spec.rules) {
        if (r.kind == RuleKind::Token ? token == r.pattern : text::ends_with(token, r.pattern))
            return &r;
    }
    return nullptr;
}

inline std::string apply_rule(const RewriteRule& rule, std::string_view token) {
    if (rule.kind == RuleKind::Token) return rule.replacement;
    std::string out(token.substr(0, token.size() - rule.pattern.size()));
    out += rule.replacement;
    return out;
}

/// Each matching site is rewritten independently with probability p_apply,
/// in token order, from a stream derived from (seed, sentence, spec name).
inline std::string apply_dialect(std::string_view sentence, const SyntheticDialectSpec& spec,
                                 double p_apply, std::uint64_t seed) {
    Rng rng(mix_seed(seed, fnv1a64(sentence), fnv1a64(spec.name)));
    auto tokens = text::tokenize(sentence);
    for (auto& tok : tokens) {
        const RewriteRule* r = match_rule(spec, tok);
        if (r != nullptr && rng.bernoulli(p_apply)) tok = apply_rule(*r, tok);
    }
    return text::join(tokens);
}

/// Rewrites every matching site, alternating between the two specs starting
/// from a seeded pick, so any sentence with >= 2 sites carries surface
/// evidence of both dialects.
inline std::string mix_dialects(std::string_view sentence, const SyntheticDialectSpec& spec_a,
                                const SyntheticDialectSpec& spec_b, std::uint64_t seed) {
    Rng rng(mix_seed(seed, fnv1a64(sentence), fnv1a64(spec_a.name), fnv1a64(spec_b.name)));
    std::size_t turn = rng.below(2);
    auto tokens = text::tokenize(sentence);
    for (auto& tok : tokens) {
        const RewriteRule* ra = match_rule(spec_a, tok);
        const RewriteRule* rb = match_rule(spec_b, tok);
        if (ra == nullptr && rb == nullptr) continue;
        const RewriteRule* pick = nullptr;
        if (ra != nullptr && rb != nullptr) {
            pick = (turn % 2 == 0) ? ra : rb;
            ++turn;
        } else {
            pick = (ra != nullptr) ? ra : rb;
        }
        tok = apply_rule(*pick, tok);
    }
    return text::join(tokens);
}

/// Full labeled corpus: per_class records for Standard, each dialect spec,
/// and a mixed-dialect Unknown class. Every record gets its own sentence.
inline std::vector<CorpusRecord> generate_labeled_corpus(
    const std::vector<SyntheticDialectSpec>& specs, std::size_t per_class, const SynthConfig& cfg) {
    validate(specs);
    if (specs.size() < 2)
        throw ConfigError("generate_labeled_corpus: need >= 2 dialect specs for the Unknown class");

    const std::size_t total = per_class * (specs.size() + 2);
    const auto sentences = generate_standard_corpus(cfg, total);
    std::vector<CorpusRecord> out;
    out.reserve(total);
    std::size_t cursor = 0;

    auto next_id = [](const std::string& label, std::size_t i) {
        std::string n = std::to_string(i);
        return label + "-" + std::string(6 - std::min<std::size_t>(6, n.size()), '0') + n;
    };

    for (std::size_t i = 0; i < per_class; ++i) {
        const auto& s = sentences[cursor++];
        out.push_back({next_id(kStandardLabel, i), s, s, kStandardLabel});
    }
    for (const auto& spec : specs) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const auto& s = sentences[cursor++];
            out.push_back({next_id(spec.name, i), s, apply_dialect(s, spec, 1.0, cfg.seed), spec.name});
        }
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        const auto& s = sentences[cursor++];
        Rng rng(mix_seed(cfg.seed, 0x0c71, i));
        const std::size_t a = rng.below(specs.size());
        std::size_t b = rng.below(specs.size() - 1);
        if (b >= a) ++b;
        out.push_back({next_id(kUnknownLabel, i), s,
                       mix_dialects(s, specs[a], specs[b], mix_seed(cfg.seed, 0x0c72, i)),
                       kUnknownLabel});
    }
    return out;
}

} // namespace dialectkit::synthlang
