#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dialectkit/errors.hpp"
#include "dialectkit/llm_client.hpp"

namespace dialectkit::llm {

/// Chat-completions client. Transport faults and 5xx responses are retried
/// up to max_retries times with linear backoff; these retries are transport
/// bookkeeping, not refinement attempts. 4xx responses fail immediately.
class HttpBackend final : public Backend {
  public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

    std::string name() const override { return "http:" + cfg_.model; }

    std::vector<std::string> generate(const GenerationRequest& req) override {
        validate(req);
        const nlohmann::json payload = {
            {"model", cfg_.model},
            {"messages",
             {{{"role", "system"}, {"content", req.system}},
              {{"role", "user"}, {"content", req.user}}}},
            {"n", req.n},
            {"temperature", req.temperature},
            {"seed", req.seed},
        };
        const std::string body = payload.dump();

        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0')
            headers.emplace("Authorization", std::string("Bearer ") + key);

        httplib::Client client(cfg_.host, cfg_.port);
        client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
        client.set_read_timeout(0, cfg_.timeout_ms * 1000LL);
        client.set_write_timeout(0, cfg_.timeout_ms * 1000LL);

        httplib::Result res;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms * attempt));
            res = client.Post(cfg_.path, headers, body, "application/json");
            if (res && res->status < 500) break;
        }
        if (!res)
            throw BackendFailure("http backend: transport failure after " +
                                 std::to_string(cfg_.max_retries + 1) + " tries: " +
                                 httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw BackendFailure("http backend: status " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
        return parse_choices(res->body, req.n);
    }

  private:
    static std::vector<std::string> parse_choices(const std::string& body, int n) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendFailure(std::string("http backend: malformed response JSON: ") + e.what());
        }
        if (!doc.contains("choices") || !doc["choices"].is_array())
            throw BackendFailure("http backend: response has no choices array");
        std::vector<std::string> out;
        for (const auto& choice : doc["choices"]) {
            if (!choice.contains("message") || !choice["message"].contains("content") ||
                !choice["message"]["content"].is_string())
                throw BackendFailure("http backend: choice lacks message.content");
            out.push_back(choice["message"]["content"].get<std::string>());
        }
        if (out.size() != static_cast<std::size_t>(n))
            throw BackendFailure("http backend: asked for " + std::to_string(n) +
                                 " candidates, got " + std::to_string(out.size()));
        return out;
    }

    HttpBackendConfig cfg_;
};

} // namespace dialectkit::llm
