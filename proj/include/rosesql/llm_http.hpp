#pragma once

// OpenAI-compatible HTTP backend: chat completions for generation, legacy
// completions with echo+logprobs for prompt-token scoring.

#include <httplib.h>

#include "rosesql/llm.hpp"

namespace rosesql {

class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)), gate_(cfg_.parallelism_limit) {
        if (const char* key = std::getenv("ROSESQL_API_KEY")) cfg_.api_key = key;
        if (const char* url = std::getenv("ROSESQL_BASE_URL")) cfg_.base_url = url;
    }

    bool can_generate() const override { return true; }
    // Scoring needs the server's completion echo/logprobs mode; declared
    // optimistically, a capability error surfaces on first rejection.
    bool can_score() const override { return !score_unsupported_; }

    GenerationResult generate(const std::string& system_text,
                              const std::string& user_text) override {
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["temperature"] = cfg_.temperature;
        body["max_tokens"] = cfg_.max_output_tokens;
        body["messages"] = {{{"role", "system"}, {"content", system_text}},
                            {{"role", "user"}, {"content", user_text}}};

        auto start = std::chrono::steady_clock::now();
        nlohmann::json resp = post_with_retry("/v1/chat/completions", body);
        auto end = std::chrono::steady_clock::now();

        GenerationResult r;
        r.latency_s = std::chrono::duration<double>(end - start).count();
        try {
            const auto& choice = resp.at("choices").at(0);
            r.text = choice.at("message").at("content").get<std::string>();
            r.truncated = choice.value("finish_reason", "") == "length";
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
        if (resp.contains("usage")) {
            r.input_tokens = resp["usage"].value("prompt_tokens", 0);
            r.output_tokens = resp["usage"].value("completion_tokens", 0);
            r.usage_reported = true;
        } else {
            r.input_tokens = estimate_tokens(system_text) + estimate_tokens(user_text);
            r.output_tokens = estimate_tokens(r.text);
        }
        return r;
    }

    std::vector<double> score_logprobs(const std::string& prefix,
                                       const std::string& continuation) override {
        if (continuation.empty()) throw DomainError("empty continuation");
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["prompt"] = prefix + continuation;
        body["max_tokens"] = 0;
        body["echo"] = true;
        body["logprobs"] = 0;
        body["temperature"] = 0.0;

        nlohmann::json resp = post_with_retry("/v1/completions", body);
        try {
            const auto& lp = resp.at("choices").at(0).at("logprobs");
            const auto& token_logprobs = lp.at("token_logprobs");
            const auto& offsets = lp.at("text_offset");
            std::vector<double> out;
            for (std::size_t i = 0; i < token_logprobs.size(); ++i) {
                if (offsets[i].get<std::size_t>() < prefix.size()) continue;
                if (token_logprobs[i].is_null()) continue;  // first token has no logprob
                out.push_back(token_logprobs[i].get<double>());
            }
            if (out.empty())
                throw CapabilityError("server returned no continuation logprobs");
            return out;
        } catch (const CapabilityError&) {
            score_unsupported_ = true;
            throw;
        } catch (const std::exception&) {
            score_unsupported_ = true;
            throw CapabilityError(
                "backend lacks prompt logprobs (echo mode); use the mock or a capable server");
        }
    }

private:
    nlohmann::json post_with_retry(const std::string& path, const nlohmann::json& body) {
        ParallelGate::Slot slot(gate_);
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
            httplib::Client client(cfg_.base_url);
            client.set_read_timeout(static_cast<time_t>(cfg_.timeout_s), 0);
            client.set_connection_timeout(static_cast<time_t>(cfg_.timeout_s), 0);
            httplib::Headers headers;
            if (!cfg_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post(path, headers, payload, "application/json");
            if (res && res->status == 200) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const std::exception& e) {
                    last_error = std::string("invalid JSON body: ") + e.what();
                }
            } else if (res) {
                last_error = "HTTP " + std::to_string(res->status);
            } else {
                last_error = "connection failed";
            }
            if (attempt < cfg_.max_attempts) {
                auto delay = cfg_.backoff_base_s * static_cast<double>(1 << (attempt - 1));
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
        throw TransportError("request to " + cfg_.base_url + path + " failed after " +
                             std::to_string(cfg_.max_attempts) + " attempts: " + last_error);
    }

    BackendConfig cfg_;
    ParallelGate gate_;
    bool score_unsupported_ = false;
};

}  // namespace rosesql
