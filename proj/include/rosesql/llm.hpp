#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rosesql/util.hpp"

namespace rosesql {

struct BackendConfig {
    std::string base_url = "http://localhost:8000";
    std::string model_name = "local-model";
    std::string api_key;  // overridable via ROSESQL_API_KEY
    double temperature = 0.0;  // reference configuration is deterministic
    int max_output_tokens = 4096;
    double timeout_s = 120.0;
    int max_attempts = 3;
    double backoff_base_s = 0.5;
    int parallelism_limit = 4;
};

struct GenerationResult {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
    double latency_s = 0.0;
    bool truncated = false;
    bool usage_reported = false;  // false means token counts are estimates
};

// Whitespace+punctuation token estimate; exact server usage overrides it.
inline long estimate_tokens(std::string_view text) {
    long count = 0;
    bool in_word = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_word = false;
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            if (!in_word) ++count;
            in_word = true;
        } else {
            ++count;
            in_word = false;
        }
    }
    long by_chars = static_cast<long>(text.size() / 4);
    return std::max(count, by_chars);
}

// Bounds in-flight requests; callers block until a slot frees up.
class ParallelGate {
public:
    explicit ParallelGate(int limit) : limit_(std::max(1, limit)) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return inflight_ < limit_; });
        ++inflight_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            --inflight_;
        }
        cv_.notify_one();
    }

    struct Slot {
        ParallelGate& gate;
        explicit Slot(ParallelGate& g) : gate(g) { gate.acquire(); }
        ~Slot() { gate.release(); }
    };

private:
    int limit_;
    int inflight_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

// Uniform contract: generation plus prompt-token log-probability scoring.
// Backends declare capabilities so GDA can fail fast on scoring-incapable
// servers.
class Backend {
public:
    virtual ~Backend() = default;
    virtual bool can_generate() const = 0;
    virtual bool can_score() const = 0;
    virtual GenerationResult generate(const std::string& system_text,
                                      const std::string& user_text) = 0;
    // Log-probs aligned to the continuation's tokens only.
    virtual std::vector<double> score_logprobs(const std::string& prefix,
                                               const std::string& continuation) = 0;
};

// ---- offline mock --------------------------------------------------------

// Deterministic backend for tests and offline runs. Records every call.
class MockBackend : public Backend {
public:
    using GenerateFn = std::function<std::string(const std::string&, const std::string&)>;
    // Per-token log-prob as a function of the conditioning prefix.
    using LogProbFn = std::function<double(const std::string& prefix, const std::string& token)>;

    struct Call {
        std::string kind;  // "generate" | "score"
        std::string system_text, user_text;
        std::string prefix, continuation;
    };

    MockBackend() {
        generate_fn_ = [](const std::string&, const std::string& user) { return user; };
        logprob_fn_ = [](const std::string&, const std::string&) { return -1.0; };
    }

    void set_generate(GenerateFn fn) { generate_fn_ = std::move(fn); }
    void set_logprob(LogProbFn fn) { logprob_fn_ = std::move(fn); }

    bool can_generate() const override { return true; }
    bool can_score() const override { return true; }

    GenerationResult generate(const std::string& system_text,
                              const std::string& user_text) override {
        InflightGuard guard(*this);
        {
            std::lock_guard lock(mu_);
            calls_.push_back(Call{"generate", system_text, user_text, "", ""});
        }
        GenerationResult r;
        r.text = generate_fn_(system_text, user_text);
        r.input_tokens = estimate_tokens(system_text) + estimate_tokens(user_text);
        r.output_tokens = estimate_tokens(r.text);
        r.usage_reported = true;
        return r;
    }

    std::vector<double> score_logprobs(const std::string& prefix,
                                       const std::string& continuation) override {
        InflightGuard guard(*this);
        {
            std::lock_guard lock(mu_);
            calls_.push_back(Call{"score", "", "", prefix, continuation});
        }
        std::vector<std::string> tokens = tokenize(continuation);
        if (tokens.empty()) throw DomainError("empty continuation");
        std::vector<double> out;
        out.reserve(tokens.size());
        for (const auto& t : tokens) out.push_back(logprob_fn_(prefix, t));
        return out;
    }

    static std::vector<std::string> tokenize(const std::string& text) {
        std::vector<std::string> tokens;
        std::string cur;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) { tokens.push_back(cur); cur.clear(); }
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
        return tokens;
    }

    std::vector<Call> calls() const {
        std::lock_guard lock(mu_);
        return calls_;
    }
    std::size_t call_count(const std::string& kind = "") const {
        std::lock_guard lock(mu_);
        if (kind.empty()) return calls_.size();
        std::size_t n = 0;
        for (const auto& c : calls_)
            if (c.kind == kind) ++n;
        return n;
    }
    int max_inflight() const {
        std::lock_guard lock(mu_);
        return max_inflight_;
    }
    void reset() {
        std::lock_guard lock(mu_);
        calls_.clear();
        max_inflight_ = 0;
    }

private:
    struct InflightGuard {
        MockBackend& b;
        explicit InflightGuard(MockBackend& backend) : b(backend) {
            std::lock_guard lock(b.mu_);
            b.max_inflight_ = std::max(b.max_inflight_, ++b.inflight_);
        }
        ~InflightGuard() {
            std::lock_guard lock(b.mu_);
            --b.inflight_;
        }
    };

    GenerateFn generate_fn_;
    LogProbFn logprob_fn_;
    mutable std::mutex mu_;
    std::vector<Call> calls_;
    int inflight_ = 0;
    int max_inflight_ = 0;
};

}  // namespace rosesql
