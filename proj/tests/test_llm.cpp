#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "rosesql/llm.hpp"
#include "rosesql/llm_http.hpp"

using namespace rosesql;

TEST_CASE("scripted mock returns canned replies verbatim") {
    MockBackend mock;
    mock.set_generate([](const std::string&, const std::string&) {
        return std::string("<SQL>select 1</SQL>");
    });
    GenerationResult r = mock.generate("sys", "user");
    CHECK(r.text == "<SQL>select 1</SQL>");
    CHECK(r.usage_reported);
    CHECK(mock.call_count("generate") == 1);
    CHECK(mock.call_count("score") == 0);
}

TEST_CASE("mock is deterministic and records payloads") {
    MockBackend mock;
    GenerationResult a = mock.generate("s", "hello there");
    GenerationResult b = mock.generate("s", "hello there");
    CHECK(a.text == b.text);
    auto calls = mock.calls();
    REQUIRE(calls.size() == 2);
    CHECK(calls[0].user_text == "hello there");
    CHECK(calls[0].system_text == "s");
}

TEST_CASE("scoring aligns to continuation tokens") {
    MockBackend mock;
    auto lp = mock.score_logprobs("prefix text", "four tokens in here");
    CHECK(lp.size() == 4);
    for (double v : lp) CHECK(v == -1.0);
    CHECK_THROWS_AS(mock.score_logprobs("prefix", "   "), DomainError);
}

TEST_CASE("token estimation is sane") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("one two three") == 3);
    CHECK(estimate_tokens("a,b") == 3);  // punctuation counts
    CHECK(estimate_tokens(std::string(400, 'x')) >= 100);  // chars/4 floor
}

TEST_CASE("parallelism limit is honored") {
    MockBackend mock;
    ParallelGate gate(3);
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i)
        threads.emplace_back([&] {
            ParallelGate::Slot slot(gate);
            mock.generate("s", "u");
        });
    for (auto& t : threads) t.join();
    CHECK(mock.call_count("generate") == 16);
    CHECK(mock.max_inflight() <= 3);
}

TEST_CASE("unreachable base_url raises a transport error after retries") {
    BackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";  // discard port: nothing listens
    cfg.max_attempts = 2;
    cfg.backoff_base_s = 0.01;
    cfg.timeout_s = 2.0;
    HttpBackend backend(cfg);
    CHECK(backend.can_generate());
    CHECK_THROWS_AS(backend.generate("sys", "user"), TransportError);
}

TEST_CASE("config defaults match the reference configuration") {
    BackendConfig cfg;
    CHECK(cfg.temperature == 0.0);
    CHECK(cfg.max_attempts >= 1);
    CHECK(cfg.parallelism_limit >= 1);
}
