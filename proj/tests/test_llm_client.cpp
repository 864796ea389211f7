#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <thread>

#include "econlab/llm_client.hpp"
#include "mock_chat_server.hpp"

using namespace econlab::llm;
using econlab::testing::MockChatServer;

namespace {

ModelConfig config_for(const MockChatServer& server) {
    ModelConfig c;
    c.base_url = server.base_url();
    c.max_retries = 3;
    c.backoff_base_ms = 10;  // keep tests fast
    c.request_timeout_ms = 5000;
    return c;
}

}  // namespace

TEST_CASE("ModelConfig validation") {
    ModelConfig c;
    CHECK_NOTHROW(validate(c));
    c.temperature = 2.5;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.temperature = 0.3;
    c.max_retries = 11;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.max_retries = 3;
    c.max_in_flight = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("build_chat_request enforces strict alternation") {
    ModelConfig c;
    CHECK_THROWS_AS(build_chat_request(c, "sys", {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(build_chat_request(c, "sys", {"u1"}, {"a1"}), std::invalid_argument);
    auto body = build_chat_request(c, "sys", {"u1", "u2"}, {"a1"});
    const auto& msgs = body["messages"];
    REQUIRE(msgs.size() == 4);
    CHECK(msgs[0]["role"] == "system");
    CHECK(msgs[1]["role"] == "user");
    CHECK(msgs[1]["content"] == "u1");
    CHECK(msgs[2]["role"] == "assistant");
    CHECK(msgs[3]["role"] == "user");
    CHECK(msgs[3]["content"] == "u2");
}

TEST_CASE("request_hash is stable and input-sensitive") {
    ModelConfig c;
    auto b1 = build_chat_request(c, "sys", {"hello"}, {});
    auto b2 = build_chat_request(c, "sys", {"hello"}, {});
    auto b3 = build_chat_request(c, "sys", {"other"}, {});
    CHECK(request_hash(b1) == request_hash(b2));
    CHECK(request_hash(b1) != request_hash(b3));
    CHECK(request_hash(b1).size() == 16);
}

TEST_CASE("requests carry the configured temperature and model") {
    MockChatServer server;
    for (double temp : {0.0, 0.3}) {
        auto cfg = config_for(server);
        cfg.temperature = temp;
        cfg.model_name = "test-model";
        ChatClient client(cfg);
        CHECK(client.chat("sys", {"hi"}) == "<reason>r</reason><answer>ok</answer>");
        auto sent = server.requests().back();
        CHECK(sent["temperature"].get<double>() == doctest::Approx(temp));
        CHECK(sent["model"] == "test-model");
        CHECK(sent["messages"][0]["role"] == "system");
        CHECK(sent["messages"][1]["role"] == "user");
    }
}

TEST_CASE("API key is read from the configured environment variable") {
    MockChatServer server;
    auto cfg = config_for(server);
    cfg.api_key_env = "ECONLAB_TEST_KEY";
    ::setenv("ECONLAB_TEST_KEY", "sk-test-123", 1);
    ChatClient client(cfg);
    client.chat("sys", {"hi"});
    CHECK(server.auth_headers().back() == "Bearer sk-test-123");
    ::unsetenv("ECONLAB_TEST_KEY");
    ChatClient bare(cfg);
    bare.chat("sys", {"hi"});
    CHECK(server.auth_headers().back() == "");
}

TEST_CASE("client retries on 429 and records every attempt") {
    MockChatServer server;
    server.set_status_script({429, 429, 200});
    ChatClient client(config_for(server));
    CHECK(client.chat("sys", {"hi"}) == "<reason>r</reason><answer>ok</answer>");
    CHECK(server.hits() == 3);
    auto log = client.transcript();
    REQUIRE(log.size() == 3);
    CHECK(log[0].http_status == 429);
    CHECK(log[0].attempt == 1);
    CHECK(log[1].attempt == 2);
    CHECK(log[2].http_status == 200);
    CHECK(log[2].attempt == 3);
    // the retried request is byte-identical, hence the same hash
    CHECK(log[0].request_body_hash == log[2].request_body_hash);
}

TEST_CASE("client retries on 5xx and gives up after max_retries") {
    MockChatServer server;
    server.set_status_script({500, 503, 500, 500, 500, 500});
    auto cfg = config_for(server);
    cfg.max_retries = 2;
    ChatClient client(cfg);
    CHECK_THROWS_AS(client.chat("sys", {"hi"}), RateLimitedExhaustedError);
    CHECK(server.hits() == 3);  // initial attempt + 2 retries
}

TEST_CASE("non-retryable HTTP errors raise TransportError") {
    MockChatServer server;
    server.set_status_script({401});
    ChatClient client(config_for(server));
    CHECK_THROWS_AS(client.chat("sys", {"hi"}), TransportError);
}

TEST_CASE("connection failure raises TransportError") {
    ModelConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
    cfg.max_retries = 0;
    cfg.request_timeout_ms = 500;
    ChatClient client(cfg);
    CHECK_THROWS_AS(client.chat("sys", {"hi"}), TransportError);
}

TEST_CASE("malformed responses are rejected") {
    MockChatServer not_json;
    not_json.set_raw_body("this is not json");
    ChatClient client(config_for(not_json));
    CHECK_THROWS_AS(client.chat("sys", {"hi"}), MalformedResponseError);

    MockChatServer wrong_shape;
    wrong_shape.set_raw_body("{\"choices\":[]}");
    ChatClient client2(config_for(wrong_shape));
    CHECK_THROWS_AS(client2.chat("sys", {"hi"}), MalformedResponseError);
}

TEST_CASE("in-flight requests are capped per client") {
    MockChatServer server;
    server.set_delay_ms(60);
    auto cfg = config_for(server);
    cfg.max_in_flight = 2;
    ChatClient client(cfg);
    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i)
        workers.emplace_back([&client] { client.chat("sys", {"hi"}); });
    for (auto& w : workers) w.join();
    CHECK(server.hits() == 8);
    CHECK(client.peak_in_flight() <= 2);
    CHECK(server.peak_in_flight() <= 2);
}
