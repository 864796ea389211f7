// Minimal chat-completion client for OpenAI-compatible endpoints: deterministic
// request construction, retry with exponential backoff on 429/5xx, and a
// process-global in-flight cap per client handle.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace econlab::llm {

using json = nlohmann::json;

struct ModelConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string api_key_env = "OPENAI_API_KEY";
    int request_timeout_ms = 60000;
    int max_retries = 3;
    int max_in_flight = 4;
    int backoff_base_ms = 1000;  // doubles per retry, with jitter
};

inline void validate(const ModelConfig& c) {
    if (c.temperature < 0.0 || c.temperature > 2.0)
        throw std::invalid_argument("temperature must be in [0, 2]");
    if (c.max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
    if (c.max_retries < 0 || c.max_retries > 10)
        throw std::invalid_argument("max_retries must be in [0, 10]");
    if (c.max_in_flight <= 0) throw std::invalid_argument("max_in_flight must be positive");
}

struct ChatTranscriptEntry {
    std::string request_body_hash;
    std::string response_body;
    std::chrono::milliseconds latency{0};
    int http_status = 0;
    int attempt = 1;  // <= max_retries + 1
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RateLimitedExhaustedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedResponseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pure function of (config, messages); hashes of its output are stable.
inline json build_chat_request(const ModelConfig& config, const std::string& system,
                               const std::vector<std::string>& user_turns,
                               const std::vector<std::string>& assistant_turns) {
    if (user_turns.empty() || assistant_turns.size() != user_turns.size() - 1)
        throw std::invalid_argument(
            "conversation must alternate user/assistant and end on a user turn");
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", system}});
    for (std::size_t i = 0; i < user_turns.size(); ++i) {
        messages.push_back({{"role", "user"}, {"content", user_turns[i]}});
        if (i < assistant_turns.size())
            messages.push_back({{"role", "assistant"}, {"content", assistant_turns[i]}});
    }
    return json{{"model", config.model_name},
                {"temperature", config.temperature},
                {"max_tokens", config.max_tokens},
                {"messages", messages}};
}

// FNV-1a 64-bit over the serialized body.
inline std::string request_hash(const json& body) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : body.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Shareable across concurrent sessions; rate limiting is per handle.
class ChatClient {
  public:
    explicit ChatClient(ModelConfig config) : config_(std::move(config)) {
        validate(config_);
    }

    const ModelConfig& config() const { return config_; }

    std::string chat(const std::string& system, const std::vector<std::string>& user_turns,
                     const std::vector<std::string>& assistant_turns = {}) {
        const json body = build_chat_request(config_, system, user_turns, assistant_turns);
        const std::string body_text = body.dump();
        const std::string hash = request_hash(body);

        InFlightGuard guard(*this);
        std::string last_error;
        for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
            if (attempt > 1) backoff_sleep(attempt - 1);
            auto start = std::chrono::steady_clock::now();
            httplib::Client http(config_.base_url);
            http.set_connection_timeout(0, config_.request_timeout_ms * 1000);
            http.set_read_timeout(config_.request_timeout_ms / 1000,
                                  (config_.request_timeout_ms % 1000) * 1000);
            httplib::Headers headers;
            if (const char* key = std::getenv(config_.api_key_env.c_str());
                key && *key)
                headers.emplace("Authorization", std::string("Bearer ") + key);
            auto res = http.Post("/v1/chat/completions", headers, body_text,
                                 "application/json");
            auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start);
            if (!res)
                throw TransportError("chat request failed: " + httplib::to_string(res.error()));
            log_entry({hash, res->body, latency, res->status, attempt});
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw TransportError("chat request rejected with HTTP " +
                                     std::to_string(res->status));
            return extract_content(res->body);
        }
        throw RateLimitedExhaustedError("retries exhausted (" + last_error + ")");
    }

    std::vector<ChatTranscriptEntry> transcript() const {
        std::lock_guard lock(mutex_);
        return log_;
    }

    int peak_in_flight() const {
        std::lock_guard lock(mutex_);
        return peak_in_flight_;
    }

  private:
    static std::string extract_content(const std::string& body) {
        json parsed;
        try {
            parsed = json::parse(body);
        } catch (const json::exception& e) {
            throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
        }
        if (!parsed.contains("choices") || parsed["choices"].empty() ||
            !parsed["choices"][0].contains("message") ||
            !parsed["choices"][0]["message"].contains("content"))
            throw MalformedResponseError("response missing assistant content");
        return parsed["choices"][0]["message"]["content"].get<std::string>();
    }

    void backoff_sleep(int failures) {
        double base = config_.backoff_base_ms * std::pow(2.0, failures - 1);
        thread_local std::mt19937_64 jitter_rng(std::random_device{}());
        std::uniform_real_distribution<double> jitter(0.0, 0.5 * base);
        std::this_thread::sleep_for(
            std::chrono::milliseconds(std::int64_t(base + jitter(jitter_rng))));
    }

    void log_entry(ChatTranscriptEntry entry) {
        std::lock_guard lock(mutex_);
        log_.push_back(std::move(entry));
    }

    struct InFlightGuard {
        explicit InFlightGuard(ChatClient& c) : client(c) {
            std::unique_lock lock(c.mutex_);
            c.cv_.wait(lock, [&] { return c.in_flight_ < c.config_.max_in_flight; });
            ++c.in_flight_;
            c.peak_in_flight_ = std::max(c.peak_in_flight_, c.in_flight_);
        }
        ~InFlightGuard() {
            {
                std::lock_guard lock(client.mutex_);
                --client.in_flight_;
            }
            client.cv_.notify_one();
        }
        ChatClient& client;
    };

    ModelConfig config_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    int peak_in_flight_ = 0;
    std::vector<ChatTranscriptEntry> log_;
};

}  // namespace econlab::llm
