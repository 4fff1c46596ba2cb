#pragma once
/// @file http_backend.hpp
/// @brief OpenAI-compatible chat/completions client.
///
/// One client shape covers every model role (generator, responder, judge):
/// POST {endpoint_url}/chat/completions with a single user message holding
/// the rendered prompt.  Transient failures (transport errors, 429, 5xx)
/// retry with exponential backoff up to max_retries; other 4xx statuses are
/// terminal immediately.  A token bucket enforces requests_per_minute and a
/// semaphore caps concurrent in-flight requests.

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "advisor/backend.hpp"
#include "advisor/common.hpp"

namespace advisor {

namespace detail {

/// Token bucket: capacity = one minute's worth of requests, refilled
/// continuously.  acquire() blocks until a token is available.
class TokenBucket {
public:
    explicit TokenBucket(int requests_per_minute) : rpm_(requests_per_minute) {
        tokens_ = static_cast<double>(rpm_);
        last_ = std::chrono::steady_clock::now();
    }

    void acquire() {
        if (rpm_ <= 0) return;  // unlimited
        std::unique_lock<std::mutex> lock(mu_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double deficit = 1.0 - tokens_;
            const auto wait = std::chrono::duration<double>(deficit * 60.0 / rpm_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(static_cast<double>(rpm_), tokens_ + elapsed * rpm_ / 60.0);
    }

    int rpm_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

class InFlightGate {
public:
    explicit InFlightGate(int cap) : cap_(cap) {}

    void enter() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this] { return active_ < cap_; });
        ++active_;
    }

    void leave() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    int cap_;
    int active_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

struct ParsedEndpoint {
    std::string host;       // scheme://host[:port], what httplib::Client wants
    std::string base_path;  // path prefix, no trailing slash
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw ValidationError("endpoint_url must include a scheme: " + url);
    size_t path = url.find('/', scheme + 3);
    ParsedEndpoint out;
    if (path == std::string::npos) {
        out.host = url;
    } else {
        out.host = url.substr(0, path);
        out.base_path = url.substr(path);
        while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    }
    return out;
}

}  // namespace detail

class HttpBackend : public TextBackend {
public:
    explicit HttpBackend(BackendConfig config)
        : cfg_(std::move(config)),
          endpoint_(detail::parse_endpoint(cfg_.endpoint_url)),
          bucket_(cfg_.requests_per_minute),
          gate_(cfg_.max_in_flight) {
        cfg_.validate();
    }

    const BackendConfig& config() const { return cfg_; }

    GenerationResult complete(const GenerationRequest& request) override {
        request.validate();
        gate_.enter();
        struct Leave {
            detail::InFlightGate& g;
            ~Leave() { g.leave(); }
        } leave{gate_};

        const auto start = std::chrono::steady_clock::now();
        std::string last_error;
        int last_status = 0;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                const auto backoff =
                    std::chrono::milliseconds(static_cast<std::int64_t>(cfg_.retry_backoff_ms)
                                              << (attempt - 1));
                std::this_thread::sleep_for(backoff);
            }
            bucket_.acquire();
            Attempt outcome = attempt_once(request);
            if (outcome.ok) {
                outcome.result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                                std::chrono::steady_clock::now() - start)
                                                .count();
                return outcome.result;
            }
            if (!outcome.retryable) {
                throw BackendError("backend " + cfg_.endpoint_url + ": " + outcome.error,
                                   outcome.status);
            }
            last_error = outcome.error;
            last_status = outcome.status;
        }
        throw BackendError("backend " + cfg_.endpoint_url + ": retries exhausted after " +
                               std::to_string(cfg_.max_retries + 1) + " attempts; last error: " +
                               last_error,
                           last_status);
    }

private:
    struct Attempt {
        bool ok = false;
        bool retryable = false;
        int status = 0;
        std::string error;
        GenerationResult result;
    };

    Attempt attempt_once(const GenerationRequest& request) {
        httplib::Client client(endpoint_.host);
        client.set_connection_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(cfg_.timeout_ms));

        httplib::Headers headers;
        if (!cfg_.api_key_env_var.empty()) {
            if (const char* key = std::getenv(cfg_.api_key_env_var.c_str()); key && *key) {
                headers.emplace("Authorization", std::string("Bearer ") + key);
            }
        }

        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["messages"] = nlohmann::json::array({
            nlohmann::json{{"role", "user"}, {"content", request.prompt}},
        });
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;

        auto res = client.Post(endpoint_.base_path + "/chat/completions", headers, body.dump(),
                               "application/json");
        Attempt out;
        if (!res) {
            out.retryable = true;
            out.error = "transport error: " + httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        if (res->status == 429 || res->status >= 500) {
            out.retryable = true;
            out.error = "HTTP " + std::to_string(res->status);
            return out;
        }
        if (res->status < 200 || res->status >= 300) {
            out.error = "HTTP " + std::to_string(res->status) + extract_api_error(res->body);
            return out;  // non-retryable 4xx
        }
        return parse_completion(res->body, request);
    }

    static std::string extract_api_error(const std::string& body) {
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_object() && j.contains("error") && j["error"].contains("message"))
            return ": " + j["error"]["message"].get<std::string>();
        return "";
    }

    static Attempt parse_completion(const std::string& body, const GenerationRequest& request) {
        Attempt out;
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty()) {
            out.status = 200;
            out.error = "malformed completion response";
            return out;
        }
        const auto& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
            out.status = 200;
            out.error = "completion response has no message content";
            return out;
        }
        out.ok = true;
        bool truncated = false;
        out.result.text = apply_stop_sequences(choice["message"]["content"].get<std::string>(),
                                               request.stop_sequences, &truncated);
        std::string finish =
            choice.contains("finish_reason") && choice["finish_reason"].is_string()
                ? choice["finish_reason"].get<std::string>()
                : "stop";
        out.result.finish_reason =
            (!truncated && finish == "length") ? FinishReason::length : FinishReason::stop;
        return out;
    }

    BackendConfig cfg_;
    detail::ParsedEndpoint endpoint_;
    detail::TokenBucket bucket_;
    detail::InFlightGate gate_;
};

}  // namespace advisor
