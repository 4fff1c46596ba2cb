#pragma once
/// @file backend.hpp
/// @brief Uniform text-completion interface shared by the network client and
///        the deterministic mocks.  One abstraction covers all model roles:
///        generator, responder and judge.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "advisor/common.hpp"

namespace advisor {

enum class RoleHint { summarize, identify_weakness, generate_prompt, respond, judge };

inline std::string to_string(RoleHint r) {
    switch (r) {
        case RoleHint::summarize: return "summarize";
        case RoleHint::identify_weakness: return "identify_weakness";
        case RoleHint::generate_prompt: return "generate_prompt";
        case RoleHint::respond: return "respond";
        case RoleHint::judge: return "judge";
    }
    return "respond";
}

struct GenerationRequest {
    std::string prompt;
    double temperature = 1.0;
    int max_tokens = 128;
    std::vector<std::string> stop_sequences;
    RoleHint role_hint = RoleHint::respond;  // metadata for mocks and logging

    void validate() const {
        if (prompt.empty()) throw ValidationError("generation request: empty prompt");
        if (max_tokens < 1) throw ValidationError("generation request: max_tokens must be >= 1");
        if (temperature < 0.0) throw ValidationError("generation request: negative temperature");
    }
};

enum class FinishReason { stop, length, error };

struct GenerationResult {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
};

struct BackendConfig {
    std::string endpoint_url;      // e.g. http://localhost:8000/v1
    std::string model_name;
    std::string api_key_env_var;   // name of the env var holding the key, never the key
    int timeout_ms = 60000;
    int max_retries = 3;
    int retry_backoff_ms = 500;
    int requests_per_minute = 0;   // 0 = unlimited
    int max_in_flight = 8;

    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (endpoint_url.empty()) out.push_back("endpoint_url is empty");
        if (model_name.empty()) out.push_back("model_name is empty");
        if (timeout_ms <= 0) out.push_back("timeout_ms must be positive");
        if (max_retries < 0) out.push_back("max_retries must be >= 0");
        if (retry_backoff_ms < 0) out.push_back("retry_backoff_ms must be >= 0");
        if (requests_per_minute < 0) out.push_back("requests_per_minute must be >= 0");
        if (max_in_flight < 1) out.push_back("max_in_flight must be >= 1");
        return out;
    }

    void validate() const {
        const std::vector<std::string> found = problems();
        if (!found.empty()) throw ValidationError("backend config: " + join(found, "; "));
    }
};

/// Terminal backend failure.  http_status is 0 for transport-level errors.
struct BackendError : Error {
    int http_status;
    explicit BackendError(const std::string& msg, int status = 0)
        : Error(msg), http_status(status) {}
};

/// Truncates at the first occurrence of any stop sequence (earliest match
/// wins).  Idempotent.  Sets *truncated when a cut was made.
inline std::string apply_stop_sequences(const std::string& text,
                                        const std::vector<std::string>& stops,
                                        bool* truncated = nullptr) {
    size_t cut = std::string::npos;
    for (const std::string& stop : stops) {
        if (stop.empty()) continue;
        size_t pos = text.find(stop);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (truncated) *truncated = cut != std::string::npos;
    if (cut == std::string::npos) return text;
    return text.substr(0, cut);
}

/// Completion backend.  Implementations must be safe to call from multiple
/// threads; each complete() call is independent.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual GenerationResult complete(const GenerationRequest& request) = 0;
};

/// Test backend fed with a fixed script of outcomes.  Each call consumes the
/// next entry; the last entry repeats once the script is exhausted.  Entries
/// marked as failures throw BackendError.  Call-order dependent, so only for
/// sequential test flows.
class ScriptedBackend : public TextBackend {
public:
    struct Entry {
        std::string text;
        bool fail = false;
        int fail_status = 500;
    };

    explicit ScriptedBackend(std::vector<Entry> script) : script_(std::move(script)) {
        if (script_.empty()) throw ValidationError("scripted backend: empty script");
    }

    static ScriptedBackend always(std::string text) { return ScriptedBackend({{std::move(text)}}); }

    GenerationResult complete(const GenerationRequest& request) override {
        request.validate();
        Entry entry;
        {
            std::lock_guard<std::mutex> lock(mu_);
            entry = script_[std::min(next_, script_.size() - 1)];
            ++next_;
            ++calls_;
        }
        if (entry.fail) throw BackendError("scripted failure", entry.fail_status);
        GenerationResult result;
        result.text = apply_stop_sequences(entry.text, request.stop_sequences);
        result.finish_reason = FinishReason::stop;
        return result;
    }

    size_t calls() const {
        std::lock_guard<std::mutex> lock(mu_);
        return calls_;
    }

private:
    std::vector<Entry> script_;
    size_t next_ = 0;
    size_t calls_ = 0;
    mutable std::mutex mu_;
};

}  // namespace advisor
