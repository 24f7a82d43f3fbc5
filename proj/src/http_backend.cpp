#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "casegen/backend.hpp"

namespace casegen::backend {

namespace {

using nlohmann::json;

constexpr const char* kCompletionsPath = "/v1/chat/completions";

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 160;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

std::string build_body(const CompletionRequest& request, const std::string& model) {
    json messages = json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    const json body = {
        {"model", model},
        {"messages", messages},
        {"max_tokens", request.max_tokens},
        {"temperature", request.temperature},
    };
    return body.dump();
}

CompletionResponse parse_body(const std::string& body, std::chrono::milliseconds latency,
                              int attempts) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::protocol,
                           std::string("malformed response JSON: ") + e.what() + "; body: " +
                               body_excerpt(body),
                           attempts);
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content")) {
        throw BackendError(BackendErrorKind::protocol,
                           "response missing choices[0].message.content; body: " +
                               body_excerpt(body),
                           attempts);
    }
    CompletionResponse response;
    response.text = parsed["choices"][0]["message"]["content"].get<std::string>();
    if (response.text.empty()) {
        throw BackendError(BackendErrorKind::empty_completion, "completion text is empty",
                           attempts);
    }
    if (parsed.contains("usage") && parsed["usage"].is_object()) {
        const json& usage = parsed["usage"];
        if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number()) {
            response.prompt_tokens = usage["prompt_tokens"].get<std::size_t>();
        }
        if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number()) {
            response.completion_tokens = usage["completion_tokens"].get<std::size_t>();
        }
    }
    response.latency = latency;
    return response;
}

void validate_request(const CompletionRequest& request) {
    if (request.user_prompt.empty())
        throw BackendError(BackendErrorKind::config, "completion request: user_prompt is empty");
    if (request.max_tokens < 1)
        throw BackendError(BackendErrorKind::config, "completion request: max_tokens must be >= 1");
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw BackendError(BackendErrorKind::config, "http backend requires a base_url");
    if (config_.timeout.count() <= 0)
        throw BackendError(BackendErrorKind::config, "http backend requires a positive timeout");
    if (config_.max_retries < 0)
        throw BackendError(BackendErrorKind::config, "max_retries must be >= 0");
}

std::string HttpBackend::id() const {
    return "http:" + config_.base_url;
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    validate_request(request);

    const std::string body = build_body(
        request, request.model_name.empty() ? config_.model_name : request.model_name);
    httplib::Headers headers;
    if (!config_.api_key_env_var.empty()) {
        // Only the name of the variable is ever stored or logged; the value
        // goes straight into the header.
        if (const char* key = std::getenv(config_.api_key_env_var.c_str());
            key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const int total_attempts = config_.max_retries + 1;
    BackendErrorKind last_kind = BackendErrorKind::transport;
    std::string last_message;

    for (int attempt = 0; attempt < total_attempts; ++attempt) {
        // A fresh client per call keeps the backend shareable across threads.
        httplib::Client client(config_.base_url);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        const auto usecs =
            std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout) -
            std::chrono::duration_cast<std::chrono::microseconds>(secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        const auto start = std::chrono::steady_clock::now();
        httplib::Result result = client.Post(kCompletionsPath, headers, body, "application/json");
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);

        if (result) {
            const int status = result->status;
            if (status >= 200 && status < 300) {
                return parse_body(result->body, elapsed, attempt + 1);
            }
            if (status >= 500) {
                last_kind = BackendErrorKind::status;
                last_message = "server returned status " + std::to_string(status);
            } else {
                // 4xx is not retried; the request itself is at fault.
                throw BackendError(BackendErrorKind::status,
                                   "server returned status " + std::to_string(status) +
                                       "; body: " + body_excerpt(result->body),
                                   attempt + 1);
            }
        } else {
            // Reads that die at the deadline are timeouts; the small slack
            // absorbs clock granularity.
            const bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                                   elapsed + std::chrono::milliseconds(20) >= config_.timeout;
            last_kind = timed_out ? BackendErrorKind::timeout : BackendErrorKind::transport;
            last_message = std::string("transport failure: ") + httplib::to_string(result.error());
        }

        if (attempt + 1 < total_attempts) {
            const auto backoff = config_.retry_backoff_base * (1LL << attempt);
            std::this_thread::sleep_for(backoff);
        }
    }

    throw BackendError(last_kind,
                       last_message + " after " + std::to_string(total_attempts) + " attempts",
                       total_attempts);
}

}  // namespace casegen::backend
