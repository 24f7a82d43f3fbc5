#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

namespace casegen::backend {

struct CompletionRequest {
    std::string model_name;
    std::string system_prompt;
    std::string user_prompt;
    int max_tokens = 512;
    double temperature = 0.0;
};

struct CompletionResponse {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    std::chrono::milliseconds latency{0};
};

struct BackendConfig {
    enum class Kind { http, stub };

    Kind kind = Kind::stub;
    std::string base_url;          // http only
    std::string api_key_env_var;   // name of the env var holding the key; may be empty
    std::string model_name;        // placed into requests built from this config
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;
    std::chrono::milliseconds retry_backoff_base{100};
};

enum class BackendErrorKind {
    config,            // invalid request or configuration
    timeout,           // the call exceeded the configured timeout
    transport,         // connection / read / write failure
    status,            // non-success protocol status
    protocol,          // response arrived but could not be interpreted
    empty_completion,  // well-formed response with no text
};

class BackendError : public std::runtime_error {
  public:
    BackendError(BackendErrorKind kind, std::string message, int attempts = 1)
        : std::runtime_error(std::move(message)), kind_(kind), attempts_(attempts) {}

    BackendErrorKind kind() const { return kind_; }
    int attempts() const { return attempts_; }

  private:
    BackendErrorKind kind_;
    int attempts_;
};

// Uniform completion contract all pipeline stages call. Implementations are
// shareable across worker threads; each complete() call is independent.
class CompletionBackend {
  public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

// The deterministic rewrite rules behind the stub backend. The fixture
// synthesizer uses the same functions, so stub pipeline runs can be scored
// against references produced by construction.
namespace stub_rules {

// Stage markers the stub looks for in the system prompt.
inline constexpr const char* kReformulateMarker = "#stage:reformulate";
inline constexpr const char* kGenerateMarker = "#stage:generate";
inline constexpr const char* kReshapeMarker = "#stage:reshape";

// If the prompt contains a "Story:" marker, the payload is everything after
// it; otherwise the whole prompt is the payload.
std::string payload(const std::string& user_prompt);

// Collapses whitespace, then splits the story on the first " when " into
// action vs rest and the rest on the first " and " into condition vs result.
// Missing parts become "unspecified". Output:
//   "Action: <a>; Condition: <c>; Result: <r>"
std::string reformulate_text(const std::string& story);

// Expands an "Action: ...; Condition: ...; Result: ..." line into a raw
// test-case sketch. Payloads that do not parse as a triple are treated as
// the action with unspecified condition and result. Output:
//   "test case: <a>\n- given <c>\n- <a>\nexpect: <r>"
std::string generate_text(const std::string& payload);

// Normalizes whitespace and renumbers steps into the canonical layout:
//   "Test Case: <title>\nStep 1: ...\nExpected: ...\n..."
// Recognizes "Test Case:"/"test case:" titles, "Step N:"/"- " steps and
// "Expected:"/"expect:" expectation lines; any other nonempty line becomes a
// step. Steps without an expectation get "Expected: completes without
// error". Idempotent on its own output.
std::string reshape_text(const std::string& raw);

}  // namespace stub_rules

// Offline backend: dispatches on the stage marker in the system prompt and
// applies the stub_rules rewrite for that stage; unknown markers echo the
// user prompt. A pure function of the request.
class StubBackend : public CompletionBackend {
  public:
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "stub"; }
};

// OpenAI-compatible chat-completions client. POSTs to
// {base_url}/v1/chat/completions and retries transport failures and 5xx
// responses with exponential backoff (base * 2^attempt) up to max_retries.
class HttpBackend : public CompletionBackend {
  public:
    explicit HttpBackend(BackendConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override;

  private:
    BackendConfig config_;
};

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config);

}  // namespace casegen::backend
