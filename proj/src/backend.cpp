#include "casegen/backend.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace casegen::backend {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

// All whitespace runs become a single space.
std::string collapse_ws(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            in_space = false;
            out.push_back(c);
        }
    }
    return out;
}

bool starts_with(const std::string& s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::size_t word_count(const std::string& s) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : s) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

constexpr const char* kUnspecified = "unspecified";
constexpr const char* kDefaultExpectation = "completes without error";

}  // namespace

namespace stub_rules {

std::string payload(const std::string& user_prompt) {
    static constexpr std::string_view marker = "Story:";
    std::size_t pos = user_prompt.find(marker);
    while (pos != std::string::npos && pos != 0 && user_prompt[pos - 1] != '\n') {
        pos = user_prompt.find(marker, pos + 1);
    }
    if (pos == std::string::npos) return trim(user_prompt);
    return trim(user_prompt.substr(pos + marker.size()));
}

std::string reformulate_text(const std::string& story) {
    const std::string s = collapse_ws(story);
    std::string action = s;
    std::string condition = kUnspecified;
    std::string result = kUnspecified;

    const std::size_t when_pos = s.find(" when ");
    if (when_pos != std::string::npos) {
        action = s.substr(0, when_pos);
        const std::string rest = s.substr(when_pos + 6);
        const std::size_t and_pos = rest.find(" and ");
        if (and_pos != std::string::npos) {
            condition = rest.substr(0, and_pos);
            result = rest.substr(and_pos + 5);
        } else {
            condition = rest;
        }
    }
    return "Action: " + action + "; Condition: " + condition + "; Result: " + result;
}

std::string generate_text(const std::string& payload) {
    const std::string p = collapse_ws(payload);
    std::string action = p;
    std::string condition = kUnspecified;
    std::string result = kUnspecified;

    if (starts_with(p, "Action: ")) {
        const std::size_t cond_pos = p.find("; Condition: ");
        const std::size_t res_pos =
            cond_pos == std::string::npos ? std::string::npos : p.find("; Result: ", cond_pos);
        if (cond_pos != std::string::npos && res_pos != std::string::npos) {
            action = p.substr(8, cond_pos - 8);
            condition = p.substr(cond_pos + 13, res_pos - (cond_pos + 13));
            result = p.substr(res_pos + 10);
        }
    }
    return "test case: " + action + "\n- given " + condition + "\n- " + action +
           "\nexpect: " + result;
}

std::string reshape_text(const std::string& raw) {
    std::vector<std::string> lines;
    {
        std::istringstream in(raw);
        std::string line;
        while (std::getline(in, line)) {
            std::string cleaned = collapse_ws(line);
            if (!cleaned.empty()) lines.push_back(std::move(cleaned));
        }
    }

    std::string title = "untitled";
    std::size_t first = 0;
    if (!lines.empty()) {
        if (starts_with(lines[0], "Test Case:")) {
            title = trim(lines[0].substr(10));
            first = 1;
        } else if (starts_with(lines[0], "test case:")) {
            title = trim(lines[0].substr(10));
            first = 1;
        }
        if (first == 1 && title.empty()) title = "untitled";
    }

    struct Step {
        std::string text;
        std::string expected;
    };
    std::vector<Step> steps;
    auto parse_step_number = [](const std::string& line) -> std::size_t {
        // "Step <digits>:" prefix; returns position after ':' or npos.
        if (!starts_with(line, "Step ")) return std::string::npos;
        std::size_t i = 5;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i == 5 || i >= line.size() || line[i] != ':') return std::string::npos;
        return i + 1;
    };

    for (std::size_t i = first; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (const std::size_t after = parse_step_number(line); after != std::string::npos) {
            steps.push_back({trim(line.substr(after)), ""});
        } else if (starts_with(line, "- ")) {
            steps.push_back({trim(line.substr(2)), ""});
        } else if (starts_with(line, "Expected:")) {
            if (!steps.empty() && steps.back().expected.empty())
                steps.back().expected = trim(line.substr(9));
        } else if (starts_with(line, "expect:")) {
            if (!steps.empty() && steps.back().expected.empty())
                steps.back().expected = trim(line.substr(7));
        } else {
            steps.push_back({line, ""});
        }
    }

    std::string out = "Test Case: " + title;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += "\nStep " + std::to_string(i + 1) + ": " + steps[i].text;
        out += "\nExpected: ";
        out += steps[i].expected.empty() ? kDefaultExpectation : steps[i].expected;
    }
    return out;
}

}  // namespace stub_rules

namespace {

void validate_request(const CompletionRequest& request) {
    if (request.user_prompt.empty())
        throw BackendError(BackendErrorKind::config, "completion request: user_prompt is empty");
    if (request.max_tokens < 1)
        throw BackendError(BackendErrorKind::config, "completion request: max_tokens must be >= 1");
    if (request.temperature < 0.0)
        throw BackendError(BackendErrorKind::config,
                           "completion request: temperature must be >= 0");
}

}  // namespace

CompletionResponse StubBackend::complete(const CompletionRequest& request) {
    validate_request(request);

    std::string text;
    if (request.system_prompt.find(stub_rules::kReformulateMarker) != std::string::npos) {
        text = stub_rules::reformulate_text(stub_rules::payload(request.user_prompt));
    } else if (request.system_prompt.find(stub_rules::kGenerateMarker) != std::string::npos) {
        text = stub_rules::generate_text(stub_rules::payload(request.user_prompt));
    } else if (request.system_prompt.find(stub_rules::kReshapeMarker) != std::string::npos) {
        text = stub_rules::reshape_text(stub_rules::payload(request.user_prompt));
    } else {
        text = request.user_prompt;
    }

    if (text.empty())
        throw BackendError(BackendErrorKind::empty_completion, "stub produced an empty completion");

    CompletionResponse response;
    response.prompt_tokens = word_count(request.system_prompt) + word_count(request.user_prompt);
    response.completion_tokens = word_count(text);
    response.text = std::move(text);
    response.latency = std::chrono::milliseconds{0};
    return response;
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
        case BackendConfig::Kind::stub:
            return std::make_unique<StubBackend>();
        case BackendConfig::Kind::http:
            return std::make_unique<HttpBackend>(config);
    }
    throw BackendError(BackendErrorKind::config, "unknown backend kind");
}

}  // namespace casegen::backend
