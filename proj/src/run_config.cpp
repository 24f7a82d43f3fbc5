#include "casegen/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace casegen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

std::string ConfigError::join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const std::string& p : problems) out += "\n  - " + p;
    return out;
}

namespace {

json backend_config_to_json(const backend::BackendConfig& c) {
    json j{{"kind", c.kind == backend::BackendConfig::Kind::stub ? "stub" : "http"}};
    if (c.kind == backend::BackendConfig::Kind::http) {
        j["base_url"] = c.base_url;
        j["api_key_env_var"] = c.api_key_env_var;
        j["model"] = c.model_name;
        j["timeout_ms"] = c.timeout.count();
        j["max_retries"] = c.max_retries;
        j["retry_backoff_ms"] = c.retry_backoff_base.count();
    }
    return j;
}

backend::BackendConfig parse_backend_config(const json& j, const std::string& where,
                                            std::vector<std::string>& problems) {
    backend::BackendConfig config;
    if (!j.is_object()) {
        problems.push_back(where + ": backend config must be an object");
        return config;
    }
    const std::string kind = j.value("kind", "");
    if (kind == "stub") {
        config.kind = backend::BackendConfig::Kind::stub;
    } else if (kind == "http") {
        config.kind = backend::BackendConfig::Kind::http;
        config.base_url = j.value("base_url", "");
        if (config.base_url.empty()) {
            problems.push_back(where + ": http backend requires base_url");
        }
        config.api_key_env_var = j.value("api_key_env_var", "");
        config.model_name = j.value("model", "");
        config.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000LL));
        if (config.timeout.count() <= 0) {
            problems.push_back(where + ": timeout_ms must be positive");
        }
        config.max_retries = j.value("max_retries", 2);
        if (config.max_retries < 0) {
            problems.push_back(where + ": max_retries must be >= 0");
        }
        config.retry_backoff_base = std::chrono::milliseconds(j.value("retry_backoff_ms", 100LL));
    } else {
        problems.push_back(where + ": kind must be \"stub\" or \"http\"");
    }
    return config;
}

bool is_fixtures_selector(const std::string& dataset) {
    return dataset.rfind("fixtures:", 0) == 0;
}

}  // namespace

json RunConfig::snapshot() const {
    json variant_names = json::array();
    for (const pipeline::PipelineVariant& v : variants) variant_names.push_back(v.name);
    return json{
        {"dataset", dataset},
        {"variants", variant_names},
        {"backends",
         json{{"reformulate", backend_config_to_json(backends.reformulate)},
              {"generate", backend_config_to_json(backends.generate)},
              {"reshape", backend_config_to_json(backends.reshape)}}},
        {"templates",
         json{{"reformulate", template_paths.reformulate},
              {"generate", template_paths.generate},
              {"reshape", template_paths.reshape}}},
        {"parallelism", parallelism},
        {"output_dir", output_dir},
        {"seed", seed},
    };
}

pipeline::TemplateSet load_templates(const StagePaths& paths) {
    pipeline::TemplateSet set;
    set.reformulate = pipeline::PromptTemplate::load(paths.reformulate);
    set.generate = pipeline::PromptTemplate::load(paths.generate);
    set.reshape = pipeline::PromptTemplate::load(paths.reshape);
    return set;
}

RunConfig load_run_config(const std::string& path) {
    std::vector<std::string> problems;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file: " + path});
    std::ostringstream buffer;
    buffer << in.rdbuf();

    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

    RunConfig config;

    config.dataset = j.value("dataset", "");
    if (config.dataset.empty()) {
        problems.push_back("dataset: required");
    } else if (is_fixtures_selector(config.dataset)) {
        const std::string count = config.dataset.substr(9);
        if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos ||
            count == "0") {
            problems.push_back("dataset: fixtures selector must be \"fixtures:<positive count>\"");
        }
    } else if (!fs::exists(config.dataset)) {
        problems.push_back("dataset: file not found: " + config.dataset);
    }

    if (!j.contains("variants") || !j["variants"].is_array() || j["variants"].empty()) {
        problems.push_back("variants: required non-empty array");
    } else {
        for (const json& v : j["variants"]) {
            try {
                config.variants.push_back(
                    pipeline::PipelineVariant::from_name(v.get<std::string>()));
            } catch (const std::exception& e) {
                problems.push_back(std::string("variants: ") + e.what());
            }
        }
    }

    const json backends = j.value("backends", json::object());
    const json default_backend = backends.value("default", json{{"kind", "stub"}});
    auto stage_backend = [&](const char* stage) {
        return parse_backend_config(backends.contains(stage) ? backends[stage] : default_backend,
                                    std::string("backends.") + stage, problems);
    };
    config.backends.reformulate = stage_backend("reformulate");
    config.backends.generate = stage_backend("generate");
    config.backends.reshape = stage_backend("reshape");

    const json templates = j.value("templates", json::object());
    struct StageTemplate {
        const char* stage;
        std::string* path;
        std::vector<const char*> placeholders;
    };
    StageTemplate stage_templates[] = {
        {"reformulate", &config.template_paths.reformulate, {"title", "description"}},
        {"generate", &config.template_paths.generate, {"input"}},
        {"reshape", &config.template_paths.reshape, {"input"}},
    };
    for (const StageTemplate& st : stage_templates) {
        *st.path = templates.value(st.stage, "");
        if (st.path->empty()) {
            problems.push_back(std::string("templates.") + st.stage + ": required");
            continue;
        }
        if (!fs::exists(*st.path)) {
            problems.push_back(std::string("templates.") + st.stage + ": file not found: " +
                               *st.path);
            continue;
        }
        try {
            const pipeline::PromptTemplate tmpl = pipeline::PromptTemplate::load(*st.path);
            for (const char* placeholder : st.placeholders) {
                if (!tmpl.has_placeholder(placeholder)) {
                    problems.push_back(std::string("templates.") + st.stage + ": missing {" +
                                       placeholder + "} placeholder");
                }
            }
        } catch (const std::exception& e) {
            problems.push_back(std::string("templates.") + st.stage + ": " + e.what());
        }
    }

    config.parallelism = j.value("parallelism", 1);
    if (config.parallelism < 1) problems.push_back("parallelism: must be >= 1");

    config.output_dir = j.value("output_dir", "runs");
    config.seed = j.value("seed", 0ULL);

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

}  // namespace casegen::cli
