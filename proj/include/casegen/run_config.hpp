#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "casegen/backend.hpp"
#include "casegen/pipeline.hpp"

namespace casegen::cli {

// Every problem found during validation, reported together.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string>& problems);
    std::vector<std::string> problems_;
};

struct StagePaths {
    std::string reformulate;
    std::string generate;
    std::string reshape;
};

struct StageBackendConfigs {
    backend::BackendConfig reformulate;
    backend::BackendConfig generate;
    backend::BackendConfig reshape;
};

struct RunConfig {
    // Either a JSONL path or "fixtures:<n>" for synthesized stories.
    std::string dataset;
    std::vector<pipeline::PipelineVariant> variants;
    StageBackendConfigs backends;
    StagePaths template_paths;
    int parallelism = 1;
    std::string output_dir = "runs";
    std::uint64_t seed = 0;

    nlohmann::json snapshot() const;
};

// Parses and fully validates a config file; throws ConfigError carrying the
// complete list of problems. Templates are loaded and placeholder-checked as
// part of validation.
RunConfig load_run_config(const std::string& path);

// Loads the three prompt templates named by the config.
pipeline::TemplateSet load_templates(const StagePaths& paths);

}  // namespace casegen::cli
