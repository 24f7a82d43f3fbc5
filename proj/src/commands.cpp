#include "casegen/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "casegen/dataset.hpp"
#include "casegen/metrics.hpp"
#include "casegen/model_math.hpp"
#include "casegen/report.hpp"
#include "casegen/run_config.hpp"
#include "casegen/serialize.hpp"

namespace casegen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read file: " + path});
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_or_print(const std::string& text, const std::optional<std::string>& output,
                    std::ostream& out) {
    if (output.has_value()) {
        std::ofstream file(*output, std::ios::binary | std::ios::trunc);
        if (!file) throw ConfigError({"cannot write output file: " + *output});
        file << text;
    } else {
        out << text;
    }
}

dataset::DatasetFile resolve_dataset(const RunConfig& config) {
    if (config.dataset.rfind("fixtures:", 0) == 0) {
        const std::size_t n = std::stoull(config.dataset.substr(9));
        return dataset::synthesize_fixtures(n, config.seed);
    }
    return dataset::load_jsonl(config.dataset);
}

pipeline::BackendSet build_backends(const StageBackendConfigs& configs) {
    pipeline::BackendSet set;
    set.reformulate = backend::make_backend(configs.reformulate);
    set.generate = backend::make_backend(configs.generate);
    set.reshape = backend::make_backend(configs.reshape);
    return set;
}

struct PreparedRun {
    RunConfig config;
    dataset::DatasetFile data;
    pipeline::BackendSet backends;
    pipeline::TemplateSet templates;
};

PreparedRun prepare(const std::string& config_path, const CommonOptions& options) {
    PreparedRun prepared;
    prepared.config = load_run_config(config_path);
    if (options.parallelism.has_value()) prepared.config.parallelism = *options.parallelism;
    if (options.seed.has_value()) prepared.config.seed = *options.seed;
    if (options.output.has_value()) prepared.config.output_dir = *options.output;
    if (prepared.config.parallelism < 1) {
        throw ConfigError({"parallelism: must be >= 1"});
    }
    prepared.data = resolve_dataset(prepared.config);
    prepared.backends = build_backends(prepared.config.backends);
    prepared.templates = load_templates(prepared.config.template_paths);
    return prepared;
}

std::string persist(const PreparedRun& prepared, const pipeline::AblationReport& report) {
    dataset::RunArtifact artifact;
    artifact.run_id = dataset::make_run_id();
    artifact.config_snapshot = prepared.config.snapshot();
    artifact.report = report;
    const fs::path run_dir = fs::path(prepared.config.output_dir) / artifact.run_id;
    dataset::persist_run(run_dir.string(), artifact);
    return run_dir.string();
}

std::size_t count_failures(const pipeline::AblationReport& report) {
    std::size_t failures = 0;
    for (const pipeline::VariantCell& cell : report.cells) failures += cell.failures.size();
    return failures;
}

std::vector<report::Column> columns_of(const pipeline::AblationReport& report) {
    std::vector<report::Column> columns;
    for (const pipeline::VariantCell& cell : report.cells) {
        columns.emplace_back(cell.label, cell.aggregate);
    }
    return columns;
}

int classify(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const ConfigError*>(&e) != nullptr ||
        dynamic_cast<const pipeline::TemplateError*>(&e) != nullptr ||
        dynamic_cast<const std::invalid_argument*>(&e) != nullptr) {
        return kExitConfig;
    }
    if (dynamic_cast<const dataset::CorruptionError*>(&e) != nullptr) {
        return kExitCorruption;
    }
    return kExitRuntime;
}

}  // namespace

int cmd_evaluate(const std::string& candidates_path, const std::string& references_path,
                 const CommonOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const std::vector<std::string> candidates = read_lines(candidates_path);
        const std::vector<std::string> references = read_lines(references_path);
        if (candidates.size() != references.size()) {
            throw ConfigError({"line count mismatch: candidates " +
                               std::to_string(candidates.size()) + " != references " +
                               std::to_string(references.size())});
        }
        if (candidates.empty()) {
            throw ConfigError({"input files are empty"});
        }

        std::vector<metrics::MetricReport> reports;
        reports.reserve(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            reports.push_back(metrics::evaluate_pair(candidates[i], references[i]));
        }
        const metrics::MetricReport total = metrics::aggregate(reports);

        if (options.format == "json") {
            const json payload = {
                {"pairs", reports.size()},
                {"aggregate", serialize::to_json(total)},
            };
            write_or_print(payload.dump(2) + "\n", options.output, out);
        } else {
            write_or_print(report::render_markdown({{"Aggregate", total}}), options.output, out);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& story_id,
            const CommonOptions& options, std::ostream& out, std::ostream& err) {
    try {
        PreparedRun prepared = prepare(config_path, options);

        std::vector<pipeline::UserStory> stories = prepared.data.records;
        if (story_id.has_value()) {
            std::vector<pipeline::UserStory> selected;
            for (const pipeline::UserStory& story : stories) {
                if (story.id == *story_id) selected.push_back(story);
            }
            if (selected.empty()) {
                throw ConfigError({"story id not found in dataset: " + *story_id});
            }
            stories = std::move(selected);
        }

        const pipeline::AblationReport report =
            pipeline::run_batch(stories, prepared.config.variants, prepared.backends,
                                prepared.templates, prepared.config.parallelism);
        const std::string run_dir = persist(prepared, report);
        out << run_dir << "\n";

        const std::size_t failures = count_failures(report);
        if (failures > 0) {
            err << failures << " item(s) failed; see report.json\n";
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int cmd_ablate(const std::string& config_path, const CommonOptions& options, std::ostream& out,
               std::ostream& err) {
    try {
        PreparedRun prepared = prepare(config_path, options);
        if (prepared.config.variants.size() < 2) {
            throw ConfigError({"ablation requires at least 2 variants to compare"});
        }

        const pipeline::AblationReport report =
            pipeline::run_ablation(prepared.data.records, prepared.config.variants,
                                   prepared.backends, prepared.templates,
                                   prepared.config.parallelism);
        const std::string run_dir = persist(prepared, report);
        err << "run directory: " << run_dir << "\n";
        out << report::render_markdown(columns_of(report));

        const std::size_t failures = count_failures(report);
        if (failures > 0) {
            err << failures << " item(s) failed; see report.json\n";
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int cmd_report(const std::string& run_dir, const CommonOptions& options, std::ostream& out,
               std::ostream& err) {
    try {
        // Aggregates are recomputed from the item files; load_run raises
        // CorruptionError when they disagree with report.json.
        const dataset::RunArtifact artifact = dataset::load_run(run_dir);
        if (options.format == "json") {
            out << report::render_json(columns_of(artifact.report)).dump(2) << "\n";
        } else {
            out << report::render_markdown(columns_of(artifact.report));
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

int cmd_params(std::size_t m, std::size_t n, std::size_t r, int bits, std::ostream& out,
               std::ostream& err) {
    try {
        if (bits < 2 || bits > 8) {
            throw ConfigError({"bits must be in [2, 8]"});
        }
        if (m < 1 || n < 1) {
            throw ConfigError({"matrix dimensions must be >= 1"});
        }
        if (r < 1) {
            throw ConfigError({"rank must be >= 1"});
        }

        const model_math::ParamAccounting acc = model_math::trainable_param_count(m, n, r);
        constexpr std::size_t kBlockSize = 64;
        const double code_bytes =
            static_cast<double>(bits) * static_cast<double>(m) * static_cast<double>(n) / 8.0;
        const std::size_t scale_count = (m * n + kBlockSize - 1) / kBlockSize;

        char line[160];
        out << "weight matrix:        " << m << " x " << n << "\n";
        out << "full parameters:      " << acc.full << "\n";
        out << "trainable parameters: " << acc.trainable << " (rank " << r << ")\n";
        std::snprintf(line, sizeof(line), "trainable ratio:      %.3f\n", acc.ratio);
        out << line;
        const bool whole_bytes = (static_cast<std::size_t>(bits) * m * n) % 8 == 0;
        std::snprintf(line, sizeof(line),
                      whole_bytes ? "quantized storage:    %.0f bytes (%d-bit codes) + %zu block scales\n"
                                  : "quantized storage:    %.1f bytes (%d-bit codes) + %zu block scales\n",
                      code_bytes, bits, scale_count);
        out << line;
        return kExitOk;
    } catch (const std::exception& e) {
        return classify(e, err);
    }
}

}  // namespace casegen::cli
