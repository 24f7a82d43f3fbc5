#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casegen/backend.hpp"
#include "casegen/metrics.hpp"

namespace casegen::pipeline {

struct UserStory {
    std::string id;
    std::string title;
    std::string description;
    std::optional<double> story_points;
    std::optional<std::string> reference;  // gold test cases, when available
};

struct NormalizedStory {
    std::string origin_id;
    std::string text;  // canonical "Action: ...; Condition: ...; Result: ..." line
};

// Which stages run. The generate stage always runs; the two flags select the
// surrounding stages.
struct PipelineVariant {
    std::string name;  // BASELINE | RF | FR | RFR
    bool reformulate_enabled = false;
    bool reshape_enabled = false;

    // Rejects names outside {BASELINE, RF, FR, RFR}.
    static PipelineVariant from_name(std::string_view name);

    // Human-facing column label for reports.
    std::string report_label() const;

    std::size_t stage_count() const {
        return 1 + (reformulate_enabled ? 1 : 0) + (reshape_enabled ? 1 : 0);
    }
};

struct StageEntry {
    std::string stage;  // reformulate | generate | reshape
    std::string prompt;
    std::string response;
    std::chrono::milliseconds wall_time{0};
    std::string backend_id;
};

struct StageTrace {
    std::string story_id;
    std::vector<StageEntry> entries;
};

struct PipelineResult {
    std::string story_id;
    std::string variant_name;
    std::string final_output;
    StageTrace trace;
    std::optional<metrics::MetricReport> metrics;
};

// Plain-text template with {placeholder} substitution. A file may carry a
// system section and a user section separated by a line containing only
// "---"; without the separator the whole file is the user section.
class PromptTemplate {
  public:
    PromptTemplate() = default;
    PromptTemplate(std::string system_text, std::string user_text);

    static PromptTemplate load(const std::string& path);
    static PromptTemplate parse(const std::string& file_text);

    bool has_placeholder(std::string_view name) const;
    const std::string& system_text() const { return system_text_; }
    std::string render_user(const std::map<std::string, std::string>& values) const;

  private:
    std::string system_text_;
    std::string user_text_;
};

struct TemplateSet {
    PromptTemplate reformulate;
    PromptTemplate generate;
    PromptTemplate reshape;
};

struct BackendSet {
    std::shared_ptr<backend::CompletionBackend> reformulate;
    std::shared_ptr<backend::CompletionBackend> generate;
    std::shared_ptr<backend::CompletionBackend> reshape;
};

class TemplateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A stage failed for one story; carries the partial trace accumulated so far.
class StageError : public std::runtime_error {
  public:
    StageError(std::string stage, std::string story_id, std::string message, StageTrace trace)
        : std::runtime_error(std::move(message)),
          stage_(std::move(stage)),
          story_id_(std::move(story_id)),
          trace_(std::move(trace)) {}

    const std::string& stage() const { return stage_; }
    const std::string& story_id() const { return story_id_; }
    const StageTrace& partial_trace() const { return trace_; }

  private:
    std::string stage_;
    std::string story_id_;
    StageTrace trace_;
};

NormalizedStory reformulate(const UserStory& story, backend::CompletionBackend& backend,
                            const PromptTemplate& tmpl, StageTrace& trace);

std::string generate(const std::string& input_text, backend::CompletionBackend& backend,
                     const PromptTemplate& tmpl, StageTrace& trace);

std::string reshape(const std::string& raw_output, backend::CompletionBackend& backend,
                    const PromptTemplate& tmpl, StageTrace& trace);

// Runs the enabled stages in order reformulate -> generate -> reshape and
// scores the final output against the story reference when one exists.
// Backend failures surface as StageError with the partial trace attached.
PipelineResult run_variant(const UserStory& story, const PipelineVariant& variant,
                           const BackendSet& backends, const TemplateSet& templates);

struct ItemFailure {
    std::string story_id;
    std::string stage;
    std::string message;
};

struct VariantCell {
    std::string variant_name;
    std::string label;
    std::vector<PipelineResult> items;  // dataset order
    std::vector<ItemFailure> failures;
    std::optional<metrics::MetricReport> aggregate;
    bool complete = true;  // false when any item failed
};

struct AblationReport {
    std::vector<VariantCell> cells;  // config variant order
};

// Mean of the per-item reports taken in story_id order, so persisted and
// recomputed aggregates agree bit for bit.
std::optional<metrics::MetricReport> aggregate_items(const std::vector<PipelineResult>& items);

// Executes every (story, variant) pair with up to `parallelism` workers.
// Item failures are recorded per cell, not fatal. The report content is a
// pure function of (dataset, variants, templates) on the stub backend,
// independent of parallelism. References are optional; unscored cells carry
// no aggregate.
AblationReport run_batch(const std::vector<UserStory>& dataset,
                         const std::vector<PipelineVariant>& variants,
                         const BackendSet& backends, const TemplateSet& templates,
                         int parallelism);

// run_batch plus the ablation preconditions: every story must carry a
// reference so each cell can be aggregated and compared.
AblationReport run_ablation(const std::vector<UserStory>& dataset,
                            const std::vector<PipelineVariant>& variants,
                            const BackendSet& backends, const TemplateSet& templates,
                            int parallelism);

}  // namespace casegen::pipeline
