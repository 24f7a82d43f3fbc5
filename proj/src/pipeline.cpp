#include "casegen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace casegen::pipeline {

PipelineVariant PipelineVariant::from_name(std::string_view name) {
    if (name == "BASELINE") return {"BASELINE", false, false};
    if (name == "RF") return {"RF", true, false};
    if (name == "FR") return {"FR", false, true};
    if (name == "RFR") return {"RFR", true, true};
    throw std::invalid_argument("unknown pipeline variant: " + std::string(name));
}

std::string PipelineVariant::report_label() const {
    if (name == "BASELINE") return "Baseline";
    if (name == "RF") return "Reshaping (input-focused)";
    if (name == "FR") return "Refining (output-focused)";
    if (name == "RFR") return "Stacked (full)";
    return name;
}

PromptTemplate::PromptTemplate(std::string system_text, std::string user_text)
    : system_text_(std::move(system_text)), user_text_(std::move(user_text)) {}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot read template file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

PromptTemplate PromptTemplate::parse(const std::string& file_text) {
    std::istringstream in(file_text);
    std::string line;
    std::string system_part;
    std::string user_part;
    bool in_user = false;
    bool saw_separator = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!in_user && line == "---") {
            in_user = true;
            saw_separator = true;
            continue;
        }
        std::string& target = in_user ? user_part : system_part;
        if (!target.empty()) target.push_back('\n');
        target += line;
    }
    if (!saw_separator) return PromptTemplate("", std::move(system_part));
    return PromptTemplate(std::move(system_part), std::move(user_part));
}

bool PromptTemplate::has_placeholder(std::string_view name) const {
    const std::string token = "{" + std::string(name) + "}";
    return user_text_.find(token) != std::string::npos ||
           system_text_.find(token) != std::string::npos;
}

std::string PromptTemplate::render_user(const std::map<std::string, std::string>& values) const {
    std::string out = user_text_;
    for (const auto& [name, value] : values) {
        const std::string token = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

namespace {

std::string call_stage(const std::string& stage, backend::CompletionBackend& backend,
                       const PromptTemplate& tmpl,
                       const std::map<std::string, std::string>& values, StageTrace& trace) {
    backend::CompletionRequest request;
    request.system_prompt = tmpl.system_text();
    request.user_prompt = tmpl.render_user(values);

    const auto start = std::chrono::steady_clock::now();
    backend::CompletionResponse response = backend.complete(request);
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    StageEntry entry;
    entry.stage = stage;
    entry.prompt = request.system_prompt.empty()
                       ? request.user_prompt
                       : request.system_prompt + "\n\n" + request.user_prompt;
    entry.response = response.text;
    entry.wall_time = wall;
    entry.backend_id = backend.id();
    trace.entries.push_back(std::move(entry));
    return response.text;
}

}  // namespace

NormalizedStory reformulate(const UserStory& story, backend::CompletionBackend& backend,
                            const PromptTemplate& tmpl, StageTrace& trace) {
    if (!tmpl.has_placeholder("title") || !tmpl.has_placeholder("description")) {
        throw TemplateError("reformulate template must contain {title} and {description}");
    }
    if (story.id.empty()) throw std::invalid_argument("reformulate: story id is empty");
    if (story.description.empty())
        throw std::invalid_argument("reformulate: story description is empty");
    const std::string text = call_stage(
        "reformulate", backend, tmpl,
        {{"title", story.title}, {"description", story.description}}, trace);
    return NormalizedStory{story.id, text};
}

std::string generate(const std::string& input_text, backend::CompletionBackend& backend,
                     const PromptTemplate& tmpl, StageTrace& trace) {
    if (!tmpl.has_placeholder("input")) {
        throw TemplateError("generate template must contain {input}");
    }
    if (input_text.empty()) throw std::invalid_argument("generate: input_text is empty");
    return call_stage("generate", backend, tmpl, {{"input", input_text}}, trace);
}

std::string reshape(const std::string& raw_output, backend::CompletionBackend& backend,
                    const PromptTemplate& tmpl, StageTrace& trace) {
    if (!tmpl.has_placeholder("input")) {
        throw TemplateError("reshape template must contain {input}");
    }
    if (raw_output.empty()) throw std::invalid_argument("reshape: raw_output is empty");
    return call_stage("reshape", backend, tmpl, {{"input", raw_output}}, trace);
}

PipelineResult run_variant(const UserStory& story, const PipelineVariant& variant,
                           const BackendSet& backends, const TemplateSet& templates) {
    if (variant.reformulate_enabled && !backends.reformulate)
        throw std::invalid_argument("variant " + variant.name + " needs a reformulate backend");
    if (!backends.generate)
        throw std::invalid_argument("variant " + variant.name + " needs a generate backend");
    if (variant.reshape_enabled && !backends.reshape)
        throw std::invalid_argument("variant " + variant.name + " needs a reshape backend");

    StageTrace trace;
    trace.story_id = story.id;
    std::string stage = "reformulate";
    try {
        std::string current = story.description;
        if (variant.reformulate_enabled) {
            current = reformulate(story, *backends.reformulate, templates.reformulate, trace).text;
        }
        stage = "generate";
        current = generate(current, *backends.generate, templates.generate, trace);
        if (variant.reshape_enabled) {
            stage = "reshape";
            current = reshape(current, *backends.reshape, templates.reshape, trace);
        }

        PipelineResult result;
        result.story_id = story.id;
        result.variant_name = variant.name;
        result.final_output = std::move(current);
        result.trace = std::move(trace);
        if (story.reference.has_value()) {
            result.metrics = metrics::evaluate_pair(result.final_output, *story.reference);
        }
        return result;
    } catch (const backend::BackendError& e) {
        throw StageError(stage, story.id, e.what(), std::move(trace));
    }
}

std::optional<metrics::MetricReport> aggregate_items(const std::vector<PipelineResult>& items) {
    std::vector<const PipelineResult*> scored;
    for (const PipelineResult& item : items) {
        if (item.metrics.has_value()) scored.push_back(&item);
    }
    if (scored.empty()) return std::nullopt;
    std::sort(scored.begin(), scored.end(),
              [](const PipelineResult* a, const PipelineResult* b) {
                  return a->story_id < b->story_id;
              });
    std::vector<metrics::MetricReport> reports;
    reports.reserve(scored.size());
    for (const PipelineResult* item : scored) reports.push_back(*item->metrics);
    return metrics::aggregate(reports);
}

AblationReport run_batch(const std::vector<UserStory>& dataset,
                         const std::vector<PipelineVariant>& variants,
                         const BackendSet& backends, const TemplateSet& templates,
                         int parallelism) {
    if (dataset.empty()) throw std::invalid_argument("run_batch: empty dataset");
    if (variants.empty()) throw std::invalid_argument("run_batch: no variants");
    if (parallelism < 1) throw std::invalid_argument("run_batch: parallelism must be >= 1");

    struct Slot {
        std::optional<PipelineResult> result;
        std::optional<ItemFailure> failure;
    };
    const std::size_t jobs = variants.size() * dataset.size();
    std::vector<Slot> slots(jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            const std::size_t vi = job / dataset.size();
            const std::size_t si = job % dataset.size();
            try {
                slots[job].result = run_variant(dataset[si], variants[vi], backends, templates);
            } catch (const StageError& e) {
                slots[job].failure = ItemFailure{dataset[si].id, e.stage(), e.what()};
            } catch (const std::exception& e) {
                slots[job].failure = ItemFailure{dataset[si].id, "setup", e.what()};
            }
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), jobs);
    if (worker_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    AblationReport report;
    report.cells.reserve(variants.size());
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        VariantCell cell;
        cell.variant_name = variants[vi].name;
        cell.label = variants[vi].report_label();
        for (std::size_t si = 0; si < dataset.size(); ++si) {
            Slot& slot = slots[vi * dataset.size() + si];
            if (slot.result.has_value()) {
                cell.items.push_back(std::move(*slot.result));
            } else if (slot.failure.has_value()) {
                cell.failures.push_back(std::move(*slot.failure));
            }
        }
        cell.complete = cell.failures.empty();
        cell.aggregate = aggregate_items(cell.items);
        report.cells.push_back(std::move(cell));
    }
    return report;
}

AblationReport run_ablation(const std::vector<UserStory>& dataset,
                            const std::vector<PipelineVariant>& variants,
                            const BackendSet& backends, const TemplateSet& templates,
                            int parallelism) {
    if (dataset.empty()) throw std::invalid_argument("run_ablation: empty dataset");
    for (const UserStory& story : dataset) {
        if (!story.reference.has_value() || story.reference->empty()) {
            throw std::invalid_argument("run_ablation: story '" + story.id +
                                        "' has no reference test cases");
        }
    }
    return run_batch(dataset, variants, backends, templates, parallelism);
}

}  // namespace casegen::pipeline
