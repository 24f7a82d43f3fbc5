#include "casegen/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "casegen/backend.hpp"
#include "casegen/report.hpp"
#include "casegen/serialize.hpp"

namespace casegen::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetFile load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot read dataset file: " + path);

    DatasetFile dataset;
    dataset.path = path;
    std::set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::exception& e) {
            throw DatasetError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!parsed.is_object()) {
            throw DatasetError("line " + std::to_string(line_no) + ": expected a JSON object");
        }
        for (const char* field : {"id", "description"}) {
            if (!parsed.contains(field)) {
                throw DatasetError("line " + std::to_string(line_no) + ": missing required field '" +
                                   field + "'");
            }
        }

        pipeline::UserStory story;
        try {
            story = serialize::user_story_from_json(parsed);
        } catch (const json::exception& e) {
            throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
        }

        const auto violations = validate_record(story);
        if (!violations.empty()) {
            throw DatasetError("line " + std::to_string(line_no) + ": " + violations.front());
        }
        if (!seen_ids.insert(story.id).second) {
            throw DatasetError("line " + std::to_string(line_no) + ": duplicate id '" + story.id +
                               "'");
        }
        dataset.records.push_back(std::move(story));
    }
    return dataset;
}

void save_jsonl(const DatasetFile& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot write dataset file: " + path);
    for (const pipeline::UserStory& story : dataset.records) {
        out << serialize::to_json(story).dump() << '\n';
    }
}

std::vector<std::string> validate_record(const pipeline::UserStory& record) {
    std::vector<std::string> violations;
    if (record.id.empty()) violations.push_back("id must be non-empty");
    if (record.description.empty()) violations.push_back("description must be non-empty");
    if (record.story_points.has_value() && *record.story_points < 0) {
        violations.push_back("story_points must be non-negative");
    }
    if (record.reference.has_value() && record.reference->empty()) {
        violations.push_back("reference must be non-empty when present");
    }
    return violations;
}

std::pair<DatasetFile, DatasetFile> split(const DatasetFile& dataset, std::uint64_t seed,
                                          double train_fraction, double eval_fraction) {
    if (dataset.records.empty()) throw DatasetError("split: empty dataset");
    if (train_fraction <= 0 || eval_fraction <= 0 ||
        std::abs(train_fraction + eval_fraction - 1.0) > 1e-9) {
        throw DatasetError("split: fractions must be positive and sum to 1");
    }

    std::vector<std::size_t> order(dataset.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Hand-rolled Fisher-Yates; std::shuffle output is not pinned across
    // standard libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    const std::size_t train_count = static_cast<std::size_t>(
        std::floor(static_cast<double>(order.size()) * train_fraction));

    DatasetFile train;
    DatasetFile eval;
    train.format_version = dataset.format_version;
    eval.format_version = dataset.format_version;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < train_count ? train : eval).records.push_back(dataset.records[order[i]]);
    }
    return {std::move(train), std::move(eval)};
}

namespace {

const std::vector<std::string>& grammar_actions() {
    static const std::vector<std::string> v = {
        "user logs in",
        "user uploads a file",
        "admin deletes an account",
        "customer submits an order",
        "user resets the password",
        "visitor searches the catalog",
        "editor publishes an article",
        "user updates the profile",
    };
    return v;
}

const std::vector<std::string>& grammar_conditions() {
    static const std::vector<std::string> v = {
        "the password is wrong",
        "the network is offline",
        "the storage quota is exceeded",
        "the session has expired",
        "the form is incomplete",
        "the service is under maintenance",
        "the account is locked",
        "the payment method is invalid",
    };
    return v;
}

const std::vector<std::string>& grammar_results() {
    static const std::vector<std::string> v = {
        "an error message is shown",
        "a confirmation email is sent",
        "the request is rejected",
        "a retry prompt appears",
        "the change is saved",
        "the operation is logged",
        "a warning banner appears",
        "access is denied",
    };
    return v;
}

}  // namespace

DatasetFile synthesize_fixtures(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DatasetError("synthesize_fixtures: n must be >= 1");

    static const int kPointScale[] = {1, 2, 3, 5, 8};
    std::mt19937_64 rng(seed);
    DatasetFile out;
    out.path = "fixtures:" + std::to_string(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& action = grammar_actions()[rng() % grammar_actions().size()];
        const auto& condition = grammar_conditions()[rng() % grammar_conditions().size()];
        const auto& result = grammar_results()[rng() % grammar_results().size()];

        pipeline::UserStory story;
        char id[32];
        std::snprintf(id, sizeof(id), "story-%04zu", i + 1);
        story.id = id;
        story.title = action;
        story.description = action + " when " + condition + " and " + result;
        if (i % 4 != 3) story.story_points = kPointScale[i % 5];
        // Gold output comes from the same rewrite rules the stub backend
        // applies, stage by stage.
        story.reference = backend::stub_rules::reshape_text(
            backend::stub_rules::generate_text(
                backend::stub_rules::reformulate_text(story.description)));
        out.records.push_back(std::move(story));
    }
    return out;
}

namespace {

std::string sanitize_for_filename(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

json report_to_json(const pipeline::AblationReport& report) {
    json variants = json::array();
    for (const pipeline::VariantCell& cell : report.cells) {
        json failures = json::array();
        for (const pipeline::ItemFailure& f : cell.failures) {
            failures.push_back(json{
                {"story_id", f.story_id},
                {"stage", f.stage},
                {"message", f.message},
            });
        }
        variants.push_back(json{
            {"name", cell.variant_name},
            {"label", cell.label},
            {"item_count", cell.items.size()},
            {"complete", cell.complete},
            {"failures", failures},
            {"aggregate",
             cell.aggregate.has_value() ? serialize::to_json(*cell.aggregate) : json(nullptr)},
        });
    }
    return json{{"variants", variants}};
}

std::vector<report::Column> report_columns(const pipeline::AblationReport& report) {
    std::vector<report::Column> columns;
    for (const pipeline::VariantCell& cell : report.cells) {
        columns.emplace_back(cell.label, cell.aggregate);
    }
    return columns;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot write file: " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot read file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string make_run_id() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);

    std::random_device rd;
    char suffix[8];
    std::snprintf(suffix, sizeof(suffix), "%06x", rd() & 0xFFFFFF);
    return std::string(stamp) + "-" + suffix;
}

void persist_run(const std::string& run_dir, const RunArtifact& artifact) {
    const fs::path root(run_dir);
    fs::create_directories(root / "items");

    const json run_meta = {{"run_id", artifact.run_id}, {"config", artifact.config_snapshot}};
    write_text(root / "run.json", run_meta.dump(2) + "\n");

    for (const pipeline::VariantCell& cell : artifact.report.cells) {
        for (const pipeline::PipelineResult& item : cell.items) {
            const std::string name =
                sanitize_for_filename(item.story_id) + "." + cell.variant_name + ".json";
            write_text(root / "items" / name, serialize::to_json(item).dump(2) + "\n");
        }
    }

    write_text(root / "report.json", report_to_json(artifact.report).dump(2) + "\n");
    write_text(root / "report.md", report::render_markdown(report_columns(artifact.report)));
}

RunArtifact load_run(const std::string& run_dir) {
    const fs::path root(run_dir);
    if (!fs::is_directory(root)) throw DatasetError("run directory does not exist: " + run_dir);
    if (!fs::exists(root / "run.json") || !fs::exists(root / "report.json")) {
        throw DatasetError("run directory layout violation: missing run.json or report.json");
    }
    if (!fs::is_directory(root / "items")) {
        throw DatasetError("run directory layout violation: missing items/");
    }

    json run_meta;
    json report_json;
    try {
        run_meta = json::parse(read_text(root / "run.json"));
        report_json = json::parse(read_text(root / "report.json"));
    } catch (const json::exception& e) {
        throw DatasetError(std::string("run directory metadata is not valid JSON: ") + e.what());
    }

    // Items grouped by variant; file order is normalized by sorting names.
    std::vector<fs::path> item_paths;
    for (const auto& entry : fs::directory_iterator(root / "items")) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            item_paths.push_back(entry.path());
        }
    }
    if (item_paths.empty()) throw DatasetError("run directory has no item files");
    std::sort(item_paths.begin(), item_paths.end());

    std::map<std::string, std::vector<pipeline::PipelineResult>> by_variant;
    for (const fs::path& path : item_paths) {
        try {
            pipeline::PipelineResult item =
                serialize::pipeline_result_from_json(json::parse(read_text(path)));
            by_variant[item.variant_name].push_back(std::move(item));
        } catch (const json::exception& e) {
            throw DatasetError("item file " + path.filename().string() + ": " + e.what());
        }
    }

    RunArtifact artifact;
    artifact.run_id = run_meta.value("run_id", "");
    artifact.config_snapshot = run_meta.value("config", json::object());

    if (!report_json.contains("variants") || !report_json["variants"].is_array()) {
        throw DatasetError("report.json layout violation: missing variants array");
    }
    for (const json& v : report_json["variants"]) {
        pipeline::VariantCell cell;
        cell.variant_name = v.at("name").get<std::string>();
        cell.label = v.at("label").get<std::string>();
        cell.complete = v.at("complete").get<bool>();
        for (const json& f : v.at("failures")) {
            cell.failures.push_back(pipeline::ItemFailure{
                f.at("story_id").get<std::string>(),
                f.at("stage").get<std::string>(),
                f.at("message").get<std::string>(),
            });
        }
        auto it = by_variant.find(cell.variant_name);
        if (it != by_variant.end()) cell.items = std::move(it->second);

        const std::size_t expected_count = v.at("item_count").get<std::size_t>();
        if (cell.items.size() != expected_count) {
            throw CorruptionError("variant " + cell.variant_name + ": report.json records " +
                                  std::to_string(expected_count) + " items but " +
                                  std::to_string(cell.items.size()) + " item files are present");
        }

        cell.aggregate = pipeline::aggregate_items(cell.items);
        const json recomputed =
            cell.aggregate.has_value() ? serialize::to_json(*cell.aggregate) : json(nullptr);
        if (recomputed != v.at("aggregate")) {
            throw CorruptionError("variant " + cell.variant_name +
                                  ": aggregate recomputed from item files does not match "
                                  "report.json");
        }
        artifact.report.cells.push_back(std::move(cell));
    }
    return artifact;
}

}  // namespace casegen::dataset
