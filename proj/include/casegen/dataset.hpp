#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "casegen/pipeline.hpp"

namespace casegen::dataset {

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A persisted run whose cached aggregate no longer matches its item files.
class CorruptionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct DatasetFile {
    std::string path;
    std::vector<pipeline::UserStory> records;
    std::string format_version = "1";
};

// One JSON object per line: id, description required; title, story_points,
// reference optional. Unknown fields are ignored. Errors carry the 1-based
// line number.
DatasetFile load_jsonl(const std::string& path);

void save_jsonl(const DatasetFile& dataset, const std::string& path);

// Empty result means the record is valid.
std::vector<std::string> validate_record(const pipeline::UserStory& record);

// Deterministic seeded shuffle, then a floor(n * train_fraction) /
// remainder partition. Fractions must be positive and sum to 1.
std::pair<DatasetFile, DatasetFile> split(const DatasetFile& dataset, std::uint64_t seed,
                                          double train_fraction, double eval_fraction);

// Synthesizes n user stories from a small action/condition/result grammar.
// References are the stub pipeline's canonical expansion of each story, so
// full stub runs have exact gold targets. Pure function of (n, seed).
DatasetFile synthesize_fixtures(std::size_t n, std::uint64_t seed);

struct RunArtifact {
    std::string run_id;
    nlohmann::json config_snapshot;
    pipeline::AblationReport report;
};

// "<UTC timestamp>-<random hex suffix>"
std::string make_run_id();

// Layout written under run_dir:
//   run.json                     run id + config snapshot
//   items/<story_id>.<variant>.json
//   report.json                  per-variant aggregates and failures
//   report.md
void persist_run(const std::string& run_dir, const RunArtifact& artifact);

// Reads the layout back and recomputes every aggregate from the item files;
// a mismatch against report.json raises CorruptionError.
RunArtifact load_run(const std::string& run_dir);

}  // namespace casegen::dataset
