#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "casegen/backend.hpp"
#include "casegen/dataset.hpp"
#include "casegen/serialize.hpp"

using namespace casegen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ScopedTempDir {
    fs::path path;

    ScopedTempDir() {
        path = fs::temp_directory_path() /
               ("casegen_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScopedTempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }

    static int& counter() {
        static int n = 0;
        return n;
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

pipeline::TemplateSet load_templates() {
    const char* dir = std::getenv("CASEGEN_TEMPLATES");
    REQUIRE(dir != nullptr);
    pipeline::TemplateSet set;
    set.reformulate = pipeline::PromptTemplate::load(std::string(dir) + "/reformulate.txt");
    set.generate = pipeline::PromptTemplate::load(std::string(dir) + "/generate.txt");
    set.reshape = pipeline::PromptTemplate::load(std::string(dir) + "/reshape.txt");
    return set;
}

dataset::RunArtifact make_stub_artifact(std::size_t stories) {
    const dataset::DatasetFile data = dataset::synthesize_fixtures(stories, 99);
    auto stub = std::make_shared<backend::StubBackend>();
    const pipeline::BackendSet backends{stub, stub, stub};
    const std::vector<pipeline::PipelineVariant> variants = {
        pipeline::PipelineVariant::from_name("RF"),
        pipeline::PipelineVariant::from_name("RFR"),
    };
    dataset::RunArtifact artifact;
    artifact.run_id = dataset::make_run_id();
    artifact.config_snapshot = json{{"note", "test"}};
    artifact.report =
        pipeline::run_ablation(data.records, variants, backends, load_templates(), 2);
    return artifact;
}

}  // namespace

TEST_CASE("load_jsonl reads records and optional fields") {
    ScopedTempDir dir;
    const fs::path file = dir.path / "data.jsonl";
    write_file(file,
               R"({"id":"a","title":"t1","description":"d1","story_points":3,"reference":"r1"})"
               "\n"
               R"({"id":"b","description":"d2","extra_field":true})"
               "\n");

    const dataset::DatasetFile data = dataset::load_jsonl(file.string());
    REQUIRE(data.records.size() == 2);
    CHECK(data.records[0].id == "a");
    CHECK(data.records[0].story_points == 3.0);
    CHECK(data.records[0].reference == "r1");
    CHECK(data.records[1].title.empty());
    CHECK_FALSE(data.records[1].story_points.has_value());
    CHECK_FALSE(data.records[1].reference.has_value());
    CHECK(data.format_version == "1");
}

TEST_CASE("load_jsonl errors carry the line number") {
    ScopedTempDir dir;
    const fs::path file = dir.path / "data.jsonl";

    SUBCASE("duplicate id") {
        std::string text;
        for (int i = 1; i <= 4; ++i) {
            text += R"({"id":"s)" + std::to_string(i) + R"(","description":"d"})" + "\n";
        }
        text += R"({"id":"s2","description":"dup"})" "\n";
        write_file(file, text);
        try {
            dataset::load_jsonl(file.string());
            FAIL("expected DatasetError");
        } catch (const dataset::DatasetError& e) {
            CHECK(std::string(e.what()).find("line 5") != std::string::npos);
            CHECK(std::string(e.what()).find("s2") != std::string::npos);
        }
    }

    SUBCASE("invalid JSON") {
        write_file(file, R"({"id":"a","description":"d"})" "\n" "{broken\n");
        try {
            dataset::load_jsonl(file.string());
            FAIL("expected DatasetError");
        } catch (const dataset::DatasetError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }

    SUBCASE("missing required field") {
        write_file(file, R"({"id":"a"})" "\n");
        try {
            dataset::load_jsonl(file.string());
            FAIL("expected DatasetError");
        } catch (const dataset::DatasetError& e) {
            CHECK(std::string(e.what()).find("description") != std::string::npos);
        }
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(dataset::load_jsonl((dir.path / "nope.jsonl").string()),
                        dataset::DatasetError);
    }
}

TEST_CASE("validate_record lists violations") {
    pipeline::UserStory ok;
    ok.id = "x";
    ok.description = "does things";
    ok.story_points = 2;
    ok.reference = "ref";
    CHECK(dataset::validate_record(ok).empty());

    pipeline::UserStory bad = ok;
    bad.description = "";
    const auto violations = dataset::validate_record(bad);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("description") != std::string::npos);

    pipeline::UserStory negative = ok;
    negative.story_points = -1;
    CHECK(dataset::validate_record(negative).size() == 1);

    pipeline::UserStory empty_ref = ok;
    empty_ref.reference = "";
    CHECK(dataset::validate_record(empty_ref).size() == 1);
}

TEST_CASE("split partitions deterministically without losing records") {
    const dataset::DatasetFile data = dataset::synthesize_fixtures(10, 5);
    const auto [train, eval] = dataset::split(data, 42, 0.8, 0.2);
    CHECK(train.records.size() == 8);
    CHECK(eval.records.size() == 2);

    std::multiset<std::string> original;
    std::multiset<std::string> combined;
    for (const auto& r : data.records) original.insert(r.id);
    for (const auto& r : train.records) combined.insert(r.id);
    for (const auto& r : eval.records) combined.insert(r.id);
    CHECK(original == combined);

    const auto [train2, eval2] = dataset::split(data, 42, 0.8, 0.2);
    REQUIRE(train2.records.size() == train.records.size());
    for (std::size_t i = 0; i < train.records.size(); ++i) {
        CHECK(train.records[i].id == train2.records[i].id);
    }

    // A different seed still partitions cleanly.
    const auto [train3, eval3] = dataset::split(data, 43, 0.8, 0.2);
    std::multiset<std::string> combined3;
    for (const auto& r : train3.records) combined3.insert(r.id);
    for (const auto& r : eval3.records) combined3.insert(r.id);
    CHECK(combined3 == original);
}

TEST_CASE("split validates fractions and rejects an empty dataset") {
    const dataset::DatasetFile data = dataset::synthesize_fixtures(4, 1);
    CHECK_THROWS_AS(dataset::split(data, 1, 0.5, 0.4), dataset::DatasetError);
    CHECK_THROWS_AS(dataset::split(data, 1, 0.0, 1.0), dataset::DatasetError);
    dataset::DatasetFile empty;
    CHECK_THROWS_AS(dataset::split(empty, 1, 0.8, 0.2), dataset::DatasetError);
}

TEST_CASE("synthesize_fixtures is a pure function of n and seed") {
    const dataset::DatasetFile a = dataset::synthesize_fixtures(5, 7);
    const dataset::DatasetFile b = dataset::synthesize_fixtures(5, 7);
    REQUIRE(a.records.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(serialize::to_json(a.records[i]).dump() == serialize::to_json(b.records[i]).dump());
    }
    const dataset::DatasetFile c = dataset::synthesize_fixtures(5, 8);
    bool any_difference = false;
    for (std::size_t i = 0; i < 5; ++i) {
        if (a.records[i].description != c.records[i].description) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("synthesized records validate and carry canonical references") {
    const dataset::DatasetFile data = dataset::synthesize_fixtures(12, 3);
    std::set<std::string> ids;
    for (const pipeline::UserStory& story : data.records) {
        CHECK(dataset::validate_record(story).empty());
        CHECK(ids.insert(story.id).second);
        REQUIRE(story.reference.has_value());
        // Reference equals the canonical stub expansion of the description.
        CHECK(*story.reference ==
              backend::stub_rules::reshape_text(backend::stub_rules::generate_text(
                  backend::stub_rules::reformulate_text(story.description))));
    }
}

TEST_CASE("jsonl round trip preserves records") {
    ScopedTempDir dir;
    const dataset::DatasetFile data = dataset::synthesize_fixtures(6, 11);
    const fs::path file = dir.path / "fixtures.jsonl";
    dataset::save_jsonl(data, file.string());
    const dataset::DatasetFile back = dataset::load_jsonl(file.string());
    REQUIRE(back.records.size() == data.records.size());
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        CHECK(serialize::to_json(back.records[i]).dump() ==
              serialize::to_json(data.records[i]).dump());
    }
}

TEST_CASE("persist_run writes the documented layout and load_run restores it") {
    ScopedTempDir dir;
    const dataset::RunArtifact artifact = make_stub_artifact(3);
    const std::string run_dir = (dir.path / "run").string();
    dataset::persist_run(run_dir, artifact);

    CHECK(fs::exists(fs::path(run_dir) / "run.json"));
    CHECK(fs::exists(fs::path(run_dir) / "report.json"));
    CHECK(fs::exists(fs::path(run_dir) / "report.md"));
    // 3 stories x 2 variants.
    std::size_t item_files = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(run_dir) / "items")) {
        (void)entry;
        ++item_files;
    }
    CHECK(item_files == 6);

    const dataset::RunArtifact loaded = dataset::load_run(run_dir);
    CHECK(loaded.run_id == artifact.run_id);
    REQUIRE(loaded.report.cells.size() == artifact.report.cells.size());
    for (std::size_t i = 0; i < loaded.report.cells.size(); ++i) {
        CHECK(loaded.report.cells[i].variant_name == artifact.report.cells[i].variant_name);
        CHECK(loaded.report.cells[i].items.size() == artifact.report.cells[i].items.size());
        REQUIRE(loaded.report.cells[i].aggregate.has_value());
        CHECK(serialize::to_json(*loaded.report.cells[i].aggregate).dump() ==
              serialize::to_json(*artifact.report.cells[i].aggregate).dump());
        // Item content survives the round trip, matched by story id.
        for (const pipeline::PipelineResult& original : artifact.report.cells[i].items) {
            bool found = false;
            for (const pipeline::PipelineResult& restored : loaded.report.cells[i].items) {
                if (restored.story_id == original.story_id) {
                    found = true;
                    CHECK(serialize::to_json(restored).dump() ==
                          serialize::to_json(original).dump());
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("load_run detects a tampered item file") {
    ScopedTempDir dir;
    const dataset::RunArtifact artifact = make_stub_artifact(2);
    const std::string run_dir = (dir.path / "run").string();
    dataset::persist_run(run_dir, artifact);

    // Nudge one stored metric value.
    fs::path victim;
    for (const auto& entry : fs::directory_iterator(fs::path(run_dir) / "items")) {
        victim = entry.path();
        break;
    }
    json item = json::parse(read_file(victim));
    item["metrics"]["levenshtein"] = item["metrics"]["levenshtein"].get<double>() + 1.0;
    write_file(victim, item.dump(2) + "\n");

    CHECK_THROWS_AS(dataset::load_run(run_dir), dataset::CorruptionError);
}

TEST_CASE("load_run detects a deleted item file") {
    ScopedTempDir dir;
    const dataset::RunArtifact artifact = make_stub_artifact(2);
    const std::string run_dir = (dir.path / "run").string();
    dataset::persist_run(run_dir, artifact);

    fs::path victim;
    for (const auto& entry : fs::directory_iterator(fs::path(run_dir) / "items")) {
        victim = entry.path();
        break;
    }
    fs::remove(victim);
    CHECK_THROWS_AS(dataset::load_run(run_dir), dataset::CorruptionError);
}

TEST_CASE("load_run rejects broken layouts") {
    ScopedTempDir dir;
    CHECK_THROWS_AS(dataset::load_run((dir.path / "missing").string()), dataset::DatasetError);

    // Directory with metadata but an empty items dir.
    const fs::path run_dir = dir.path / "empty_run";
    fs::create_directories(run_dir / "items");
    write_file(run_dir / "run.json", R"({"run_id":"x","config":{}})");
    write_file(run_dir / "report.json", R"({"variants":[]})");
    CHECK_THROWS_AS(dataset::load_run(run_dir.string()), dataset::DatasetError);
}

TEST_CASE("run ids carry a timestamp and a random suffix") {
    const std::string a = dataset::make_run_id();
    const std::string b = dataset::make_run_id();
    CHECK(a.size() == 22);  // YYYYMMDD-HHMMSS-xxxxxx
    CHECK(a != b);
}
