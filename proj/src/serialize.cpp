#include "casegen/serialize.hpp"

namespace casegen::serialize {

using nlohmann::json;

json to_json(const metrics::PRF& prf) {
    return json{{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

metrics::PRF prf_from_json(const json& j) {
    metrics::PRF prf;
    prf.precision = j.at("precision").get<double>();
    prf.recall = j.at("recall").get<double>();
    prf.f1 = j.at("f1").get<double>();
    return prf;
}

json to_json(const metrics::MetricReport& report) {
    return json{
        {"bleu", report.bleu},
        {"rouge1", to_json(report.rouge1)},
        {"rouge2", to_json(report.rouge2)},
        {"rougeL", to_json(report.rougeL)},
        {"levenshtein", report.levenshtein},
        {"cosine", report.cosine},
    };
}

metrics::MetricReport metric_report_from_json(const json& j) {
    metrics::MetricReport report;
    report.bleu = j.at("bleu").get<double>();
    report.rouge1 = prf_from_json(j.at("rouge1"));
    report.rouge2 = prf_from_json(j.at("rouge2"));
    report.rougeL = prf_from_json(j.at("rougeL"));
    report.levenshtein = j.at("levenshtein").get<double>();
    report.cosine = j.at("cosine").get<double>();
    return report;
}

json to_json(const pipeline::StageTrace& trace) {
    json entries = json::array();
    for (const pipeline::StageEntry& e : trace.entries) {
        entries.push_back(json{
            {"stage", e.stage},
            {"prompt", e.prompt},
            {"response", e.response},
            {"wall_time_ms", e.wall_time.count()},
            {"backend_id", e.backend_id},
        });
    }
    return json{{"story_id", trace.story_id}, {"entries", entries}};
}

pipeline::StageTrace stage_trace_from_json(const json& j) {
    pipeline::StageTrace trace;
    trace.story_id = j.at("story_id").get<std::string>();
    for (const json& e : j.at("entries")) {
        pipeline::StageEntry entry;
        entry.stage = e.at("stage").get<std::string>();
        entry.prompt = e.at("prompt").get<std::string>();
        entry.response = e.at("response").get<std::string>();
        entry.wall_time = std::chrono::milliseconds(e.at("wall_time_ms").get<long long>());
        entry.backend_id = e.at("backend_id").get<std::string>();
        trace.entries.push_back(std::move(entry));
    }
    return trace;
}

json to_json(const pipeline::PipelineResult& result) {
    json j{
        {"story_id", result.story_id},
        {"variant", result.variant_name},
        {"final_output", result.final_output},
        {"trace", to_json(result.trace)},
    };
    if (result.metrics.has_value()) {
        j["metrics"] = to_json(*result.metrics);
    } else {
        j["metrics"] = nullptr;
    }
    return j;
}

pipeline::PipelineResult pipeline_result_from_json(const json& j) {
    pipeline::PipelineResult result;
    result.story_id = j.at("story_id").get<std::string>();
    result.variant_name = j.at("variant").get<std::string>();
    result.final_output = j.at("final_output").get<std::string>();
    result.trace = stage_trace_from_json(j.at("trace"));
    if (j.contains("metrics") && !j.at("metrics").is_null()) {
        result.metrics = metric_report_from_json(j.at("metrics"));
    }
    return result;
}

json to_json(const pipeline::UserStory& story) {
    json j{
        {"id", story.id},
        {"title", story.title},
        {"description", story.description},
    };
    if (story.story_points.has_value()) j["story_points"] = *story.story_points;
    if (story.reference.has_value()) j["reference"] = *story.reference;
    return j;
}

pipeline::UserStory user_story_from_json(const json& j) {
    pipeline::UserStory story;
    story.id = j.at("id").get<std::string>();
    if (j.contains("title") && !j.at("title").is_null())
        story.title = j.at("title").get<std::string>();
    story.description = j.at("description").get<std::string>();
    if (j.contains("story_points") && !j.at("story_points").is_null())
        story.story_points = j.at("story_points").get<double>();
    if (j.contains("reference") && !j.at("reference").is_null())
        story.reference = j.at("reference").get<std::string>();
    return story;
}

}  // namespace casegen::serialize
