#pragma once

#include <nlohmann/json.hpp>

#include "casegen/metrics.hpp"
#include "casegen/pipeline.hpp"

namespace casegen::serialize {

// JSON shapes here are the persisted interchange format; key names are part
// of the run-directory contract and must not drift.

nlohmann::json to_json(const metrics::PRF& prf);
metrics::PRF prf_from_json(const nlohmann::json& j);

nlohmann::json to_json(const metrics::MetricReport& report);
metrics::MetricReport metric_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const pipeline::StageTrace& trace);
pipeline::StageTrace stage_trace_from_json(const nlohmann::json& j);

nlohmann::json to_json(const pipeline::PipelineResult& result);
pipeline::PipelineResult pipeline_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const pipeline::UserStory& story);
pipeline::UserStory user_story_from_json(const nlohmann::json& j);

}  // namespace casegen::serialize
