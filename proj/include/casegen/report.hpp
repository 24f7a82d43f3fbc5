#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "casegen/metrics.hpp"

namespace casegen::report {

// One rendered column: label plus the aggregated scores (absent when the
// cell produced no scored items).
using Column = std::pair<std::string, std::optional<metrics::MetricReport>>;

// Three decimals everywhere.
std::string format_cell(double value);

// Markdown table with one row per metric (BLEU Score, ROUGE1 (F1),
// ROUGE2 (F1), ROUGE L (F1), Levenshtein Distance, Cosine Similarity) and
// one column per variant, in the given order. Missing aggregates render as
// "n/a". Ends with a newline.
std::string render_markdown(const std::vector<Column>& columns);

// Same values keyed by metric name and column label.
nlohmann::json render_json(const std::vector<Column>& columns);

}  // namespace casegen::report
