#include "casegen/report.hpp"

#include <cstdio>
#include <functional>

namespace casegen::report {

namespace {

struct MetricRow {
    const char* label;
    std::function<double(const metrics::MetricReport&)> value;
};

const std::vector<MetricRow>& metric_rows() {
    static const std::vector<MetricRow> rows = {
        {"BLEU Score", [](const metrics::MetricReport& r) { return r.bleu; }},
        {"ROUGE1 (F1)", [](const metrics::MetricReport& r) { return r.rouge1.f1; }},
        {"ROUGE2 (F1)", [](const metrics::MetricReport& r) { return r.rouge2.f1; }},
        {"ROUGE L (F1)", [](const metrics::MetricReport& r) { return r.rougeL.f1; }},
        {"Levenshtein Distance", [](const metrics::MetricReport& r) { return r.levenshtein; }},
        {"Cosine Similarity", [](const metrics::MetricReport& r) { return r.cosine; }},
    };
    return rows;
}

}  // namespace

std::string format_cell(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.3f", value);
    return buffer;
}

std::string render_markdown(const std::vector<Column>& columns) {
    std::string out = "| Metric |";
    for (const Column& col : columns) out += " " + col.first + " |";
    out += "\n| --- |";
    for (std::size_t i = 0; i < columns.size(); ++i) out += " --- |";
    out += "\n";
    for (const MetricRow& row : metric_rows()) {
        out += "| ";
        out += row.label;
        out += " |";
        for (const Column& col : columns) {
            out += " ";
            out += col.second.has_value() ? format_cell(row.value(*col.second)) : "n/a";
            out += " |";
        }
        out += "\n";
    }
    return out;
}

nlohmann::json render_json(const std::vector<Column>& columns) {
    nlohmann::json cols = nlohmann::json::array();
    for (const Column& col : columns) {
        nlohmann::json values;
        if (col.second.has_value()) {
            for (const MetricRow& row : metric_rows()) {
                values[row.label] = row.value(*col.second);
            }
        } else {
            values = nullptr;
        }
        cols.push_back(nlohmann::json{{"label", col.first}, {"metrics", values}});
    }
    return nlohmann::json{{"columns", cols}};
}

}  // namespace casegen::report
