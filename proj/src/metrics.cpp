#include "casegen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "casegen/utf8.hpp"

namespace casegen::metrics {

std::size_t NGramCounts::total() const {
    std::size_t sum = 0;
    for (const auto& [gram, count] : counts) sum += count;
    return sum;
}

TokenSequence tokenize(std::string_view text) {
    const std::u32string scalars = utf8::decode(text);
    TokenSequence seq;
    seq.source_length_chars = scalars.size();

    std::u32string current;
    auto flush = [&]() {
        if (current.empty()) return;
        std::size_t begin = 0;
        std::size_t end = current.size();
        while (begin < end && utf8::is_edge_punct(current[begin])) ++begin;
        while (end > begin && utf8::is_edge_punct(current[end - 1])) --end;
        if (end > begin) {
            std::string token;
            for (std::size_t i = begin; i < end; ++i) utf8::append(token, current[i]);
            seq.tokens.push_back(std::move(token));
        }
        current.clear();
    };

    for (char32_t cp : scalars) {
        if (utf8::is_whitespace(cp)) {
            flush();
        } else {
            current.push_back(utf8::to_lower(cp));
        }
    }
    flush();
    return seq;
}

NGramCounts ngram_counts(const TokenSequence& seq, std::size_t n) {
    if (n == 0) throw std::invalid_argument("ngram_counts: order must be >= 1");
    NGramCounts out;
    out.order = n;
    if (seq.tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= seq.tokens.size(); ++i) {
        std::vector<std::string> gram(seq.tokens.begin() + i, seq.tokens.begin() + i + n);
        ++out.counts[std::move(gram)];
    }
    return out;
}

namespace {

// Sum over n-grams of min(candidate count, reference count).
std::size_t clipped_overlap(const NGramCounts& cand, const NGramCounts& ref) {
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand.counts) {
        auto it = ref.counts.find(gram);
        if (it != ref.counts.end()) overlap += std::min(count, it->second);
    }
    return overlap;
}

PRF make_prf(double precision, double recall) {
    PRF prf;
    prf.precision = precision;
    prf.recall = recall;
    const double sum = precision + recall;
    prf.f1 = sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
    return prf;
}

}  // namespace

double bleu(const TokenSequence& candidate, const TokenSequence& reference,
            std::size_t max_order) {
    const std::size_t c = candidate.tokens.size();
    const std::size_t r = reference.tokens.size();
    if (c == 0) return 0.0;
    if (max_order == 0) max_order = 1;

    double log_precision_sum = 0.0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        const NGramCounts cand = ngram_counts(candidate, n);
        const NGramCounts ref = ngram_counts(reference, n);
        const std::size_t total = cand.total();
        const std::size_t matched = clipped_overlap(cand, ref);
        double precision = total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
        if (precision == 0.0) {
            if (n == 1) return 0.0;  // no unigram overlap at all
            precision = 1.0 / (2.0 * static_cast<double>(c));
        }
        log_precision_sum += std::log(precision);
    }

    const double brevity =
        c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return brevity * std::exp(log_precision_sum / static_cast<double>(max_order));
}

PRF rouge_n(const TokenSequence& candidate, const TokenSequence& reference, std::size_t n) {
    if (n == 0) throw std::invalid_argument("rouge_n: order must be >= 1");
    const NGramCounts cand = ngram_counts(candidate, n);
    const NGramCounts ref = ngram_counts(reference, n);
    const std::size_t cand_total = cand.total();
    const std::size_t ref_total = ref.total();
    const std::size_t overlap = clipped_overlap(cand, ref);
    const double p = cand_total > 0 ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
    const double r = ref_total > 0 ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
    return make_prf(p, r);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
    const auto& x = a.tokens;
    const auto& y = b.tokens;
    if (x.empty() || y.empty()) return 0;
    // One rolling row; prev holds the diagonal value.
    std::vector<std::size_t> row(y.size() + 1, 0);
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t prev = 0;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t old = row[j];
            if (x[i - 1] == y[j - 1]) {
                row[j] = prev + 1;
            } else {
                row[j] = std::max(row[j], row[j - 1]);
            }
            prev = old;
        }
    }
    return row[y.size()];
}

PRF rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    const std::size_t l = lcs_length(candidate, reference);
    const double p = candidate.tokens.empty()
                         ? 0.0
                         : static_cast<double>(l) / static_cast<double>(candidate.tokens.size());
    const double r = reference.tokens.empty()
                         ? 0.0
                         : static_cast<double>(l) / static_cast<double>(reference.tokens.size());
    return make_prf(p, r);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::u32string x = utf8::decode(a);
    const std::u32string y = utf8::decode(b);
    if (x.empty()) return y.size();
    if (y.empty()) return x.size();

    std::vector<std::size_t> row(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t old = row[j];
            const std::size_t subst = prev + (x[i - 1] == y[j - 1] ? 0 : 1);
            row[j] = std::min({subst, row[j] + 1, row[j - 1] + 1});
            prev = old;
        }
    }
    return row[y.size()];
}

double cosine_similarity(const TokenSequence& a, const TokenSequence& b) {
    if (a.tokens.empty() || b.tokens.empty()) return 0.0;
    std::map<std::string_view, std::pair<double, double>> tf;
    for (const auto& t : a.tokens) tf[t].first += 1.0;
    for (const auto& t : b.tokens) tf[t].second += 1.0;

    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& [token, counts] : tf) {
        dot += counts.first * counts.second;
        norm_a += counts.first * counts.first;
        norm_b += counts.second * counts.second;
    }
    if (dot == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

MetricReport evaluate_pair(std::string_view candidate, std::string_view reference) {
    const TokenSequence cand = tokenize(candidate);
    const TokenSequence ref = tokenize(reference);
    MetricReport report;
    report.bleu = bleu(cand, ref);
    report.rouge1 = rouge_n(cand, ref, 1);
    report.rouge2 = rouge_n(cand, ref, 2);
    report.rougeL = rouge_l(cand, ref);
    report.levenshtein = static_cast<double>(levenshtein(candidate, reference));
    report.cosine = cosine_similarity(cand, ref);
    return report;
}

MetricReport aggregate(std::span<const MetricReport> reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: empty report list");
    MetricReport sum;
    for (const MetricReport& r : reports) {
        sum.bleu += r.bleu;
        sum.rouge1.precision += r.rouge1.precision;
        sum.rouge1.recall += r.rouge1.recall;
        sum.rouge1.f1 += r.rouge1.f1;
        sum.rouge2.precision += r.rouge2.precision;
        sum.rouge2.recall += r.rouge2.recall;
        sum.rouge2.f1 += r.rouge2.f1;
        sum.rougeL.precision += r.rougeL.precision;
        sum.rougeL.recall += r.rougeL.recall;
        sum.rougeL.f1 += r.rougeL.f1;
        sum.levenshtein += r.levenshtein;
        sum.cosine += r.cosine;
    }
    const double n = static_cast<double>(reports.size());
    sum.bleu /= n;
    sum.rouge1.precision /= n;
    sum.rouge1.recall /= n;
    sum.rouge1.f1 /= n;
    sum.rouge2.precision /= n;
    sum.rouge2.recall /= n;
    sum.rouge2.f1 /= n;
    sum.rougeL.precision /= n;
    sum.rougeL.recall /= n;
    sum.rougeL.f1 /= n;
    sum.levenshtein /= n;
    sum.cosine /= n;
    return sum;
}

}  // namespace casegen::metrics
