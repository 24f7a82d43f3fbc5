#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace casegen::metrics {

// Canonical tokenized view of a text. Every metric except Levenshtein
// consumes this form.
struct TokenSequence {
    std::vector<std::string> tokens;
    std::size_t source_length_chars = 0;  // unicode scalar values in the original text
};

struct NGramCounts {
    std::size_t order = 1;
    std::map<std::vector<std::string>, std::size_t> counts;

    std::size_t total() const;
};

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// The six per-pair scores. Levenshtein is a whole number for a single pair
// but held as double so corpus means (aggregate) keep their fraction.
struct MetricReport {
    double bleu = 0.0;
    PRF rouge1;
    PRF rouge2;
    PRF rougeL;
    double levenshtein = 0.0;
    double cosine = 0.0;
};

// Lowercases, splits on unicode whitespace, strips leading/trailing ASCII
// punctuation from each token and drops tokens that become empty.
// Total and deterministic; tokenize("") yields no tokens.
TokenSequence tokenize(std::string_view text);

// Sliding-window n-gram occurrence counts. Rejects n = 0.
NGramCounts ngram_counts(const TokenSequence& seq, std::size_t n);

// Sentence-level BLEU: geometric mean of clipped modified n-gram precisions
// for n = 1..max_order times a brevity penalty exp(1 - r/c) when c < r.
// A zero precision at order n >= 2 is smoothed to 1/(2c); an empty candidate
// scores 0.
double bleu(const TokenSequence& candidate, const TokenSequence& reference,
            std::size_t max_order = 4);

// Clipped n-gram overlap precision/recall/F1. Rejects n = 0.
PRF rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
            std::size_t n);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

PRF rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

// Character-level (unicode scalar) edit distance with unit-cost
// insert/delete/substitute, computed on the raw strings.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Cosine of the term-frequency vectors over the union vocabulary.
// Either sequence empty gives 0.
double cosine_similarity(const TokenSequence& a, const TokenSequence& b);

MetricReport evaluate_pair(std::string_view candidate, std::string_view reference);

// Arithmetic mean of every field independently. Rejects an empty list.
MetricReport aggregate(std::span<const MetricReport> reports);

}  // namespace casegen::metrics
