#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "casegen/metrics.hpp"

using namespace casegen;
using metrics::TokenSequence;

namespace {

TokenSequence seq(std::vector<std::string> tokens) {
    TokenSequence s;
    s.tokens = std::move(tokens);
    return s;
}

// Full-table edit distance, kept deliberately different from the production
// rolling-row implementation.
std::size_t oracle_levenshtein(const std::string& a, const std::string& b) {
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    std::vector<std::vector<std::size_t>> d(m + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = 0; i <= m; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= n; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
        }
    }
    return d[m][n];
}

// Enumerates every subsequence of `a` (bitmask) and keeps the longest one
// that is also a subsequence of `b`.
std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t best = 0;
    for (std::size_t mask = 0; mask < (1u << a.size()); ++mask) {
        std::vector<std::string> candidate;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (mask & (1u << i)) candidate.push_back(a[i]);
        }
        std::size_t pos = 0;
        bool is_subseq = true;
        for (const std::string& token : candidate) {
            while (pos < b.size() && b[pos] != token) ++pos;
            if (pos == b.size()) {
                is_subseq = false;
                break;
            }
            ++pos;
        }
        if (is_subseq) best = std::max(best, candidate.size());
    }
    return best;
}

// Multiset n-gram intersection by sorting both gram lists and walking them,
// independent of the map-based counting in the library.
std::size_t oracle_ngram_overlap(const std::vector<std::string>& cand,
                                 const std::vector<std::string>& ref, std::size_t n) {
    auto grams = [n](const std::vector<std::string>& tokens) {
        std::vector<std::vector<std::string>> out;
        if (tokens.size() >= n) {
            for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto c = grams(cand);
    const auto r = grams(ref);
    std::size_t overlap = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < c.size() && j < r.size()) {
        if (c[i] == r[j]) {
            ++overlap;
            ++i;
            ++j;
        } else if (c[i] < r[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return overlap;
}

std::vector<std::string> all_ab_strings(std::size_t max_len) {
    std::vector<std::string> out{""};
    std::vector<std::string> frontier{""};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        for (const std::string& s : frontier) {
            next.push_back(s + "a");
            next.push_back(s + "b");
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

const std::vector<std::string> kVocab = {"red", "blue", "green", "cat", "dog",
                                         "runs", "jumps", "fast"};

std::vector<std::string> random_tokens(std::mt19937& rng, std::size_t max_len,
                                       bool allow_empty = true) {
    std::uniform_int_distribution<std::size_t> len_dist(allow_empty ? 0 : 1, max_len);
    std::uniform_int_distribution<std::size_t> tok_dist(0, kVocab.size() - 1);
    std::vector<std::string> out(len_dist(rng));
    for (std::string& t : out) t = kVocab[tok_dist(rng)];
    return out;
}

}  // namespace

TEST_CASE("tokenize handles the documented cases") {
    CHECK(metrics::tokenize("").tokens.empty());
    CHECK(metrics::tokenize("").source_length_chars == 0);

    const TokenSequence basic = metrics::tokenize("The cat sat.");
    CHECK(basic.tokens == std::vector<std::string>{"the", "cat", "sat"});

    const TokenSequence hyphen = metrics::tokenize("User logs-in, twice!");
    CHECK(hyphen.tokens == std::vector<std::string>{"user", "logs-in", "twice"});
}

TEST_CASE("tokenize drops tokens that are pure punctuation") {
    const TokenSequence s = metrics::tokenize("wait -- what ?!");
    CHECK(s.tokens == std::vector<std::string>{"wait", "what"});
}

TEST_CASE("tokenize counts unicode scalars and splits on unicode whitespace") {
    // "héllo" is 6 bytes but 5 scalar values.
    CHECK(metrics::tokenize("h\xc3\xa9llo").source_length_chars == 5);
    // U+00A0 no-break space separates tokens.
    const TokenSequence s = metrics::tokenize("caf\xc3\xa9\xc2\xa0" "au");
    CHECK(s.tokens == std::vector<std::string>{"caf\xc3\xa9", "au"});
}

TEST_CASE("ngram_counts matches the sliding-window definition") {
    const auto uni = metrics::ngram_counts(seq({"a", "b", "a"}), 1);
    CHECK(uni.counts.at({"a"}) == 2);
    CHECK(uni.counts.at({"b"}) == 1);
    CHECK(uni.total() == 3);

    const auto bi = metrics::ngram_counts(seq({"a", "b", "a"}), 2);
    CHECK(bi.counts.at({"a", "b"}) == 1);
    CHECK(bi.counts.at({"b", "a"}) == 1);
    CHECK(bi.total() == 2);

    CHECK(metrics::ngram_counts(seq({"a"}), 2).counts.empty());
    CHECK_THROWS_AS(metrics::ngram_counts(seq({"a"}), 0), std::invalid_argument);
}

TEST_CASE("ngram totals follow max(0, len - n + 1)") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        const auto tokens = random_tokens(rng, 10);
        for (std::size_t n = 1; n <= 5; ++n) {
            const std::size_t expected =
                tokens.size() + 1 > n ? tokens.size() - n + 1 : 0;
            CHECK(metrics::ngram_counts(seq(tokens), n).total() == expected);
        }
    }
}

TEST_CASE("bleu identity and empty-candidate cases") {
    const TokenSequence x = seq({"the", "cat", "sat", "on", "mat"});
    CHECK(metrics::bleu(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::bleu(seq({}), seq({"a"})) == 0.0);
}

TEST_CASE("bleu short-candidate value matches the hand computation") {
    // p1 = p2 = 1, p3 and p4 smoothed to 1/(2*2) = 1/4, BP = exp(1 - 3/2).
    const double expected = std::exp(1.0 - 3.0 / 2.0) * std::pow(1.0 * 1.0 * 0.25 * 0.25, 0.25);
    const double got = metrics::bleu(seq({"the", "cat"}), seq({"the", "cat", "sat"}));
    CHECK(std::abs(got - expected) < 1e-15);
    CHECK(got == doctest::Approx(0.3032653298563167).epsilon(1e-12));
}

TEST_CASE("bleu stays in range and is one on identity above the order") {
    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        const TokenSequence a = seq(random_tokens(rng, 12));
        const TokenSequence b = seq(random_tokens(rng, 12));
        const double score = metrics::bleu(a, b);
        CHECK(score >= 0.0);
        CHECK(score <= 1.0 + 1e-12);
        if (a.tokens.size() >= 4) {
            CHECK(metrics::bleu(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("bleu depends only on the token identity pattern") {
    std::mt19937 rng(13);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_tokens(rng, 10, false);
        const auto b = random_tokens(rng, 10, false);
        auto rename = [](const std::vector<std::string>& tokens) {
            std::vector<std::string> out;
            out.reserve(tokens.size());
            for (const std::string& t : tokens) out.push_back("tok_" + t + "_x");
            return out;
        };
        CHECK(metrics::bleu(seq(a), seq(b)) ==
              doctest::Approx(metrics::bleu(seq(rename(a)), seq(rename(b)))).epsilon(1e-12));
    }
}

TEST_CASE("rouge_n matches the worked unigram example") {
    const metrics::PRF prf = metrics::rouge_n(seq({"the", "cat", "sat"}), seq({"the", "cat"}), 1);
    CHECK(prf.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(prf.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prf.f1 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(oracle_ngram_overlap({"the", "cat", "sat"}, {"the", "cat"}, 1) == 2);
}

TEST_CASE("rouge_n identity and disjoint cases") {
    const TokenSequence x = seq({"a", "b", "c"});
    const metrics::PRF same = metrics::rouge_n(x, x, 1);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f1 == 1.0);

    const metrics::PRF none = metrics::rouge_n(seq({"a"}), seq({"z"}), 1);
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);

    CHECK_THROWS_AS(metrics::rouge_n(x, x, 0), std::invalid_argument);
}

TEST_CASE("rouge overlap equals the multiset-intersection oracle") {
    std::mt19937 rng(17);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_tokens(rng, 10);
        const auto b = random_tokens(rng, 10);
        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            const metrics::PRF prf = metrics::rouge_n(seq(a), seq(b), n);
            const std::size_t overlap = oracle_ngram_overlap(a, b, n);
            const std::size_t cand_total = a.size() + 1 > n ? a.size() - n + 1 : 0;
            const std::size_t ref_total = b.size() + 1 > n ? b.size() - n + 1 : 0;
            const double expect_p =
                cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
            const double expect_r =
                ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
            CHECK(prf.precision == doctest::Approx(expect_p).epsilon(1e-12));
            CHECK(prf.recall == doctest::Approx(expect_r).epsilon(1e-12));
            CHECK(prf.f1 >= 0.0);
            CHECK(prf.f1 <= 1.0 + 1e-12);
            CHECK((prf.f1 == 0.0) == (overlap == 0));
        }
    }
}

TEST_CASE("lcs_length matches subsequence enumeration") {
    const TokenSequence x = seq({"a", "b", "c", "d"});
    CHECK(metrics::lcs_length(x, x) == 4);
    CHECK(metrics::lcs_length(x, seq({"b", "d"})) == 2);
    CHECK(oracle_lcs({"a", "b", "c", "d"}, {"b", "d"}) == 2);
    CHECK(metrics::lcs_length(x, seq({})) == 0);

    std::mt19937 rng(19);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_tokens(rng, 8);
        const auto b = random_tokens(rng, 8);
        CHECK(metrics::lcs_length(seq(a), seq(b)) == oracle_lcs(a, b));
    }
}

TEST_CASE("rouge_l matches the worked example") {
    const metrics::PRF prf = metrics::rouge_l(seq({"a", "x", "b"}), seq({"a", "b"}));
    CHECK(prf.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(prf.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prf.f1 == doctest::Approx(0.8).epsilon(1e-12));

    const TokenSequence x = seq({"p", "q"});
    const metrics::PRF same = metrics::rouge_l(x, x);
    CHECK(same.f1 == 1.0);
    const metrics::PRF none = metrics::rouge_l(seq({"a"}), seq({"z"}));
    CHECK(none.f1 == 0.0);
}

TEST_CASE("levenshtein matches the spelled-out cases") {
    CHECK(metrics::levenshtein("", "abc") == 3);
    CHECK(metrics::levenshtein("same text", "same text") == 0);
    CHECK(metrics::levenshtein("kitten", "sitting") == 3);
    CHECK(oracle_levenshtein("kitten", "sitting") == 3);
    // Multibyte scalars count as single characters.
    CHECK(metrics::levenshtein("caf\xc3\xa9", "cafe") == 1);
}

TEST_CASE("levenshtein agrees with the DP oracle and its metric axioms") {
    const std::vector<std::string> strings = all_ab_strings(5);
    for (const std::string& a : strings) {
        for (const std::string& b : strings) {
            const std::size_t d = metrics::levenshtein(a, b);
            CHECK(d == oracle_levenshtein(a, b));
            CHECK(d == metrics::levenshtein(b, a));
            CHECK(d <= std::max(a.size(), b.size()));
            CHECK((d == 0) == (a == b));
        }
    }

    // Triangle inequality on a sampled third point.
    std::mt19937 rng(23);
    std::uniform_int_distribution<std::size_t> pick(0, strings.size() - 1);
    for (int i = 0; i < 2000; ++i) {
        const std::string& a = strings[pick(rng)];
        const std::string& b = strings[pick(rng)];
        const std::string& c = strings[pick(rng)];
        CHECK(metrics::levenshtein(a, c) <=
              metrics::levenshtein(a, b) + metrics::levenshtein(b, c));
    }
}

TEST_CASE("cosine_similarity matches the hand dot product") {
    // (2*1 + 1*2) / (sqrt(5) * sqrt(5)) = 0.8
    const double got = metrics::cosine_similarity(seq({"a", "a", "b"}), seq({"a", "b", "b"}));
    CHECK(got == doctest::Approx(0.8).epsilon(1e-12));

    const TokenSequence x = seq({"a", "b", "c"});
    CHECK(std::abs(metrics::cosine_similarity(x, x) - 1.0) <= 1e-12);
    CHECK(metrics::cosine_similarity(seq({"a"}), seq({"z"})) == 0.0);
    CHECK(metrics::cosine_similarity(seq({}), seq({"a"})) == 0.0);
}

TEST_CASE("cosine_similarity is symmetric, order-insensitive and bounded") {
    std::mt19937 rng(29);
    for (int i = 0; i < 200; ++i) {
        auto a = random_tokens(rng, 10);
        const auto b = random_tokens(rng, 10);
        const double forward = metrics::cosine_similarity(seq(a), seq(b));
        const double backward = metrics::cosine_similarity(seq(b), seq(a));
        CHECK(forward == doctest::Approx(backward).epsilon(1e-12));
        CHECK(forward >= 0.0);
        CHECK(forward <= 1.0 + 1e-12);

        auto shuffled = a;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (!a.empty()) {
            CHECK(std::abs(metrics::cosine_similarity(seq(a), seq(shuffled)) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("evaluate_pair identity and empty-candidate cases") {
    const std::string text = "the cat sat on the mat";
    const metrics::MetricReport same = metrics::evaluate_pair(text, text);
    CHECK(same.bleu == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.rouge1.f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.rouge2.f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.rougeL.f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.levenshtein == 0.0);
    CHECK(std::abs(same.cosine - 1.0) <= 1e-12);

    const metrics::MetricReport empty = metrics::evaluate_pair("", "abc def");
    CHECK(empty.bleu == 0.0);
    CHECK(empty.rouge1.f1 == 0.0);
    CHECK(empty.rouge2.f1 == 0.0);
    CHECK(empty.rougeL.f1 == 0.0);
    CHECK(empty.levenshtein == 7.0);
    CHECK(empty.cosine == 0.0);
}

TEST_CASE("evaluate_pair composes the six individually computed metrics") {
    const std::string cand = "User logs-in, and sees the dashboard quickly";
    const std::string ref = "user logs-in and sees an empty dashboard";
    const metrics::MetricReport report = metrics::evaluate_pair(cand, ref);

    const TokenSequence c = metrics::tokenize(cand);
    const TokenSequence r = metrics::tokenize(ref);
    CHECK(report.bleu == metrics::bleu(c, r));
    CHECK(report.rouge1.f1 == metrics::rouge_n(c, r, 1).f1);
    CHECK(report.rouge2.f1 == metrics::rouge_n(c, r, 2).f1);
    CHECK(report.rougeL.f1 == metrics::rouge_l(c, r).f1);
    CHECK(report.levenshtein == static_cast<double>(metrics::levenshtein(cand, ref)));
    CHECK(report.cosine == metrics::cosine_similarity(c, r));
}

TEST_CASE("aggregate averages fields and rejects empty input") {
    metrics::MetricReport a;
    a.bleu = 0.5;
    a.levenshtein = 100.0;
    a.cosine = 0.25;
    metrics::MetricReport b;
    b.bleu = 1.0;
    b.levenshtein = 300.0;
    b.cosine = 0.75;

    const std::vector<metrics::MetricReport> pair = {a, b};
    const metrics::MetricReport mean = metrics::aggregate(pair);
    CHECK(mean.bleu == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(mean.levenshtein == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(mean.cosine == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<metrics::MetricReport> single = {a};
    const metrics::MetricReport same = metrics::aggregate(single);
    CHECK(same.bleu == a.bleu);
    CHECK(same.levenshtein == a.levenshtein);

    const std::vector<metrics::MetricReport> constant(5, b);
    const metrics::MetricReport still = metrics::aggregate(constant);
    CHECK(still.bleu == doctest::Approx(b.bleu).epsilon(1e-12));
    CHECK(still.levenshtein == doctest::Approx(b.levenshtein).epsilon(1e-12));

    CHECK_THROWS_AS(metrics::aggregate(std::span<const metrics::MetricReport>{}),
                    std::invalid_argument);
}

TEST_CASE("aggregate is permutation invariant") {
    std::mt19937 rng(31);
    std::vector<metrics::MetricReport> reports;
    for (int i = 0; i < 10; ++i) {
        reports.push_back(metrics::evaluate_pair(
            "alpha beta gamma delta", i % 2 ? "alpha beta gamma" : "beta gamma delta"));
        reports.back().levenshtein = static_cast<double>(i * 10);
    }
    const metrics::MetricReport base = metrics::aggregate(reports);
    auto shuffled = reports;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const metrics::MetricReport after = metrics::aggregate(shuffled);
    CHECK(base.bleu == doctest::Approx(after.bleu).epsilon(1e-12));
    CHECK(base.levenshtein == doctest::Approx(after.levenshtein).epsilon(1e-12));
    CHECK(base.rouge1.f1 == doctest::Approx(after.rouge1.f1).epsilon(1e-12));
}
