#include "beamtune/evaluation.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamtune/rng.hpp"
#include "doctest.h"

namespace beamtune {
namespace {

std::uint64_t histogram_total(const LengthReport& report) {
  std::uint64_t total = report.exact_zero + report.exact_one +
                        report.overflow + report.excluded_zero_reference;
  for (std::uint64_t bin : report.bins) total += bin;
  return total;
}

std::vector<Sentence> random_corpus(Rng& rng, std::size_t sentences,
                                    std::size_t max_len) {
  std::vector<Sentence> corpus(sentences);
  for (auto& sentence : corpus) {
    const std::size_t len =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(max_len)));
    for (std::size_t i = 0; i < len; ++i) {
      sentence.push_back("w" + std::to_string(rng.uniform_int(0, 9)));
    }
  }
  return corpus;
}

TEST_SUITE("evaluation") {

TEST_CASE("corpus bleu on identical corpora is exactly one") {
  const std::vector<Sentence> corpus = {
      {"the", "cat", "sat", "down"},
      {"a", "dog", "chased", "the", "cat", "yesterday"},
  };
  const BleuScore bleu = corpus_bleu(corpus, corpus);
  CHECK(bleu.score == 1.0);
  CHECK(bleu.brevity_penalty == 1.0);
  REQUIRE(bleu.precisions.size() == 4);
  for (double p : bleu.precisions) CHECK(p == 1.0);
  CHECK(bleu.candidate_length == 10);
  CHECK(bleu.reference_length == 10);
}

TEST_CASE("corpus bleu on all-empty hypotheses is exactly zero") {
  const std::vector<Sentence> hyps = {{}, {}};
  const std::vector<Sentence> refs = {
      {"the", "cat", "sat", "down"},
      {"a", "dog"},
  };
  const BleuScore bleu = corpus_bleu(hyps, refs);
  CHECK(bleu.score == 0.0);
  CHECK(bleu.brevity_penalty == 0.0);
  CHECK(bleu.candidate_length == 0);
  for (double p : bleu.precisions) CHECK(p == 0.0);
}

TEST_CASE("short hypothesis with perfect lower orders") {
  // "the cat sat" against "the cat sat down": every unigram, bigram, and
  // trigram matches, there is no 4-gram, and the brevity penalty is
  // exp(1 - 4/3).
  const std::vector<Sentence> hyps = {{"the", "cat", "sat"}};
  const std::vector<Sentence> refs = {{"the", "cat", "sat", "down"}};

  const BleuScore order4 = corpus_bleu(hyps, refs, 4);
  CHECK(order4.score == 0.0);
  REQUIRE(order4.precisions.size() == 4);
  CHECK(order4.precisions[0] == 1.0);
  CHECK(order4.precisions[1] == 1.0);
  CHECK(order4.precisions[2] == 1.0);
  CHECK(order4.precisions[3] == 0.0);
  CHECK(order4.brevity_penalty == doctest::Approx(std::exp(1.0 - 4.0 / 3.0))
                                      .epsilon(1e-12));

  const BleuScore order3 = corpus_bleu(hyps, refs, 3);
  CHECK(order3.score ==
        doctest::Approx(0.7165313105737893).epsilon(1e-9));
  CHECK(order3.score == order3.brevity_penalty);
}

TEST_CASE("clipping limits repeated n-grams to reference counts") {
  const std::vector<Sentence> hyps = {
      {"the", "the", "the", "cat"},
      {"a", "b", "c", "d", "e"},
  };
  const std::vector<Sentence> refs = {
      {"the", "cat", "is", "here"},
      {"a", "b", "x", "d", "e"},
  };

  const BleuScore order2 = corpus_bleu(hyps, refs, 2);
  // Unigrams: min(3,1)+1 matches of 4 in the first pair, 4 of 5 in the
  // second.  Bigrams: "the cat" of 3, then "a b" and "d e" of 4.
  CHECK(order2.precisions[0] == doctest::Approx(6.0 / 9.0).epsilon(1e-12));
  CHECK(order2.precisions[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(order2.brevity_penalty == 1.0);
  CHECK(order2.score ==
        doctest::Approx(0.5345224838248488).epsilon(1e-12));

  const BleuScore order4 = corpus_bleu(hyps, refs, 4);
  CHECK(order4.score == 0.0);
  CHECK(order4.precisions[3] == 0.0);
}

TEST_CASE("corpus bleu input validation") {
  const std::vector<Sentence> one = {{"a"}};
  const std::vector<Sentence> two = {{"a"}, {"b"}};
  CHECK_THROWS_WITH_AS(corpus_bleu(one, two),
                       "hypothesis and reference counts differ: 1 vs 2",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(corpus_bleu(one, one, 0),
                       "maximum n-gram order must be at least 1",
                       std::invalid_argument);
}

TEST_CASE("corpus bleu is invariant under pair permutation") {
  Rng rng(20260816);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 12;
    std::vector<Sentence> refs = random_corpus(rng, n, 9);
    std::vector<Sentence> hyps = random_corpus(rng, n, 9);
    const BleuScore base = corpus_bleu(hyps, refs);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<int>(i), static_cast<int>(n - 1)));
      std::swap(order[i], order[j]);
    }
    std::vector<Sentence> shuffled_hyps;
    std::vector<Sentence> shuffled_refs;
    for (std::size_t index : order) {
      shuffled_hyps.push_back(hyps[index]);
      shuffled_refs.push_back(refs[index]);
    }
    const BleuScore shuffled = corpus_bleu(shuffled_hyps, shuffled_refs);
    CHECK(shuffled.score == base.score);
    CHECK(shuffled.brevity_penalty == base.brevity_penalty);
    CHECK(shuffled.precisions == base.precisions);
    CHECK(shuffled.candidate_length == base.candidate_length);
    CHECK(shuffled.reference_length == base.reference_length);
  }
}

TEST_CASE("brevity penalty strictly decreases as the candidate shortens") {
  Sentence ref;
  for (int i = 0; i < 10; ++i) ref.push_back("t" + std::to_string(i));
  double previous = -1.0;
  for (std::size_t len = 1; len <= 10; ++len) {
    const Sentence hyp(ref.begin(), ref.begin() + static_cast<long>(len));
    const BleuScore bleu = corpus_bleu({hyp}, {ref});
    CHECK(bleu.brevity_penalty > previous);
    previous = bleu.brevity_penalty;
  }
  CHECK(previous == 1.0);
}

TEST_CASE("length report on identical corpora") {
  const std::vector<Sentence> corpus = {
      {"a", "b", "c"},
      {"d"},
      {"e", "f"},
  };
  const LengthReport report = length_report(corpus, corpus);
  CHECK(report.ratio == 1.0);
  CHECK(report.mean_sentence_ratio == 1.0);
  CHECK(report.fraction_empty == 0.0);
  CHECK(report.exact_one == 3);
  CHECK(report.exact_zero == 0);
  CHECK(report.overflow == 0);
  CHECK(report.count == 3);
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("corpus-total ratio can hide per-sentence imbalance") {
  // Lengths 3 and 9 against 6 and 6: the corpus-total ratio is exactly 1
  // while the per-sentence ratios land in the 0.5 and 1.5 bins.
  const std::vector<Sentence> hyps = {
      {"a", "b", "c"},
      {"d", "e", "f", "g", "h", "i", "j", "k", "l"},
  };
  const std::vector<Sentence> refs = {
      {"r", "r", "r", "r", "r", "r"},
      {"s", "s", "s", "s", "s", "s"},
  };
  const LengthReport report = length_report(hyps, refs);
  CHECK(report.ratio == 1.0);
  CHECK(report.mean_sentence_ratio == 1.0);
  CHECK(report.exact_one == 0);
  REQUIRE(report.bins.size() == 40);
  CHECK(report.bins[10] == 1);  // 0.5 in [0.50, 0.55)
  CHECK(report.bins[30] == 1);  // 1.5 in [1.50, 1.55)
  CHECK(report.bin_lower_edge(10) == doctest::Approx(0.5));
  CHECK(report.bin_lower_edge(30) == doctest::Approx(1.5));
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("corpus ratio and per-sentence mean genuinely differ") {
  const std::vector<Sentence> hyps = {{"a"}, {"b", "c", "d", "e", "f", "g"}};
  const std::vector<Sentence> refs = {{"r", "r"}, {"s", "s", "s", "s"}};
  const LengthReport report = length_report(hyps, refs);
  CHECK(report.ratio == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
  CHECK(report.mean_sentence_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.bins[10] == 1);  // 1/2
  CHECK(report.bins[30] == 1);  // 6/4
}

TEST_CASE("zero-length references are excluded from the histogram only") {
  const std::vector<Sentence> hyps = {{"a", "b"}, {"c", "d", "e", "f"}};
  const std::vector<Sentence> refs = {{}, {"r", "r", "r", "r"}};
  const LengthReport report = length_report(hyps, refs);
  // Corpus totals still include the excluded pair.
  CHECK(report.candidate_length == 6);
  CHECK(report.reference_length == 4);
  CHECK(report.ratio == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(report.excluded_zero_reference == 1);
  CHECK(report.exact_one == 1);
  CHECK(report.mean_sentence_ratio == 1.0);
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("empty hypotheses feed the exact-zero bin and empty fraction") {
  const std::vector<Sentence> hyps = {{}, {}, {"a", "b"}, {}};
  const std::vector<Sentence> refs = {{"r"}, {}, {"r", "r"}, {"r", "r"}};
  const LengthReport report = length_report(hyps, refs);
  // Three empty hypotheses out of four, one of them against an empty
  // reference (excluded from the histogram but still counted as empty).
  CHECK(report.fraction_empty == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.exact_zero == 2);
  CHECK(report.excluded_zero_reference == 1);
  CHECK(report.exact_one == 1);
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("ratios at or beyond twice the reference overflow") {
  const std::vector<Sentence> hyps = {
      {"a", "b", "c", "d"},       // exactly 2.0
      {"e", "f", "g", "h", "i"},  // 2.5
      {"j", "k", "l"},            // 1.5
  };
  const std::vector<Sentence> refs = {
      {"r", "r"},
      {"s", "s"},
      {"t", "t"},
  };
  const LengthReport report = length_report(hyps, refs);
  CHECK(report.overflow == 2);
  CHECK(report.bins[30] == 1);
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("bin edges are decided exactly, not by float division") {
  // 3/20 = 0.15 must land in [0.15, 0.20) even though the nearest double to
  // 0.15 sits just below the nearest double to 3 * 0.05.
  const std::vector<Sentence> hyps = {
      Sentence(3, "w"), Sentence(1, "w"), Sentence(1, "w"),
      Sentence(21, "w")};
  const std::vector<Sentence> refs = {
      Sentence(20, "r"), Sentence(20, "r"), Sentence(21, "r"),
      Sentence(20, "r")};
  const LengthReport report = length_report(hyps, refs);
  CHECK(report.bins[3] == 1);   // 3/20 = 0.15
  CHECK(report.bins[1] == 1);   // 1/20 = 0.05
  CHECK(report.bins[0] == 1);   // 1/21 < 0.05
  CHECK(report.bins[21] == 1);  // 21/20 = 1.05
  CHECK(histogram_total(report) == report.count);
}

TEST_CASE("length report validation") {
  const std::vector<Sentence> one = {{"a"}};
  const std::vector<Sentence> two = {{"a"}, {"b"}};
  CHECK_THROWS_WITH_AS(length_report(one, two),
                       "hypothesis and reference counts differ: 1 vs 2",
                       std::invalid_argument);
  CHECK_THROWS_AS(length_report(one, one, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(length_report(one, one, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(length_report(one, one, 1e-6), std::invalid_argument);
}

TEST_CASE("length report histogram closes over random corpora") {
  Rng rng(987654321);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 40;
    const auto refs = random_corpus(rng, n, 12);
    const auto hyps = random_corpus(rng, n, 12);
    const LengthReport report = length_report(hyps, refs);
    CHECK(histogram_total(report) == report.count);
    CHECK(report.count == n);
  }
}

TEST_CASE("cumulative bleu reports absent points instead of zeros") {
  // All references are eight tokens long, so a threshold of 5 selects
  // nothing and a threshold of 10 reproduces the full corpus exactly.
  std::vector<Sentence> refs;
  std::vector<Sentence> hyps;
  Rng rng(13579);
  for (int i = 0; i < 6; ++i) {
    Sentence ref;
    for (int t = 0; t < 8; ++t) {
      ref.push_back("w" + std::to_string(rng.uniform_int(0, 9)));
    }
    Sentence hyp = ref;
    if (i % 2 == 0) hyp.pop_back();
    refs.push_back(ref);
    hyps.push_back(hyp);
  }

  const auto points = cumulative_bleu_by_length(hyps, refs, {5.0, 10.0});
  REQUIRE(points.size() == 2);
  CHECK(points[0].threshold == 5.0);
  CHECK(points[0].pairs == 0);
  CHECK_FALSE(points[0].bleu.has_value());
  CHECK(points[1].pairs == 6);
  REQUIRE(points[1].bleu.has_value());

  const BleuScore full = corpus_bleu(hyps, refs);
  CHECK(points[1].bleu->score == full.score);
  CHECK(points[1].bleu->brevity_penalty == full.brevity_penalty);
  CHECK(points[1].bleu->precisions == full.precisions);
}

TEST_CASE("cumulative bleu selects by reference length") {
  const std::vector<Sentence> hyps = {
      {"a", "b"},
      {"c", "d", "e", "f", "g", "h"},
  };
  const std::vector<Sentence> refs = {
      {"a", "b", "x"},
      {"c", "d", "e", "f", "g", "h"},
  };
  const auto points = cumulative_bleu_by_length(hyps, refs, {4.0});
  REQUIRE(points.size() == 1);
  CHECK(points[0].pairs == 1);
  REQUIRE(points[0].bleu.has_value());
  const BleuScore alone = corpus_bleu({hyps[0]}, {refs[0]});
  CHECK(points[0].bleu->score == alone.score);
  CHECK(points[0].bleu->candidate_length == 2);
}

TEST_CASE("cumulative bleu final infinite point matches full corpus bitwise") {
  Rng rng(24680);
  for (int trial = 0; trial < 10; ++trial) {
    const auto refs = random_corpus(rng, 15, 10);
    const auto hyps = random_corpus(rng, 15, 10);
    const double inf = std::numeric_limits<double>::infinity();
    const auto points = cumulative_bleu_by_length(hyps, refs, {3.0, 7.0, inf});
    REQUIRE(points.size() == 3);
    const BleuScore full = corpus_bleu(hyps, refs);
    REQUIRE(points.back().bleu.has_value());
    CHECK(points.back().pairs == 15);
    CHECK(points.back().bleu->score == full.score);
    CHECK(points.back().bleu->precisions == full.precisions);
    CHECK(points.back().bleu->brevity_penalty == full.brevity_penalty);
    CHECK(points.back().bleu->candidate_length == full.candidate_length);
    // Earlier points cover no more pairs than later ones.
    CHECK(points[0].pairs <= points[1].pairs);
    CHECK(points[1].pairs <= points[2].pairs);
  }
}

TEST_CASE("cumulative bleu rejects unsorted thresholds") {
  const std::vector<Sentence> corpus = {{"a"}};
  CHECK_THROWS_WITH_AS(cumulative_bleu_by_length(corpus, corpus, {5.0, 5.0}),
                       "length thresholds must be strictly ascending",
                       std::invalid_argument);
  CHECK_THROWS_AS(cumulative_bleu_by_length(corpus, corpus, {7.0, 3.0}),
                  std::invalid_argument);
}

}  // TEST_SUITE

}  // namespace
}  // namespace beamtune
