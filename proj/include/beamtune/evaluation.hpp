#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beamtune/vocabulary.hpp"

namespace beamtune {

// Sentences for evaluation are token strings, decoupled from any vocabulary.
using Sentence = std::vector<std::string>;

// Renders decoder output (token ids) as evaluation sentences.
Sentence surface_sentence(const Vocabulary& vocabulary,
                          const std::vector<TokenId>& ids);
std::vector<Sentence> surface_sentences(
    const Vocabulary& vocabulary,
    const std::vector<std::vector<TokenId>>& sentences);

struct BleuScore {
  double score = 0.0;                // BP * geometric mean of precisions
  std::vector<double> precisions;    // modified n-gram precision per order
  double brevity_penalty = 0.0;      // min(1, exp(1 - ref/cand)); 0 if cand=0
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;
};

// Unsmoothed corpus-level BLEU with a single reference per sentence: clipped
// n-gram matches and totals are summed over the corpus per order, the score
// is the brevity penalty times the geometric mean of the order precisions,
// and any zero precision zeroes the whole score.
BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses,
                      const std::vector<Sentence>& references,
                      std::size_t max_order = 4);

// Length statistics of a decoded corpus against its references.  The overall
// ratio uses corpus totals; the histogram is over per-sentence ratios with
// exact-0 and exact-1 counted separately from the right-open interval bins,
// ratios at or beyond 2.0 in an overflow bin, and zero-length references
// excluded from the histogram (but not from the corpus totals) and tallied.
// Bin boundaries are evaluated in exact arithmetic (the width is interpreted
// at 1e-4 resolution), so a ratio like 3/20 lands in [0.15, 0.20) and never
// drifts across an edge.
struct LengthReport {
  double ratio = 0.0;                // sum(|hyp|) / sum(|ref|)
  double mean_sentence_ratio = 0.0;  // mean over histogram-included pairs
  double fraction_empty = 0.0;       // share of zero-length hypotheses
  std::uint64_t count = 0;           // sentence pairs
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;
  double bin_width = 0.05;
  std::vector<std::uint64_t> bins;   // [k*w, (k+1)*w) for k*w < 2.0
  std::uint64_t exact_zero = 0;
  std::uint64_t exact_one = 0;
  std::uint64_t overflow = 0;        // ratio >= 2.0
  std::uint64_t excluded_zero_reference = 0;

  // First edge (inclusive) of interval bin `index`, for report rendering.
  double bin_lower_edge(std::size_t index) const;
};

LengthReport length_report(const std::vector<Sentence>& hypotheses,
                           const std::vector<Sentence>& references,
                           double bin_width = 0.05);

// One point of the cumulative quality-by-length curve: corpus BLEU over the
// pairs whose reference is at most `threshold` tokens long.  Points with no
// qualifying pairs report no score at all rather than zero.
struct CumulativeBleuPoint {
  double threshold = 0.0;  // +infinity for the full-corpus point
  std::uint64_t pairs = 0;
  std::optional<BleuScore> bleu;
};

std::vector<CumulativeBleuPoint> cumulative_bleu_by_length(
    const std::vector<Sentence>& hypotheses,
    const std::vector<Sentence>& references,
    const std::vector<double>& thresholds, std::size_t max_order = 4);

}  // namespace beamtune
