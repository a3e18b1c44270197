#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "beamtune/corpus.hpp"
#include "beamtune/distribution.hpp"

namespace beamtune {

// Count-based trainable conditional model: a desk-scale stand-in for a real
// translation model.  The next-word distribution interpolates a
// source-coverage component (co-occurrence counts of the still-uncovered
// source tokens) with a target bigram component, weighted by lambda; the
// end-of-sentence probability conditions only on coarse buckets of
// (covered fraction of source, length ratio), which is deliberately limited
// conditioning: the model can overestimate the end of sentence because it
// cannot see what is still missing.
//
// Smoothing (add-k, k > 0) gives full support: only the beginning-of-sentence
// sentinel is structurally forbidden (always -inf), so the count of -inf
// entries is the same for every state and training set.
class ToyTransducer final : public ConditionalModel {
 public:
  using CountMap = std::map<std::pair<TokenId, TokenId>, std::uint64_t>;
  using EosGrid = std::uint64_t[3][3];

  // lambda in [0,1]: weight of the source-coverage component.
  // k_smooth > 0: add-k smoothing constant.
  static ToyTransducer train(const ParallelCorpus& corpus,
                             const Vocabulary& vocab, double lambda,
                             double k_smooth);

  const Vocabulary& vocabulary() const override { return vocab_; }
  double lambda() const { return lambda_; }
  double k_smooth() const { return k_smooth_; }

  // True when any word of `prefix` was ever seen together with `source_token`
  // in training; a covered source token is considered already translated.
  bool covers(TokenId source_token, const std::vector<TokenId>& prefix) const;

  // Persistence accessors (counts are stored in ordered maps so that model
  // files serialize deterministically).
  const CountMap& bigram_counts() const { return bigram_; }
  const CountMap& cooccurrence_counts() const { return cooc_; }
  const EosGrid& stop_counts() const { return eos_stops_; }
  const EosGrid& step_counts() const { return eos_total_; }

  // Rebuilds a model from persisted state.
  static ToyTransducer from_parts(Vocabulary vocab, double lambda,
                                  double k_smooth, CountMap bigram,
                                  CountMap cooc, const EosGrid& stops,
                                  const EosGrid& total);

 protected:
  LogDistribution next_logprobs_impl(
      const std::vector<TokenId>& source,
      const std::vector<TokenId>& prefix) const override;

 private:
  ToyTransducer() = default;

  static int bucket3(double value) {
    return value < 0.5 ? 0 : (value < 1.0 ? 1 : 2);
  }
  double covered_fraction(const std::vector<TokenId>& source,
                          const std::vector<TokenId>& prefix) const;

  Vocabulary vocab_;
  double lambda_ = 0.5;
  double k_smooth_ = 0.1;
  CountMap bigram_;                       // (previous word, word) -> count
  std::map<TokenId, std::uint64_t> context_totals_;  // previous word -> sum
  CountMap cooc_;                         // (source token, target word) -> count
  std::uint64_t eos_stops_[3][3] = {};    // [coverage bucket][ratio bucket]
  std::uint64_t eos_total_[3][3] = {};
};

}  // namespace beamtune
