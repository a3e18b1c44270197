#pragma once

#include <limits>
#include <string>
#include <vector>

#include "beamtune/vocabulary.hpp"

namespace beamtune {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Dense next-token log-distribution over the full target vocabulary
// (end-of-sentence included), natural log, 64-bit floats.  Entries may be
// -inf (forbidden token); log-sum-exp of all entries is 0 within 1e-6.
struct LogDistribution {
  std::vector<double> logp;

  double operator[](TokenId id) const {
    return logp[static_cast<std::size_t>(id)];
  }
  std::size_t size() const { return logp.size(); }
};

double log_sum_exp(const std::vector<double>& values);

// Throws unless log_sum_exp(logp) == 0 within tolerance and no entry exceeds
// 0 beyond 1e-12 slack; `context` names the offending state in the message.
void check_normalized(const LogDistribution& dist, const std::string& context,
                      double tolerance = 1e-6);

// Anything that yields a normalized next-token log-distribution given a
// source sentence and a target prefix.  Models are immutable after
// construction and safe to share across decoding workers.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  // The prefix must be end-of-sentence-free (sentences are stored
  // sentinel-free); violating that is a contract error.
  LogDistribution next_logprobs(const std::vector<TokenId>& source,
                                const std::vector<TokenId>& prefix) const;

  // Sum of per-step log-probabilities along `target`, plus the final
  // end-of-sentence step.  A trailing </s> in `target` is accepted and
  // ignored; an interior </s> is a contract error.  Any -inf step makes the
  // result -inf (not an error).
  double sequence_logprob(const std::vector<TokenId>& source,
                          const std::vector<TokenId>& target) const;

 protected:
  virtual LogDistribution next_logprobs_impl(
      const std::vector<TokenId>& source,
      const std::vector<TokenId>& prefix) const = 0;
};

}  // namespace beamtune
