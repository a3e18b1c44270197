#include "beamtune/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beamtune {

double log_sum_exp(const std::vector<double>& values) {
  double max_value = kNegInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) {
    if (v != kNegInf) sum += std::exp(v - max_value);
  }
  return max_value + std::log(sum);
}

void check_normalized(const LogDistribution& dist, const std::string& context,
                      double tolerance) {
  for (std::size_t i = 0; i < dist.logp.size(); ++i) {
    if (dist.logp[i] > 1e-12) {
      std::ostringstream message;
      message << "distribution for " << context << " has log-probability "
              << dist.logp[i] << " > 0 at token id " << i;
      throw std::runtime_error(message.str());
    }
  }
  double lse = log_sum_exp(dist.logp);
  if (!(std::abs(lse) <= tolerance)) {
    std::ostringstream message;
    message << "distribution for " << context << " sums to " << std::exp(lse)
            << ", expected 1";
    throw std::runtime_error(message.str());
  }
}

LogDistribution ConditionalModel::next_logprobs(
    const std::vector<TokenId>& source,
    const std::vector<TokenId>& prefix) const {
  for (TokenId id : prefix) {
    if (id == Vocabulary::kEos) {
      throw std::invalid_argument(
          "next_logprobs: prefix contains the end-of-sentence sentinel");
    }
  }
  return next_logprobs_impl(source, prefix);
}

double ConditionalModel::sequence_logprob(
    const std::vector<TokenId>& source,
    const std::vector<TokenId>& target) const {
  std::size_t length = target.size();
  if (length > 0 && target.back() == Vocabulary::kEos) --length;
  for (std::size_t i = 0; i < length; ++i) {
    if (target[i] == Vocabulary::kEos) {
      throw std::invalid_argument(
          "sequence_logprob: target contains an interior end-of-sentence "
          "sentinel");
    }
  }
  double score = 0.0;
  std::vector<TokenId> prefix;
  prefix.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    score += next_logprobs_impl(source, prefix)[target[i]];
    prefix.push_back(target[i]);
  }
  score += next_logprobs_impl(source, prefix)[Vocabulary::kEos];
  return score;
}

}  // namespace beamtune
