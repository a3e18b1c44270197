#include "beamtune/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace beamtune {

namespace {

void check_pair_counts(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw std::invalid_argument("hypothesis and reference counts differ: " +
                                std::to_string(hyps) + " vs " +
                                std::to_string(refs));
  }
}

// Length-prefixed join, so token content can never collide across boundaries.
std::string ngram_key(const Sentence& sentence, std::size_t begin,
                      std::size_t order) {
  std::string key;
  for (std::size_t i = begin; i < begin + order; ++i) {
    const std::string& token = sentence[i];
    key += std::to_string(token.size());
    key += ':';
    key += token;
  }
  return key;
}

std::unordered_map<std::string, std::uint64_t> ngram_counts(
    const Sentence& sentence, std::size_t order) {
  std::unordered_map<std::string, std::uint64_t> counts;
  if (sentence.size() >= order) {
    for (std::size_t begin = 0; begin + order <= sentence.size(); ++begin) {
      ++counts[ngram_key(sentence, begin, order)];
    }
  }
  return counts;
}

}  // namespace

Sentence surface_sentence(const Vocabulary& vocabulary,
                          const std::vector<TokenId>& ids) {
  Sentence sentence;
  sentence.reserve(ids.size());
  for (TokenId id : ids) sentence.push_back(vocabulary.surface(id));
  return sentence;
}

std::vector<Sentence> surface_sentences(
    const Vocabulary& vocabulary,
    const std::vector<std::vector<TokenId>>& sentences) {
  std::vector<Sentence> result;
  result.reserve(sentences.size());
  for (const auto& ids : sentences) {
    result.push_back(surface_sentence(vocabulary, ids));
  }
  return result;
}

BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses,
                      const std::vector<Sentence>& references,
                      std::size_t max_order) {
  check_pair_counts(hypotheses.size(), references.size());
  if (max_order == 0) {
    throw std::invalid_argument("maximum n-gram order must be at least 1");
  }

  BleuScore result;
  std::vector<std::uint64_t> matches(max_order, 0);
  std::vector<std::uint64_t> totals(max_order, 0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const Sentence& hyp = hypotheses[i];
    const Sentence& ref = references[i];
    result.candidate_length += hyp.size();
    result.reference_length += ref.size();
    for (std::size_t order = 1; order <= max_order; ++order) {
      if (hyp.size() < order) break;
      totals[order - 1] += hyp.size() - order + 1;
      const auto ref_counts = ngram_counts(ref, order);
      for (const auto& [key, count] : ngram_counts(hyp, order)) {
        const auto it = ref_counts.find(key);
        if (it != ref_counts.end()) {
          matches[order - 1] += std::min(count, it->second);
        }
      }
    }
  }

  result.precisions.resize(max_order, 0.0);
  bool any_zero = false;
  double log_precision_sum = 0.0;
  for (std::size_t order = 0; order < max_order; ++order) {
    if (totals[order] == 0 || matches[order] == 0) {
      any_zero = true;
      continue;
    }
    result.precisions[order] =
        static_cast<double>(matches[order]) / static_cast<double>(totals[order]);
    log_precision_sum += std::log(result.precisions[order]);
  }

  if (result.candidate_length == 0) {
    result.brevity_penalty = 0.0;
  } else if (result.candidate_length >= result.reference_length) {
    result.brevity_penalty = 1.0;
  } else {
    result.brevity_penalty =
        std::exp(1.0 - static_cast<double>(result.reference_length) /
                           static_cast<double>(result.candidate_length));
  }

  result.score = any_zero ? 0.0
                          : result.brevity_penalty *
                                std::exp(log_precision_sum /
                                         static_cast<double>(max_order));
  return result;
}

double LengthReport::bin_lower_edge(std::size_t index) const {
  return static_cast<double>(index) * bin_width;
}

LengthReport length_report(const std::vector<Sentence>& hypotheses,
                           const std::vector<Sentence>& references,
                           double bin_width) {
  check_pair_counts(hypotheses.size(), references.size());
  if (!std::isfinite(bin_width) || bin_width <= 0.0) {
    throw std::invalid_argument("bin width must be a positive finite number");
  }
  // Bin edges live on a 1e-4 grid so membership can be decided exactly with
  // integers: ratio h/r falls in bin k iff k*width_scaled <= 1e4*h/r.
  const std::int64_t width_scaled =
      static_cast<std::int64_t>(std::llround(bin_width * 1e4));
  if (width_scaled < 1) {
    throw std::invalid_argument("bin width must be at least 0.0001");
  }
  constexpr std::int64_t kLimitScaled = 20000;  // histogram covers [0, 2.0)

  LengthReport report;
  report.bin_width = bin_width;
  report.count = hypotheses.size();
  report.bins.assign(
      static_cast<std::size_t>((kLimitScaled + width_scaled - 1) / width_scaled),
      0);

  std::uint64_t empty_hypotheses = 0;
  std::uint64_t included = 0;
  double sentence_ratio_sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const std::int64_t h = static_cast<std::int64_t>(hypotheses[i].size());
    const std::int64_t r = static_cast<std::int64_t>(references[i].size());
    report.candidate_length += static_cast<std::uint64_t>(h);
    report.reference_length += static_cast<std::uint64_t>(r);
    if (h == 0) ++empty_hypotheses;
    if (r == 0) {
      ++report.excluded_zero_reference;
      continue;
    }
    ++included;
    sentence_ratio_sum += static_cast<double>(h) / static_cast<double>(r);
    if (h == 0) {
      ++report.exact_zero;
    } else if (h == r) {
      ++report.exact_one;
    } else if (10000 * h >= kLimitScaled * r) {
      ++report.overflow;
    } else {
      report.bins[static_cast<std::size_t>(10000 * h / (width_scaled * r))] +=
          1;
    }
  }

  if (report.reference_length > 0) {
    report.ratio = static_cast<double>(report.candidate_length) /
                   static_cast<double>(report.reference_length);
  }
  if (included > 0) {
    report.mean_sentence_ratio =
        sentence_ratio_sum / static_cast<double>(included);
  }
  if (report.count > 0) {
    report.fraction_empty = static_cast<double>(empty_hypotheses) /
                            static_cast<double>(report.count);
  }
  return report;
}

std::vector<CumulativeBleuPoint> cumulative_bleu_by_length(
    const std::vector<Sentence>& hypotheses,
    const std::vector<Sentence>& references,
    const std::vector<double>& thresholds, std::size_t max_order) {
  check_pair_counts(hypotheses.size(), references.size());
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i - 1] < thresholds[i])) {
      throw std::invalid_argument(
          "length thresholds must be strictly ascending");
    }
  }

  std::vector<CumulativeBleuPoint> points;
  points.reserve(thresholds.size());
  for (double threshold : thresholds) {
    CumulativeBleuPoint point;
    point.threshold = threshold;
    std::vector<Sentence> sub_hyps;
    std::vector<Sentence> sub_refs;
    for (std::size_t i = 0; i < references.size(); ++i) {
      if (static_cast<double>(references[i].size()) <= threshold) {
        sub_hyps.push_back(hypotheses[i]);
        sub_refs.push_back(references[i]);
      }
    }
    point.pairs = sub_hyps.size();
    if (!sub_hyps.empty()) {
      point.bleu = corpus_bleu(sub_hyps, sub_refs, max_order);
    }
    points.push_back(std::move(point));
  }
  return points;
}

}  // namespace beamtune
