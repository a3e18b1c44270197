#include "beamtune/toy_transducer.hpp"

#include <cmath>
#include <stdexcept>

namespace beamtune {

ToyTransducer ToyTransducer::train(const ParallelCorpus& corpus,
                                   const Vocabulary& vocab, double lambda,
                                   double k_smooth) {
  if (corpus.empty()) {
    throw std::runtime_error("cannot train on an empty corpus");
  }
  if (!(k_smooth > 0.0)) {
    throw std::invalid_argument("smoothing constant must be positive");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("interpolation weight must be in [0, 1]");
  }

  ToyTransducer model;
  model.vocab_ = vocab;
  model.lambda_ = lambda;
  model.k_smooth_ = k_smooth;

  // Pass 1: word counts.  Bigram contexts start at the beginning-of-sentence
  // sentinel; co-occurrence pairs every source token with every target word
  // of the same sentence pair.
  for (const SentencePair& pair : corpus.pairs) {
    TokenId prev = Vocabulary::kBos;
    for (TokenId word : pair.target) {
      ++model.bigram_[{prev, word}];
      ++model.context_totals_[prev];
      prev = word;
    }
    for (TokenId source_token : pair.source) {
      for (TokenId word : pair.target) {
        ++model.cooc_[{source_token, word}];
      }
    }
  }

  // Pass 2: end-of-sentence events, bucketed by (covered fraction of source,
  // length ratio).  Coverage uses the final co-occurrence table, so the
  // definition at training time matches the one used at decode time.
  for (const SentencePair& pair : corpus.pairs) {
    std::vector<TokenId> prefix;
    prefix.reserve(pair.target.size());
    for (std::size_t i = 0; i <= pair.target.size(); ++i) {
      int cov = bucket3(model.covered_fraction(pair.source, prefix));
      int len = bucket3(static_cast<double>(i) /
                        static_cast<double>(pair.source.size()));
      ++model.eos_total_[cov][len];
      if (i == pair.target.size()) {
        ++model.eos_stops_[cov][len];
      } else {
        prefix.push_back(pair.target[i]);
      }
    }
  }
  return model;
}

ToyTransducer ToyTransducer::from_parts(Vocabulary vocab, double lambda,
                                        double k_smooth, CountMap bigram,
                                        CountMap cooc, const EosGrid& stops,
                                        const EosGrid& total) {
  if (!(k_smooth > 0.0)) {
    throw std::invalid_argument("smoothing constant must be positive");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("interpolation weight must be in [0, 1]");
  }
  ToyTransducer model;
  model.vocab_ = std::move(vocab);
  model.lambda_ = lambda;
  model.k_smooth_ = k_smooth;
  model.bigram_ = std::move(bigram);
  model.cooc_ = std::move(cooc);
  for (const auto& [key, count] : model.bigram_) {
    model.context_totals_[key.first] += count;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      model.eos_stops_[i][j] = stops[i][j];
      model.eos_total_[i][j] = total[i][j];
      if (stops[i][j] > total[i][j]) {
        throw std::runtime_error("stop count exceeds step count in model");
      }
    }
  }
  return model;
}

bool ToyTransducer::covers(TokenId source_token,
                           const std::vector<TokenId>& prefix) const {
  for (TokenId word : prefix) {
    auto it = cooc_.find({source_token, word});
    if (it != cooc_.end() && it->second > 0) return true;
  }
  return false;
}

double ToyTransducer::covered_fraction(
    const std::vector<TokenId>& source,
    const std::vector<TokenId>& prefix) const {
  if (source.empty()) return 1.0;
  std::size_t covered = 0;
  for (TokenId source_token : source) {
    if (covers(source_token, prefix)) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(source.size());
}

LogDistribution ToyTransducer::next_logprobs_impl(
    const std::vector<TokenId>& source,
    const std::vector<TokenId>& prefix) const {
  const std::size_t vocab_size = vocab_.size();
  // Emittable support: every id except the two structural sentinels
  // (beginning-of-sentence is never emitted; end-of-sentence is handled by
  // the stop model below).
  const double support =
      static_cast<double>(vocab_size - 2);

  int cov_bucket = bucket3(covered_fraction(source, prefix));
  int len_bucket =
      source.empty()
          ? 2
          : bucket3(static_cast<double>(prefix.size()) /
                    static_cast<double>(source.size()));
  double stops = static_cast<double>(eos_stops_[cov_bucket][len_bucket]);
  double steps = static_cast<double>(eos_total_[cov_bucket][len_bucket]);
  double p_eos = (stops + k_smooth_) / (steps + 2.0 * k_smooth_);

  // Bigram component.
  TokenId prev = prefix.empty() ? Vocabulary::kBos : prefix.back();
  double context_total = 0.0;
  if (auto it = context_totals_.find(prev); it != context_totals_.end()) {
    context_total = static_cast<double>(it->second);
  }

  // Source-coverage component: co-occurrence mass of the still-uncovered
  // source tokens (uniform when everything is covered).
  std::vector<TokenId> uncovered;
  uncovered.reserve(source.size());
  for (TokenId source_token : source) {
    if (!covers(source_token, prefix)) uncovered.push_back(source_token);
  }
  double uncovered_total = 0.0;
  std::vector<double> src_score(vocab_size, 0.0);
  for (TokenId source_token : uncovered) {
    auto it = cooc_.lower_bound({source_token, 0});
    for (; it != cooc_.end() && it->first.first == source_token; ++it) {
      src_score[static_cast<std::size_t>(it->first.second)] +=
          static_cast<double>(it->second);
      uncovered_total += static_cast<double>(it->second);
    }
  }

  LogDistribution dist;
  dist.logp.assign(vocab_size, kNegInf);
  dist.logp[Vocabulary::kEos] = std::log(p_eos);
  const double word_mass = 1.0 - p_eos;
  for (std::size_t id = 0; id < vocab_size; ++id) {
    if (id == static_cast<std::size_t>(Vocabulary::kBos) ||
        id == static_cast<std::size_t>(Vocabulary::kEos)) {
      continue;
    }
    double bigram_count = 0.0;
    if (auto it = bigram_.find({prev, static_cast<TokenId>(id)});
        it != bigram_.end()) {
      bigram_count = static_cast<double>(it->second);
    }
    double p_big =
        (bigram_count + k_smooth_) / (context_total + k_smooth_ * support);
    double p_src = uncovered.empty()
                       ? 1.0 / support
                       : (src_score[id] + k_smooth_) /
                             (uncovered_total + k_smooth_ * support);
    double p_word = word_mass * (lambda_ * p_src + (1.0 - lambda_) * p_big);
    dist.logp[id] = std::log(p_word);
  }
  return dist;
}

}  // namespace beamtune
