#pragma once

#include <string>

#include "beamtune/vocabulary.hpp"

namespace beamtune {

// A score correction applied on top of the model log-probability of a
// hypothesis.  `m` is always the number of ordinary words produced: the
// end-of-sentence token never counts toward the length.
//
//   Baseline    s' = s                       (pure model score)
//   LengthNorm  s' = s / max(m, 1)           (per-word average)
//   Gnmt        s' = s / ((5+m)^a / (5+1)^a) (length penalty, neutral at m=1)
//   WordReward  s' = s + g*m                 (additive per-word bonus)
struct ScoringMode {
  enum class Kind { kBaseline, kLengthNorm, kGnmt, kWordReward };

  Kind kind = Kind::kBaseline;
  double alpha = 0.0;   // Gnmt strength; 0 reproduces the baseline ranking
  double gamma = 0.0;   // WordReward bonus per word; 0 is exactly the baseline
  // When false, incomplete hypotheses keep their raw model score and only
  // completed ones are corrected.  The default corrects both, so partial and
  // complete hypotheses compete on the same footing during search.
  bool correct_partials = true;

  static ScoringMode baseline();
  static ScoringMode length_norm();
  static ScoringMode gnmt(double alpha);
  static ScoringMode word_reward(double gamma);

  // Accepts "baseline", "norm", "gnmt:alpha=<float>", "reward:gamma=<float>".
  static ScoringMode parse(const std::string& text);

  // The corrected score of a hypothesis with model score `s` and `m` words.
  double corrected(double s, std::size_t m) const;
  // Honors correct_partials for hypotheses still being extended.
  double corrected_for(double s, std::size_t m, bool complete) const;

  std::string to_string() const;

  bool operator==(const ScoringMode& other) const {
    return kind == other.kind && alpha == other.alpha &&
           gamma == other.gamma && correct_partials == other.correct_partials;
  }
};

// Ranking order used everywhere a set of hypotheses is compared: higher
// corrected score first, then fewer words, then lexicographically smaller
// token sequence, then complete before incomplete.  A strict total order on
// distinct (score, tokens, complete) triples, so every sort is deterministic.
struct RankKey {
  double corrected_score;
  const std::vector<TokenId>* tokens;
  bool complete;
};

bool rank_before(const RankKey& a, const RankKey& b);

}  // namespace beamtune
