#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "beamtune/rng.hpp"
#include "beamtune/scoring.hpp"

namespace {

using namespace beamtune;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ranks candidate (score, length) pairs the way search does and returns the
// word count of the winner.
struct Candidate {
  double base_score;
  std::vector<TokenId> tokens;
};

std::size_t best_length(const std::vector<Candidate>& candidates,
                        const ScoringMode& mode) {
  REQUIRE(!candidates.empty());
  const Candidate* best = nullptr;
  for (const Candidate& c : candidates) {
    if (best == nullptr) {
      best = &c;
      continue;
    }
    RankKey challenger{mode.corrected(c.base_score, c.tokens.size()),
                       &c.tokens, true};
    RankKey incumbent{mode.corrected(best->base_score, best->tokens.size()),
                      &best->tokens, true};
    if (rank_before(challenger, incumbent)) best = &c;
  }
  return best->tokens.size();
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("corrections match their closed forms") {
  SUBCASE("baseline is the identity") {
    ScoringMode mode = ScoringMode::baseline();
    CHECK(mode.corrected(-12.5, 0) == -12.5);
    CHECK(mode.corrected(-12.5, 9) == -12.5);
    CHECK(mode.corrected(-kInf, 3) == -kInf);
  }
  SUBCASE("length normalization divides by the word count") {
    ScoringMode mode = ScoringMode::length_norm();
    CHECK(mode.corrected(-10.0, 5) == -2.0);
    CHECK(mode.corrected(-9.0, 3) == -3.0);
    // The empty hypothesis divides by 1, not 0.
    CHECK(mode.corrected(-4.0, 0) == -4.0);
    CHECK(mode.corrected(-kInf, 7) == -kInf);
  }
  SUBCASE("length penalty is neutral at one word") {
    for (double alpha : {0.0, 0.3, 1.0, 2.5}) {
      ScoringMode mode = ScoringMode::gnmt(alpha);
      CHECK(mode.corrected(-7.25, 1) == -7.25);
    }
  }
  SUBCASE("length penalty closed form") {
    ScoringMode mode = ScoringMode::gnmt(1.0);
    // ((5+7)/6)^1 = 2, so -12 becomes -6.
    CHECK(mode.corrected(-12.0, 7) == -6.0);
    ScoringMode strong = ScoringMode::gnmt(2.0);
    CHECK(strong.corrected(-12.0, 7) == doctest::Approx(-3.0).epsilon(1e-12));
  }
  SUBCASE("word reward adds a per-word bonus") {
    ScoringMode mode = ScoringMode::word_reward(0.716);
    CHECK(mode.corrected(-10.0, 10) == doctest::Approx(-2.84).epsilon(1e-12));
    CHECK(mode.corrected(-10.0, 0) == -10.0);
    CHECK(mode.corrected(-kInf, 10) == -kInf);
  }
}

TEST_CASE("zero-strength corrections reproduce the baseline bit for bit") {
  ScoringMode reward0 = ScoringMode::word_reward(0.0);
  ScoringMode gnmt0 = ScoringMode::gnmt(0.0);
  ScoringMode base = ScoringMode::baseline();
  Rng rng(321);
  for (int i = 0; i < 200; ++i) {
    double s = -rng.uniform(0.0, 40.0);
    std::size_t m = static_cast<std::size_t>(rng.uniform_int(0, 12));
    CHECK(reward0.corrected(s, m) == base.corrected(s, m));
    CHECK(gnmt0.corrected(s, m) == base.corrected(s, m));
  }
  CHECK(reward0.corrected(-kInf, 4) == -kInf);
  CHECK(gnmt0.corrected(-kInf, 4) == -kInf);
}

TEST_CASE("partial correction can be switched off") {
  ScoringMode mode = ScoringMode::word_reward(0.5);
  CHECK(mode.corrected_for(-4.0, 4, false) == -2.0);
  CHECK(mode.corrected_for(-4.0, 4, true) == -2.0);
  mode.correct_partials = false;
  CHECK(mode.corrected_for(-4.0, 4, false) == -4.0);
  CHECK(mode.corrected_for(-4.0, 4, true) == -2.0);
}

TEST_CASE("mode strings parse and round trip") {
  CHECK(ScoringMode::parse("baseline") == ScoringMode::baseline());
  CHECK(ScoringMode::parse("norm") == ScoringMode::length_norm());
  CHECK(ScoringMode::parse("gnmt:alpha=0.8") == ScoringMode::gnmt(0.8));
  CHECK(ScoringMode::parse("reward:gamma=0.25") ==
        ScoringMode::word_reward(0.25));
  CHECK(ScoringMode::parse("reward:gamma=-0.5") ==
        ScoringMode::word_reward(-0.5));

  for (const ScoringMode& mode :
       {ScoringMode::baseline(), ScoringMode::length_norm(),
        ScoringMode::gnmt(0.8), ScoringMode::word_reward(0.716)}) {
    CHECK(ScoringMode::parse(mode.to_string()) == mode);
  }

  SUBCASE("unknown modes are rejected") {
    CHECK_THROWS_WITH(ScoringMode::parse("magic"),
                      doctest::Contains("unknown scoring mode \"magic\""));
    CHECK_THROWS_WITH(ScoringMode::parse(""),
                      doctest::Contains("unknown scoring mode"));
  }
  SUBCASE("missing or malformed parameters are rejected") {
    CHECK_THROWS_WITH(ScoringMode::parse("gnmt"),
                      doctest::Contains("requires :alpha=<value>"));
    CHECK_THROWS_WITH(ScoringMode::parse("gnmt:beta=1"),
                      doctest::Contains("requires :alpha=<value>"));
    CHECK_THROWS_WITH(ScoringMode::parse("reward"),
                      doctest::Contains("requires :gamma=<value>"));
    CHECK_THROWS_WITH(ScoringMode::parse("reward:gamma=abc"),
                      doctest::Contains("invalid gamma value \"abc\""));
    CHECK_THROWS_WITH(ScoringMode::parse("gnmt:alpha=1.5x"),
                      doctest::Contains("invalid alpha value \"1.5x\""));
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(ScoringMode::gnmt(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ScoringMode::gnmt(kInf), std::invalid_argument);
    CHECK_THROWS_AS(ScoringMode::word_reward(kInf), std::invalid_argument);
    CHECK_NOTHROW(ScoringMode::word_reward(-2.0));  // penalties are allowed
  }
}

TEST_CASE("ranking is a strict deterministic order") {
  std::vector<TokenId> shorter{4};
  std::vector<TokenId> longer{3, 5};
  std::vector<TokenId> lex_smaller{3, 4};

  SUBCASE("higher corrected score wins") {
    CHECK(rank_before({-1.0, &longer, true}, {-2.0, &shorter, true}));
    CHECK_FALSE(rank_before({-2.0, &shorter, true}, {-1.0, &longer, true}));
  }
  SUBCASE("ties break toward fewer words") {
    CHECK(rank_before({-1.0, &shorter, true}, {-1.0, &longer, true}));
    CHECK_FALSE(rank_before({-1.0, &longer, true}, {-1.0, &shorter, true}));
  }
  SUBCASE("then toward the lexicographically smaller sequence") {
    CHECK(rank_before({-1.0, &lex_smaller, true}, {-1.0, &longer, true}));
    CHECK_FALSE(rank_before({-1.0, &longer, true}, {-1.0, &lex_smaller, true}));
  }
  SUBCASE("then complete before incomplete") {
    CHECK(rank_before({-1.0, &shorter, true}, {-1.0, &shorter, false}));
    CHECK_FALSE(rank_before({-1.0, &shorter, false}, {-1.0, &shorter, true}));
  }
  SUBCASE("irreflexive and antisymmetric") {
    RankKey a{-1.0, &shorter, true};
    CHECK_FALSE(rank_before(a, a));
    RankKey b{-1.0, &longer, false};
    CHECK(rank_before(a, b) != rank_before(b, a));
  }
  SUBCASE("negative infinities compare as equal scores") {
    CHECK(rank_before({-kInf, &shorter, true}, {-kInf, &longer, true}));
  }
}

TEST_CASE("larger word rewards never shorten the winning candidate") {
  Rng rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Candidate> candidates;
    int n = static_cast<int>(rng.uniform_int(2, 12));
    for (int i = 0; i < n; ++i) {
      std::size_t len = static_cast<std::size_t>(rng.uniform_int(0, 10));
      Candidate c;
      c.base_score = -rng.uniform(0.0, 25.0);
      for (std::size_t j = 0; j < len; ++j) {
        c.tokens.push_back(static_cast<TokenId>(rng.uniform_int(3, 9)));
      }
      candidates.push_back(std::move(c));
    }
    std::size_t previous = 0;
    for (double gamma = 0.0; gamma <= 1.21; gamma += 0.1) {
      std::size_t len =
          best_length(candidates, ScoringMode::word_reward(gamma));
      if (gamma > 0.0) CHECK(len >= previous);
      previous = len;
    }
  }
}

}  // TEST_SUITE("scoring")
