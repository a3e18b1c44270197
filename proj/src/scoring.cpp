#include "beamtune/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace beamtune {

namespace {

double parse_double_strict(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (begin == end || *end != '\0') {
    throw std::invalid_argument("invalid " + what + " value \"" + text + "\"");
  }
  return value;
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(15);
  out << value;
  return out.str();
}

}  // namespace

ScoringMode ScoringMode::baseline() { return ScoringMode{}; }

ScoringMode ScoringMode::length_norm() {
  ScoringMode mode;
  mode.kind = Kind::kLengthNorm;
  return mode;
}

ScoringMode ScoringMode::gnmt(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw std::invalid_argument(
        "length penalty strength must be a finite non-negative number");
  }
  ScoringMode mode;
  mode.kind = Kind::kGnmt;
  mode.alpha = alpha;
  return mode;
}

ScoringMode ScoringMode::word_reward(double gamma) {
  if (!std::isfinite(gamma)) {
    throw std::invalid_argument("word reward must be a finite number");
  }
  ScoringMode mode;
  mode.kind = Kind::kWordReward;
  mode.gamma = gamma;
  return mode;
}

ScoringMode ScoringMode::parse(const std::string& text) {
  if (text == "baseline") return baseline();
  if (text == "norm") return length_norm();
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? std::string() : text.substr(colon + 1);
  if (head == "gnmt") {
    if (rest.rfind("alpha=", 0) != 0) {
      throw std::invalid_argument(
          "scoring mode \"gnmt\" requires :alpha=<value>");
    }
    return gnmt(parse_double_strict(rest.substr(6), "alpha"));
  }
  if (head == "reward") {
    if (rest.rfind("gamma=", 0) != 0) {
      throw std::invalid_argument(
          "scoring mode \"reward\" requires :gamma=<value>");
    }
    return word_reward(parse_double_strict(rest.substr(6), "gamma"));
  }
  throw std::invalid_argument(
      "unknown scoring mode \"" + text +
      "\" (expected baseline, norm, gnmt:alpha=<a>, or reward:gamma=<g>)");
}

double ScoringMode::corrected(double s, std::size_t m) const {
  switch (kind) {
    case Kind::kBaseline:
      return s;
    case Kind::kLengthNorm:
      return s / static_cast<double>(std::max<std::size_t>(m, 1));
    case Kind::kGnmt:
      return s / (std::pow(5.0 + static_cast<double>(m), alpha) /
                  std::pow(6.0, alpha));
    case Kind::kWordReward:
      return s + gamma * static_cast<double>(m);
  }
  throw std::logic_error("unreachable scoring kind");
}

double ScoringMode::corrected_for(double s, std::size_t m,
                                  bool complete) const {
  if (!complete && !correct_partials) return s;
  return corrected(s, m);
}

std::string ScoringMode::to_string() const {
  switch (kind) {
    case Kind::kBaseline:
      return "baseline";
    case Kind::kLengthNorm:
      return "norm";
    case Kind::kGnmt:
      return "gnmt:alpha=" + format_double(alpha);
    case Kind::kWordReward:
      return "reward:gamma=" + format_double(gamma);
  }
  throw std::logic_error("unreachable scoring kind");
}

bool rank_before(const RankKey& a, const RankKey& b) {
  if (a.corrected_score != b.corrected_score) {
    return a.corrected_score > b.corrected_score;
  }
  const std::size_t ma = a.tokens->size();
  const std::size_t mb = b.tokens->size();
  if (ma != mb) return ma < mb;
  if (*a.tokens != *b.tokens) {
    return std::lexicographical_compare(a.tokens->begin(), a.tokens->end(),
                                        b.tokens->begin(), b.tokens->end());
  }
  return a.complete && !b.complete;
}

}  // namespace beamtune
