#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "beamtune/corpus.hpp"
#include "beamtune/distribution.hpp"
#include "beamtune/evaluation.hpp"
#include "beamtune/scoring.hpp"

namespace beamtune {

// Perceptron schedule for the word-reward weight.
struct TunerConfig {
  double initial_gamma = 0.2;
  double learning_rate = 0.2;  // eta
  double update_clip = 0.5;    // per-epoch |update| bound
  double tolerance = 0.03;     // stop once |update| falls below this
  int max_epochs = 25;
  std::size_t beam_size = 10;
  // Output length cap per decode; absent means default_max_len(|source|).
  std::optional<std::size_t> max_len;
  int workers = 1;

  void validate() const;
};

// One tuning epoch as reported: `gamma` is the value the epoch decoded with,
// i.e. before its own update was applied.
struct TunerEpoch {
  int epoch = 0;  // 1-based
  double gamma = 0.0;
  double mean_ref_len = 0.0;
  double mean_hyp_len = 0.0;
  double raw_grad = 0.0;  // eta * mean(|ref| - |hyp|), before clipping
  double update = 0.0;    // raw_grad clamped to [-clip, +clip]
  double seconds = 0.0;   // wall time of the epoch's decode pass
};

struct TunerState {
  double gamma = 0.0;  // final value, after the last applied update
  std::vector<TunerEpoch> history;
  std::string stop_reason;  // kStopConverged or kStopMaxEpochs
};

inline constexpr const char* kStopConverged = "converged";
inline constexpr const char* kStopMaxEpochs = "max-epochs";

// The pure per-batch arithmetic of one perceptron step, factored out so the
// update rule is testable bit-for-bit: lengths enter as integer corpus
// totals, the gradient is the mean per-sentence difference, and the update
// is the learning-rate-scaled gradient clamped to the clip bound.
struct GradientStep {
  double mean_ref_len = 0.0;
  double mean_hyp_len = 0.0;
  double raw_grad = 0.0;
  double update = 0.0;
};
GradientStep word_reward_gradient_step(std::uint64_t ref_length_total,
                                       std::uint64_t hyp_length_total,
                                       std::size_t sentences,
                                       double learning_rate, double clip);

// Tunes the word-reward weight on a frozen model: each epoch decodes every
// dev sentence with WordReward(current gamma) at the configured beam size,
// applies one clamped perceptron update toward matching mean output length
// to mean reference length, and stops when an update is smaller than the
// tolerance ("converged") or after max_epochs ("max-epochs").
TunerState tune_word_reward(const ConditionalModel& model,
                            const ParallelCorpus& dev,
                            const TunerConfig& config);

// Epoch report: epoch, gamma, mean_ref_len, mean_hyp_len, raw_grad, update,
// seconds.  All columns but `seconds` are deterministic.
void write_tuner_report_tsv(std::ostream& out, const TunerState& state);

// The tuned weight travels between commands as a one-line text file.
void write_gamma_file(const std::string& path, double gamma);
double read_gamma_file(const std::string& path);

// One row of the reward-sensitivity curve: corpus quality and length
// statistics of a full dev decode at a fixed gamma.
struct GammaGridRow {
  double gamma = 0.0;
  BleuScore bleu;
  LengthReport lengths;
};

// Decodes `dev` once per grid value with WordReward(gamma) at the given beam
// size and scores each pass against the references.
std::vector<GammaGridRow> evaluate_gamma_grid(const ConditionalModel& model,
                                              const ParallelCorpus& dev,
                                              const std::vector<double>& gammas,
                                              std::size_t beam_size,
                                              int workers = 1);

}  // namespace beamtune
