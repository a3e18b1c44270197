#include "beamtune/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "beamtune/search.hpp"

namespace beamtune {

namespace {

std::vector<std::uint64_t> decoded_lengths(const ConditionalModel& model,
                                           const ParallelCorpus& corpus,
                                           const ScoringMode& mode,
                                           const TunerConfig& config) {
  const auto outputs = decode_corpus(model, corpus, mode, config.beam_size,
                                     config.workers, config.max_len);
  std::vector<std::uint64_t> lengths(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    lengths[i] = outputs[i].size();
  }
  return lengths;
}

}  // namespace

void TunerConfig::validate() const {
  if (!std::isfinite(initial_gamma)) {
    throw std::invalid_argument("initial gamma must be finite");
  }
  if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!std::isfinite(update_clip) || update_clip <= 0.0) {
    throw std::invalid_argument("update clip must be positive");
  }
  if (!std::isfinite(tolerance) || tolerance <= 0.0) {
    throw std::invalid_argument("stopping tolerance must be positive");
  }
  if (max_epochs < 1) {
    throw std::invalid_argument("max epochs must be at least 1");
  }
  if (beam_size < 1) {
    throw std::invalid_argument("beam size must be at least 1");
  }
  if (workers < 1) {
    throw std::invalid_argument("worker count must be at least 1");
  }
}

GradientStep word_reward_gradient_step(std::uint64_t ref_length_total,
                                       std::uint64_t hyp_length_total,
                                       std::size_t sentences,
                                       double learning_rate, double clip) {
  if (sentences == 0) {
    throw std::invalid_argument("gradient step needs at least one sentence");
  }
  GradientStep step;
  const double n = static_cast<double>(sentences);
  step.mean_ref_len = static_cast<double>(ref_length_total) / n;
  step.mean_hyp_len = static_cast<double>(hyp_length_total) / n;
  const double gradient = (static_cast<double>(ref_length_total) -
                           static_cast<double>(hyp_length_total)) /
                          n;
  step.raw_grad = learning_rate * gradient;
  step.update = std::clamp(step.raw_grad, -clip, clip);
  return step;
}

TunerState tune_word_reward(const ConditionalModel& model,
                            const ParallelCorpus& dev,
                            const TunerConfig& config) {
  config.validate();
  if (dev.empty()) {
    throw std::invalid_argument("cannot tune on an empty corpus");
  }

  std::uint64_t ref_total = 0;
  for (const SentencePair& pair : dev.pairs) ref_total += pair.target.size();

  TunerState state;
  state.gamma = config.initial_gamma;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto lengths = decoded_lengths(
        model, dev, ScoringMode::word_reward(state.gamma), config);
    std::uint64_t hyp_total = 0;
    for (std::uint64_t length : lengths) hyp_total += length;
    const GradientStep step =
        word_reward_gradient_step(ref_total, hyp_total, dev.size(),
                                  config.learning_rate, config.update_clip);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    TunerEpoch record;
    record.epoch = epoch;
    record.gamma = state.gamma;
    record.mean_ref_len = step.mean_ref_len;
    record.mean_hyp_len = step.mean_hyp_len;
    record.raw_grad = step.raw_grad;
    record.update = step.update;
    record.seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed)
            .count();
    state.history.push_back(record);

    state.gamma += step.update;
    if (std::abs(step.update) < config.tolerance) {
      state.stop_reason = kStopConverged;
      return state;
    }
  }
  state.stop_reason = kStopMaxEpochs;
  return state;
}

void write_tuner_report_tsv(std::ostream& out, const TunerState& state) {
  out << "epoch\tgamma\tmean_ref_len\tmean_hyp_len\traw_grad\tupdate\t"
         "seconds\n";
  std::ostringstream row;
  for (const TunerEpoch& epoch : state.history) {
    row.str("");
    row << epoch.epoch << '\t' << std::fixed << std::setprecision(6)
        << epoch.gamma << '\t' << epoch.mean_ref_len << '\t'
        << epoch.mean_hyp_len << '\t' << epoch.raw_grad << '\t'
        << epoch.update << '\t' << std::setprecision(3) << epoch.seconds
        << '\n';
    out << row.str();
  }
}

void write_gamma_file(const std::string& path, double gamma) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g\n", gamma);
  out << buffer;
  if (!out.flush()) {
    throw std::runtime_error("failed writing gamma file " + path);
  }
}

double read_gamma_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open gamma file: " + path);
  }
  std::stringstream contents;
  contents << in.rdbuf();
  std::string text = contents.str();
  const auto begin = text.find_first_not_of(" \t\r\n");
  const auto end = text.find_last_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    throw std::runtime_error("invalid gamma file contents: \"" + text + "\"");
  }
  text = text.substr(begin, end - begin + 1);
  std::size_t consumed = 0;
  double gamma = 0.0;
  try {
    gamma = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw std::runtime_error("invalid gamma file contents: \"" + text + "\"");
  }
  if (consumed != text.size() || !std::isfinite(gamma)) {
    throw std::runtime_error("invalid gamma file contents: \"" + text + "\"");
  }
  return gamma;
}

std::vector<GammaGridRow> evaluate_gamma_grid(const ConditionalModel& model,
                                              const ParallelCorpus& dev,
                                              const std::vector<double>& gammas,
                                              std::size_t beam_size,
                                              int workers) {
  for (double gamma : gammas) {
    if (!std::isfinite(gamma)) {
      throw std::invalid_argument("gamma grid values must be finite");
    }
  }
  const Vocabulary& vocabulary = model.vocabulary();
  std::vector<Sentence> references;
  references.reserve(dev.size());
  for (const SentencePair& pair : dev.pairs) {
    references.push_back(surface_sentence(vocabulary, pair.target));
  }

  std::vector<GammaGridRow> rows;
  rows.reserve(gammas.size());
  for (double gamma : gammas) {
    const auto outputs = decode_corpus(
        model, dev, ScoringMode::word_reward(gamma), beam_size, workers);
    const auto hypotheses = surface_sentences(vocabulary, outputs);
    GammaGridRow row;
    row.gamma = gamma;
    row.bleu = corpus_bleu(hypotheses, references);
    row.lengths = length_report(hypotheses, references);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace beamtune
