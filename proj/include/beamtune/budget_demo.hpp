#pragma once

#include <cstddef>
#include <vector>

#include "beamtune/corpus.hpp"
#include "beamtune/table_model.hpp"

namespace beamtune {

// How one demo sentence was constructed.  Every sentence's reference is a
// low-but-balanced-probability chain of fresh words; the sentence's local
// distributions are shaped so that, uncorrected, the chain scores just below
// the empty output, while a per-sentence word-reward threshold (gamma_star)
// flips the comparison and an overshoot threshold (overshoot) bounds how far
// a reward can stretch the output past the reference.
struct BudgetSentenceInfo {
  std::size_t index = 0;     // position within its corpus
  int chain_len = 0;         // N: reference length, words
  int decoys = 0;            // D: one-step distractors at the root
  double gamma_star = 0.0;   // reward at which the full chain passes empty
  double overshoot = 0.0;    // reward at which one extra word gets emitted
  std::size_t max_len = 0;   // output cap implied by the source length
  bool forced_trace = false;        // D pinned for a clean rank trajectory
  bool forced_short_chain = false;  // survives pruning at very wide beams
  bool forced_early_overshoot = false;  // overshoot threshold pulled low
};

// A self-contained corpus + model pair exhibiting the brevity failure of
// uncorrected beam search: widening the beam surfaces the empty output's
// high end-of-sentence probability and the corpus shrinks, while a tuned
// word reward restores reference-length outputs at every beam size.
struct BudgetDemo {
  TableModel model;
  ParallelCorpus dev;
  ParallelCorpus test;
  std::vector<BudgetSentenceInfo> dev_info;
  std::vector<BudgetSentenceInfo> test_info;
  std::size_t trace_sentence = 0;  // index into test: the rank-trace showcase

  BudgetDemo(TableModel model_in, ParallelCorpus dev_in,
             ParallelCorpus test_in)
      : model(std::move(model_in)),
        dev(std::move(dev_in)),
        test(std::move(test_in)) {}
};

inline constexpr std::size_t kBudgetDemoSentences = 80;  // per split
inline constexpr std::uint64_t kBudgetDemoDevSeed = 1234;
inline constexpr std::uint64_t kBudgetDemoTestSeed = 5678;

// Builds the fixed demo instance (internal seeds; fully deterministic).
BudgetDemo make_budget_demo();

}  // namespace beamtune
