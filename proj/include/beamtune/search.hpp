#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "beamtune/corpus.hpp"
#include "beamtune/distribution.hpp"
#include "beamtune/scoring.hpp"
#include "beamtune/vocabulary.hpp"

namespace beamtune {

// A (possibly finished) output candidate.  `tokens` holds ordinary words
// only; the end-of-sentence step is folded into `base_score` once the
// hypothesis completes, so the word count is always tokens.size().
struct Hypothesis {
  std::vector<TokenId> tokens;
  double base_score = 0.0;
  bool complete = false;
};

struct DecodeStats {
  std::size_t steps = 0;      // extension rounds actually executed
  std::uint64_t expanded = 0; // beam/greedy: hypotheses expanded through the
                              // model; exhaustive: complete sequences scored
};

// One retained hypothesis in a per-step beam snapshot.
struct TraceItem {
  double corrected_score = 0.0;
  double base_score = 0.0;
  bool complete = false;
  std::vector<TokenId> tokens;
};

struct BeamTraceStep {
  std::size_t step = 0;              // 1-based extension round
  std::vector<TraceItem> items;      // retained beam in rank order
  // Rank of the empty (zero-word) completed hypothesis among every candidate
  // considered this step, before the beam cut; absent once it is pruned or
  // if it has not been generated yet.
  std::optional<std::size_t> empty_candidate_rank;
};

struct BeamTrace {
  std::vector<BeamTraceStep> steps;
  std::optional<std::size_t> empty_pruned_at_step;
};

struct DecodeResult {
  std::vector<Hypothesis> ranked;  // best first; every entry is complete
  BeamTrace trace;                 // filled only by beam_decode on request
  DecodeStats stats;

  const Hypothesis& best() const;
};

// Default output length cap: generous enough that sensible outputs are never
// cut off, finite so that search always terminates.
std::size_t default_max_len(std::size_t source_len);  // 2*source_len + 5

constexpr std::uint64_t kDefaultExhaustiveBudget = 2'000'000;

// Follows the single locally best extension (by the same ranking used
// everywhere) until the end-of-sentence token wins or `max_len` is reached,
// at which point the end-of-sentence step is forced at the model's actual
// log-probability.  Equivalent to beam_decode with a beam of 1.
DecodeResult greedy_decode(const ConditionalModel& model,
                           const std::vector<TokenId>& source,
                           const ScoringMode& mode, std::size_t max_len);

// Standard beam search with completed hypotheses competing inside the beam:
// each round, every retained incomplete hypothesis is extended with every
// ordinary word and with the end-of-sentence token (which completes it),
// completed hypotheses carry forward unchanged, and the best `beam_size`
// candidates under `mode` survive.  Zero-probability extensions are ranked
// like everything else (they sort last), so a wide enough beam reproduces
// exhaustive search exactly.  Search stops when the whole beam is complete
// or after `max_len` rounds, when still-open hypotheses are completed at
// their model end-of-sentence log-probability and the beam is re-ranked.
DecodeResult beam_decode(const ConditionalModel& model,
                         const std::vector<TokenId>& source,
                         const ScoringMode& mode, std::size_t beam_size,
                         std::size_t max_len, bool want_trace = false);

// Scores every word sequence up to `max_len` and returns the full ranking:
// the ground truth the heuristic searches are measured against.  Refuses to
// run when words^(max_len+1) exceeds `budget_limit`.
DecodeResult exhaustive_decode(
    const ConditionalModel& model, const std::vector<TokenId>& source,
    const ScoringMode& mode, std::size_t max_len,
    std::uint64_t budget_limit = kDefaultExhaustiveBudget);

// Decodes every source sentence of `corpus` at the given beam size and
// returns the best hypothesis's tokens in input order.  `workers` threads
// share the corpus; because each sentence writes only its own slot, the
// output is byte-identical for every worker count.  When `max_len` is not
// given, each sentence uses default_max_len of its source length.
std::vector<std::vector<TokenId>> decode_corpus(
    const ConditionalModel& model, const ParallelCorpus& corpus,
    const ScoringMode& mode, std::size_t beam_size, int workers = 1,
    std::optional<std::size_t> max_len = std::nullopt);

// Tab-separated beam trace: step, rank, corrected_score, base_score,
// complete, tokens (space-joined surfaces).  One row per retained hypothesis
// per step.
void write_trace_tsv(std::ostream& out, const BeamTrace& trace,
                     const Vocabulary& vocab);

}  // namespace beamtune
