#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beamtune/corpus.hpp"
#include "beamtune/evaluation.hpp"
#include "beamtune/scoring.hpp"
#include "beamtune/search.hpp"
#include "beamtune/tuning.hpp"

namespace beamtune {

// Experiment configuration: a flat key-value text format with [sections],
// '#' comments, and one `key = value` per line.  Parsing starts from the
// defaults and overrides whatever keys are present; unknown and duplicate
// keys are hard errors, never warnings.  `dump()` prints every key in a
// form `parse()` accepts, so defaults are printable and configs diffable.
struct ExperimentConfig {
  // [paths]
  std::string model_path;       // paths.model
  std::string source_path;      // paths.source       (decode input)
  std::string hypotheses_path;  // paths.hypotheses   (evaluate input)
  std::string references_path;  // paths.references   (evaluate input)
  std::string train_source_path;  // paths.train_source
  std::string train_target_path;  // paths.train_target
  std::string dev_source_path;    // paths.dev_source
  std::string dev_target_path;    // paths.dev_target
  std::string test_source_path;   // paths.test_source
  std::string test_target_path;   // paths.test_target
  std::string out_dir = "out";    // paths.out_dir

  // [run] — the single seed every random choice flows from.
  std::uint64_t seed = 1;

  // [data] — synthetic corpus generation and its train/dev/test split.
  SyntheticTaskConfig data;  // data.seed is overridden by run.seed
  SplitFractions fractions;

  // [train]
  double train_lambda = 0.5;    // train.lambda
  double train_k_smooth = 0.5;  // train.k_smooth

  // [scoring] — spec accepted by ScoringMode::parse, or reward:gamma=@file.
  std::string score = "baseline";

  // [search]
  std::size_t beam_size = 10;        // search.beam_size
  std::optional<std::size_t> max_len;  // search.max_len; empty = 2|f|+5

  // [tuning]
  TunerConfig tuner;

  // [sweep]
  std::vector<std::size_t> sweep_beam_sizes{1, 2, 5, 10, 25, 50, 100};
  std::vector<double> sweep_gammas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6,
                                   0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<std::string> sweep_modes{"baseline"};

  static ExperimentConfig defaults() { return ExperimentConfig{}; }
  // Parses config text / a config file on top of the defaults and
  // validates.  Errors carry the offending key or line.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  // Structural invariants that hold regardless of which command runs:
  // positive ascending beam lists, ascending gamma grid, parseable sweep
  // modes, valid tuner schedule and data parameters.
  void validate() const;

  // Full parseable dump of every key, defaults included.
  std::string dump() const;
};

// Resolves a --score specification.  Plain specs go through
// ScoringMode::parse; "reward:gamma=@<path>" reads the gamma value from the
// one-line file a tuning run wrote.
ScoringMode resolve_score(const std::string& spec);

// Worker-count resolution: explicit flag value if given, else the
// BEAMTUNE_WORKERS environment variable, else 1.  Invalid values throw.
int resolve_workers(std::optional<int> flag);

// One (scoring mode, beam size) cell of a beam sweep.
struct SweepBeamCell {
  std::string mode_label;
  std::size_t beam_size = 0;
  BleuScore bleu;
  LengthReport lengths;
  std::optional<double> gamma;  // set only for word-reward modes
};

// Decodes `corpus` once per (mode, beam) pair — modes outer, beams inner —
// and scores each decode against the corpus targets.  Worker count never
// changes the results, only the wall time.
std::vector<SweepBeamCell> sweep_beam(const ConditionalModel& model,
                                      const ParallelCorpus& corpus,
                                      const std::vector<ScoringMode>& modes,
                                      const std::vector<std::size_t>& beam_sizes,
                                      int workers = 1);

// mode, beam, bleu, length_ratio, fraction_empty, gamma — the gamma cell is
// empty for modes that have no such parameter.
void write_sweep_beam_tsv(std::ostream& out,
                          const std::vector<SweepBeamCell>& cells);

// gamma, bleu, length_ratio, fraction_empty — one row per grid point.
void write_gamma_grid_tsv(std::ostream& out,
                          const std::vector<GammaGridRow>& rows);

// Single-row corpus summary: bleu, brevity penalty, per-order precisions,
// corpus lengths, length ratio, per-sentence mean ratio, fraction empty,
// sentence count, zero-reference exclusions.
void write_evaluation_summary_tsv(std::ostream& out, const BleuScore& bleu,
                                  const LengthReport& lengths);

// Length-ratio histogram rows: the exact-0 and exact-1 bins, every interval
// bin, the >= 2 overflow bin, and the zero-reference exclusion tally.
void write_length_histogram_tsv(std::ostream& out, const LengthReport& report);

// max_ref_len, pairs, bleu — bleu is empty for thresholds with no pairs.
void write_cumulative_bleu_tsv(std::ostream& out,
                               const std::vector<CumulativeBleuPoint>& points);

// The hand-built first-word-trap model, embedded so the demo needs no data
// files; byte-identical to data/label_bias.model.
extern const char kLabelBiasModelSpec[];

// Prints the full exhaustive ranking, the greedy path, and the beam-2 trace
// of the first-word-trap model, then checks the expected outcome: greedy
// commits to the locally likely first word and loses to the exhaustive and
// beam-2 winner.  Returns 0 when every check holds, 1 otherwise.
int run_label_bias_demo(std::ostream& out);

// Everything demo-budget computed, for callers that want to assert on the
// numbers rather than re-parse the report files.
struct BudgetDemoOutcome {
  std::vector<SweepBeamCell> baseline_cells;    // beams 1,2,5,10,25,50,100
  BeamTrace trace;                              // trace sentence at beam 100
  std::size_t trace_sentence = 0;               // index into the test split
  TunerState tuner;
  std::vector<SweepBeamCell> tuned_cells;       // beams 1,10,100
  std::vector<CumulativeBleuPoint> cumulative;  // uncorrected, beam 100
};

// Builds the brevity/beam showcase model, decodes the test split with the
// uncorrected score at ascending beams, traces the sentence where the empty
// output climbs the ranks, tunes the word reward on the dev split, and
// decodes again with the tuned reward.  Writes under `out_dir`:
//   budget.model, budget_dev.src/.tgt, budget_test.src/.tgt,
//   baseline_sweep.tsv, budget_trace.tsv, budget_empty_rank.tsv,
//   tuner_report.tsv, tuned_gamma.txt, tune_summary.tsv, tuned_sweep.tsv,
//   baseline_cumulative_bleu.tsv
// Every file except the wall-time column of tuner_report.tsv is
// byte-identical for every worker count.  `log` gets a deterministic
// summary.
BudgetDemoOutcome run_budget_demo(const std::string& out_dir, int workers,
                                  std::ostream& log);

// Command runners behind the CLI, one per subcommand.  Each validates the
// paths it needs, runs the operation, writes its reports under
// config.out_dir with fixed filenames, and logs a deterministic one-line
// summary per artifact.  All failures are exceptions.
void run_gen_data(const ExperimentConfig& config, std::ostream& log);
void run_train(const ExperimentConfig& config, std::ostream& log);
void run_decode(const ExperimentConfig& config, int workers, std::ostream& log);
void run_tune(const ExperimentConfig& config, int workers, std::ostream& log);
void run_evaluate(const ExperimentConfig& config, std::ostream& log);
void run_sweep_beam(const ExperimentConfig& config, int workers,
                    std::ostream& log);
// use_budget_demo swaps the configured model/corpus for the built-in
// budget demo's model and test split.
void run_sweep_gamma(const ExperimentConfig& config, bool use_budget_demo,
                     int workers, std::ostream& log);

}  // namespace beamtune
