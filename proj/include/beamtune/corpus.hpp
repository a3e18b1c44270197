#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "beamtune/vocabulary.hpp"

namespace beamtune {

struct SentencePair {
  std::vector<TokenId> source;  // never empty
  std::vector<TokenId> target;  // may be empty (length-0 output)

  bool operator==(const SentencePair& other) const {
    return source == other.source && target == other.target;
  }
};

// Aligned sentence pairs; sentences are stored sentinel-free (no <s>/</s>).
struct ParallelCorpus {
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool operator==(const ParallelCorpus& other) const {
    return pairs == other.pairs;
  }
};

struct LoadedCorpus {
  ParallelCorpus corpus;
  Vocabulary vocabulary;
};

// How load_parallel obtains its vocabulary: either build a fresh one from the
// files (tokens whose total count across both files is below min_count encode
// as <unk>), or encode with an existing vocabulary (out-of-vocabulary tokens
// encode as <unk>).
struct VocabPolicy {
  std::size_t min_count = 1;
  const Vocabulary* existing = nullptr;

  static VocabPolicy build(std::size_t min_count = 1) {
    VocabPolicy p;
    p.min_count = min_count;
    return p;
  }
  static VocabPolicy use(const Vocabulary& vocab) {
    VocabPolicy p;
    p.existing = &vocab;
    return p;
  }
};

// Splits a line into whitespace-separated tokens (spaces and tabs).
std::vector<std::string> tokenize(std::string_view line);

// Joins token surfaces with single spaces.
std::string sentence_to_text(const std::vector<TokenId>& ids,
                             const Vocabulary& vocab);

// Reads a pair of aligned text files (UTF-8, one sentence per line,
// whitespace-tokenized).  Leading lines starting with '#' are header
// comments and are skipped.  Line i of one file pairs with line i of the
// other.  Errors: differing sentence counts ("line count mismatch A vs B"),
// invalid UTF-8 (reported with its line number), and empty source sentences.
LoadedCorpus load_parallel(const std::string& source_path,
                           const std::string& target_path,
                           const VocabPolicy& policy = VocabPolicy::build());

// Writes the corpus back to a pair of text files.  When header is non-empty
// it is emitted verbatim as a first line "# <header>" in both files.
void write_parallel(const ParallelCorpus& corpus, const Vocabulary& vocab,
                    const std::string& source_path,
                    const std::string& target_path,
                    const std::string& header = "");

// Deterministic synthetic transduction task: each source token has a fixed
// seed-derived 1-token and 2-token target gloss (the 2-token gloss extends
// the 1-token one); per occurrence, fertility picks which gloss is emitted.
struct SyntheticTaskConfig {
  std::size_t source_vocab_size = 20;
  std::size_t target_vocab_size = 40;
  std::size_t min_source_len = 1;   // Lmin >= 1
  std::size_t max_source_len = 10;
  double fertility_two_prob = 0.5;  // P(2-token gloss); P(1-token) = 1 - this
  std::size_t num_pairs = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Pure function of its config: same config, same corpus, bit for bit.
LoadedCorpus generate_synthetic(const SyntheticTaskConfig& config);

struct SplitFractions {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct SplitResult {
  ParallelCorpus train;
  ParallelCorpus dev;
  ParallelCorpus test;
};

// Seeded shuffled partition: disjoint, exhaustive, deterministic.  Sizes are
// floor(fraction * n) with the remainder assigned to train; the parts keep
// the shuffled order.  Errors when fractions are invalid or size(corpus) < 3.
SplitResult split(const ParallelCorpus& corpus, const SplitFractions& fractions,
                  std::uint64_t seed);

}  // namespace beamtune
