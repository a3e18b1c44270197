#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "beamtune/distribution.hpp"
#include "beamtune/vocabulary.hpp"

namespace beamtune {

// Applies a table row either to one specific source sentence or to every
// source (the '*' key in the text format).
struct SourceKey {
  bool any_source = true;
  std::vector<TokenId> source;

  static SourceKey any() { return SourceKey{}; }
  static SourceKey exactly(std::vector<TokenId> tokens) {
    return SourceKey{false, std::move(tokens)};
  }
  bool operator==(const SourceKey& other) const {
    return any_source == other.any_source &&
           (any_source || source == other.source);
  }
};

// Hand-specified conditional model: an explicit mapping from
// (source key, target prefix) to a next-token distribution.  Unlisted
// prefixes fall back to the default distribution "end-of-sentence with
// probability 1", which makes every table model a total function.
class TableModel final : public ConditionalModel {
 public:
  // A sparse row: explicit entries plus an optional uniform block that gives
  // every token id in [filler_begin, filler_end) the same probability (used
  // to spread leftover mass thinly over a large filler pool).  Probabilities
  // are linear and must total 1 within 1e-6.
  struct Row {
    std::vector<std::pair<TokenId, double>> entries;
    TokenId filler_begin = 0;
    TokenId filler_end = 0;
    double filler_prob = 0.0;
  };

  explicit TableModel(Vocabulary vocab);

  // Parses the line-oriented text format.  Each line is
  //   <source-key and prefix><TAB><token><TAB><probability>
  // where the first space-separated field of column 1 is the source key
  // ('*' = any source, otherwise comma-joined source tokens) and the
  // remaining fields are the target prefix. '</s>' names the end-of-sentence
  // token; '#' lines and blank lines are skipped.  Lines with the same
  // key accumulate into one row, and every row must sum to 1 within 1e-6.
  static TableModel from_spec_text(const std::string& text);
  static TableModel from_spec_file(const std::string& path);

  // Installs (or replaces) a row; validates ids, uniqueness, and total mass.
  void set_row(const SourceKey& key, const std::vector<TokenId>& prefix,
               Row row);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t row_count() const { return keys_in_order_.size(); }

  // Deterministic iteration in insertion order, for persistence.
  template <typename Fn>
  void visit_rows(Fn&& fn) const {
    for (const FullKey& key : keys_in_order_) {
      fn(SourceKey{key.any_source, key.source}, key.prefix,
         rows_.at(key).row);
    }
  }

 protected:
  LogDistribution next_logprobs_impl(
      const std::vector<TokenId>& source,
      const std::vector<TokenId>& prefix) const override;

 private:
  struct FullKey {
    bool any_source = true;
    std::vector<TokenId> source;
    std::vector<TokenId> prefix;
    bool operator==(const FullKey& other) const {
      return any_source == other.any_source && source == other.source &&
             prefix == other.prefix;
    }
  };
  struct FullKeyHash {
    std::size_t operator()(const FullKey& key) const;
  };
  struct StoredRow {
    Row row;
    std::vector<double> entry_logps;  // log of row.entries probabilities
    double filler_logp = kNegInf;
  };

  std::string describe_key(const FullKey& key) const;

  Vocabulary vocab_;
  std::unordered_map<FullKey, StoredRow, FullKeyHash> rows_;
  std::vector<FullKey> keys_in_order_;
};

// Seeded random table model over `num_words` surface tokens ("w0", "w1", ...)
// with rows for every any-source prefix up to length `depth` (deeper prefixes
// fall back to the default row).  Each row is a random point on the simplex
// over {</s>} + words, with a small chance of leaving a prefix unlisted and
// of zeroing individual tokens.  Used by search property tests.
TableModel random_table_model(std::uint64_t seed, std::size_t num_words,
                              std::size_t depth);

}  // namespace beamtune
