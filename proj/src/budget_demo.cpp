#include "beamtune/budget_demo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "beamtune/rng.hpp"

namespace beamtune {

namespace {

constexpr int kFillerCount = 900;
constexpr double kRootEos = 0.005;      // EOS mass at root/chain/decoy rows
constexpr double kChainEndEos = 0.5;    // EOS mass once the chain is emitted
constexpr int kChainPool = 40;
constexpr int kDecoyPool = 130;
constexpr int kOvershootPool = 10;

// Decoy-count brackets cycled by sentence position, so every split covers
// the whole spectrum from "empty output ranks second" to "empty output gets
// pruned at moderate beams".
constexpr std::array<std::pair<int, int>, 7> kDecoyBrackets = {{
    {0, 0}, {1, 3}, {4, 8}, {9, 23}, {24, 48}, {49, 98}, {99, 126},
}};

enum class Force { kNone, kTrace, kShortChain, kEarlyOvershoot };

struct Pools {
  std::vector<TokenId> chain;
  std::vector<TokenId> decoy;
  std::vector<TokenId> overshoot;
  TokenId filler_begin = 0;
  TokenId filler_end = 0;
  std::vector<TokenId> sources;
};

void construction_check(bool ok, const char* what) {
  if (!ok) {
    throw std::logic_error(
        std::string("budget demo construction violated: ") + what);
  }
}

int draw_int(Rng& rng, int lo, int hi) {
  return static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(lo),
                                          static_cast<std::uint64_t>(hi)));
}

// First `n` elements of a seeded shuffle (partial Fisher-Yates).
std::vector<TokenId> sample_tokens(Rng& rng, const std::vector<TokenId>& pool,
                                   std::size_t n) {
  std::vector<TokenId> copy = pool;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(i, copy.size() - 1));
    std::swap(copy[i], copy[j]);
  }
  copy.resize(n);
  return copy;
}

struct BuiltSentence {
  BudgetSentenceInfo info;
  std::vector<TokenId> source;
  std::vector<TokenId> chain;
};

BuiltSentence build_sentence(Rng& rng, std::size_t idx, std::size_t position,
                             Force force, const Pools& pools,
                             TokenId source_token, TableModel& model) {
  const auto [decoy_lo, decoy_hi] = kDecoyBrackets[position % 7];
  int decoy_count = draw_int(rng, decoy_lo, decoy_hi);
  int chain_len = draw_int(rng, 6, 14);
  double gamma_star = rng.uniform(0.05, 0.58);
  // Keep the overshoot threshold away from the sweep grid points so the
  // gamma sweep never lands exactly on a knife edge.
  double overshoot = 0.0;
  while (true) {
    overshoot = rng.uniform(0.85, 1.15);
    const double distance =
        std::min({std::abs(overshoot - 0.9), std::abs(overshoot - 1.0),
                  std::abs(overshoot - 1.1)});
    if (distance >= 0.02) break;
  }
  if (force == Force::kTrace) {
    decoy_count = 25;  // empty output enters at rank 27 and climbs
  } else if (force == Force::kShortChain) {
    // So many decoys that the empty output is pruned even at beam 100,
    // while a short cheap chain survives and keeps corpus quality measurable.
    decoy_count = draw_int(rng, 99, 126);
    chain_len = 8;
    gamma_star = 0.07;
  } else if (force == Force::kEarlyOvershoot) {
    overshoot = rng.uniform(0.85, 0.88);
  }

  const double decoy_prob =
      decoy_count > 0
          ? std::clamp(0.3125 / decoy_count, 0.0052, 0.2)
          : 0.0;
  const double chain_start_prob = 1.0 - kRootEos - decoy_count * decoy_prob;

  // Choose the chain continuation probability so the finished chain scores
  // exactly gamma_star * chain_len nats below the empty output, then shrink
  // gamma_star until the side constraints hold: the continuation stays
  // comfortably inside (0, 1), filler junk stays under the empty output even
  // with two words of reward, and no truncated chain can beat the full one
  // at the reward the tuner lands on.
  double continue_prob = 0.0;
  double filler_mass = 0.0;
  for (int attempt = 0;; ++attempt) {
    construction_check(attempt < 200,
                       "reward threshold search did not converge");
    const double log_continue =
        (std::log(kRootEos / kChainEndEos) - gamma_star * chain_len -
         std::log(chain_start_prob)) /
        (chain_len - 1);
    continue_prob = std::exp(log_continue);
    filler_mass = 1.0 - kRootEos - continue_prob;
    const bool ok =
        continue_prob > 0.05 && continue_prob < 0.95 && filler_mass > 0.0 &&
        std::log(chain_start_prob) + std::log(filler_mass) -
                std::log(static_cast<double>(kFillerCount)) +
                2.0 * gamma_star <=
            std::log(kRootEos) - 0.3 &&
        (chain_len - 1) * (0.7 - gamma_star) - std::log(chain_start_prob) -
                gamma_star >=
            0.25;
    if (ok) break;
    gamma_star *= 0.85;
  }
  construction_check(chain_start_prob > decoy_prob,
                     "chain start must outrank every decoy");
  if (force == Force::kShortChain) {
    construction_check(-std::log(chain_start_prob) -
                               gamma_star * chain_len >=
                           0.15,
                       "short chain must beat its truncations uncorrected");
  }

  const std::vector<TokenId> chain =
      sample_tokens(rng, pools.chain, static_cast<std::size_t>(chain_len));
  const std::vector<TokenId> drawn = sample_tokens(
      rng, pools.decoy,
      static_cast<std::size_t>(std::min(decoy_count + 3, kDecoyPool)));
  const std::vector<TokenId> decoys(drawn.begin(),
                                    drawn.begin() + decoy_count);
  const std::vector<TokenId> glide(drawn.begin() + decoy_count,
                                   drawn.begin() + decoy_count + 3);
  const TokenId overshoot_token = pools.overshoot[idx % kOvershootPool];
  // The overshoot word's continuation row is left unlisted, so its final
  // EOS is free and "take the extra word" flips exactly at gamma=overshoot.
  const double overshoot_prob = kChainEndEos * std::exp(-overshoot);

  const int source_len = draw_int(rng, 8, 11);

  std::vector<TokenId> source(static_cast<std::size_t>(source_len),
                              source_token);
  const SourceKey key = SourceKey::exactly(source);
  const auto filler_block = [&](double total_mass) {
    return total_mass / static_cast<double>(kFillerCount);
  };

  {  // root row: EOS vs chain start vs decoys
    TableModel::Row row;
    row.entries.emplace_back(Vocabulary::kEos, kRootEos);
    row.entries.emplace_back(chain[0], chain_start_prob);
    for (TokenId decoy : decoys) row.entries.emplace_back(decoy, decoy_prob);
    model.set_row(key, {}, std::move(row));
  }
  for (int t = 1; t < chain_len; ++t) {  // chain interior
    TableModel::Row row;
    row.entries.emplace_back(Vocabulary::kEos, kRootEos);
    row.entries.emplace_back(chain[static_cast<std::size_t>(t)],
                             continue_prob);
    row.filler_begin = pools.filler_begin;
    row.filler_end = pools.filler_end;
    row.filler_prob = filler_block(filler_mass);
    model.set_row(key,
                  std::vector<TokenId>(chain.begin(), chain.begin() + t),
                  std::move(row));
  }
  {  // chain end: stop, or overshoot by exactly one word
    TableModel::Row row;
    row.entries.emplace_back(Vocabulary::kEos, kChainEndEos);
    row.entries.emplace_back(overshoot_token, overshoot_prob);
    row.filler_begin = pools.filler_begin;
    row.filler_end = pools.filler_end;
    row.filler_prob = filler_block(1.0 - kChainEndEos - overshoot_prob);
    model.set_row(key, chain, std::move(row));
  }
  for (std::size_t d = 0; d < decoys.size(); ++d) {
    if (d < 3) {  // a two-step glide path keeps a few decoys alive one step
      TableModel::Row first;
      first.entries.emplace_back(Vocabulary::kEos, kRootEos);
      first.entries.emplace_back(glide[d], 0.5);
      first.filler_begin = pools.filler_begin;
      first.filler_end = pools.filler_end;
      first.filler_prob = filler_block(1.0 - kRootEos - 0.5);
      model.set_row(key, {decoys[d]}, std::move(first));

      TableModel::Row second;
      second.entries.emplace_back(Vocabulary::kEos, kRootEos);
      second.filler_begin = pools.filler_begin;
      second.filler_end = pools.filler_end;
      second.filler_prob = filler_block(1.0 - kRootEos);
      model.set_row(key, {decoys[d], glide[d]}, std::move(second));
    } else {
      TableModel::Row row;
      row.entries.emplace_back(Vocabulary::kEos, kRootEos);
      row.filler_begin = pools.filler_begin;
      row.filler_end = pools.filler_end;
      row.filler_prob = filler_block(1.0 - kRootEos);
      model.set_row(key, {decoys[d]}, std::move(row));
    }
  }

  BuiltSentence built;
  built.info.index = position;
  built.info.chain_len = chain_len;
  built.info.decoys = decoy_count;
  built.info.gamma_star = gamma_star;
  built.info.overshoot = overshoot;
  built.info.max_len = 2 * static_cast<std::size_t>(source_len) + 5;
  built.info.forced_trace = force == Force::kTrace;
  built.info.forced_short_chain = force == Force::kShortChain;
  built.info.forced_early_overshoot = force == Force::kEarlyOvershoot;
  built.source = std::move(source);
  built.chain = chain;
  return built;
}

struct BuiltSplit {
  ParallelCorpus corpus;
  std::vector<BudgetSentenceInfo> info;
  std::size_t trace_sentence = 0;
};

BuiltSplit build_split(std::uint64_t seed, bool with_trace,
                        const Pools& pools, std::size_t source_base,
                        TableModel& model) {
  Rng rng(seed);
  BuiltSplit result;
  bool forced_short = false;
  bool forced_trace = false;
  int early = 0;
  for (std::size_t j = 0; j < kBudgetDemoSentences; ++j) {
    Force force = Force::kNone;
    if (j % 7 == 6 && !forced_short) {
      force = Force::kShortChain;
      forced_short = true;
    } else if (j % 7 == 4 && !forced_trace && with_trace) {
      force = Force::kTrace;
      forced_trace = true;
      result.trace_sentence = j;
    } else if (early < 2 && j % 7 == 2) {
      force = Force::kEarlyOvershoot;
      ++early;
    }
    BuiltSentence built = build_sentence(rng, j, j, force, pools,
                                         pools.sources[source_base + j],
                                         model);
    SentencePair pair;
    pair.source = std::move(built.source);
    pair.target = std::move(built.chain);
    result.corpus.pairs.push_back(std::move(pair));
    result.info.push_back(built.info);
  }
  return result;
}

}  // namespace

BudgetDemo make_budget_demo() {
  Vocabulary vocab;
  Pools pools;
  for (int i = 0; i < kChainPool; ++i) {
    pools.chain.push_back(vocab.add("g" + std::to_string(i)));
  }
  for (int i = 0; i < kDecoyPool; ++i) {
    pools.decoy.push_back(vocab.add("d" + std::to_string(i)));
  }
  for (int i = 0; i < kOvershootPool; ++i) {
    pools.overshoot.push_back(vocab.add("x" + std::to_string(i)));
  }
  pools.filler_begin = vocab.add("f0");
  for (int i = 1; i < kFillerCount; ++i) {
    vocab.add("f" + std::to_string(i));
  }
  pools.filler_end = pools.filler_begin + kFillerCount;
  for (std::size_t i = 0; i < 2 * kBudgetDemoSentences; ++i) {
    pools.sources.push_back(vocab.add("src_" + std::to_string(i)));
  }

  TableModel model(std::move(vocab));
  BuiltSplit dev =
      build_split(kBudgetDemoDevSeed, /*with_trace=*/false, pools, 0, model);
  BuiltSplit test =
      build_split(kBudgetDemoTestSeed, /*with_trace=*/true, pools,
                  kBudgetDemoSentences, model);

  BudgetDemo demo(std::move(model), std::move(dev.corpus),
                  std::move(test.corpus));
  demo.dev_info = std::move(dev.info);
  demo.test_info = std::move(test.info);
  demo.trace_sentence = test.trace_sentence;
  return demo;
}

}  // namespace beamtune
