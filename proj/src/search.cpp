#include "beamtune/search.hpp"

#include "beamtune/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace beamtune {

namespace {

constexpr TokenId kFirstWord = static_cast<TokenId>(Vocabulary::kNumReserved);

bool hypothesis_before(const Hypothesis& a, double corrected_a,
                       const Hypothesis& b, double corrected_b) {
  return rank_before(RankKey{corrected_a, &a.tokens, a.complete},
                     RankKey{corrected_b, &b.tokens, b.complete});
}

void sort_hypotheses(std::vector<Hypothesis>& hyps, const ScoringMode& mode) {
  std::vector<double> corrected(hyps.size());
  std::vector<std::size_t> order(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    corrected[i] =
        mode.corrected_for(hyps[i].base_score, hyps[i].tokens.size(),
                           hyps[i].complete);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return hypothesis_before(hyps[a], corrected[a], hyps[b], corrected[b]);
  });
  std::vector<Hypothesis> sorted;
  sorted.reserve(hyps.size());
  for (std::size_t i : order) sorted.push_back(std::move(hyps[i]));
  hyps = std::move(sorted);
}

}  // namespace

const Hypothesis& DecodeResult::best() const {
  if (ranked.empty()) throw std::logic_error("decode produced no hypotheses");
  return ranked.front();
}

std::size_t default_max_len(std::size_t source_len) {
  return 2 * source_len + 5;
}

DecodeResult greedy_decode(const ConditionalModel& model,
                           const std::vector<TokenId>& source,
                           const ScoringMode& mode, std::size_t max_len) {
  const TokenId vocab_size = static_cast<TokenId>(model.vocabulary().size());
  DecodeResult result;
  Hypothesis hyp;

  for (std::size_t step = 1; step <= max_len && !hyp.complete; ++step) {
    LogDistribution dist = model.next_logprobs(source, hyp.tokens);
    ++result.stats.expanded;
    result.stats.steps = step;

    const std::size_t m = hyp.tokens.size();
    // The end-of-sentence candidate has fewer words than any word extension
    // and all word extensions share the current prefix, so the full ranking
    // reduces to (corrected score, word count, extending token).
    struct Choice {
      double corrected;
      std::size_t m;
      TokenId token;  // -1 for the end-of-sentence candidate
    };
    const double eos_base = hyp.base_score + dist[Vocabulary::kEos];
    Choice best{mode.corrected_for(eos_base, m, true), m, -1};
    for (TokenId id = kFirstWord; id < vocab_size; ++id) {
      Choice challenger{
          mode.corrected_for(hyp.base_score + dist[id], m + 1, false), m + 1,
          id};
      if (challenger.corrected != best.corrected) {
        if (challenger.corrected > best.corrected) best = challenger;
        continue;
      }
      if (challenger.m != best.m) {
        if (challenger.m < best.m) best = challenger;
        continue;
      }
      if (challenger.token < best.token) best = challenger;
    }
    if (best.token < 0) {
      hyp.base_score = eos_base;
      hyp.complete = true;
    } else {
      hyp.base_score += dist[best.token];
      hyp.tokens.push_back(best.token);
    }
  }
  if (!hyp.complete) {
    LogDistribution dist = model.next_logprobs(source, hyp.tokens);
    hyp.base_score += dist[Vocabulary::kEos];
    hyp.complete = true;
  }
  result.ranked.push_back(std::move(hyp));
  return result;
}

DecodeResult beam_decode(const ConditionalModel& model,
                         const std::vector<TokenId>& source,
                         const ScoringMode& mode, std::size_t beam_size,
                         std::size_t max_len, bool want_trace) {
  if (beam_size == 0) {
    throw std::invalid_argument("beam size must be at least 1");
  }
  const TokenId vocab_size = static_cast<TokenId>(model.vocabulary().size());
  DecodeResult result;

  std::vector<Hypothesis> beam;
  beam.push_back(Hypothesis{});

  // Candidates reference their parent hypothesis instead of materializing
  // token vectors; only the retained few are materialized per round.
  struct Cand {
    double corrected;
    double base;
    std::uint32_t parent;
    TokenId token;  // -1 when no word is added (completion or carry)
    bool complete;
    std::size_t m;  // word count of the resulting hypothesis
  };
  std::vector<Cand> cands;

  auto cand_before = [&beam](const Cand& a, const Cand& b) {
    if (a.corrected != b.corrected) return a.corrected > b.corrected;
    if (a.m != b.m) return a.m < b.m;
    // Same word count, hence same sequence length: compare position-wise
    // through the parent tokens plus the candidate's own extension.
    const std::vector<TokenId>& ta = beam[a.parent].tokens;
    const std::vector<TokenId>& tb = beam[b.parent].tokens;
    for (std::size_t i = 0; i < a.m; ++i) {
      const TokenId xa = i < ta.size() ? ta[i] : a.token;
      const TokenId xb = i < tb.size() ? tb[i] : b.token;
      if (xa != xb) return xa < xb;
    }
    return a.complete && !b.complete;
  };

  bool empty_seen_in_candidates = false;
  for (std::size_t step = 1; step <= max_len; ++step) {
    bool any_incomplete = false;
    for (const Hypothesis& h : beam) {
      if (!h.complete) {
        any_incomplete = true;
        break;
      }
    }
    if (!any_incomplete) break;

    cands.clear();
    for (std::size_t i = 0; i < beam.size(); ++i) {
      const Hypothesis& h = beam[i];
      const std::size_t m = h.tokens.size();
      if (h.complete) {
        cands.push_back(Cand{mode.corrected_for(h.base_score, m, true),
                             h.base_score, static_cast<std::uint32_t>(i), -1,
                             true, m});
        continue;
      }
      LogDistribution dist = model.next_logprobs(source, h.tokens);
      ++result.stats.expanded;
      const double eos_base = h.base_score + dist[Vocabulary::kEos];
      cands.push_back(Cand{mode.corrected_for(eos_base, m, true), eos_base,
                           static_cast<std::uint32_t>(i), -1, true, m});
      for (TokenId id = kFirstWord; id < vocab_size; ++id) {
        const double base = h.base_score + dist[id];
        cands.push_back(Cand{mode.corrected_for(base, m + 1, false), base,
                             static_cast<std::uint32_t>(i), id, false, m + 1});
      }
    }

    std::optional<std::size_t> empty_rank;
    if (want_trace) {
      const Cand* empty = nullptr;
      for (const Cand& c : cands) {
        if (c.complete && c.m == 0) {
          empty = &c;
          break;
        }
      }
      if (empty != nullptr) {
        empty_seen_in_candidates = true;
        std::size_t ahead = 0;
        for (const Cand& c : cands) {
          if (&c != empty && cand_before(c, *empty)) ++ahead;
        }
        empty_rank = ahead + 1;
      }
    }

    if (cands.size() > beam_size) {
      std::nth_element(cands.begin(),
                       cands.begin() + static_cast<std::ptrdiff_t>(beam_size),
                       cands.end(), cand_before);
      cands.resize(beam_size);
    }
    std::sort(cands.begin(), cands.end(), cand_before);

    std::vector<Hypothesis> next;
    next.reserve(cands.size());
    for (const Cand& c : cands) {
      Hypothesis h;
      h.tokens = beam[c.parent].tokens;
      if (c.token >= 0) h.tokens.push_back(c.token);
      h.base_score = c.base;
      h.complete = c.complete;
      next.push_back(std::move(h));
    }
    beam = std::move(next);
    result.stats.steps = step;

    if (want_trace) {
      BeamTraceStep snapshot;
      snapshot.step = step;
      snapshot.empty_candidate_rank = empty_rank;
      for (const Hypothesis& h : beam) {
        TraceItem item;
        item.corrected_score =
            mode.corrected_for(h.base_score, h.tokens.size(), h.complete);
        item.base_score = h.base_score;
        item.complete = h.complete;
        item.tokens = h.tokens;
        snapshot.items.push_back(std::move(item));
      }
      result.trace.steps.push_back(std::move(snapshot));
      if (empty_seen_in_candidates &&
          !result.trace.empty_pruned_at_step.has_value()) {
        bool still_there = false;
        for (const Hypothesis& h : beam) {
          if (h.complete && h.tokens.empty()) {
            still_there = true;
            break;
          }
        }
        if (!still_there) result.trace.empty_pruned_at_step = step;
      }
    }
  }

  // Hypotheses still open after the last round are completed at the model's
  // actual end-of-sentence log-probability, then everything is re-ranked.
  for (Hypothesis& h : beam) {
    if (h.complete) continue;
    LogDistribution dist = model.next_logprobs(source, h.tokens);
    h.base_score += dist[Vocabulary::kEos];
    h.complete = true;
  }
  sort_hypotheses(beam, mode);
  result.ranked = std::move(beam);
  return result;
}

DecodeResult exhaustive_decode(const ConditionalModel& model,
                               const std::vector<TokenId>& source,
                               const ScoringMode& mode, std::size_t max_len,
                               std::uint64_t budget_limit) {
  const Vocabulary& vocab = model.vocabulary();
  const std::size_t num_words = vocab.size() - Vocabulary::kNumReserved;
  const double required =
      std::pow(static_cast<double>(num_words),
               static_cast<double>(max_len) + 1.0);
  if (required > static_cast<double>(budget_limit)) {
    std::ostringstream message;
    message << "exhaustive search over " << num_words
            << " words up to length " << max_len << " requires a budget of "
            << std::fixed << std::setprecision(0) << required
            << " but the limit is " << budget_limit;
    throw std::runtime_error(message.str());
  }

  DecodeResult result;
  std::vector<Hypothesis> completes;
  std::vector<TokenId> prefix;
  const TokenId vocab_size = static_cast<TokenId>(vocab.size());

  auto visit = [&](auto&& self, double prefix_score) -> void {
    LogDistribution dist = model.next_logprobs(source, prefix);
    Hypothesis done;
    done.tokens = prefix;
    done.base_score = prefix_score + dist[Vocabulary::kEos];
    done.complete = true;
    completes.push_back(std::move(done));
    if (prefix.size() >= max_len) return;
    for (TokenId id = kFirstWord; id < vocab_size; ++id) {
      prefix.push_back(id);
      self(self, prefix_score + dist[id]);
      prefix.pop_back();
    }
  };
  visit(visit, 0.0);

  result.stats.steps = max_len;
  result.stats.expanded = completes.size();
  sort_hypotheses(completes, mode);
  result.ranked = std::move(completes);
  return result;
}

std::vector<std::vector<TokenId>> decode_corpus(
    const ConditionalModel& model, const ParallelCorpus& corpus,
    const ScoringMode& mode, std::size_t beam_size, int workers,
    std::optional<std::size_t> max_len) {
  std::vector<std::vector<TokenId>> outputs(corpus.size());
  parallel_for_index(corpus.size(), workers, [&](std::size_t i) {
    const std::vector<TokenId>& source = corpus.pairs[i].source;
    const std::size_t limit =
        max_len ? *max_len : default_max_len(source.size());
    outputs[i] =
        beam_decode(model, source, mode, beam_size, limit).best().tokens;
  });
  return outputs;
}

void write_trace_tsv(std::ostream& out, const BeamTrace& trace,
                     const Vocabulary& vocab) {
  out << "step\trank\tcorrected_score\tbase_score\tcomplete\ttokens\n";
  std::ostringstream row;
  row << std::fixed << std::setprecision(6);
  for (const BeamTraceStep& step : trace.steps) {
    std::size_t rank = 0;
    for (const TraceItem& item : step.items) {
      ++rank;
      row.str("");
      row << step.step << '\t' << rank << '\t' << item.corrected_score << '\t'
          << item.base_score << '\t' << (item.complete ? 1 : 0) << '\t';
      for (std::size_t i = 0; i < item.tokens.size(); ++i) {
        if (i > 0) row << ' ';
        row << vocab.surface(item.tokens[i]);
      }
      row << '\n';
      out << row.str();
    }
  }
}

}  // namespace beamtune
