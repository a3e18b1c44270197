#include "beamtune/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "beamtune/rng.hpp"

namespace beamtune {

namespace {

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    int len;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1Fu;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0Fu;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07u;
    } else {
      return false;
    }
    if (i + static_cast<std::size_t>(len) > n) return false;
    for (int j = 1; j < len; ++j) {
      unsigned char cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(j)]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3Fu);
    }
    if (len == 2 && cp < 0x80) return false;                                // overlong
    if (len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) return false;
    if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return false;
    i += static_cast<std::size_t>(len);
  }
  return true;
}

struct RawFile {
  std::vector<std::vector<std::string>> sentences;  // tokenized, header-free
};

RawFile read_sentence_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  RawFile file;
  std::string line;
  std::size_t line_no = 0;
  bool in_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line)) {
      throw std::runtime_error("invalid UTF-8 in " + path + " at line " +
                               std::to_string(line_no));
    }
    if (in_header && !line.empty() && line[0] == '#') continue;
    in_header = false;
    file.sentences.push_back(tokenize(line));
  }
  return file;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < n && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string sentence_to_text(const std::vector<TokenId>& ids,
                             const Vocabulary& vocab) {
  std::string text;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) text += ' ';
    text += vocab.surface(ids[i]);
  }
  return text;
}

LoadedCorpus load_parallel(const std::string& source_path,
                           const std::string& target_path,
                           const VocabPolicy& policy) {
  RawFile source = read_sentence_file(source_path);
  RawFile target = read_sentence_file(target_path);
  if (source.sentences.size() != target.sentences.size()) {
    throw std::runtime_error("line count mismatch " +
                             std::to_string(source.sentences.size()) + " vs " +
                             std::to_string(target.sentences.size()));
  }
  for (std::size_t i = 0; i < source.sentences.size(); ++i) {
    if (source.sentences[i].empty()) {
      throw std::runtime_error("empty source sentence at pair " +
                               std::to_string(i + 1) + " in " + source_path);
    }
  }

  LoadedCorpus result;
  if (policy.existing != nullptr) {
    result.vocabulary = *policy.existing;
  } else {
    std::unordered_map<std::string, std::size_t> counts;
    for (const RawFile* file : {&source, &target}) {
      for (const auto& sentence : file->sentences) {
        for (const std::string& token : sentence) ++counts[token];
      }
    }
    for (const RawFile* file : {&source, &target}) {
      for (const auto& sentence : file->sentences) {
        for (const std::string& token : sentence) {
          if (counts[token] >= policy.min_count) result.vocabulary.add(token);
        }
      }
    }
  }

  result.corpus.pairs.reserve(source.sentences.size());
  for (std::size_t i = 0; i < source.sentences.size(); ++i) {
    SentencePair pair;
    pair.source = result.vocabulary.encode(source.sentences[i]);
    pair.target = result.vocabulary.encode(target.sentences[i]);
    result.corpus.pairs.push_back(std::move(pair));
  }
  return result;
}

void write_parallel(const ParallelCorpus& corpus, const Vocabulary& vocab,
                    const std::string& source_path,
                    const std::string& target_path,
                    const std::string& header) {
  auto write_side = [&](const std::string& path, bool source_side) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    if (!header.empty()) out << "# " << header << '\n';
    for (const SentencePair& pair : corpus.pairs) {
      out << sentence_to_text(source_side ? pair.source : pair.target, vocab)
          << '\n';
    }
    if (!out) throw std::runtime_error("failed writing corpus to " + path);
  };
  write_side(source_path, true);
  write_side(target_path, false);
}

void SyntheticTaskConfig::validate() const {
  if (source_vocab_size == 0) throw std::invalid_argument("source vocabulary size must be positive");
  if (target_vocab_size == 0) throw std::invalid_argument("target vocabulary size must be positive");
  if (min_source_len < 1) throw std::invalid_argument("minimum source length must be at least 1");
  if (max_source_len < min_source_len) {
    throw std::invalid_argument("source length range is empty: Lmin > Lmax");
  }
  if (!(fertility_two_prob >= 0.0 && fertility_two_prob <= 1.0)) {
    throw std::invalid_argument("fertility probabilities must sum to 1 with weights in [0,1]");
  }
  if (num_pairs == 0) throw std::invalid_argument("number of pairs must be positive");
}

LoadedCorpus generate_synthetic(const SyntheticTaskConfig& config) {
  config.validate();
  LoadedCorpus result;

  std::vector<TokenId> source_ids(config.source_vocab_size);
  for (std::size_t i = 0; i < config.source_vocab_size; ++i) {
    source_ids[i] = result.vocabulary.add("s" + std::to_string(i));
  }
  std::vector<TokenId> target_ids(config.target_vocab_size);
  for (std::size_t i = 0; i < config.target_vocab_size; ++i) {
    target_ids[i] = result.vocabulary.add("t" + std::to_string(i));
  }

  Rng rng(config.seed);

  // Seed-derived gloss tables: the 2-token gloss extends the 1-token gloss,
  // so a source token always contributes its primary gloss token.
  std::vector<TokenId> gloss_first(config.source_vocab_size);
  std::vector<TokenId> gloss_second(config.source_vocab_size);
  for (std::size_t i = 0; i < config.source_vocab_size; ++i) {
    gloss_first[i] = target_ids[rng.uniform_int(0, config.target_vocab_size - 1)];
    gloss_second[i] = target_ids[rng.uniform_int(0, config.target_vocab_size - 1)];
  }

  result.corpus.pairs.reserve(config.num_pairs);
  for (std::size_t p = 0; p < config.num_pairs; ++p) {
    SentencePair pair;
    std::size_t len = rng.uniform_int(config.min_source_len, config.max_source_len);
    pair.source.reserve(len);
    pair.target.reserve(2 * len);
    for (std::size_t t = 0; t < len; ++t) {
      std::size_t s = rng.uniform_int(0, config.source_vocab_size - 1);
      pair.source.push_back(source_ids[s]);
      pair.target.push_back(gloss_first[s]);
      if (rng.bernoulli(config.fertility_two_prob)) {
        pair.target.push_back(gloss_second[s]);
      }
    }
    result.corpus.pairs.push_back(std::move(pair));
  }
  return result;
}

SplitResult split(const ParallelCorpus& corpus, const SplitFractions& fractions,
                  std::uint64_t seed) {
  if (!(fractions.train > 0.0 && fractions.dev > 0.0 && fractions.test > 0.0)) {
    throw std::runtime_error("fractions must be positive");
  }
  if (std::abs(fractions.train + fractions.dev + fractions.test - 1.0) > 1e-9) {
    throw std::runtime_error("fractions must sum to 1");
  }
  const std::size_t n = corpus.size();
  if (n < 3) throw std::runtime_error("cannot split: corpus smaller than 3 sentences");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.uniform_int(0, i);
    std::swap(order[i], order[j]);
  }

  // Floor with a hair of slack so exact products like 0.7 * 10 do not round
  // down through floating-point error; remainder goes to train.
  auto floor_count = [n](double fraction) {
    return static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(n) + 1e-9));
  };
  std::size_t n_dev = floor_count(fractions.dev);
  std::size_t n_test = floor_count(fractions.test);
  std::size_t n_train = n - n_dev - n_test;  // floor(train * n) + remainder

  SplitResult result;
  auto take = [&](std::size_t begin, std::size_t count) {
    ParallelCorpus part;
    part.pairs.reserve(count);
    for (std::size_t i = begin; i < begin + count; ++i) {
      part.pairs.push_back(corpus.pairs[order[i]]);
    }
    return part;
  };
  result.train = take(0, n_train);
  result.dev = take(n_train, n_dev);
  result.test = take(n_train + n_dev, n_test);
  return result;
}

}  // namespace beamtune
