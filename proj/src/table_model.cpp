#include "beamtune/table_model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "beamtune/rng.hpp"

namespace beamtune {

namespace {

void hash_bytes(std::size_t& h, const void* data, std::size_t len) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;  // FNV-1a
  }
}

}  // namespace

std::size_t TableModel::FullKeyHash::operator()(const FullKey& key) const {
  std::size_t h = 0xcbf29ce484222325ULL;
  unsigned char any = key.any_source ? 1 : 0;
  hash_bytes(h, &any, 1);
  if (!key.any_source) {
    hash_bytes(h, key.source.data(), key.source.size() * sizeof(TokenId));
  }
  unsigned char sep = 0xff;
  hash_bytes(h, &sep, 1);
  hash_bytes(h, key.prefix.data(), key.prefix.size() * sizeof(TokenId));
  return h;
}

TableModel::TableModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}

std::string TableModel::describe_key(const FullKey& key) const {
  std::string text;
  if (key.any_source) {
    text = "*";
  } else {
    for (std::size_t i = 0; i < key.source.size(); ++i) {
      if (i > 0) text += ',';
      text += vocab_.surface(key.source[i]);
    }
  }
  for (TokenId id : key.prefix) {
    text += ' ';
    text += vocab_.surface(id);
  }
  return text;
}

void TableModel::set_row(const SourceKey& key,
                         const std::vector<TokenId>& prefix, Row row) {
  FullKey full{key.any_source,
               key.any_source ? std::vector<TokenId>{} : key.source, prefix};
  const TokenId vocab_size = static_cast<TokenId>(vocab_.size());

  // The key must be validated before it can be rendered in error messages.
  for (TokenId id : full.source) {
    if (id < 0 || id >= vocab_size) {
      throw std::invalid_argument("source token id out of range: " +
                                  std::to_string(id));
    }
  }
  for (TokenId id : full.prefix) {
    if (id < 0 || id >= vocab_size) {
      throw std::invalid_argument("prefix token id out of range: " +
                                  std::to_string(id));
    }
  }
  const std::string description = describe_key(full);

  auto check_id = [&](TokenId id) {
    if (id < 0 || id >= vocab_size) {
      throw std::invalid_argument("row for prefix \"" + description +
                                  "\" references token id out of range: " +
                                  std::to_string(id));
    }
    if (id == Vocabulary::kBos) {
      throw std::invalid_argument(
          "row for prefix \"" + description +
          "\" assigns probability to the beginning-of-sentence sentinel");
    }
  };

  if (row.filler_end < row.filler_begin || row.filler_begin < 0 ||
      row.filler_end > vocab_size) {
    throw std::invalid_argument("row for prefix \"" + description +
                                "\" has an invalid filler range");
  }
  if (row.filler_prob < 0.0) {
    throw std::invalid_argument("row for prefix \"" + description +
                                "\" has a negative filler probability");
  }

  double total = row.filler_prob *
                 static_cast<double>(row.filler_end - row.filler_begin);
  std::vector<bool> seen(static_cast<std::size_t>(vocab_size), false);
  for (const auto& [id, prob] : row.entries) {
    check_id(id);
    if (id >= row.filler_begin && id < row.filler_end) {
      throw std::invalid_argument("row for prefix \"" + description +
                                  "\" lists token id " + std::to_string(id) +
                                  " inside its filler range");
    }
    if (seen[static_cast<std::size_t>(id)]) {
      throw std::invalid_argument("duplicate token \"" + vocab_.surface(id) +
                                  "\" for prefix \"" + description + "\"");
    }
    seen[static_cast<std::size_t>(id)] = true;
    if (!(prob >= 0.0) || prob > 1.0 + 1e-9) {
      throw std::invalid_argument("probability out of range for prefix \"" +
                                  description + "\", token \"" +
                                  vocab_.surface(id) + "\"");
    }
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream message;
    message << "distribution for prefix \"" << description << "\" sums to "
            << total << ", expected 1";
    throw std::runtime_error(message.str());
  }

  StoredRow stored;
  stored.entry_logps.reserve(row.entries.size());
  for (const auto& [id, prob] : row.entries) {
    stored.entry_logps.push_back(std::log(prob));
  }
  stored.filler_logp =
      row.filler_prob > 0.0 ? std::log(row.filler_prob) : kNegInf;
  stored.row = std::move(row);

  auto [it, inserted] = rows_.try_emplace(full);
  if (inserted) keys_in_order_.push_back(full);
  it->second = std::move(stored);
}

LogDistribution TableModel::next_logprobs_impl(
    const std::vector<TokenId>& source,
    const std::vector<TokenId>& prefix) const {
  const StoredRow* stored = nullptr;
  {
    FullKey key{false, source, prefix};
    auto it = rows_.find(key);
    if (it == rows_.end()) {
      key.any_source = true;
      key.source.clear();
      it = rows_.find(key);
    }
    if (it != rows_.end()) stored = &it->second;
  }

  LogDistribution dist;
  dist.logp.assign(vocab_.size(), kNegInf);
  if (stored == nullptr) {
    // Default row: end-of-sentence with probability 1.
    dist.logp[Vocabulary::kEos] = 0.0;
    return dist;
  }
  for (TokenId id = stored->row.filler_begin; id < stored->row.filler_end;
       ++id) {
    dist.logp[static_cast<std::size_t>(id)] = stored->filler_logp;
  }
  for (std::size_t i = 0; i < stored->row.entries.size(); ++i) {
    dist.logp[static_cast<std::size_t>(stored->row.entries[i].first)] =
        stored->entry_logps[i];
  }
  return dist;
}

namespace {

struct ParsedLine {
  std::string key_text;  // normalized column 1 (single-space separated)
  std::vector<std::string> key_fields;
  std::string token;
  double prob = 0.0;
  std::size_t line_no = 0;
};

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == sep) {
      fields.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::vector<std::string> split_spaces(const std::string& text) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) fields.push_back(text.substr(start, i - start));
  }
  return fields;
}

}  // namespace

TableModel TableModel::from_spec_text(const std::string& text) {
  std::vector<ParsedLine> lines;
  Vocabulary vocab;

  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> columns = split_on(line, '\t');
    if (columns.size() != 3) {
      throw std::runtime_error("expected 3 tab-separated fields at line " +
                               std::to_string(line_no));
    }
    ParsedLine parsed;
    parsed.line_no = line_no;
    parsed.key_fields = split_spaces(columns[0]);
    if (parsed.key_fields.empty()) {
      throw std::runtime_error("missing source key at line " +
                               std::to_string(line_no));
    }
    std::string normalized;
    for (std::size_t i = 0; i < parsed.key_fields.size(); ++i) {
      if (i > 0) normalized += ' ';
      normalized += parsed.key_fields[i];
    }
    parsed.key_text = std::move(normalized);
    parsed.token = columns[1];
    if (parsed.token.empty()) {
      throw std::runtime_error("empty token at line " + std::to_string(line_no));
    }
    const char* begin = columns[2].c_str();
    char* end = nullptr;
    parsed.prob = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw std::runtime_error("invalid probability \"" + columns[2] +
                               "\" at line " + std::to_string(line_no));
    }
    if (!(parsed.prob >= 0.0) || parsed.prob > 1.0 + 1e-9) {
      throw std::runtime_error("probability out of range at line " +
                               std::to_string(line_no));
    }

    // Grow the vocabulary in appearance order.
    if (parsed.key_fields[0] != "*") {
      for (const std::string& token : split_on(parsed.key_fields[0], ',')) {
        if (token.empty()) {
          throw std::runtime_error("empty source token at line " +
                                   std::to_string(line_no));
        }
        vocab.add(token);
      }
    }
    for (std::size_t i = 1; i < parsed.key_fields.size(); ++i) {
      vocab.add(parsed.key_fields[i]);
    }
    if (parsed.token != Vocabulary::kEosSurface) vocab.add(parsed.token);
    lines.push_back(std::move(parsed));
  }

  // Accumulate lines that share a key into rows, in first-appearance order.
  struct PendingRow {
    SourceKey key;
    std::vector<TokenId> prefix;
    Row row;
    std::vector<std::string> tokens_seen;
    std::size_t first_line = 0;
  };
  std::vector<PendingRow> pending;
  std::unordered_map<std::string, std::size_t> index_of;
  for (const ParsedLine& parsed : lines) {
    auto [it, inserted] = index_of.try_emplace(parsed.key_text, pending.size());
    if (inserted) {
      PendingRow fresh;
      if (parsed.key_fields[0] == "*") {
        fresh.key = SourceKey::any();
      } else {
        std::vector<TokenId> source;
        for (const std::string& token : split_on(parsed.key_fields[0], ',')) {
          source.push_back(*vocab.find(token));
        }
        fresh.key = SourceKey::exactly(std::move(source));
      }
      for (std::size_t i = 1; i < parsed.key_fields.size(); ++i) {
        fresh.prefix.push_back(*vocab.find(parsed.key_fields[i]));
      }
      fresh.first_line = parsed.line_no;
      pending.push_back(std::move(fresh));
    }
    PendingRow& target = pending[it->second];
    for (const std::string& seen : target.tokens_seen) {
      if (seen == parsed.token) {
        throw std::runtime_error("duplicate token \"" + parsed.token +
                                 "\" for key \"" + parsed.key_text +
                                 "\" at line " + std::to_string(parsed.line_no));
      }
    }
    target.tokens_seen.push_back(parsed.token);
    TokenId id = parsed.token == Vocabulary::kEosSurface
                     ? Vocabulary::kEos
                     : *vocab.find(parsed.token);
    target.row.entries.emplace_back(id, parsed.prob);
  }

  TableModel model(std::move(vocab));
  for (PendingRow& row : pending) {
    model.set_row(row.key, row.prefix, std::move(row.row));
  }
  return model;
}

TableModel TableModel::from_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_spec_text(text);
}

namespace {

void enumerate_prefixes(const std::vector<TokenId>& words, std::size_t depth,
                        std::vector<TokenId>& prefix,
                        std::vector<std::vector<TokenId>>& out) {
  out.push_back(prefix);
  if (prefix.size() == depth) return;
  for (TokenId w : words) {
    prefix.push_back(w);
    enumerate_prefixes(words, depth, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

TableModel random_table_model(std::uint64_t seed, std::size_t num_words,
                              std::size_t depth) {
  if (num_words == 0) throw std::invalid_argument("need at least one word");
  Vocabulary vocab;
  std::vector<TokenId> words;
  words.reserve(num_words);
  for (std::size_t i = 0; i < num_words; ++i) {
    words.push_back(vocab.add("w" + std::to_string(i)));
  }

  std::vector<std::vector<TokenId>> prefixes;
  {
    std::vector<TokenId> scratch;
    enumerate_prefixes(words, depth == 0 ? 0 : depth - 1, scratch, prefixes);
  }

  TableModel model(std::move(vocab));
  Rng rng(seed);
  for (const std::vector<TokenId>& prefix : prefixes) {
    if (!prefix.empty() && rng.next_double() < 0.15) continue;  // default row
    std::vector<std::pair<TokenId, double>> weights;
    double total = 0.0;
    auto draw = [&](TokenId id) {
      if (rng.next_double() < 0.2) return;  // forbidden token (-inf)
      double w = rng.uniform(0.05, 1.0);
      weights.emplace_back(id, w);
      total += w;
    };
    draw(Vocabulary::kEos);
    for (TokenId w : words) draw(w);
    TableModel::Row row;
    if (total == 0.0) {
      row.entries.emplace_back(Vocabulary::kEos, 1.0);
    } else {
      for (auto& [id, w] : weights) row.entries.emplace_back(id, w / total);
      // Nudge the largest entry so the row sums to exactly 1.
      double sum = 0.0;
      for (auto& [id, p] : row.entries) sum += p;
      row.entries.front().second += 1.0 - sum;
    }
    model.set_row(SourceKey::any(), prefix, std::move(row));
  }
  return model;
}

}  // namespace beamtune
