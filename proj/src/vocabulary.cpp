#include "beamtune/vocabulary.hpp"

#include <fstream>
#include <stdexcept>

namespace beamtune {

namespace {

bool is_reserved_surface(std::string_view token) {
  return token == Vocabulary::kBosSurface || token == Vocabulary::kEosSurface ||
         token == Vocabulary::kUnkSurface;
}

}  // namespace

Vocabulary::Vocabulary() {
  id_to_token_ = {std::string(kBosSurface), std::string(kEosSurface),
                  std::string(kUnkSurface)};
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
  }
}

TokenId Vocabulary::add(std::string_view token) {
  if (token.empty()) {
    throw std::invalid_argument("cannot add an empty token to the vocabulary");
  }
  if (is_reserved_surface(token)) {
    throw std::invalid_argument("token collides with a reserved sentinel: " +
                                std::string(token));
  }
  auto it = token_to_id_.find(std::string(token));
  if (it != token_to_id_.end()) return it->second;
  TokenId id = static_cast<TokenId>(id_to_token_.size());
  id_to_token_.emplace_back(token);
  token_to_id_.emplace(id_to_token_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(
    const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& token : tokens) {
    auto it = token_to_id_.find(token);
    if (it == token_to_id_.end() || it->second < static_cast<TokenId>(kNumReserved)) {
      ids.push_back(kUnk);
    } else {
      ids.push_back(it->second);
    }
  }
  return ids;
}

std::vector<std::string> Vocabulary::decode(
    const std::vector<TokenId>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (TokenId id : ids) tokens.push_back(surface(id));
  return tokens;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const std::string& token : id_to_token_) out << token << '\n';
  if (!out) throw std::runtime_error("failed writing vocabulary to " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no <= kNumReserved) {
      if (line != vocab.id_to_token_[line_no - 1]) {
        throw std::runtime_error(
            "vocabulary file " + path + " line " + std::to_string(line_no) +
            ": expected reserved sentinel " + vocab.id_to_token_[line_no - 1] +
            ", got \"" + line + "\"");
      }
      continue;
    }
    if (line.empty()) {
      throw std::runtime_error("vocabulary file " + path + " line " +
                               std::to_string(line_no) + ": empty token");
    }
    if (vocab.find(line).has_value()) {
      throw std::runtime_error("vocabulary file " + path + " line " +
                               std::to_string(line_no) + ": duplicate token \"" +
                               line + "\"");
    }
    vocab.add(line);
  }
  if (line_no < kNumReserved) {
    throw std::runtime_error("vocabulary file " + path +
                             " is missing the reserved sentinel lines");
  }
  return vocab;
}

}  // namespace beamtune
