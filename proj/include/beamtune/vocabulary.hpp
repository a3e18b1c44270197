#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace beamtune {

using TokenId = std::int32_t;

// Bijection between surface tokens and dense integer ids.
// Ids 0..2 are reserved sentinels present in every vocabulary:
//   0 = <s> (beginning of sentence), 1 = </s> (end of sentence), 2 = <unk>.
// Corpus tokens are never allowed to collide with the sentinel surfaces, and
// sentences are stored sentinel-free: encode() maps any unknown token — and
// any sentinel surface appearing in raw text — to <unk>.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::string_view kBosSurface = "<s>";
  static constexpr std::string_view kEosSurface = "</s>";
  static constexpr std::string_view kUnkSurface = "<unk>";
  static constexpr std::size_t kNumReserved = 3;

  Vocabulary();

  // Insert-or-get: returns the existing id when the token is already present.
  // Throws if the token equals one of the reserved sentinel surfaces.
  TokenId add(std::string_view token);

  // Exact lookup, sentinels included.
  std::optional<TokenId> find(std::string_view token) const;

  const std::string& surface(TokenId id) const;
  std::size_t size() const { return id_to_token_.size(); }

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<TokenId>& ids) const;

  // One token per line; the line number (0-based) is the id, so the first
  // three lines are always the reserved sentinels.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_;
  }

 private:
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace beamtune
