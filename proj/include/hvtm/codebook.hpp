#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hvtm/hypervector.hpp"

#include "json.hpp"

namespace hvtm {

/// Seeded map from token ids to random sparse hypervectors with exactly
/// `nbits` set bits each.
///
/// A token's bit positions are a pure function of (seed, token id): the
/// generator stream is keyed on both, so regeneration is bit-identical no
/// matter when or in what order tokens were admitted.
class TokenCodebook {
 public:
  TokenCodebook(uint32_t size, uint32_t nbits, uint64_t seed);

  uint32_t size() const { return size_; }
  uint32_t nbits() const { return nbits_; }
  uint64_t seed() const { return seed_; }
  size_t token_count() const { return order_.size(); }

  // Admits a new token; throws on duplicates.
  Hypervector new_token(const std::string& token_id);

  // Admits the token if absent, then returns its positions (ascending).
  std::span<const uint32_t> get_or_create(const std::string& token_id);

  bool contains(std::string_view token_id) const;
  std::span<const uint32_t> positions_of(const std::string& token_id) const;  // throws if absent
  const std::vector<uint32_t>* find(const std::string& token_id) const;       // nullptr if absent
  Hypervector token_hv(const std::string& token_id) const;

  // Token ids in insertion order.
  const std::vector<std::string>& ids() const { return order_; }

  nlohmann::ordered_json to_json() const;
  static TokenCodebook from_json(const nlohmann::json& j);

 private:
  std::vector<uint32_t> generate(const std::string& token_id) const;

  uint32_t size_ = 0;
  uint32_t nbits_ = 0;
  uint64_t seed_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<uint32_t>> entries_;
};

}  // namespace hvtm
