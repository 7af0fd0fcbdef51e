#include "hvtm/codebook.hpp"

#include <algorithm>

#include "hvtm/errors.hpp"
#include "hvtm/rng.hpp"

namespace hvtm {

TokenCodebook::TokenCodebook(uint32_t size, uint32_t nbits, uint64_t seed)
    : size_(size), nbits_(nbits), seed_(seed) {
  if (size == 0) throw ConfigError("codebook size must be positive");
  if (nbits == 0 || nbits > size)
    throw ConfigError("nbits must be in [1, size]; got nbits=" + std::to_string(nbits) +
                      " size=" + std::to_string(size));
}

std::vector<uint32_t> TokenCodebook::generate(const std::string& token_id) const {
  Prng stream(derive_seed(seed_, token_id));
  std::vector<uint32_t> pos;
  pos.reserve(nbits_);
  // Rejection sampling without replacement. nbits is small relative to size
  // in normal use; the saturated case still terminates.
  while (pos.size() < nbits_) {
    uint32_t p = stream.below(size_);
    if (std::find(pos.begin(), pos.end(), p) == pos.end()) pos.push_back(p);
  }
  std::sort(pos.begin(), pos.end());
  return pos;
}

Hypervector TokenCodebook::new_token(const std::string& token_id) {
  if (entries_.count(token_id))
    throw ConfigError("duplicate token id: \"" + token_id + "\"");
  auto pos = generate(token_id);
  order_.push_back(token_id);
  auto [it, ok] = entries_.emplace(token_id, std::move(pos));
  (void)ok;
  return Hypervector::from_positions(size_, it->second);
}

std::span<const uint32_t> TokenCodebook::get_or_create(const std::string& token_id) {
  auto it = entries_.find(token_id);
  if (it == entries_.end()) {
    order_.push_back(token_id);
    it = entries_.emplace(token_id, generate(token_id)).first;
  }
  return it->second;
}

bool TokenCodebook::contains(std::string_view token_id) const {
  return entries_.count(std::string(token_id)) != 0;
}

std::span<const uint32_t> TokenCodebook::positions_of(const std::string& token_id) const {
  auto it = entries_.find(token_id);
  if (it == entries_.end()) throw ConfigError("unknown token id: \"" + token_id + "\"");
  return it->second;
}

const std::vector<uint32_t>* TokenCodebook::find(const std::string& token_id) const {
  auto it = entries_.find(token_id);
  return it == entries_.end() ? nullptr : &it->second;
}

Hypervector TokenCodebook::token_hv(const std::string& token_id) const {
  return Hypervector::from_positions(size_, positions_of(token_id));
}

nlohmann::ordered_json TokenCodebook::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["size"] = size_;
  j["nbits"] = nbits_;
  j["seed"] = seed_;
  auto tokens = nlohmann::ordered_json::array();
  for (const auto& id : order_) {
    nlohmann::ordered_json t;
    t["id"] = id;
    t["positions"] = entries_.at(id);  // stored ascending
    tokens.push_back(std::move(t));
  }
  j["tokens"] = std::move(tokens);
  return j;
}

TokenCodebook TokenCodebook::from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw DataError("unsupported codebook version");
  TokenCodebook cb(j.at("size").get<uint32_t>(), j.at("nbits").get<uint32_t>(),
                   j.at("seed").get<uint64_t>());
  for (const auto& t : j.at("tokens")) {
    auto id = t.at("id").get<std::string>();
    auto pos = t.at("positions").get<std::vector<uint32_t>>();
    if (pos.size() != cb.nbits_) throw DataError("codebook token \"" + id + "\" has wrong popcount");
    for (uint32_t p : pos)
      if (p >= cb.size_) throw DataError("codebook token \"" + id + "\" has out-of-range position");
    if (cb.entries_.count(id)) throw DataError("codebook has duplicate token id \"" + id + "\"");
    cb.order_.push_back(id);
    cb.entries_.emplace(std::move(id), std::move(pos));
  }
  return cb;
}

}  // namespace hvtm
