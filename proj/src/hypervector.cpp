#include "hvtm/hypervector.hpp"

#include <bit>

#include "hvtm/errors.hpp"

namespace hvtm {

Hypervector::Hypervector(uint32_t size) : size_(size), words_(words_for(size), 0) {}

Hypervector Hypervector::from_positions(uint32_t size, std::span<const uint32_t> positions) {
  Hypervector v(size);
  for (uint32_t p : positions) v.set(p);
  return v;
}

bool Hypervector::test(uint32_t pos) const {
  if (pos >= size_) throw ConfigError("hypervector position " + std::to_string(pos) +
                                      " out of range for size " + std::to_string(size_));
  return (words_[pos >> 6] >> (pos & 63)) & 1u;
}

void Hypervector::set(uint32_t pos) {
  if (pos >= size_) throw ConfigError("hypervector position " + std::to_string(pos) +
                                      " out of range for size " + std::to_string(size_));
  words_[pos >> 6] |= uint64_t(1) << (pos & 63);
}

void Hypervector::reset(uint32_t pos) {
  if (pos >= size_) throw ConfigError("hypervector position " + std::to_string(pos) +
                                      " out of range for size " + std::to_string(size_));
  words_[pos >> 6] &= ~(uint64_t(1) << (pos & 63));
}

uint32_t Hypervector::popcount() const {
  uint32_t n = 0;
  for (uint64_t w : words_) n += static_cast<uint32_t>(std::popcount(w));
  return n;
}

std::vector<uint32_t> Hypervector::positions() const {
  std::vector<uint32_t> out;
  out.reserve(popcount());
  for (size_t wi = 0; wi < words_.size(); ++wi) {
    uint64_t w = words_[wi];
    while (w) {
      out.push_back(static_cast<uint32_t>(wi * 64 + std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

void Hypervector::or_in(const Hypervector& other) {
  if (other.size_ != size_)
    throw ConfigError("dimension mismatch: " + std::to_string(size_) + " vs " +
                      std::to_string(other.size_));
  for (size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

void Hypervector::invert() {
  for (uint64_t& w : words_) w = ~w;
  if (!words_.empty()) words_.back() &= tail_mask();
}

uint64_t Hypervector::tail_mask() const {
  uint32_t rem = size_ & 63u;
  return rem == 0 ? ~uint64_t(0) : (uint64_t(1) << rem) - 1;
}

Hypervector rotate(const Hypervector& v, int64_t k) {
  uint32_t d = v.size();
  if (d == 0) return v;
  int64_t r = k % d;
  if (r < 0) r += d;
  auto shift = static_cast<uint32_t>(r);
  if (shift == 0) return v;
  Hypervector out(d);
  auto words = v.words();
  for (size_t wi = 0; wi < words.size(); ++wi) {
    uint64_t w = words[wi];
    while (w) {
      auto p = static_cast<uint32_t>(wi * 64 + std::countr_zero(w));
      uint32_t q = p + shift;
      out.set(q >= d ? q - d : q);
      w &= w - 1;
    }
  }
  return out;
}

Hypervector bind_role(const Hypervector& v, uint32_t role_index) {
  if (role_index < 1)
    throw ConfigError("role index must be >= 1 (role 0 means the unshifted vector)");
  return rotate(v, role_index);
}

Hypervector bundle(std::span<const Hypervector> vs) {
  if (vs.empty()) throw ConfigError("bundle of an empty list");
  Hypervector out = vs[0];
  for (size_t i = 1; i < vs.size(); ++i) out.or_in(vs[i]);
  return out;
}

Hypervector bundle(const std::vector<Hypervector>& vs) {
  return bundle(std::span<const Hypervector>(vs));
}

uint32_t overlap(const Hypervector& a, const Hypervector& b) {
  if (a.size() != b.size())
    throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  auto wa = a.words();
  auto wb = b.words();
  uint32_t n = 0;
  for (size_t i = 0; i < wa.size(); ++i) n += static_cast<uint32_t>(std::popcount(wa[i] & wb[i]));
  return n;
}

Hypervector complement(const Hypervector& v) {
  Hypervector out = v;
  out.invert();
  return out;
}

}  // namespace hvtm
