#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hvtm {

/// Fixed-width Boolean vector, bit-packed into 64-bit words.
///
/// The dimension D (HVSize) is set at construction. Bits beyond D in the
/// last word are always zero, so word-wise equality equals set equality.
class Hypervector {
 public:
  Hypervector() = default;
  explicit Hypervector(uint32_t size);

  static Hypervector from_positions(uint32_t size, std::span<const uint32_t> positions);
  static uint32_t words_for(uint32_t size) { return (size + 63u) / 64u; }

  uint32_t size() const { return size_; }
  bool test(uint32_t pos) const;
  void set(uint32_t pos);
  void reset(uint32_t pos);

  uint32_t popcount() const;
  std::vector<uint32_t> positions() const;  // ascending
  std::span<const uint64_t> words() const { return words_; }

  // Elementwise OR accumulate; sizes must match.
  void or_in(const Hypervector& other);

  // Flip every bit in place, keeping the tail invariant.
  void invert();

  // Mask covering the valid bits of the last word (all ones when D % 64 == 0).
  uint64_t tail_mask() const;

  bool operator==(const Hypervector&) const = default;

 private:
  uint32_t size_ = 0;
  std::vector<uint64_t> words_;
};

// Cyclic shift: bit p of v appears at (p + k) mod D. k may be negative.
Hypervector rotate(const Hypervector& v, int64_t k);

// Role binding convention: role r >= 1 means rotate(v, r); role 0 means the
// unshifted vector and is not accepted here.
Hypervector bind_role(const Hypervector& v, uint32_t role_index);

// Elementwise OR of a non-empty list of equal-sized vectors.
Hypervector bundle(std::span<const Hypervector> vs);
Hypervector bundle(const std::vector<Hypervector>& vs);

// Popcount of the elementwise AND.
uint32_t overlap(const Hypervector& a, const Hypervector& b);

Hypervector complement(const Hypervector& v);

}  // namespace hvtm
