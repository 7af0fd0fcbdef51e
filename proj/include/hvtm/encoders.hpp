#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hvtm/codebook.hpp"
#include "hvtm/hypervector.hpp"

#include "json.hpp"

namespace hvtm {

// Role shifts are part of the encoding contract: content stays unshifted,
// row/column tokens are rotated before bundling so position separates
// otherwise identical patches.
inline constexpr uint32_t kPatchRole = 0;
inline constexpr uint32_t kRowRole = 1;
inline constexpr uint32_t kColRole = 2;

struct Image {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<uint8_t> pixels;  // row-major, height*width bytes

  uint8_t at(uint32_t r, uint32_t c) const { return pixels[size_t(r) * width + c]; }
};

// A codebook together with the rotation applied to its tokens when bundled.
// Explainability walks these to decode clause includes back to tokens.
struct RoleView {
  std::string name;
  uint32_t shift = 0;
  const TokenCodebook* codebook = nullptr;
};

struct ImageEncoderSpec {
  uint32_t hv_size = 2048;
  uint32_t nbits = 4;
  uint32_t patch_height = 10;
  uint32_t patch_width = 10;
  uint32_t stride = 1;
  uint32_t binarize_threshold = 75;  // pixel > threshold reads as 1
  uint64_t seed = 42;

  void validate() const;
};

class ImageEncoder {
 public:
  explicit ImageEncoder(const ImageEncoderSpec& spec);

  // admit_new_tokens=false is evaluation mode: patch content tokens are still
  // materialized on demand (token HVs depend only on (codebook seed, id), so
  // this is caching, not learning), but a row/column index never seen during
  // training means the image geometry disagrees with the model and is an error.
  Hypervector encode(const Image& img, bool admit_new_tokens);

  // Hex id of a binarized patch, packing bits into nibbles LSB-first.
  static std::string patch_token_id(const std::vector<uint8_t>& bits);

  const ImageEncoderSpec& spec() const { return spec_; }
  std::vector<RoleView> roles() const;

  nlohmann::ordered_json to_json() const;
  static ImageEncoder from_json(const nlohmann::json& j);

 private:
  ImageEncoderSpec spec_;
  TokenCodebook patch_book_;
  TokenCodebook row_book_;
  TokenCodebook col_book_;
};

struct TextEncoderSpec {
  uint32_t hv_size = 2048;
  uint32_t nbits = 4;
  uint64_t seed = 42;

  void validate() const;
};

class TextEncoder {
 public:
  explicit TextEncoder(const TextEncoderSpec& spec);

  // Lowercase, replace punctuation with spaces, split on whitespace.
  static std::vector<std::string> tokenize(const std::string& text);

  // Bag-of-tokens bundle. Training admits new vocabulary; evaluation skips
  // out-of-vocabulary tokens. No usable token yields a zero vector.
  Hypervector encode(const std::string& text, bool admit_new_tokens);

  const TextEncoderSpec& spec() const { return spec_; }
  const TokenCodebook& vocabulary() const { return vocab_; }
  std::vector<RoleView> roles() const;

  nlohmann::ordered_json to_json() const;
  static TextEncoder from_json(const nlohmann::json& j);

 private:
  TextEncoderSpec spec_;
  TokenCodebook vocab_;
};

struct FingerprintEncoderSpec {
  uint32_t hv_size = 2048;
  uint32_t nbits = 4;
  uint32_t fingerprint_length = 4096;
  uint64_t seed = 42;

  void validate() const;
};

class FingerprintEncoder {
 public:
  explicit FingerprintEncoder(const FingerprintEncoderSpec& spec);

  Hypervector encode(const std::vector<uint32_t>& positions) const;

  const FingerprintEncoderSpec& spec() const { return spec_; }
  const TokenCodebook& position_codebook() const { return book_; }
  std::vector<RoleView> roles() const;

  nlohmann::ordered_json to_json() const;
  static FingerprintEncoder from_json(const nlohmann::json& j);

 private:
  FingerprintEncoderSpec spec_;
  TokenCodebook book_;
};

// Identity wrapper: raw Booleanized features become a width-D vector.
Hypervector encode_vanilla(const std::vector<uint8_t>& bits);

enum class EncoderKind { kImage, kText, kFingerprint, kVanilla };

std::string encoder_kind_name(EncoderKind kind);
EncoderKind encoder_kind_from_name(const std::string& name);

// Tagged union used by the harness and by model persistence. Vanilla carries
// no state beyond its kind.
class SampleEncoder {
 public:
  explicit SampleEncoder(ImageEncoder enc) : impl_(std::move(enc)) {}
  explicit SampleEncoder(TextEncoder enc) : impl_(std::move(enc)) {}
  explicit SampleEncoder(FingerprintEncoder enc) : impl_(std::move(enc)) {}
  SampleEncoder() : impl_(std::monostate{}) {}  // vanilla

  EncoderKind kind() const;
  ImageEncoder& image();
  TextEncoder& text();
  FingerprintEncoder& fingerprint();
  const ImageEncoder& image() const;
  const TextEncoder& text() const;
  const FingerprintEncoder& fingerprint() const;

  std::vector<RoleView> roles() const;

  nlohmann::ordered_json to_json() const;
  static SampleEncoder from_json(const nlohmann::json& j);

 private:
  std::variant<std::monostate, ImageEncoder, TextEncoder, FingerprintEncoder> impl_;
};

}  // namespace hvtm
