#include "hvtm/encoders.hpp"

#include <cctype>
#include <iostream>

#include "hvtm/errors.hpp"
#include "hvtm/rng.hpp"

namespace hvtm {

namespace {

void check_hv_params(uint32_t hv_size, uint32_t nbits, const char* what) {
  if (hv_size == 0) throw ConfigError(std::string(what) + ": hv_size must be positive");
  if (nbits == 0 || nbits > hv_size)
    throw ConfigError(std::string(what) + ": nbits must be in [1, hv_size]");
}

Hypervector hv_from(uint32_t size, std::span<const uint32_t> positions) {
  return Hypervector::from_positions(size, positions);
}

}  // namespace

void ImageEncoderSpec::validate() const {
  check_hv_params(hv_size, nbits, "image encoder");
  if (patch_height == 0 || patch_width == 0)
    throw ConfigError("image encoder: patch dimensions must be positive");
  if (stride == 0) throw ConfigError("image encoder: stride must be positive");
  if (binarize_threshold > 255)
    throw ConfigError("image encoder: binarize_threshold must be in [0, 255]");
}

ImageEncoder::ImageEncoder(const ImageEncoderSpec& spec)
    : spec_(spec),
      patch_book_(spec.hv_size, spec.nbits, derive_seed(spec.seed, "patch")),
      row_book_(spec.hv_size, spec.nbits, derive_seed(spec.seed, "row")),
      col_book_(spec.hv_size, spec.nbits, derive_seed(spec.seed, "col")) {
  spec_.validate();
}

std::string ImageEncoder::patch_token_id(const std::vector<uint8_t>& bits) {
  static const char* hex = "0123456789abcdef";
  std::string id((bits.size() + 3) / 4, '0');
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) {
      size_t nibble = i / 4;
      id[nibble] = hex[(id[nibble] <= '9' ? id[nibble] - '0' : id[nibble] - 'a' + 10) |
                       (1u << (i % 4))];
    }
  return id;
}

Hypervector ImageEncoder::encode(const Image& img, bool admit_new_tokens) {
  if (img.height == 0 || img.width == 0 || img.pixels.size() != size_t(img.height) * img.width)
    throw DataError("image encoder: malformed image buffer");
  if (spec_.patch_height > img.height || spec_.patch_width > img.width)
    throw ConfigError("image encoder: patch larger than image");

  std::vector<uint8_t> bits(size_t(spec_.patch_height) * spec_.patch_width);
  Hypervector out(spec_.hv_size);
  for (uint32_t r = 0; r + spec_.patch_height <= img.height; r += spec_.stride) {
    for (uint32_t c = 0; c + spec_.patch_width <= img.width; c += spec_.stride) {
      size_t k = 0;
      for (uint32_t pr = 0; pr < spec_.patch_height; ++pr)
        for (uint32_t pc = 0; pc < spec_.patch_width; ++pc)
          bits[k++] = img.at(r + pr, c + pc) > spec_.binarize_threshold ? 1 : 0;

      // Content tokens are addressed by their bit pattern, so materializing
      // one during evaluation reproduces exactly the HV training would have
      // assigned. Row/column indices, by contrast, fix the geometry the model
      // was trained on.
      out.or_in(hv_from(spec_.hv_size, patch_book_.get_or_create(patch_token_id(bits))));
      std::string row_id = std::to_string(r);
      std::string col_id = std::to_string(c);
      if (!admit_new_tokens) {
        if (!row_book_.contains(row_id))
          throw DataError("image encoder: unknown row index " + row_id);
        if (!col_book_.contains(col_id))
          throw DataError("image encoder: unknown column index " + col_id);
      }
      out.or_in(bind_role(hv_from(spec_.hv_size, row_book_.get_or_create(row_id)), kRowRole));
      out.or_in(bind_role(hv_from(spec_.hv_size, col_book_.get_or_create(col_id)), kColRole));
    }
  }
  return out;
}

std::vector<RoleView> ImageEncoder::roles() const {
  return {{"patch", kPatchRole, &patch_book_},
          {"row", kRowRole, &row_book_},
          {"col", kColRole, &col_book_}};
}

nlohmann::ordered_json ImageEncoder::to_json() const {
  return nlohmann::ordered_json{{"kind", "image"},
                                {"hv_size", spec_.hv_size},
                                {"nbits", spec_.nbits},
                                {"patch_height", spec_.patch_height},
                                {"patch_width", spec_.patch_width},
                                {"stride", spec_.stride},
                                {"binarize_threshold", spec_.binarize_threshold},
                                {"seed", spec_.seed},
                                {"patch_codebook", patch_book_.to_json()},
                                {"row_codebook", row_book_.to_json()},
                                {"col_codebook", col_book_.to_json()}};
}

ImageEncoder ImageEncoder::from_json(const nlohmann::json& j) {
  ImageEncoderSpec spec;
  spec.hv_size = j.at("hv_size").get<uint32_t>();
  spec.nbits = j.at("nbits").get<uint32_t>();
  spec.patch_height = j.at("patch_height").get<uint32_t>();
  spec.patch_width = j.at("patch_width").get<uint32_t>();
  spec.stride = j.at("stride").get<uint32_t>();
  spec.binarize_threshold = j.at("binarize_threshold").get<uint32_t>();
  spec.seed = j.at("seed").get<uint64_t>();
  ImageEncoder enc(spec);
  enc.patch_book_ = TokenCodebook::from_json(j.at("patch_codebook"));
  enc.row_book_ = TokenCodebook::from_json(j.at("row_codebook"));
  enc.col_book_ = TokenCodebook::from_json(j.at("col_codebook"));
  return enc;
}

void TextEncoderSpec::validate() const { check_hv_params(hv_size, nbits, "text encoder"); }

TextEncoder::TextEncoder(const TextEncoderSpec& spec)
    : spec_(spec), vocab_(spec.hv_size, spec.nbits, derive_seed(spec.seed, "vocab")) {
  spec_.validate();
}

std::vector<std::string> TextEncoder::tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : text) {
    // ASCII letters/digits continue a token (lowercased); bytes >= 0x80 are
    // kept verbatim so multi-byte characters survive; everything else —
    // punctuation and whitespace — separates.
    if (std::isalnum(ch)) {
      cur.push_back(char(std::tolower(ch)));
    } else if (ch >= 0x80) {
      cur.push_back(char(ch));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Hypervector TextEncoder::encode(const std::string& text, bool admit_new_tokens) {
  auto tokens = tokenize(text);
  Hypervector out(spec_.hv_size);
  if (tokens.empty()) {
    std::cerr << "warning: text sample produced no tokens; encoding as zero vector\n";
    return out;
  }
  for (const auto& tok : tokens) {
    if (admit_new_tokens) {
      out.or_in(hv_from(spec_.hv_size, vocab_.get_or_create(tok)));
    } else if (const auto* pos = vocab_.find(tok)) {
      out.or_in(hv_from(spec_.hv_size, *pos));
    }
    // Out-of-vocabulary tokens at evaluation time are skipped.
  }
  return out;
}

std::vector<RoleView> TextEncoder::roles() const { return {{"token", kPatchRole, &vocab_}}; }

nlohmann::ordered_json TextEncoder::to_json() const {
  return nlohmann::ordered_json{{"kind", "text"},
                                {"hv_size", spec_.hv_size},
                                {"nbits", spec_.nbits},
                                {"seed", spec_.seed},
                                {"vocabulary", vocab_.to_json()}};
}

TextEncoder TextEncoder::from_json(const nlohmann::json& j) {
  TextEncoderSpec spec;
  spec.hv_size = j.at("hv_size").get<uint32_t>();
  spec.nbits = j.at("nbits").get<uint32_t>();
  spec.seed = j.at("seed").get<uint64_t>();
  TextEncoder enc(spec);
  enc.vocab_ = TokenCodebook::from_json(j.at("vocabulary"));
  return enc;
}

void FingerprintEncoderSpec::validate() const {
  check_hv_params(hv_size, nbits, "fingerprint encoder");
  if (fingerprint_length == 0)
    throw ConfigError("fingerprint encoder: fingerprint_length must be positive");
}

FingerprintEncoder::FingerprintEncoder(const FingerprintEncoderSpec& spec)
    : spec_(spec), book_(spec.hv_size, spec.nbits, derive_seed(spec.seed, "fingerprint")) {
  spec_.validate();
  // One token per bit position, eagerly, so the codebook always has exactly
  // fingerprint_length entries.
  for (uint32_t p = 0; p < spec_.fingerprint_length; ++p) book_.new_token(std::to_string(p));
}

Hypervector FingerprintEncoder::encode(const std::vector<uint32_t>& positions) const {
  Hypervector out(spec_.hv_size);
  for (uint32_t p : positions) {
    if (p >= spec_.fingerprint_length)
      throw DataError("fingerprint encoder: position " + std::to_string(p) +
                      " out of range for length " + std::to_string(spec_.fingerprint_length));
    out.or_in(hv_from(spec_.hv_size, book_.positions_of(std::to_string(p))));
  }
  return out;
}

std::vector<RoleView> FingerprintEncoder::roles() const {
  return {{"position", kPatchRole, &book_}};
}

nlohmann::ordered_json FingerprintEncoder::to_json() const {
  return nlohmann::ordered_json{{"kind", "fingerprint"},
                                {"hv_size", spec_.hv_size},
                                {"nbits", spec_.nbits},
                                {"fingerprint_length", spec_.fingerprint_length},
                                {"seed", spec_.seed}};
}

FingerprintEncoder FingerprintEncoder::from_json(const nlohmann::json& j) {
  FingerprintEncoderSpec spec;
  spec.hv_size = j.at("hv_size").get<uint32_t>();
  spec.nbits = j.at("nbits").get<uint32_t>();
  spec.fingerprint_length = j.at("fingerprint_length").get<uint32_t>();
  spec.seed = j.at("seed").get<uint64_t>();
  return FingerprintEncoder(spec);
}

Hypervector encode_vanilla(const std::vector<uint8_t>& bits) {
  if (bits.empty()) throw ConfigError("encode_vanilla: empty feature vector");
  Hypervector out(uint32_t(bits.size()));
  for (uint32_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.set(i);
  return out;
}

std::string encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kImage: return "image";
    case EncoderKind::kText: return "text";
    case EncoderKind::kFingerprint: return "fingerprint";
    case EncoderKind::kVanilla: return "vanilla";
  }
  throw ConfigError("unknown encoder kind");
}

EncoderKind encoder_kind_from_name(const std::string& name) {
  if (name == "image") return EncoderKind::kImage;
  if (name == "text") return EncoderKind::kText;
  if (name == "fingerprint") return EncoderKind::kFingerprint;
  if (name == "vanilla") return EncoderKind::kVanilla;
  throw ConfigError("unknown encoder kind: " + name);
}

EncoderKind SampleEncoder::kind() const {
  switch (impl_.index()) {
    case 1: return EncoderKind::kImage;
    case 2: return EncoderKind::kText;
    case 3: return EncoderKind::kFingerprint;
    default: return EncoderKind::kVanilla;
  }
}

ImageEncoder& SampleEncoder::image() {
  if (auto* enc = std::get_if<ImageEncoder>(&impl_)) return *enc;
  throw ConfigError("encoder is not an image encoder");
}
TextEncoder& SampleEncoder::text() {
  if (auto* enc = std::get_if<TextEncoder>(&impl_)) return *enc;
  throw ConfigError("encoder is not a text encoder");
}
FingerprintEncoder& SampleEncoder::fingerprint() {
  if (auto* enc = std::get_if<FingerprintEncoder>(&impl_)) return *enc;
  throw ConfigError("encoder is not a fingerprint encoder");
}
const ImageEncoder& SampleEncoder::image() const {
  return const_cast<SampleEncoder*>(this)->image();
}
const TextEncoder& SampleEncoder::text() const { return const_cast<SampleEncoder*>(this)->text(); }
const FingerprintEncoder& SampleEncoder::fingerprint() const {
  return const_cast<SampleEncoder*>(this)->fingerprint();
}

std::vector<RoleView> SampleEncoder::roles() const {
  switch (kind()) {
    case EncoderKind::kImage: return image().roles();
    case EncoderKind::kText: return text().roles();
    case EncoderKind::kFingerprint: return fingerprint().roles();
    case EncoderKind::kVanilla: return {};
  }
  return {};
}

nlohmann::ordered_json SampleEncoder::to_json() const {
  switch (kind()) {
    case EncoderKind::kImage: return image().to_json();
    case EncoderKind::kText: return text().to_json();
    case EncoderKind::kFingerprint: return fingerprint().to_json();
    case EncoderKind::kVanilla: return nlohmann::ordered_json{{"kind", "vanilla"}};
  }
  throw ConfigError("unknown encoder kind");
}

SampleEncoder SampleEncoder::from_json(const nlohmann::json& j) {
  switch (encoder_kind_from_name(j.at("kind").get<std::string>())) {
    case EncoderKind::kImage: return SampleEncoder(ImageEncoder::from_json(j));
    case EncoderKind::kText: return SampleEncoder(TextEncoder::from_json(j));
    case EncoderKind::kFingerprint: return SampleEncoder(FingerprintEncoder::from_json(j));
    case EncoderKind::kVanilla: return SampleEncoder();
  }
  throw ConfigError("unknown encoder kind");
}

}  // namespace hvtm
