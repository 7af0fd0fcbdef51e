#include <string>
#include <vector>

#include "doctest.h"
#include "hvtm/encoders.hpp"
#include "hvtm/errors.hpp"
#include "hvtm/hypervector.hpp"

using hvtm::ConfigError;
using hvtm::DataError;
using hvtm::encode_vanilla;
using hvtm::FingerprintEncoder;
using hvtm::FingerprintEncoderSpec;
using hvtm::Hypervector;
using hvtm::Image;
using hvtm::ImageEncoder;
using hvtm::ImageEncoderSpec;
using hvtm::overlap;
using hvtm::rotate;
using hvtm::SampleEncoder;
using hvtm::TextEncoder;
using hvtm::TextEncoderSpec;

namespace {

ImageEncoderSpec tiny_image_spec() {
  ImageEncoderSpec spec;
  spec.hv_size = 2048;
  spec.nbits = 4;
  spec.patch_height = 1;
  spec.patch_width = 1;
  spec.stride = 1;
  spec.binarize_threshold = 75;
  spec.seed = 42;
  return spec;
}

Image make_image(uint32_t h, uint32_t w, std::vector<uint8_t> px) {
  Image img;
  img.height = h;
  img.width = w;
  img.pixels = std::move(px);
  return img;
}

}  // namespace

TEST_SUITE("encoders") {
  TEST_CASE("patch token ids pack bits into hex nibbles LSB-first") {
    CHECK(ImageEncoder::patch_token_id({1, 0, 0, 1}) == "9");
    CHECK(ImageEncoder::patch_token_id({0, 0, 0, 0}) == "0");
    CHECK(ImageEncoder::patch_token_id({1, 1, 1, 1}) == "f");
    CHECK(ImageEncoder::patch_token_id({1}) == "1");
    CHECK(ImageEncoder::patch_token_id({0, 0, 0, 0, 1}) == "01");  // bit 4 lands in nibble 1
  }

  TEST_CASE("single 1x1 patch: content OR rotated row OR rotated column") {
    ImageEncoder enc(tiny_image_spec());
    auto hv = enc.encode(make_image(1, 1, {255}), true);

    auto roles = enc.roles();
    REQUIRE(roles.size() == 3);
    CHECK(roles[0].name == "patch");
    CHECK(roles[0].shift == 0);
    CHECK(roles[1].name == "row");
    CHECK(roles[1].shift == 1);
    CHECK(roles[2].name == "col");
    CHECK(roles[2].shift == 2);

    auto expected = roles[0].codebook->token_hv("1");
    expected.or_in(rotate(roles[1].codebook->token_hv("0"), 1));
    expected.or_in(rotate(roles[2].codebook->token_hv("0"), 2));
    CHECK(hv == expected);
    CHECK(hv.popcount() <= 3 * 4);
  }

  TEST_CASE("all-zero image bundles the single blank content token with every row and column") {
    ImageEncoder enc(tiny_image_spec());
    auto hv = enc.encode(make_image(2, 2, {0, 0, 0, 0}), true);

    auto roles = enc.roles();
    auto expected = roles[0].codebook->token_hv("0");
    for (const char* idx : {"0", "1"}) {
      expected.or_in(rotate(roles[1].codebook->token_hv(idx), 1));
      expected.or_in(rotate(roles[2].codebook->token_hv(idx), 2));
    }
    CHECK(hv == expected);
    CHECK(hv.popcount() <= 5 * 4);
    CHECK(roles[0].codebook->token_count() == 1);  // one content pattern, shared by all patches
  }

  TEST_CASE("same patch content at different positions yields distinct per-patch vectors") {
    ImageEncoder enc(tiny_image_spec());
    enc.encode(make_image(3, 3, std::vector<uint8_t>(9, 255)), true);  // admit rows/cols 0..2

    auto roles = enc.roles();
    auto at = [&](const char* row, const char* col) {
      auto v = roles[0].codebook->token_hv("1");
      v.or_in(rotate(roles[1].codebook->token_hv(row), 1));
      v.or_in(rotate(roles[2].codebook->token_hv(col), 2));
      return v;
    };
    auto a = at("0", "1");
    auto b = at("2", "0");
    CHECK(a != b);
    // The shared content token guarantees at least nbits of overlap; position
    // tokens keep the rest apart (only chance collisions may add to it).
    auto shared = overlap(a, b);
    CHECK(shared >= 4);
    CHECK(shared < a.popcount());
  }

  TEST_CASE("unseen patch content during evaluation is cached, not an error") {
    auto spec = tiny_image_spec();
    spec.patch_height = 2;
    spec.patch_width = 2;
    ImageEncoder enc(spec);
    enc.encode(make_image(2, 2, {0, 0, 0, 0}), true);
    // New content pattern, same geometry: token vectors depend only on
    // (seed, id), so late materialization is pure caching.
    CHECK_NOTHROW(enc.encode(make_image(2, 2, {255, 255, 255, 255}), false));
  }

  TEST_CASE("unknown row or column index in evaluation mode is a data error") {
    ImageEncoder enc(tiny_image_spec());
    enc.encode(make_image(2, 2, {0, 0, 0, 0}), true);  // rows/cols 0..1 admitted
    CHECK_THROWS_AS(enc.encode(make_image(3, 2, {0, 0, 0, 0, 0, 0}), false), DataError);
    CHECK_THROWS_WITH(enc.encode(make_image(3, 2, {0, 0, 0, 0, 0, 0}), false),
                      doctest::Contains("unknown row index"));
    CHECK_THROWS_WITH(enc.encode(make_image(2, 3, {0, 0, 0, 0, 0, 0}), false),
                      doctest::Contains("unknown column index"));
  }

  TEST_CASE("image shape validation") {
    ImageEncoder enc(tiny_image_spec());
    CHECK_THROWS_AS(enc.encode(make_image(2, 2, {0, 0, 0}), true), DataError);  // short buffer

    auto spec = tiny_image_spec();
    spec.patch_height = 4;
    spec.patch_width = 4;
    ImageEncoder big(spec);
    CHECK_THROWS_AS(big.encode(make_image(2, 2, {0, 0, 0, 0}), true), ConfigError);
    CHECK_THROWS_WITH(big.encode(make_image(2, 2, {0, 0, 0, 0}), true),
                      doctest::Contains("patch larger than image"));
  }

  TEST_CASE("binarize threshold is strict greater-than") {
    ImageEncoder enc(tiny_image_spec());  // threshold 75
    auto at_threshold = enc.encode(make_image(1, 1, {75}), true);
    auto above = enc.encode(make_image(1, 1, {76}), true);
    auto zero = enc.encode(make_image(1, 1, {0}), true);
    CHECK(at_threshold == zero);
    CHECK(above != zero);
  }

  TEST_CASE("image encoding is deterministic and survives JSON round trip") {
    auto spec = tiny_image_spec();
    spec.patch_height = 2;
    spec.patch_width = 2;
    ImageEncoder a(spec), b(spec);
    Image img = make_image(3, 3, {0, 200, 0, 200, 0, 200, 0, 200, 0});
    CHECK(a.encode(img, true) == b.encode(img, true));

    auto restored = ImageEncoder::from_json(a.to_json());
    CHECK(restored.encode(img, false) == a.encode(img, false));
    CHECK(restored.to_json() == a.to_json());
  }

  TEST_CASE("text tokenizer lowercases and strips punctuation") {
    CHECK(TextEncoder::tokenize("Hello, World! HELLO") ==
          std::vector<std::string>{"hello", "world", "hello"});
    CHECK(TextEncoder::tokenize("it's a2b  c") == std::vector<std::string>{"it", "s", "a2b", "c"});
    CHECK(TextEncoder::tokenize("...") == std::vector<std::string>{});
  }

  TEST_CASE("text encoding is an order-insensitive bag with OR idempotence") {
    TextEncoderSpec spec;
    spec.hv_size = 2048;
    spec.nbits = 4;
    spec.seed = 7;
    TextEncoder enc(spec);
    auto ab = enc.encode("a b", true);
    auto ba = enc.encode("b a", true);
    CHECK(ab == ba);

    auto a = enc.encode("a", true);
    auto aaa = enc.encode("a a a", true);
    CHECK(a == aaa);

    auto manual = enc.vocabulary().token_hv("a");
    manual.or_in(enc.vocabulary().token_hv("b"));
    CHECK(ab == manual);
  }

  TEST_CASE("text evaluation skips out-of-vocabulary tokens") {
    TextEncoderSpec spec;
    spec.hv_size = 512;
    spec.nbits = 4;
    TextEncoder enc(spec);
    enc.encode("known words", true);
    auto mixed = enc.encode("known unknown", false);
    CHECK(mixed == enc.encode("known", false));
    CHECK(enc.vocabulary().contains("known"));
    CHECK_FALSE(enc.vocabulary().contains("unknown"));

    auto all_oov = enc.encode("totally novel", false);
    CHECK(all_oov.popcount() == 0);  // zero vector, by policy

    auto empty = enc.encode("!!!", true);
    CHECK(empty.popcount() == 0);
  }

  TEST_CASE("fingerprint encoder bundles position tokens") {
    FingerprintEncoderSpec spec;
    spec.hv_size = 2048;
    spec.nbits = 4;
    spec.fingerprint_length = 128;
    FingerprintEncoder enc(spec);
    CHECK(enc.position_codebook().token_count() == 128);  // eager codebook

    CHECK(enc.encode({}).popcount() == 0);
    CHECK(enc.encode({5}) == enc.position_codebook().token_hv("5"));

    auto two = enc.position_codebook().token_hv("5");
    two.or_in(enc.position_codebook().token_hv("100"));
    CHECK(enc.encode({5, 100}) == two);
    CHECK(enc.encode({100, 5}) == two);  // order-insensitive
    CHECK(enc.encode({5, 100}).popcount() <= 2 * 4);

    CHECK_THROWS_AS(enc.encode({128}), DataError);
    CHECK_THROWS_WITH(enc.encode({128}), doctest::Contains("out of range"));
  }

  TEST_CASE("vanilla encoding is the identity wrapping") {
    auto hv = encode_vanilla({1, 0, 1});
    CHECK(hv.size() == 3);
    CHECK(hv.positions() == std::vector<uint32_t>{0, 2});
    CHECK_THROWS_AS(encode_vanilla({}), ConfigError);
  }

  TEST_CASE("sample encoder round trips each kind through JSON") {
    SampleEncoder vanilla;
    CHECK(vanilla.kind() == hvtm::EncoderKind::kVanilla);
    auto vjson = vanilla.to_json();
    CHECK(SampleEncoder::from_json(vjson).kind() == hvtm::EncoderKind::kVanilla);

    auto spec = tiny_image_spec();
    ImageEncoder img(spec);
    img.encode(make_image(1, 1, {255}), true);
    SampleEncoder simg(std::move(img));
    CHECK(simg.kind() == hvtm::EncoderKind::kImage);
    auto back = SampleEncoder::from_json(simg.to_json());
    CHECK(back.kind() == hvtm::EncoderKind::kImage);
    CHECK(back.image().encode(make_image(1, 1, {255}), false) ==
          simg.image().encode(make_image(1, 1, {255}), false));

    TextEncoderSpec tspec;
    TextEncoder txt(tspec);
    txt.encode("hello", true);
    SampleEncoder stxt(std::move(txt));
    auto tback = SampleEncoder::from_json(stxt.to_json());
    CHECK(tback.kind() == hvtm::EncoderKind::kText);
    CHECK(tback.text().vocabulary().contains("hello"));

    FingerprintEncoderSpec fspec;
    fspec.fingerprint_length = 16;
    SampleEncoder sfp{FingerprintEncoder(fspec)};
    auto fback = SampleEncoder::from_json(sfp.to_json());
    CHECK(fback.kind() == hvtm::EncoderKind::kFingerprint);
    CHECK(fback.fingerprint().encode({3}) == sfp.fingerprint().encode({3}));
  }

  TEST_CASE("encoder kind names round trip") {
    for (auto kind : {hvtm::EncoderKind::kImage, hvtm::EncoderKind::kText,
                      hvtm::EncoderKind::kFingerprint, hvtm::EncoderKind::kVanilla}) {
      CHECK(hvtm::encoder_kind_from_name(hvtm::encoder_kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(hvtm::encoder_kind_from_name("nonsense"), ConfigError);
  }
}
