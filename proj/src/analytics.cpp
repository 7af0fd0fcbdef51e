#include "hvtm/analytics.hpp"

#include <gmp.h>

#include <cmath>
#include <memory>

#include "hvtm/errors.hpp"

namespace hvtm {

std::string capacity(uint32_t d, uint32_t s) {
  if (s > d)
    throw ConfigError("capacity: S=" + std::to_string(s) + " exceeds D=" + std::to_string(d));
  mpz_t c;
  mpz_init(c);
  mpz_bin_uiui(c, d, s);
  std::unique_ptr<char, decltype(&free)> str(mpz_get_str(nullptr, 10, c), &free);
  std::string out(str.get());
  mpz_clear(c);
  return out;
}

double overlap_likelihood(uint32_t d, uint32_t p, uint64_t t) {
  if (d < 1) throw ConfigError("overlap_likelihood: D must be >= 1");
  if (p < 1) throw ConfigError("overlap_likelihood: P must be >= 1");
  if (t == 0) return 0.0;
  if (d == 1) return 1.0;  // hit probability is exactly 1
  double hit = std::pow(static_cast<double>(d), -static_cast<double>(p));
  return -std::expm1(static_cast<double>(t) * std::log1p(-hit));
}

}  // namespace hvtm
