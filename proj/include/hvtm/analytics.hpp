#pragma once

#include <cstdint>
#include <string>

namespace hvtm {

// Exact binomial coefficient C(d, s) as a decimal string. The count of
// distinct sparse tokens is exact, so no approximation is returned even
// though only an approximation is usually quoted.
std::string capacity(uint32_t d, uint32_t s);

// Likelihood of at least one projection overlap among t tokens:
//   L = 1 - (1 - 1/d^p)^t
// Evaluated through log1p/expm1 so that 1/d^p far below one ulp of 1.0
// still yields a meaningful result instead of 0.
double overlap_likelihood(uint32_t d, uint32_t p, uint64_t t);

}  // namespace hvtm
