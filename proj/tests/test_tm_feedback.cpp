#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "hvtm/hypervector.hpp"
#include "hvtm/tm.hpp"

using hvtm::ClauseBank;
using hvtm::Hypervector;
using hvtm::LiteralBlock;

namespace {

constexpr uint32_t kN = 127;  // states per action; include iff state > kN

// Drop-in replacement for the production RNG's geometric_skip that realizes
// the skip by explicit per-index Bernoulli draws. Agreement between the two
// implementations is exactly what the frequency checks below establish.
struct SequentialBernoulliRng {
  std::mt19937_64 eng;
  explicit SequentialBernoulliRng(uint64_t seed) : eng(seed) {}

  uint32_t geometric_skip(double log1m_p, uint32_t cap) {
    if (!(log1m_p < 0.0)) return cap;
    const double p = -std::expm1(log1m_p);
    for (uint32_t skipped = 0; skipped < cap; ++skipped) {
      double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
      if (u < p) return skipped;
    }
    return cap;
  }
};

// One clause over D=2 (literals: x0, x1, ~x0, ~x1). Literal 0 is included
// (state kN+1); the rest sit on the exclude side at the boundary (state kN).
ClauseBank make_bank() {
  ClauseBank bank(2, 2, kN);
  return bank;
}

const std::vector<uint8_t> kStates{kN + 1, kN, kN, kN,   // clause 0
                                   kN, kN, kN, kN};      // clause 1 (untouched control)

LiteralBlock lits_of_bits(std::vector<uint32_t> set_bits) {
  Hypervector x(2);
  for (uint32_t b : set_bits) x.set(b);
  return LiteralBlock::from(x);
}

struct Counts {
  uint32_t up[4] = {0, 0, 0, 0};
  uint32_t down[4] = {0, 0, 0, 0};
  uint32_t trials = 0;
};

enum class Drive { kTypeIFired, kTypeINotFired, kTypeII };

Counts run_trials(Drive drive, double s, bool boost, uint32_t trials, uint64_t seed) {
  auto bank = make_bank();
  SequentialBernoulliRng rng(seed);
  // Input {0}: literal values [1,0,0,1] -> clause 0 (includes only x0) fires.
  // Input {1}: literal values [0,1,1,0] -> clause 0 does not fire.
  auto fired_lits = lits_of_bits({0});
  auto unfired_lits = lits_of_bits({1});

  Counts c;
  c.trials = trials;
  for (uint32_t t = 0; t < trials; ++t) {
    bank.restore_states(kStates);
    switch (drive) {
      case Drive::kTypeIFired:
        REQUIRE(bank.clause_output(0, fired_lits, hvtm::EvalMode::kLearning));
        bank.type_i_feedback(0, fired_lits, true, s, boost, rng);
        break;
      case Drive::kTypeINotFired:
        REQUIRE_FALSE(bank.clause_output(0, unfired_lits, hvtm::EvalMode::kLearning));
        bank.type_i_feedback(0, unfired_lits, false, s, boost, rng);
        break;
      case Drive::kTypeII:
        bank.type_ii_feedback(0, fired_lits, true);
        break;
    }
    for (uint32_t k = 0; k < 4; ++k) {
      uint8_t now = bank.state(0, k);
      if (now > kStates[k]) ++c.up[k];
      if (now < kStates[k]) ++c.down[k];
      // A single feedback application moves a state by at most one.
      CHECK(std::abs(int(now) - int(kStates[k])) <= 1);
    }
    // The other clause must never be touched.
    for (uint32_t k = 0; k < 4; ++k) CHECK(bank.state(1, k) == kN);
  }
  return c;
}

// Empirical frequency within three standard errors of p; exact when p is 0/1.
void check_freq(uint32_t hits, uint32_t trials, double p) {
  double freq = double(hits) / trials;
  CAPTURE(freq);
  CAPTURE(p);
  if (p == 0.0) {
    CHECK(hits == 0);
  } else if (p == 1.0) {
    CHECK(hits == trials);
  } else {
    double se = std::sqrt(p * (1.0 - p) / trials);
    CHECK(std::abs(freq - p) <= 3.0 * se);
  }
}

}  // namespace

TEST_SUITE("tm_feedback") {
  TEST_CASE("type I on a fired clause: true literals memorize, false literals forget") {
    const uint32_t trials = 20000;
    uint64_t seed = 1;
    for (double s : {1.0, 2.0, 5.0, 100.0}) {
      for (bool boost : {false, true}) {
        CAPTURE(s);
        CAPTURE(boost);
        auto c = run_trials(Drive::kTypeIFired, s, boost, trials, seed++);
        double p_mem = boost ? 1.0 : (s - 1.0) / s;
        double p_forget = 1.0 / s;
        // True literals (x0 included, ~x1 excluded) both step toward Include.
        check_freq(c.up[0], trials, p_mem);
        check_freq(c.up[3], trials, p_mem);
        CHECK(c.down[0] == 0);
        CHECK(c.down[3] == 0);
        // False literals (x1, ~x0) step toward Exclude with probability 1/s.
        check_freq(c.down[1], trials, p_forget);
        check_freq(c.down[2], trials, p_forget);
        CHECK(c.up[1] == 0);
        CHECK(c.up[2] == 0);
      }
    }
  }

  TEST_CASE("type I on a quiet clause: every automaton forgets with probability 1/s") {
    const uint32_t trials = 20000;
    uint64_t seed = 100;
    for (double s : {1.0, 2.0, 5.0, 100.0}) {
      for (bool boost : {false, true}) {  // boost must not matter here
        CAPTURE(s);
        CAPTURE(boost);
        auto c = run_trials(Drive::kTypeINotFired, s, boost, trials, seed++);
        for (uint32_t k = 0; k < 4; ++k) {
          check_freq(c.down[k], trials, 1.0 / s);
          CHECK(c.up[k] == 0);
        }
      }
    }
  }

  TEST_CASE("type II: excluded false literals are pushed toward Include, deterministically") {
    auto c = run_trials(Drive::kTypeII, 3.0, false, 1000, 7);
    // False literals x1 and ~x0 are excluded -> always bumped up.
    CHECK(c.up[1] == c.trials);
    CHECK(c.up[2] == c.trials);
    // True literals are untouched regardless of action.
    CHECK(c.up[0] == 0);
    CHECK(c.down[0] == 0);
    CHECK(c.up[3] == 0);
    CHECK(c.down[3] == 0);
  }

  TEST_CASE("type II is a no-op when the clause did not fire") {
    auto bank = make_bank();
    bank.restore_states(kStates);
    auto lits = lits_of_bits({1});
    bank.type_ii_feedback(0, lits, false);
    for (uint32_t k = 0; k < 4; ++k) CHECK(bank.state(0, k) == kStates[k]);
  }

  TEST_CASE("type II never moves an already-included literal") {
    // Include x1 (a false literal under input {0}): state kN+1.
    ClauseBank bank(2, 2, kN);
    std::vector<uint8_t> states{kN + 1, kN + 1, kN, kN, kN, kN, kN, kN};
    bank.restore_states(states);
    auto lits = lits_of_bits({0});
    // Includes are x0 (true) and x1 (false) -> the clause does not fire; a
    // fired output is forced here to isolate the include guard itself.
    bank.type_ii_feedback(0, lits, true);
    CHECK(bank.state(0, 0) == kN + 1);
    CHECK(bank.state(0, 1) == kN + 1);  // included stays put even though false
    CHECK(bank.state(0, 2) == kN + 1);  // excluded false literal moved up
    CHECK(bank.state(0, 3) == kN);      // true literal untouched
  }

  TEST_CASE("states saturate at the ends of the chain") {
    ClauseBank bank(2, 1, kN);
    std::vector<uint8_t> states{2 * kN, 1, 1, 2 * kN};
    bank.restore_states(states);
    auto lits = lits_of_bits({0});  // values [1,0,0,1]
    SequentialBernoulliRng rng(3);
    // Boost makes true-literal bump-up deterministic; s=1 makes false-literal
    // bump-down deterministic. Saturated states must not wrap.
    bank.type_i_feedback(0, lits, true, 1.0, true, rng);
    CHECK(bank.state(0, 0) == 2 * kN);  // stayed at top
    CHECK(bank.state(0, 1) == 1);       // stayed at bottom
    CHECK(bank.state(0, 2) == 1);
    CHECK(bank.state(0, 3) == 2 * kN);
  }

  TEST_CASE("include masks track state crossings") {
    ClauseBank bank(2, 1, kN);
    std::vector<uint8_t> states{kN, kN, kN, kN};
    bank.restore_states(states);
    CHECK(bank.include_count(0) == 0);
    auto lits = lits_of_bits({0});
    bank.type_ii_feedback(0, lits, true);  // bumps x1 and ~x0 across the boundary
    CHECK(bank.include_count(0) == 2);
    CHECK(bank.included(0, 1));
    CHECK(bank.included(0, 2));
    CHECK(bank.included_literals(0) == std::vector<uint32_t>{1, 2});
  }
}
