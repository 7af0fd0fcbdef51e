#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hvtm/errors.hpp"
#include "hvtm/hypervector.hpp"
#include "hvtm/rng.hpp"

namespace hvtm {

struct TMConfig {
  uint32_t num_features = 0;         // D; the literal pool has 2*D entries
  uint32_t clauses_per_class = 100;  // n, even: odd indices vote for, even against
  int threshold = 15;                // T, vote clamp and feedback scale
  double specificity = 3.0;          // s >= 1; s == 1 is the RbE regime
  uint32_t states_per_action = 127;  // N; states live in [1, 2N], one byte each
  bool boost_true_positive = false;
  uint64_t seed = 42;

  void validate() const;
};

enum class EvalMode { kInference, kLearning };

struct Metrics {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::vector<double> per_class_recall;
  std::vector<bool> class_present;  // false => recall forced to 0 by convention
  size_t n_samples = 0;
  bool has_absent_class = false;
};

// Accuracy and balanced accuracy (mean per-class recall over all classes;
// absent classes contribute recall 0 and are flagged).
Metrics compute_metrics(std::span<const uint32_t> y_true, std::span<const uint32_t> y_pred,
                        uint32_t num_classes);

struct Prediction {
  std::vector<int> class_sums;  // clamped to [-T, T]
  uint32_t predicted_class = 0;
  int margin = 0;  // top minus runner-up; |sum| for a binary machine
};

// First D entries are the input bits, last D their negations.
std::vector<uint8_t> literals_of(const Hypervector& x);

// Per-sample literal values in both byte and bit-packed form, shared by every
// bank while one sample is processed.
struct LiteralBlock {
  uint32_t d = 0;
  std::vector<uint64_t> pos;  // D bits: input
  std::vector<uint64_t> neg;  // D bits: complement
  std::vector<uint8_t> value; // 2*D bytes

  void assign(const Hypervector& x);
  static LiteralBlock from(const Hypervector& x);
};

/// One class's clauses: per clause 2*D automaton states plus bit-packed
/// include masks kept in sync with the states.
class ClauseBank {
 public:
  ClauseBank(uint32_t num_features, uint32_t num_clauses, uint32_t states_per_action);

  uint32_t num_features() const { return d_; }
  uint32_t num_clauses() const { return n_clauses_; }
  uint32_t states_per_action() const { return n_states_; }
  int polarity(uint32_t clause) const { return (clause & 1u) ? +1 : -1; }

  // An empty clause outputs 1 while learning and 0 at inference.
  bool clause_output(uint32_t clause, const LiteralBlock& lits, EvalMode mode) const;

  // Unclamped sum of positive minus negative clause outputs; outputs are
  // written to `outs` when non-null (size num_clauses).
  int raw_class_sum(const LiteralBlock& lits, EvalMode mode, uint8_t* outs = nullptr) const;

  template <class Rng>
  void type_i_feedback(uint32_t clause, const LiteralBlock& lits, bool clause_out, double s,
                       bool boost_true_positive, Rng& rng);
  void type_ii_feedback(uint32_t clause, const LiteralBlock& lits, bool clause_out);

  uint8_t state(uint32_t clause, uint32_t literal) const;
  bool included(uint32_t clause, uint32_t literal) const;
  uint32_t include_count(uint32_t clause) const { return include_counts_[clause]; }
  std::vector<uint32_t> included_literals(uint32_t clause) const;  // ascending

  std::span<const uint8_t> states() const { return states_; }
  std::span<const uint8_t> clause_states(uint32_t clause) const;
  // Overwrites all automaton states and rebuilds masks (deserialization).
  void restore_states(std::span<const uint8_t> states);

  bool operator==(const ClauseBank&) const = default;

 private:
  size_t state_index(uint32_t clause, uint32_t literal) const {
    return static_cast<size_t>(clause) * 2 * d_ + literal;
  }
  void bump_up(uint32_t clause, uint32_t literal);
  void bump_down(uint32_t clause, uint32_t literal);
  void set_include_bit(uint32_t clause, uint32_t literal, bool on);
  void rebuild_masks();

  uint32_t d_ = 0;
  uint32_t n_clauses_ = 0;
  uint32_t n_states_ = 0;  // N
  uint32_t words_ = 0;     // per include-mask side
  std::vector<uint8_t> states_;
  std::vector<uint64_t> inc_pos_;  // num_clauses x words_
  std::vector<uint64_t> inc_neg_;
  std::vector<uint32_t> include_counts_;
};

/// Tsetlin Machine over Boolean (hyper)vectors.
///
/// num_classes >= 2 uses one clause bank per class with argmax prediction.
/// num_classes == 1 is the binary machine: a single bank, labels in {0, 1},
/// prediction by the unit step u(v) with u(0) = 1.
class TsetlinMachine {
 public:
  TsetlinMachine(TMConfig cfg, uint32_t num_classes);

  const TMConfig& config() const { return cfg_; }
  uint32_t num_banks() const { return static_cast<uint32_t>(banks_.size()); }
  bool is_binary() const { return binary_; }
  // Distinct label values the machine accepts (2 for a binary machine).
  uint32_t label_space() const { return binary_ ? 2 : num_banks(); }
  uint64_t epochs_trained() const { return epoch_; }

  int class_sum(uint32_t cls, const Hypervector& x, EvalMode mode = EvalMode::kInference) const;
  int raw_class_sum(uint32_t cls, const Hypervector& x,
                    EvalMode mode = EvalMode::kInference) const;

  bool predict_binary(const Hypervector& x) const;
  uint32_t predict(const Hypervector& x) const;
  Prediction predict_detail(const Hypervector& x) const;

  // One pass over the dataset in a seed-derived shuffled order. The sampled
  // negative class is drawn from the classes present in `ys`.
  void fit_epoch(std::span<const Hypervector> xs, std::span<const uint32_t> ys);

  Metrics evaluate(std::span<const Hypervector> xs, std::span<const uint32_t> ys) const;

  ClauseBank& bank(uint32_t cls) { return banks_.at(cls); }
  const ClauseBank& bank(uint32_t cls) const { return banks_.at(cls); }

  // Deserialization hook; also restores the epoch counter so a reloaded
  // machine continues the exact shuffle stream.
  void set_epochs_trained(uint64_t epochs) { epoch_ = epochs; }

 private:
  int clamp_sum(int v) const;
  void update_bank(uint32_t cls, const LiteralBlock& lits, bool is_target);
  void check_input(const Hypervector& x) const;

  TMConfig cfg_;
  bool binary_ = false;
  std::vector<ClauseBank> banks_;
  std::vector<Prng> bank_rngs_;
  Prng scheduler_rng_;
  uint64_t epoch_ = 0;
};

template <class Rng>
void ClauseBank::type_i_feedback(uint32_t clause, const LiteralBlock& lits, bool clause_out,
                                 double s, bool boost_true_positive, Rng& rng) {
  const uint8_t* val = lits.value.data();
  const uint32_t two_d = 2 * d_;
  const double p_forget = 1.0 / s;
  const double log1m_forget = std::log1p(-p_forget);

  if (!clause_out) {
    // Include penalty / Exclude reward: every automaton forgets w.p. 1/s.
    if (s == 1.0) {
      for (uint32_t k = 0; k < two_d; ++k) bump_down(clause, k);
    } else {
      // Geometric jumps visit each index with independent probability 1/s
      // without drawing (or touching memory) for the skipped ones.
      for (uint32_t k = rng.geometric_skip(log1m_forget, two_d); k < two_d;
           k += 1 + rng.geometric_skip(log1m_forget, two_d - k - 1))
        bump_down(clause, k);
    }
    return;
  }

  // Fired clause: every included literal is true, so false literals are all
  // excluded. True literals memorize w.p. (s-1)/s (boost: always); false
  // literals' Exclude is rewarded w.p. 1/s.
  if (boost_true_positive) {
    for (uint32_t k = 0; k < two_d; ++k)
      if (val[k]) bump_up(clause, k);
  } else if (s > 1.0) {
    // Walk the true literals, skipping the Bernoulli((s-1)/s) failures via
    // geometric jumps over the failure stream (probability 1/s each).
    uint32_t run = rng.geometric_skip(log1m_forget, two_d);
    for (uint32_t k = 0; k < two_d; ++k) {
      if (!val[k]) continue;
      if (run > 0) {
        bump_up(clause, k);
        --run;
      } else {
        run = rng.geometric_skip(log1m_forget, two_d);
      }
    }
  }
  // (s == 1 without boost: memorize probability is 0, nothing to do.)

  if (s == 1.0) {
    for (uint32_t k = 0; k < two_d; ++k)
      if (!val[k]) bump_down(clause, k);
  } else {
    for (uint32_t k = rng.geometric_skip(log1m_forget, two_d); k < two_d;
         k += 1 + rng.geometric_skip(log1m_forget, two_d - k - 1)) {
      if (!val[k]) bump_down(clause, k);
    }
  }
}

}  // namespace hvtm
