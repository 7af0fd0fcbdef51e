#include "hvtm/tm.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <numeric>

namespace hvtm {

void TMConfig::validate() const {
  if (num_features == 0) throw ConfigError("num_features must be positive");
  if (clauses_per_class == 0 || clauses_per_class % 2 != 0)
    throw ConfigError("clauses_per_class must be a positive even number, got " +
                      std::to_string(clauses_per_class));
  if (threshold < 1) throw ConfigError("threshold must be >= 1");
  if (specificity < 1.0) throw ConfigError("specificity must be >= 1");
  if (states_per_action == 0 || states_per_action > 127)
    throw ConfigError("states_per_action must be in [1, 127] so a state fits one byte");
}

Metrics compute_metrics(std::span<const uint32_t> y_true, std::span<const uint32_t> y_pred,
                        uint32_t num_classes) {
  if (y_true.size() != y_pred.size()) throw ConfigError("metrics: label/prediction size mismatch");
  if (y_true.empty()) throw ConfigError("metrics: empty dataset");
  if (num_classes == 0) throw ConfigError("metrics: num_classes must be positive");

  std::vector<size_t> support(num_classes, 0), hits(num_classes, 0);
  size_t correct = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= num_classes) throw ConfigError("metrics: label out of range");
    ++support[y_true[i]];
    if (y_true[i] == y_pred[i]) {
      ++hits[y_true[i]];
      ++correct;
    }
  }

  Metrics m;
  m.n_samples = y_true.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n_samples);
  m.per_class_recall.resize(num_classes, 0.0);
  m.class_present.resize(num_classes, false);
  double recall_sum = 0.0;
  for (uint32_t c = 0; c < num_classes; ++c) {
    if (support[c] > 0) {
      m.class_present[c] = true;
      m.per_class_recall[c] = static_cast<double>(hits[c]) / static_cast<double>(support[c]);
      recall_sum += m.per_class_recall[c];
    } else {
      m.has_absent_class = true;  // recall_c stays 0 by convention
    }
  }
  m.balanced_accuracy = recall_sum / static_cast<double>(num_classes);
  return m;
}

std::vector<uint8_t> literals_of(const Hypervector& x) {
  return LiteralBlock::from(x).value;
}

void LiteralBlock::assign(const Hypervector& x) {
  d = x.size();
  auto src = x.words();
  pos.assign(src.begin(), src.end());
  neg.resize(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) neg[i] = ~pos[i];
  if (!neg.empty()) neg.back() &= x.tail_mask();
  value.resize(2 * static_cast<size_t>(d));
  for (uint32_t k = 0; k < d; ++k) {
    auto bit = static_cast<uint8_t>((pos[k >> 6] >> (k & 63)) & 1u);
    value[k] = bit;
    value[d + k] = static_cast<uint8_t>(1u - bit);
  }
}

LiteralBlock LiteralBlock::from(const Hypervector& x) {
  LiteralBlock b;
  b.assign(x);
  return b;
}

ClauseBank::ClauseBank(uint32_t num_features, uint32_t num_clauses, uint32_t states_per_action)
    : d_(num_features),
      n_clauses_(num_clauses),
      n_states_(states_per_action),
      words_(Hypervector::words_for(num_features)),
      states_(static_cast<size_t>(num_clauses) * 2 * num_features,
              static_cast<uint8_t>(states_per_action)),
      inc_pos_(static_cast<size_t>(num_clauses) * words_, 0),
      inc_neg_(static_cast<size_t>(num_clauses) * words_, 0),
      include_counts_(num_clauses, 0) {}

bool ClauseBank::clause_output(uint32_t clause, const LiteralBlock& lits, EvalMode mode) const {
  if (lits.d != d_) throw ConfigError("clause_output: literal block dimension mismatch");
  if (include_counts_[clause] == 0) return mode == EvalMode::kLearning;
  const uint64_t* ip = &inc_pos_[static_cast<size_t>(clause) * words_];
  const uint64_t* in = &inc_neg_[static_cast<size_t>(clause) * words_];
  for (uint32_t w = 0; w < words_; ++w) {
    if (ip[w] & ~lits.pos[w]) return false;  // an included literal is false
    if (in[w] & ~lits.neg[w]) return false;
  }
  return true;
}

int ClauseBank::raw_class_sum(const LiteralBlock& lits, EvalMode mode, uint8_t* outs) const {
  int sum = 0;
  for (uint32_t j = 0; j < n_clauses_; ++j) {
    bool out = clause_output(j, lits, mode);
    if (outs) outs[j] = out ? 1 : 0;
    if (out) sum += polarity(j);
  }
  return sum;
}

void ClauseBank::type_ii_feedback(uint32_t clause, const LiteralBlock& lits, bool clause_out) {
  if (!clause_out) return;
  const uint8_t* val = lits.value.data();
  const uint32_t two_d = 2 * d_;
  const uint8_t* st = &states_[state_index(clause, 0)];
  for (uint32_t k = 0; k < two_d; ++k) {
    // Excluded literal that is false while the clause fires: push toward
    // Include so the clause stops firing on this pattern.
    if (!val[k] && st[k] <= n_states_) bump_up(clause, k);
  }
}

uint8_t ClauseBank::state(uint32_t clause, uint32_t literal) const {
  return states_[state_index(clause, literal)];
}

bool ClauseBank::included(uint32_t clause, uint32_t literal) const {
  return state(clause, literal) > n_states_;
}

std::vector<uint32_t> ClauseBank::included_literals(uint32_t clause) const {
  std::vector<uint32_t> out;
  for (uint32_t k = 0; k < 2 * d_; ++k)
    if (included(clause, k)) out.push_back(k);
  return out;
}

std::span<const uint8_t> ClauseBank::clause_states(uint32_t clause) const {
  return std::span<const uint8_t>(states_).subspan(state_index(clause, 0), 2 * d_);
}

void ClauseBank::restore_states(std::span<const uint8_t> states) {
  if (states.size() != states_.size()) throw DataError("restore_states: wrong state count");
  for (uint8_t s : states)
    if (s < 1 || s > 2 * n_states_) throw DataError("restore_states: state out of [1, 2N]");
  states_.assign(states.begin(), states.end());
  rebuild_masks();
}

void ClauseBank::bump_up(uint32_t clause, uint32_t literal) {
  uint8_t& st = states_[state_index(clause, literal)];
  if (st >= 2 * n_states_) return;
  ++st;
  if (st == n_states_ + 1) {
    set_include_bit(clause, literal, true);
    ++include_counts_[clause];
  }
}

void ClauseBank::bump_down(uint32_t clause, uint32_t literal) {
  uint8_t& st = states_[state_index(clause, literal)];
  if (st <= 1) return;
  if (st == n_states_ + 1) {
    set_include_bit(clause, literal, false);
    --include_counts_[clause];
  }
  --st;
}

void ClauseBank::set_include_bit(uint32_t clause, uint32_t literal, bool on) {
  uint64_t* mask = literal < d_ ? &inc_pos_[static_cast<size_t>(clause) * words_]
                                : &inc_neg_[static_cast<size_t>(clause) * words_];
  uint32_t bit = literal < d_ ? literal : literal - d_;
  if (on)
    mask[bit >> 6] |= uint64_t(1) << (bit & 63);
  else
    mask[bit >> 6] &= ~(uint64_t(1) << (bit & 63));
}

void ClauseBank::rebuild_masks() {
  std::fill(inc_pos_.begin(), inc_pos_.end(), 0);
  std::fill(inc_neg_.begin(), inc_neg_.end(), 0);
  std::fill(include_counts_.begin(), include_counts_.end(), 0);
  for (uint32_t j = 0; j < n_clauses_; ++j)
    for (uint32_t k = 0; k < 2 * d_; ++k)
      if (included(j, k)) {
        set_include_bit(j, k, true);
        ++include_counts_[j];
      }
}

TsetlinMachine::TsetlinMachine(TMConfig cfg, uint32_t num_classes)
    : cfg_(cfg), binary_(num_classes == 1), scheduler_rng_(derive_seed(cfg.seed, "scheduler")) {
  cfg_.validate();
  if (num_classes == 0) throw ConfigError("num_classes must be >= 1");
  banks_.reserve(num_classes);
  bank_rngs_.reserve(num_classes);
  for (uint32_t c = 0; c < num_classes; ++c) {
    banks_.emplace_back(cfg_.num_features, cfg_.clauses_per_class, cfg_.states_per_action);
    bank_rngs_.emplace_back(derive_seed(cfg_.seed, "bank", c));
  }
}

int TsetlinMachine::clamp_sum(int v) const {
  return std::clamp(v, -cfg_.threshold, cfg_.threshold);
}

void TsetlinMachine::check_input(const Hypervector& x) const {
  if (x.size() != cfg_.num_features)
    throw ConfigError("input dimension " + std::to_string(x.size()) +
                      " does not match machine dimension " + std::to_string(cfg_.num_features));
}

int TsetlinMachine::raw_class_sum(uint32_t cls, const Hypervector& x, EvalMode mode) const {
  check_input(x);
  auto lits = LiteralBlock::from(x);
  return banks_.at(cls).raw_class_sum(lits, mode);
}

int TsetlinMachine::class_sum(uint32_t cls, const Hypervector& x, EvalMode mode) const {
  return clamp_sum(raw_class_sum(cls, x, mode));
}

bool TsetlinMachine::predict_binary(const Hypervector& x) const {
  if (!binary_) throw ConfigError("predict_binary requires a binary-configured machine");
  return class_sum(0, x) >= 0;  // unit step with u(0) = 1
}

uint32_t TsetlinMachine::predict(const Hypervector& x) const {
  if (binary_) return predict_binary(x) ? 1u : 0u;
  return predict_detail(x).predicted_class;
}

Prediction TsetlinMachine::predict_detail(const Hypervector& x) const {
  check_input(x);
  auto lits = LiteralBlock::from(x);
  Prediction p;
  p.class_sums.reserve(banks_.size());
  for (const auto& bank : banks_)
    p.class_sums.push_back(clamp_sum(bank.raw_class_sum(lits, EvalMode::kInference)));
  if (binary_) {
    p.predicted_class = p.class_sums[0] >= 0 ? 1u : 0u;
    p.margin = std::abs(p.class_sums[0]);
    return p;
  }
  uint32_t best = 0;
  for (uint32_t c = 1; c < p.class_sums.size(); ++c)
    if (p.class_sums[c] > p.class_sums[best]) best = c;  // ties keep the lowest id
  int runner_up = std::numeric_limits<int>::min();
  for (uint32_t c = 0; c < p.class_sums.size(); ++c)
    if (c != best) runner_up = std::max(runner_up, p.class_sums[c]);
  p.predicted_class = best;
  p.margin = p.class_sums.size() > 1 ? p.class_sums[best] - runner_up : p.class_sums[best];
  return p;
}

void TsetlinMachine::update_bank(uint32_t cls, const LiteralBlock& lits, bool is_target) {
  ClauseBank& bank = banks_[cls];
  Prng& rng = bank_rngs_[cls];
  std::vector<uint8_t> outs(bank.num_clauses());
  int v = clamp_sum(bank.raw_class_sum(lits, EvalMode::kLearning, outs.data()));
  double t = cfg_.threshold;
  double p_update = is_target ? (t - v) / (2 * t) : (t + v) / (2 * t);
  for (uint32_t j = 0; j < bank.num_clauses(); ++j) {
    if (!rng.bernoulli(p_update)) continue;
    bool positive = bank.polarity(j) > 0;
    if (positive == is_target)
      bank.type_i_feedback(j, lits, outs[j] != 0, cfg_.specificity, cfg_.boost_true_positive, rng);
    else
      bank.type_ii_feedback(j, lits, outs[j] != 0);
  }
}

void TsetlinMachine::fit_epoch(std::span<const Hypervector> xs, std::span<const uint32_t> ys) {
  if (xs.size() != ys.size()) throw ConfigError("fit_epoch: sample/label count mismatch");
  if (xs.empty()) {
    std::cerr << "warning: fit_epoch called with an empty dataset; nothing to do\n";
    return;
  }
  for (uint32_t y : ys)
    if (y >= label_space()) throw ConfigError("fit_epoch: label out of range");
  for (const auto& x : xs) check_input(x);

  std::vector<uint32_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0u);
  Prng shuffle_rng(derive_seed(cfg_.seed, "shuffle", epoch_));
  shuffle_rng.shuffle(std::span<uint32_t>(order));

  // Negative feedback targets are drawn from the classes actually present.
  std::vector<uint32_t> present;
  if (!binary_) {
    std::vector<bool> seen(num_banks(), false);
    for (uint32_t y : ys) seen[y] = true;
    for (uint32_t c = 0; c < num_banks(); ++c)
      if (seen[c]) present.push_back(c);
  }

  LiteralBlock lits;
  for (uint32_t idx : order) {
    lits.assign(xs[idx]);
    uint32_t y = ys[idx];
    if (binary_) {
      update_bank(0, lits, /*is_target=*/y == 1);
      continue;
    }
    update_bank(y, lits, /*is_target=*/true);
    uint32_t others = static_cast<uint32_t>(present.size()) - 1;  // y is always present
    if (others == 0) continue;
    uint32_t pick = scheduler_rng_.below(others);
    for (uint32_t c : present) {
      if (c == y) continue;
      if (pick == 0) {
        update_bank(c, lits, /*is_target=*/false);
        break;
      }
      --pick;
    }
  }
  ++epoch_;
}

Metrics TsetlinMachine::evaluate(std::span<const Hypervector> xs,
                                 std::span<const uint32_t> ys) const {
  if (xs.size() != ys.size()) throw ConfigError("evaluate: sample/label count mismatch");
  if (xs.empty()) throw ConfigError("evaluate: empty dataset");
  std::vector<uint32_t> preds(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) preds[i] = predict(xs[i]);
  return compute_metrics(ys, preds, label_space());
}

}  // namespace hvtm
