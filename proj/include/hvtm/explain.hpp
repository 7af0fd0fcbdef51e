#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hvtm/encoders.hpp"
#include "hvtm/tm.hpp"

#include "json.hpp"

namespace hvtm {

struct ClauseMatch {
  std::string token_id;
  std::string role;
  bool against = false;  // decoded from negated includes: the clause votes against this token
  uint32_t overlap = 0;
  double score = 0.0;  // overlap / NBits, in [0,1]
};

struct ClauseReport {
  uint32_t class_id = 0;
  uint32_t clause_index = 0;
  int polarity = +1;
  std::vector<uint32_t> include_pos;  // included positive literals, feature index < D
  std::vector<uint32_t> include_neg;  // included negated literals, reported as literal - D
  std::vector<ClauseMatch> matches;
};

// One report per clause per bank, undecoded (empty match lists).
std::vector<ClauseReport> export_clauses(const TsetlinMachine& tm);

// Fill in matches: overlap every role's tokens (rotated by the role shift)
// against the clause's positive-include HV and negated-include HV; keep
// tokens at overlap >= ceil(nbits/2), ranked by score descending.
void decode_clauses(std::span<ClauseReport> reports, std::span<const RoleView> roles,
                    uint32_t d, uint32_t nbits);
void decode_clause(ClauseReport& report, std::span<const RoleView> roles, uint32_t d,
                   uint32_t nbits);

struct NegatedLiteralStats {
  std::vector<double> per_class;          // 0.0 when the class has no includes
  std::vector<uint64_t> class_includes;   // include counts per class
  std::vector<uint64_t> class_negated;    // negated include counts per class
  double overall = 0.0;
  uint64_t total_includes = 0;
  uint64_t total_negated = 0;
  bool zero_denominator = false;  // no includes anywhere (empty model)
};

NegatedLiteralStats negated_literal_fraction(const TsetlinMachine& tm);

nlohmann::ordered_json clause_report_to_json(const ClauseReport& report);
nlohmann::ordered_json negated_stats_to_json(const NegatedLiteralStats& stats);

// Human-readable rendering, one block per clause.
std::string render_clause_text(const ClauseReport& report);

}  // namespace hvtm
