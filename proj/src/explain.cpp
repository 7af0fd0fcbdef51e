#include "hvtm/explain.hpp"

#include <algorithm>
#include <cstdio>

#include "hvtm/errors.hpp"

namespace hvtm {

std::vector<ClauseReport> export_clauses(const TsetlinMachine& tm) {
  std::vector<ClauseReport> reports;
  for (uint32_t cls = 0; cls < tm.num_banks(); ++cls) {
    const ClauseBank& bank = tm.bank(cls);
    uint32_t d = bank.num_features();
    for (uint32_t j = 0; j < bank.num_clauses(); ++j) {
      ClauseReport r;
      r.class_id = cls;
      r.clause_index = j;
      r.polarity = bank.polarity(j);
      for (uint32_t lit : bank.included_literals(j)) {
        if (lit < d)
          r.include_pos.push_back(lit);
        else
          r.include_neg.push_back(lit - d);
      }
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

namespace {

struct ShiftedToken {
  const std::string* id;
  const std::string* role;
  Hypervector hv;
};

void match_side(const Hypervector& side_hv, bool against, uint32_t threshold, uint32_t nbits,
                const std::vector<ShiftedToken>& tokens, std::vector<ClauseMatch>& out) {
  if (side_hv.popcount() == 0) return;
  for (const auto& tok : tokens) {
    uint32_t ov = overlap(side_hv, tok.hv);
    if (ov >= threshold)
      out.push_back({*tok.id, *tok.role, against, ov, double(ov) / nbits});
  }
}

}  // namespace

void decode_clauses(std::span<ClauseReport> reports, std::span<const RoleView> roles,
                    uint32_t d, uint32_t nbits) {
  if (nbits == 0) throw ConfigError("decode_clauses: nbits must be positive");
  for (const auto& role : roles) {
    if (role.codebook == nullptr)
      throw ConfigError("decode_clauses: missing codebook for role '" + role.name + "'");
    if (role.codebook->size() != d)
      throw ConfigError("decode_clauses: codebook size disagrees with feature width for role '" +
                        role.name + "'");
  }

  // Shifted token HVs are shared across all clauses; materialize them once.
  std::vector<ShiftedToken> tokens;
  std::vector<std::string> role_names(roles.size());
  for (size_t i = 0; i < roles.size(); ++i) {
    role_names[i] = roles[i].name;
    for (const auto& id : roles[i].codebook->ids()) {
      Hypervector hv = roles[i].codebook->token_hv(id);
      if (roles[i].shift != 0) hv = bind_role(hv, roles[i].shift);
      tokens.push_back({&id, &role_names[i], std::move(hv)});
    }
  }

  uint32_t threshold = (nbits + 1) / 2;  // ceil(nbits / 2)
  for (auto& report : reports) {
    report.matches.clear();
    Hypervector pos_hv = Hypervector::from_positions(d, report.include_pos);
    Hypervector neg_hv = Hypervector::from_positions(d, report.include_neg);
    match_side(pos_hv, /*against=*/false, threshold, nbits, tokens, report.matches);
    match_side(neg_hv, /*against=*/true, threshold, nbits, tokens, report.matches);
    std::stable_sort(report.matches.begin(), report.matches.end(),
                     [](const ClauseMatch& a, const ClauseMatch& b) {
                       if (a.overlap != b.overlap) return a.overlap > b.overlap;
                       if (a.against != b.against) return !a.against;
                       if (a.role != b.role) return a.role < b.role;
                       return a.token_id < b.token_id;
                     });
  }
}

void decode_clause(ClauseReport& report, std::span<const RoleView> roles, uint32_t d,
                   uint32_t nbits) {
  decode_clauses(std::span<ClauseReport>(&report, 1), roles, d, nbits);
}

NegatedLiteralStats negated_literal_fraction(const TsetlinMachine& tm) {
  NegatedLiteralStats stats;
  stats.per_class.resize(tm.num_banks(), 0.0);
  stats.class_includes.resize(tm.num_banks(), 0);
  stats.class_negated.resize(tm.num_banks(), 0);
  for (uint32_t cls = 0; cls < tm.num_banks(); ++cls) {
    const ClauseBank& bank = tm.bank(cls);
    uint32_t d = bank.num_features();
    uint64_t includes = 0, negated = 0;
    for (uint32_t j = 0; j < bank.num_clauses(); ++j)
      for (uint32_t lit : bank.included_literals(j)) {
        ++includes;
        if (lit >= d) ++negated;
      }
    stats.class_includes[cls] = includes;
    stats.class_negated[cls] = negated;
    stats.per_class[cls] = includes ? double(negated) / double(includes) : 0.0;
    stats.total_includes += includes;
    stats.total_negated += negated;
  }
  stats.zero_denominator = stats.total_includes == 0;
  stats.overall =
      stats.zero_denominator ? 0.0 : double(stats.total_negated) / double(stats.total_includes);
  return stats;
}

nlohmann::ordered_json clause_report_to_json(const ClauseReport& report) {
  nlohmann::ordered_json matches = nlohmann::ordered_json::array();
  for (const auto& m : report.matches)
    matches.push_back({{"token", m.token_id},
                       {"role", m.role},
                       {"against", m.against},
                       {"overlap", m.overlap},
                       {"score", m.score}});
  return nlohmann::ordered_json{{"class", report.class_id},
                                {"clause", report.clause_index},
                                {"polarity", report.polarity},
                                {"include_pos", report.include_pos},
                                {"include_neg", report.include_neg},
                                {"matches", matches}};
}

nlohmann::ordered_json negated_stats_to_json(const NegatedLiteralStats& stats) {
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (size_t c = 0; c < stats.per_class.size(); ++c)
    per_class.push_back({{"class", c},
                         {"includes", stats.class_includes[c]},
                         {"negated", stats.class_negated[c]},
                         {"fraction", stats.per_class[c]}});
  return nlohmann::ordered_json{{"per_class", per_class},
                                {"total_includes", stats.total_includes},
                                {"total_negated", stats.total_negated},
                                {"overall_fraction", stats.overall},
                                {"zero_denominator", stats.zero_denominator}};
}

std::string render_clause_text(const ClauseReport& report) {
  std::string out;
  out += "class " + std::to_string(report.class_id) + " clause " +
         std::to_string(report.clause_index) + (report.polarity > 0 ? " (for)" : " (against)") +
         "\n";
  out += "  includes: " + std::to_string(report.include_pos.size()) + " positive, " +
         std::to_string(report.include_neg.size()) + " negated\n";
  if (report.matches.empty()) {
    out += "  matches: none\n";
    return out;
  }
  for (const auto& m : report.matches) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", m.score);
    out += std::string("  ") + (m.against ? "against " : "for     ") + m.role + ":" + m.token_id +
           "  score " + buf + " (" + std::to_string(m.overlap) + " bits)\n";
  }
  return out;
}

}  // namespace hvtm
