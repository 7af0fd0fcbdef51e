#include <string>
#include <vector>

#include "doctest.h"
#include "hvtm/codebook.hpp"
#include "hvtm/encoders.hpp"
#include "hvtm/errors.hpp"
#include "hvtm/explain.hpp"
#include "hvtm/hypervector.hpp"
#include "hvtm/rng.hpp"
#include "hvtm/tm.hpp"

using hvtm::ClauseReport;
using hvtm::decode_clause;
using hvtm::decode_clauses;
using hvtm::export_clauses;
using hvtm::Hypervector;
using hvtm::negated_literal_fraction;
using hvtm::RoleView;
using hvtm::rotate;
using hvtm::TokenCodebook;
using hvtm::TMConfig;
using hvtm::TsetlinMachine;

namespace {

struct RoleFixture {
  TokenCodebook patch{2048, 4, 11};
  TokenCodebook row{2048, 4, 22};
  TokenCodebook col{2048, 4, 33};

  RoleFixture() {
    for (int i = 0; i < 50; ++i) {
      patch.get_or_create("p" + std::to_string(i));
      row.get_or_create("r" + std::to_string(i));
      col.get_or_create("c" + std::to_string(i));
    }
  }

  std::vector<RoleView> views() {
    return {{"patch", hvtm::kPatchRole, &patch},
            {"row", hvtm::kRowRole, &row},
            {"col", hvtm::kColRole, &col}};
  }
};

std::vector<uint32_t> shifted_positions(const TokenCodebook& book, const std::string& id,
                                        uint32_t shift) {
  return rotate(book.token_hv(id), shift).positions();
}

}  // namespace

TEST_SUITE("explain") {
  TEST_CASE("a planted include set decodes to its token with score 1.0 at rank 1") {
    RoleFixture fx;
    auto views = fx.views();

    struct Probe {
      const TokenCodebook* book;
      std::string id;
      uint32_t shift;
      std::string role;
    };
    Probe probes[] = {{&fx.patch, "p7", 0, "patch"},
                      {&fx.row, "r13", 1, "row"},
                      {&fx.col, "c42", 2, "col"}};
    for (const auto& probe : probes) {
      CAPTURE(probe.role);
      ClauseReport report;
      report.include_pos = shifted_positions(*probe.book, probe.id, probe.shift);
      decode_clause(report, views, 2048, 4);
      REQUIRE_FALSE(report.matches.empty());
      CHECK(report.matches[0].token_id == probe.id);
      CHECK(report.matches[0].role == probe.role);
      CHECK(report.matches[0].overlap == 4);
      CHECK(report.matches[0].score == 1.0);
      CHECK_FALSE(report.matches[0].against);
    }
  }

  TEST_CASE("negated includes decode as votes against the token") {
    RoleFixture fx;
    auto views = fx.views();
    ClauseReport report;
    report.include_neg = shifted_positions(fx.row, "r3", 1);
    decode_clause(report, views, 2048, 4);
    REQUIRE_FALSE(report.matches.empty());
    CHECK(report.matches[0].token_id == "r3");
    CHECK(report.matches[0].against);
    CHECK(report.matches[0].score == 1.0);
  }

  TEST_CASE("decode threshold is ceil(nbits/2): half overlap stays, less is dropped") {
    RoleFixture fx;
    auto views = fx.views();
    auto full = shifted_positions(fx.patch, "p0", 0);
    REQUIRE(full.size() == 4);

    ClauseReport half;
    half.include_pos = {full[0], full[1]};
    decode_clause(half, views, 2048, 4);
    bool found = false;
    for (const auto& m : half.matches) found = found || (m.token_id == "p0" && m.overlap == 2);
    CHECK(found);

    ClauseReport quarter;
    quarter.include_pos = {full[0]};
    decode_clause(quarter, views, 2048, 4);
    for (const auto& m : quarter.matches) CHECK(m.token_id != "p0");
  }

  TEST_CASE("pro matches outrank against matches at equal overlap") {
    RoleFixture fx;
    auto views = fx.views();
    ClauseReport report;
    report.include_pos = shifted_positions(fx.patch, "p1", 0);
    report.include_neg = shifted_positions(fx.patch, "p2", 0);
    decode_clause(report, views, 2048, 4);
    REQUIRE(report.matches.size() >= 2);
    CHECK(report.matches[0].token_id == "p1");
    CHECK_FALSE(report.matches[0].against);
    CHECK(report.matches[1].token_id == "p2");
    CHECK(report.matches[1].against);
  }

  TEST_CASE("empty include sets decode to no matches") {
    RoleFixture fx;
    auto views = fx.views();
    ClauseReport report;
    decode_clause(report, views, 2048, 4);
    CHECK(report.matches.empty());
  }

  TEST_CASE("decode validates roles and nbits") {
    RoleFixture fx;
    std::vector<RoleView> broken{{"patch", 0, nullptr}};
    ClauseReport report;
    CHECK_THROWS_AS(decode_clause(report, broken, 2048, 4), hvtm::ConfigError);
    auto views = fx.views();
    CHECK_THROWS_AS(decode_clause(report, views, 2048, 0), hvtm::ConfigError);
  }

  TEST_CASE("export_clauses walks every bank and clause; untrained clauses are empty") {
    TMConfig cfg;
    cfg.num_features = 16;
    cfg.clauses_per_class = 4;
    TsetlinMachine tm(cfg, 3);
    auto reports = export_clauses(tm);
    REQUIRE(reports.size() == 3 * 4);
    for (size_t i = 0; i < reports.size(); ++i) {
      CHECK(reports[i].class_id == i / 4);
      CHECK(reports[i].clause_index == i % 4);
      CHECK(reports[i].polarity == ((i % 4) % 2 == 1 ? +1 : -1));
      CHECK(reports[i].include_pos.empty());
      CHECK(reports[i].include_neg.empty());
      CHECK(reports[i].matches.empty());
    }
  }

  TEST_CASE("export_clauses splits positive and negated literals correctly") {
    TMConfig cfg;
    cfg.num_features = 4;
    cfg.clauses_per_class = 2;
    TsetlinMachine tm(cfg, 2);
    // Clause 0 of bank 0: include positive literal 1 and negated literal 3
    // (states above N=127 mean Include).
    std::vector<uint8_t> states(2 * 8, 100);
    states[1] = 200;      // literal 1: feature 1 asserted
    states[4 + 3] = 210;  // literal 7: feature 3 negated
    tm.bank(0).restore_states(states);
    auto reports = export_clauses(tm);
    CHECK(reports[0].include_pos == std::vector<uint32_t>{1});
    CHECK(reports[0].include_neg == std::vector<uint32_t>{3});  // reported as literal - D
  }

  TEST_CASE("negated literal stats aggregate per class and overall") {
    TMConfig cfg;
    cfg.num_features = 4;
    cfg.clauses_per_class = 2;
    TsetlinMachine tm(cfg, 2);
    std::vector<uint8_t> states(2 * 8, 100);
    states[0] = 200;      // clause 0: positive include
    states[4 + 2] = 200;  // clause 0: negated include
    states[8 + 1] = 200;  // clause 1: positive include
    tm.bank(0).restore_states(states);

    auto stats = negated_literal_fraction(tm);
    CHECK(stats.total_includes == 3);
    CHECK(stats.total_negated == 1);
    CHECK(stats.overall == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(stats.class_includes == std::vector<uint64_t>{3, 0});
    CHECK(stats.class_negated == std::vector<uint64_t>{1, 0});
    CHECK(stats.per_class[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(stats.per_class[1] == 0.0);  // no includes -> fraction reported as 0
    CHECK_FALSE(stats.zero_denominator);

    TsetlinMachine blank(cfg, 2);
    auto empty_stats = negated_literal_fraction(blank);
    CHECK(empty_stats.zero_denominator);
    CHECK(empty_stats.overall == 0.0);
  }

  TEST_CASE("JSON shapes for clause reports and negated stats") {
    RoleFixture fx;
    auto views = fx.views();
    ClauseReport report;
    report.class_id = 2;
    report.clause_index = 5;
    report.polarity = +1;
    report.include_pos = shifted_positions(fx.patch, "p4", 0);
    decode_clause(report, views, 2048, 4);
    auto j = hvtm::clause_report_to_json(report);
    CHECK(j["class"] == 2);
    CHECK(j["clause"] == 5);
    CHECK(j["polarity"] == 1);
    CHECK(j["include_pos"].size() == 4);
    CHECK(j["include_neg"].empty());
    REQUIRE_FALSE(j["matches"].empty());
    CHECK(j["matches"][0]["token"] == "p4");
    CHECK(j["matches"][0]["role"] == "patch");
    CHECK(j["matches"][0]["against"] == false);
    CHECK(j["matches"][0]["overlap"] == 4);
    CHECK(j["matches"][0]["score"] == 1.0);

    TMConfig cfg;
    cfg.num_features = 4;
    cfg.clauses_per_class = 2;
    TsetlinMachine tm(cfg, 1);
    auto stats = negated_literal_fraction(tm);
    auto sj = hvtm::negated_stats_to_json(stats);
    CHECK(sj.contains("per_class"));
    CHECK(sj.contains("total_includes"));
    CHECK(sj.contains("total_negated"));
    CHECK(sj.contains("overall_fraction"));
    CHECK(sj["zero_denominator"] == true);
    CHECK(sj["per_class"][0].contains("fraction"));

    auto text = hvtm::render_clause_text(report);
    CHECK(text.find("class 2") != std::string::npos);
    CHECK(text.find("p4") != std::string::npos);
  }
}
