#include "doctest.h"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "odsaudit/analyzer.hpp"
#include "odsaudit/error.hpp"
#include "odsaudit/reconstruct.hpp"

#include <map>
#include <random>

using namespace odsaudit;
using namespace testsupport;

namespace {

CellContent num(double v) { return CellContent::make_static(StaticValue::number(v)); }
CellContent str(const std::string& s) { return CellContent::make_static(StaticValue::string(s)); }
CellContent fx(const std::string& f, std::optional<CachedResult> r = std::nullopt) {
  return CellContent::make_formula(f, std::move(r));
}

Sheet sheet(const std::string& name, const std::map<std::string, CellContent>& cells) {
  Sheet s;
  s.name = name;
  for (const auto& [a1, c] : cells) {
    auto a = parse_a1(a1);
    REQUIRE(a);
    s.cells.set(a->row, a->column, c);
  }
  return s;
}

std::vector<Finding> only(const std::vector<Finding>& all, CheckId id) {
  std::vector<Finding> out;
  for (const auto& f : all) {
    if (f.check == id) out.push_back(f);
  }
  return out;
}

std::vector<Finding> run(const std::vector<Sheet>& sheets, const CheckConfig& config = CheckConfig::defaults()) {
  return scan(std::span<const Sheet>(sheets), config);
}

}  // namespace

TEST_SUITE("analyzer") {
  TEST_CASE("SA1 constant equation") {
    auto f = only(run({sheet("S", {{"A1", fx("=1+2+3")}, {"A2", fx("=A1+1")}})}), CheckId::ConstantEquation);
    REQUIRE(f.size() == 1);
    CHECK(f[0].location() == "A1");
    CHECK(f[0].evidence.at("value") == "6");
    CHECK(f[0].message == "constant formula evaluates to 6");
    auto g = only(run({sheet("S", {{"A1", fx("=PI()")}})}), CheckId::ConstantEquation);
    REQUIRE(g.size() == 1);
    CHECK(g[0].message == "constant formula (not folded)");
    CHECK(to_string(CheckId::ConstantEquation) == "SA1-constant-equation");
    CHECK(parse_check_id("SA1") == CheckId::ConstantEquation);
    CHECK(parse_check_id("SA7-overlapping-ranges") == CheckId::OverlappingRanges);
    CHECK_FALSE(parse_check_id("SA99"));
  }

  TEST_CASE("SA0 and SA2") {
    auto all = run({sheet("S", {{"A1", fx("=1+", ErrorToken{"Err:501"})},
                                {"A2", fx("=B1/B2", ErrorToken{"#DIV/0!"})},
                                {"A3", fx("=IF(B1;#N/A;1)")}})});
    CHECK(only(all, CheckId::UnparsableFormula).size() == 1);
    auto errs = only(all, CheckId::ErrorValue);
    REQUIRE(errs.size() == 3);
    CHECK(errs[0].evidence.at("result") == "Err:501");
    CHECK(errs[1].evidence.at("result") == "#DIV/0!");
    CHECK(errs[2].evidence.at("result") == "#N/A");
  }

  TEST_CASE("SA3 blank reference") {
    auto f = only(run({sheet("S", {{"A1", num(1)}, {"B1", fx("=A1+A2+A2+Other.A1")}}),
                       sheet("Other", {})}),
                  CheckId::BlankReference);
    REQUIRE(f.size() == 1);
    CHECK(f[0].evidence.at("blank") == "A2, Other.A1");
  }

  TEST_CASE("SA4 range boundary") {
    auto s = sheet("S", {{"B1", num(1)}, {"B2", num(2)}, {"B3", num(3)}, {"B4", num(4)},
                         {"B5", fx("=SUM(B1:B3)")}, {"C1", str("x")}, {"C2", num(1)}, {"C3", num(1)},
                         {"C5", fx("=SUM(C2:C3)")}, {"D2", num(1)}, {"E2", num(2)}, {"F2", fx("=SUM(D2:E2)")},
                         {"G1", num(1)}, {"G2", num(1)}, {"G3", fx("=MAX(G1:G2)", StaticValue::number(1))}});
    auto f = only(run({s}), CheckId::RangeBoundary);
    REQUIRE(f.size() == 2);
    CHECK(f[0].location() == "F2");
    CHECK(f[0].message == "SUM range D2:E2 excludes adjacent value at C2");
    CHECK(f[1].location() == "B5");
    CHECK(f[1].evidence.at("adjacent") == "B4");
  }

  TEST_CASE("SA5 fill inconsistency") {
    auto s = sheet("S", {{"A1", fx("=A2*2")}, {"B1", fx("=B2*2")}, {"C1", fx("=C3*2")}, {"D1", fx("=D2*2")},
                         {"A5", fx("=1")}, {"B5", fx("=2")}, {"C5", fx("=C4")}, {"D5", fx("=D4")}});
    auto f = only(run({s}), CheckId::FillInconsistency);
    REQUIRE(f.size() == 3);
    CHECK(f[0].location() == "C1");
    CHECK(f[0].evidence.at("run") == "A1:D1");
    // Two distinct constants lose to the two matching references.
    CHECK(f[1].location() == "A5");
    CHECK(f[2].location() == "B5");

    auto tie = sheet("T", {{"A1", fx("=A2")}, {"B1", fx("=B2")}, {"C1", fx("=C3")}, {"D1", fx("=D3")}});
    CHECK(only(run({tie}), CheckId::FillInconsistency).empty());
  }

  TEST_CASE("SA6 duplicates, SA9 literal parameters, SA10 categories, SA11 externals") {
    auto all = run({sheet("S", {{"A1", fx("=A2+A2+$A$2")},
                                {"A3", fx("=NPV(0.1;B1:B4)+NPV(C1;B1:B4)+NPV(-5%;B1)")},
                                {"A4", fx("=SIN(1)+SIN(2)+COS(3)")},
                                {"A5", fx("='file:///x.ods'#Data.A1")}})});
    auto dup = only(all, CheckId::DuplicateReference);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].message == "A2 is referenced 3 times");
    auto lit = only(all, CheckId::LiteralParameter);
    REQUIRE(lit.size() == 2);
    CHECK(lit[0].evidence.at("literal") == "0.1");
    CHECK(lit[1].evidence.at("literal") == "-5%");
    auto cat = only(all, CheckId::FunctionCategory);
    CHECK(cat.size() == 2);
    auto ext = only(all, CheckId::ExternalReference);
    REQUIRE(ext.size() == 1);
    CHECK(ext[0].evidence.at("source") == "file:///x.ods");
  }

  TEST_CASE("SA8 protection holes only when required") {
    Sheet open = sheet("Open", {{"A1", fx("=1+1")}});
    Sheet locked = sheet("Locked", {{"A1", fx("=B1")}, {"A2", fx("=B2")}});
    locked.is_protected = true;
    locked.cells.mutable_at(0, 0).is_protected = true;
    CHECK(only(run({open, locked}), CheckId::ProtectionHole).empty());
    CheckConfig strict = CheckConfig::defaults();
    strict.require_protection = true;
    auto f = only(run({open, locked}, strict), CheckId::ProtectionHole);
    REQUIRE(f.size() == 2);
    CHECK(f[0].sheet == "Open");
    CHECK_FALSE(f[0].cell);
    CHECK(f[1].location() == "A2");
  }

  TEST_CASE("SA7 agrees with brute-force enumeration") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> coord(0, 19);
    for (int round = 0; round < 300; ++round) {
      std::vector<CellRange> ranges;
      std::string f = "=SUM(";
      int n = std::uniform_int_distribution<int>(2, 4)(rng);
      for (int i = 0; i < n; ++i) {
        CellAddress a{"S", coord(rng), coord(rng)}, b{"S", coord(rng), coord(rng)};
        ranges.push_back(normalize_range(a, b));
        f += (i ? ";" : "") + to_a1(a) + ":" + to_a1(b);
      }
      f += ")";
      auto found = only(run({sheet("S", {{"V30", fx(f)}})}), CheckId::OverlappingRanges);
      std::size_t k = 0;
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        for (std::size_t j = i + 1; j < ranges.size(); ++j) {
          long long cells = overlap_cells(ranges[i], ranges[j]);
          if (cells == 0) continue;
          REQUIRE(k < found.size());
          CHECK(found[k].evidence.at("first") == to_a1(ranges[i]));
          CHECK(found[k].evidence.at("second") == to_a1(ranges[j]));
          std::string x = found[k].evidence.at("intersection");
          auto colon = x.find(':');
          auto s = *parse_a1(x.substr(0, colon), "S");
          auto e = colon == std::string::npos ? s : *parse_a1(x.substr(colon + 1), "S");
          CellRange xr{s, e};
          CHECK(static_cast<long long>(xr.width()) * xr.height() == cells);
          CHECK(overlap_cells(xr, ranges[i]) == cells);
          CHECK(overlap_cells(xr, ranges[j]) == cells);
          ++k;
        }
      }
      CHECK(k == found.size());
    }
  }

  TEST_CASE("config parsing") {
    auto c = parse_check_config(
        "# comment\ncheck.SA5 = off\nrequire_protection = true\nreference_expected = PMT:2:3\n"
        "category.finance = NPV, pmt\ndeny_categories = finance\naggregates = sum\n");
    CHECK_FALSE(c.enabled(CheckId::FillInconsistency));
    CHECK(c.require_protection);
    CHECK(c.reference_expected.size() == 1);
    CHECK(c.reference_expected.at("PMT") == std::set<int>{2, 3});
    CHECK(c.function_category.at("PMT") == "finance");
    CHECK(c.function_category.at("SIN") == "trigonometry");
    CHECK(c.deny_categories == std::set<std::string>{"finance"});
    CHECK(c.aggregates == std::set<std::string>{"SUM"});
    for (std::string bad : {"nonsense", "check.SA42 = on", "check.SA1 = maybe", "colour = red",
                            "reference_expected = NPV:x"}) {
      try {
        parse_check_config(bad);
        FAIL("accepted " << bad);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
      }
    }
  }

  TEST_CASE("disabled checks produce nothing and ordering is by location") {
    auto s = sheet("S", {{"B2", fx("=1+2")}, {"A1", fx("=1/0")}, {"A2", fx("=A9")}});
    CheckConfig c = CheckConfig::defaults();
    c.disabled.insert(CheckId::ConstantEquation);
    auto all = run({s}, c);
    CHECK(only(all, CheckId::ConstantEquation).empty());
    for (std::size_t i = 1; i < all.size(); ++i) {
      auto key = [](const Finding& f) { return std::tuple(f.cell->row, f.cell->column, static_cast<int>(f.check)); };
      CHECK(key(all[i - 1]) <= key(all[i]));
    }
  }

  TEST_CASE("cash-flow fixture: SA4 at 21:55 fires only where row 17 holds data") {
    Workbook wb = build_workbook(parse_xml(cashflow_xml()));
    GridSnapshot snap = reconstruct_at(wb, Checkpoint::parse("2003-03-28T21:55:00"));
    auto f = only(scan(std::span<const Sheet>(snap.sheets), CheckConfig::defaults()), CheckId::RangeBoundary);
    REQUIRE(f.size() == 1);
    CHECK(f[0].location() == "N18");
    CHECK(f[0].message == "SUM range N11:N16 excludes adjacent value at N17");

    auto now = scan(wb, CheckConfig::defaults());
    CHECK(only(now, CheckId::RangeBoundary).empty());
  }
}
