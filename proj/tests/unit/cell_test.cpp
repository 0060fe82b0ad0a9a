#include "doctest.h"

#include "odsaudit/cell.hpp"

#include <random>

using namespace odsaudit;

TEST_SUITE("cell") {
  TEST_CASE("column letters round-trip against base-26 enumeration") {
    // Independent enumeration: A..Z, AA..ZZ, AAA..XFD
    std::vector<std::string> names;
    for (char a = 'A'; a <= 'Z'; ++a) names.emplace_back(1, a);
    for (char a = 'A'; a <= 'Z'; ++a)
      for (char b = 'A'; b <= 'Z'; ++b) names.push_back(std::string{a, b});
    for (char a = 'A'; a <= 'Z'; ++a)
      for (char b = 'A'; b <= 'Z'; ++b)
        for (char c = 'A'; c <= 'Z'; ++c) names.push_back(std::string{a, b, c});
    for (int i = 0; i < kMaxColumns; ++i) {
      REQUIRE(column_letters(i) == names[static_cast<std::size_t>(i)]);
      REQUIRE(parse_column_letters(names[static_cast<std::size_t>(i)]) == i);
    }
    CHECK(column_letters(kMaxColumns - 1) == "XFD");
    CHECK_FALSE(parse_column_letters("XFE"));
    CHECK_FALSE(parse_column_letters(""));
    CHECK_FALSE(parse_column_letters("A1"));
    CHECK(parse_column_letters("aa") == 26);
  }

  TEST_CASE("a1 parsing") {
    auto a = parse_a1("$K$22", "S");
    REQUIRE(a);
    CHECK(a->column == 10);
    CHECK(a->row == 21);
    CHECK(a->col_absolute);
    CHECK(a->row_absolute);
    CHECK(to_a1(*a) == "$K$22");
    CHECK_FALSE(parse_a1("K0"));
    CHECK_FALSE(parse_a1("22"));
    CHECK_FALSE(parse_a1("K1048577"));
  }

  TEST_CASE("rendering") {
    StaticValue usd = StaticValue::number(5150, ValueType::Currency);
    usd.currency_code = "USD";
    CHECK(render_value(usd) == "$5,150 (currency)");
    StaticValue neg = StaticValue::number(-139850, ValueType::Currency);
    neg.currency_code = "USD";
    CHECK(display_text(neg) == "-$139,850");
    CHECK(render_value(StaticValue::number(0)) == "0 (float)");
    CHECK(render_value(StaticValue::string("Travel")) == "Travel (string)");
    CHECK(render_content(CellContent::empty()) == "<empty>");
    CHECK(render_content(CellContent::make_formula("=SUM(E11:E16)", StaticValue::number(0))) ==
          "=SUM(E11:E16) {0 (float)}");
    CHECK(render_result(ErrorToken{"#DIV/0!"}) == "#DIV/0! (error)");
  }

  TEST_CASE("format_number round-trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1e9, 1e9);
    for (int i = 0; i < 1000; ++i) {
      double v = d(rng);
      CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(6) == "6");
    CHECK(format_number(0.1) == "0.1");
  }

  TEST_CASE("grid structure operations") {
    Grid g;
    g.set(0, 0, CellContent::make_static(StaticValue::number(1)));
    g.set(2, 1, CellContent::make_static(StaticValue::number(2)));
    g.insert_rows(1, 2, true);
    CHECK(g.at(4, 1).content.static_value->lexical == "2");
    CHECK(g.at(1, 0).unrecoverable);
    g.erase_rows(1, 2);
    CHECK(g.at(2, 1).content.static_value->lexical == "2");
    g.insert_columns(0, 1, false);
    CHECK(g.at(0, 1).content.static_value->lexical == "1");
    g.erase_columns(0, 1);
    CHECK(g.at(0, 0).content.static_value->lexical == "1");

    Grid h;
    h.set(0, 0, CellContent::make_static(StaticValue::number(1)));
    h.set(2, 1, CellContent::make_static(StaticValue::number(2)));
    h.set(5, 5, CellContent::empty());
    CHECK(g.same_content(h));
    CHECK(looks_like_error_token("#DIV/0!"));
    CHECK(looks_like_error_token("Err:502"));
    CHECK_FALSE(looks_like_error_token("hello"));
  }
}
