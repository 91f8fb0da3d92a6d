#include <doctest.h>

#include <random>

#include "priorforge/error.hpp"
#include "priorforge/formula.hpp"

using namespace priorforge;

TEST_CASE("parse basic formulas") {
  const auto s = parse_formula("y ~ x1 + x2 + (1|g) + (x1 | g)");
  CHECK(s.response == "y");
  CHECK(s.has_intercept);
  REQUIRE(s.fixed_terms.size() == 3);
  CHECK(s.fixed_terms[0].name == kInterceptName);
  CHECK(s.fixed_terms[2].name == "x2");
  REQUIRE(s.random_terms.size() == 2);
  CHECK(s.random_terms[1].label() == "x1|g");

  const auto z = parse_formula("y ~ 0 + g");
  CHECK_FALSE(z.has_intercept);
  CHECK(print_formula(z) == "y ~ 0 + g");
  CHECK(print_formula(parse_formula("y ~ 1")) == "y ~ 1");
  CHECK_FALSE(parse_formula("y ~ x - 1").has_intercept);
}

TEST_CASE("formula errors carry offsets") {
  auto offset_of = [](const char* f) {
    try {
      parse_formula(f);
    } catch (const FormulaError& e) {
      return e.offset();
    }
    return std::string::npos - 1;
  };
  CHECK(offset_of("y ~ x +") != std::string::npos - 1);
  CHECK(offset_of("y x") == 2);
  CHECK_THROWS_AS(parse_formula("y ~ x + x"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ 0 + 1 + x"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ y"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ (1|g) + (1|g)"), FormulaError);
  CHECK_THROWS_AS(parse_formula(""), FormulaError);
}

TEST_CASE("print/parse round trip on random specs") {
  std::mt19937 rng(11);
  const std::vector<std::string> names{"a", "b2", "x_1", "g.h", "w"};
  for (int trial = 0; trial < 300; ++trial) {
    ModelSpec s;
    s.response = "y";
    s.has_intercept = rng() % 3 != 0;
    if (s.has_intercept) s.fixed_terms.push_back({std::string(kInterceptName), TermKind::intercept});
    for (const auto& n : names)
      if (rng() % 2) s.fixed_terms.push_back({n, TermKind::unresolved});
    if (rng() % 2) s.random_terms.push_back({"1", "grp"});
    if (rng() % 2) s.random_terms.push_back({"a", "grp"});
    if (!s.has_intercept && s.fixed_terms.empty()) s.fixed_terms.push_back({"a", TermKind::unresolved});
    const auto text = print_formula(s);
    INFO(text);
    ModelSpec back;
    REQUIRE_NOTHROW(back = parse_formula(text));
    CHECK_MESSAGE(back == s, text);
  }
}

TEST_CASE("design: reference coding, listwise deletion, levels from full column") {
  Table t({"y", "x", "g"});
  t.add_row({"1", "0.5", "b"});
  t.add_row({"2", "NA", "a"});  // only row with level a
  t.add_row({"3", "1.5", "c"});
  t.add_row({"4", "2.5", "b"});
  t.add_row({"5", "3.0", "c"});
  t.add_row({"6", "0.0", "b"});
  const auto d = build_design(parse_formula("y ~ x + g"), t);
  CHECK(d.n == 5);
  CHECK(d.rows_dropped == 1);
  // levels {a, b, c}; reference a is absent after deletion but still the reference
  REQUIRE(d.column_names.size() == 4);
  CHECK(d.column_names[2] == "g[b]");
  CHECK(d.column_names[3] == "g[c]");
  CHECK(d.spec.fixed_terms[2].kind == TermKind::categorical);
  CHECK(d.mean_y == doctest::Approx(19.0 / 5.0));
}

TEST_CASE("design: cell-means coding and validation") {
  Table t({"y", "g", "s"});
  for (int i = 0; i < 6; ++i) t.add_row({std::to_string(i % 2), i < 3 ? "p" : "q", "s" + std::to_string(i % 3)});
  const auto d = build_design(parse_formula("y ~ 0 + g + (1|s)", Family::binomial), t);
  CHECK(d.spec.cell_means);
  CHECK(d.column_names == std::vector<std::string>{"g[p]", "g[q]"});
  CHECK(d.group_levels.at("s").size() == 3);

  CHECK_THROWS_AS(build_design(parse_formula("y ~ nope"), t), UnknownColumnError);
  Table bad({"y", "x"});
  bad.add_row({"2", "1"});
  bad.add_row({"0", "2"});
  bad.add_row({"1", "4"});
  CHECK_THROWS_AS(build_design(parse_formula("y ~ x", Family::binomial), bad), DataError);
  CHECK_THROWS_AS(build_design(parse_formula("y ~ (g|x)"), t), Error);
}
