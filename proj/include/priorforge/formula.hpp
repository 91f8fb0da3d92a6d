#ifndef PRIORFORGE_FORMULA_HPP
#define PRIORFORGE_FORMULA_HPP

// Minimal model formulas and design assembly.
//
//   response ~ [0 +] term (+ term)* (+ (rexpr | group))*
//
// term is a column name, rexpr is `1` (random intercept) or a numeric column
// (random slope). `0 +` or `- 1` removes the intercept. No interactions,
// transformations or nested grouping.

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "priorforge/csv.hpp"
#include "priorforge/glm.hpp"

namespace priorforge {

enum class TermKind { intercept, unresolved, numeric, categorical };

struct FixedTerm {
  std::string name;  // "(Intercept)" for the intercept
  TermKind kind = TermKind::unresolved;
  bool operator==(const FixedTerm&) const = default;
};

struct RandomTerm {
  std::string expr;  // "1" for a random intercept, else a numeric column
  std::string group;
  bool is_intercept() const { return expr == "1"; }
  std::string label() const { return expr + "|" + group; }
  bool operator==(const RandomTerm&) const = default;
};

inline constexpr std::string_view kInterceptName = "(Intercept)";

struct ModelSpec {
  std::string response;
  std::vector<FixedTerm> fixed_terms;  // intercept first when present
  bool has_intercept = true;
  std::vector<RandomTerm> random_terms;
  Family family = Family::gaussian;
  bool cell_means = false;  // set when terms are resolved against a table

  bool operator==(const ModelSpec&) const = default;

  bool has_fixed(const std::string& name) const;
};

/// Throws FormulaError (with byte offset) on syntax errors, duplicate terms
/// and use of the response as a predictor.
ModelSpec parse_formula(std::string_view text, Family family = Family::gaussian);

/// Canonical text form; parse_formula(print_formula(s)) == s for unresolved specs.
std::string print_formula(const ModelSpec& spec);

/// Design columns belonging to one fixed term.
struct TermColumns {
  std::string term;
  TermKind kind = TermKind::numeric;
  std::vector<Eigen::Index> columns;
};

struct DesignData {
  ModelSpec spec;  // with resolved term kinds and cell_means
  Vector<double> y;
  Matrix<double> X;
  std::vector<std::string> column_names;
  std::vector<TermColumns> term_columns;  // formula order
  std::map<std::string, std::vector<int>> group_indices;
  std::map<std::string, std::vector<std::string>> group_levels;
  Eigen::Index n = 0;
  Vector<double> means_x;
  double mean_y = 0.0;
  double var_y = 0.0;  // denominator n
  std::size_t rows_dropped = 0;

  /// Index of the intercept column, or -1.
  Eigen::Index intercept_column() const;
  const TermColumns* find_term(const std::string& name) const;
  /// The fixed term a design column belongs to.
  const TermColumns& term_of_column(Eigen::Index col) const;
};

/// Resolve term kinds against `table`, drop incomplete rows, and build the
/// response vector and design matrix (reference coding, or one indicator per
/// level in cell-means models).
DesignData build_design(const ModelSpec& spec, const Table& table);

}  // namespace priorforge

#endif  // PRIORFORGE_FORMULA_HPP
