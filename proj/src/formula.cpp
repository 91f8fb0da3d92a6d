#include "priorforge/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "priorforge/error.hpp"

namespace priorforge {

namespace {

enum class Tok { ident, number, tilde, plus, minus, lparen, rparen, bar, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < s.size() && ident_char(s[i])) ++i;
      out.push_back({Tok::ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::number, std::string(s.substr(start, i - start)), start});
      continue;
    }
    Tok k;
    switch (c) {
      case '~': k = Tok::tilde; break;
      case '+': k = Tok::plus; break;
      case '-': k = Tok::minus; break;
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case '|': k = Tok::bar; break;
      default: throw FormulaError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({k, std::string(1, c), start});
    ++i;
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  ModelSpec parse(Family family) {
    ModelSpec spec;
    spec.family = family;
    const Token& resp = expect(Tok::ident, "response name");
    spec.response = resp.text;
    expect(Tok::tilde, "'~'");

    std::optional<bool> intercept;  // explicit 0/1 or -1
    std::vector<FixedTerm> terms;
    bool first = true;
    while (true) {
      bool negate = false;
      if (!first) {
        if (peek().kind == Tok::end) break;
        if (peek().kind == Tok::plus) {
          next();
        } else if (peek().kind == Tok::minus) {
          next();
          negate = true;
        } else {
          throw FormulaError("expected '+' or end of formula", peek().offset);
        }
      } else if (peek().kind == Tok::minus) {
        next();
        negate = true;
      }
      first = false;

      const Token& t = peek();
      if (negate) {
        if (t.kind != Tok::number || t.text != "1")
          throw FormulaError("only '- 1' is supported for term removal", t.offset);
        next();
        set_intercept(intercept, false, t.offset);
        continue;
      }
      if (t.kind == Tok::number) {
        if (t.text != "0" && t.text != "1") throw FormulaError("expected 0 or 1", t.offset);
        next();
        set_intercept(intercept, t.text == "1", t.offset);
        continue;
      }
      if (t.kind == Tok::ident) {
        next();
        if (t.text == spec.response)
          throw FormulaError("response '" + t.text + "' used as a predictor", t.offset);
        for (const auto& f : terms)
          if (f.name == t.text) throw FormulaError("duplicate term '" + t.text + "'", t.offset);
        terms.push_back({t.text, TermKind::unresolved});
        continue;
      }
      if (t.kind == Tok::lparen) {
        next();
        RandomTerm r;
        const Token& e = peek();
        if (e.kind == Tok::number && e.text == "1") {
          r.expr = "1";
        } else if (e.kind == Tok::ident) {
          r.expr = e.text;
          if (e.text == spec.response)
            throw FormulaError("response '" + e.text + "' used in a random term", e.offset);
        } else {
          throw FormulaError("expected '1' or a column name in random term", e.offset);
        }
        next();
        expect(Tok::bar, "'|'");
        const Token& g = expect(Tok::ident, "grouping column");
        if (g.text == spec.response)
          throw FormulaError("response '" + g.text + "' used as a grouping factor", g.offset);
        r.group = g.text;
        expect(Tok::rparen, "')'");
        for (const auto& o : spec.random_terms)
          if (o == r) throw FormulaError("duplicate random term '(" + r.label() + ")'", t.offset);
        spec.random_terms.push_back(r);
        continue;
      }
      throw FormulaError("expected a term", t.offset);
    }

    spec.has_intercept = intercept.value_or(true);
    if (spec.has_intercept) spec.fixed_terms.push_back({std::string(kInterceptName), TermKind::intercept});
    spec.fixed_terms.insert(spec.fixed_terms.end(), terms.begin(), terms.end());
    return spec;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) throw FormulaError(std::string("expected ") + what, peek().offset);
    return next();
  }
  static void set_intercept(std::optional<bool>& cur, bool value, std::size_t offset) {
    if (cur && *cur != value) throw FormulaError("contradictory intercept specification", offset);
    cur = value;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

bool ModelSpec::has_fixed(const std::string& name) const {
  return std::any_of(fixed_terms.begin(), fixed_terms.end(),
                     [&](const FixedTerm& t) { return t.name == name; });
}

ModelSpec parse_formula(std::string_view text, Family family) { return Parser(text).parse(family); }

std::string print_formula(const ModelSpec& spec) {
  std::vector<std::string> parts;
  if (!spec.has_intercept) parts.emplace_back("0");
  for (const auto& t : spec.fixed_terms)
    if (t.kind != TermKind::intercept) parts.push_back(t.name);
  if (spec.has_intercept && parts.empty()) parts.emplace_back("1");
  for (const auto& r : spec.random_terms) parts.push_back("(" + r.label() + ")");
  std::string out = spec.response + " ~ ";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += " + ";
    out += parts[i];
  }
  return out;
}

Eigen::Index DesignData::intercept_column() const {
  for (const auto& t : term_columns)
    if (t.kind == TermKind::intercept) return t.columns.front();
  return -1;
}

const TermColumns* DesignData::find_term(const std::string& name) const {
  for (const auto& t : term_columns)
    if (t.term == name) return &t;
  return nullptr;
}

const TermColumns& DesignData::term_of_column(Eigen::Index col) const {
  for (const auto& t : term_columns)
    if (std::find(t.columns.begin(), t.columns.end(), col) != t.columns.end()) return t;
  throw DataError("design column " + std::to_string(col) + " belongs to no term");
}

namespace {

std::size_t require_column(const Table& table, const std::string& name) {
  auto c = table.find(name);
  if (!c) throw UnknownColumnError("unknown column '" + name + "'");
  return *c;
}

std::vector<std::string> sorted_levels(const Table& table, std::size_t col) {
  std::set<std::string> levels;
  for (std::size_t r = 0; r < table.rows(); ++r)
    if (!table.is_missing(col, r)) levels.insert(table.cell(col, r));
  return {levels.begin(), levels.end()};
}

}  // namespace

DesignData build_design(const ModelSpec& spec_in, const Table& table) {
  DesignData d;
  d.spec = spec_in;
  ModelSpec& spec = d.spec;

  const std::size_t ycol = require_column(table, spec.response);
  if (!table.is_numeric(ycol)) throw DataError("response '" + spec.response + "' is not numeric");

  // Resolve fixed terms.
  std::vector<std::size_t> used{ycol};
  std::vector<std::size_t> term_table_col(spec.fixed_terms.size(), 0);
  int n_categorical = 0;
  for (std::size_t i = 0; i < spec.fixed_terms.size(); ++i) {
    auto& t = spec.fixed_terms[i];
    if (t.kind == TermKind::intercept) continue;
    const std::size_t c = require_column(table, t.name);
    term_table_col[i] = c;
    used.push_back(c);
    t.kind = table.is_numeric(c) ? TermKind::numeric : TermKind::categorical;
    if (t.kind == TermKind::categorical) ++n_categorical;
  }
  spec.cell_means = !spec.has_intercept && n_categorical == 1;

  std::vector<std::size_t> group_cols;
  for (const auto& r : spec.random_terms) {
    if (!r.is_intercept()) {
      const std::size_t c = require_column(table, r.expr);
      if (!table.is_numeric(c))
        throw DataError("random slope '" + r.expr + "' must be a numeric column");
      used.push_back(c);
    }
    const std::size_t g = require_column(table, r.group);
    used.push_back(g);
    group_cols.push_back(g);
  }

  // Listwise deletion.
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    bool complete = true;
    for (std::size_t c : used)
      if (table.is_missing(c, r)) {
        complete = false;
        break;
      }
    if (complete) rows.push_back(r);
  }
  d.rows_dropped = table.rows() - rows.size();
  if (rows.empty()) throw DataError("no complete rows remain after removing missing values");
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.n = n;

  // Response.
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = *table.number(ycol, rows[i]);
    if (spec.family == Family::binomial && v != 0.0 && v != 1.0)
      throw DataError("binomial response must be coded 0/1, found " + table.cell(ycol, rows[i]));
    if (spec.family == Family::poisson && (v < 0.0 || v != std::floor(v)))
      throw DataError("poisson response must be a nonnegative integer, found " + table.cell(ycol, rows[i]));
    d.y[i] = v;
  }

  // Design columns.
  std::vector<Vector<double>> cols;
  for (std::size_t i = 0; i < spec.fixed_terms.size(); ++i) {
    const auto& t = spec.fixed_terms[i];
    TermColumns tc{t.name, t.kind, {}};
    if (t.kind == TermKind::intercept) {
      tc.columns.push_back(static_cast<Eigen::Index>(cols.size()));
      cols.push_back(Vector<double>::Ones(n));
      d.column_names.push_back(t.name);
    } else if (t.kind == TermKind::numeric) {
      Vector<double> v(n);
      for (Eigen::Index r = 0; r < n; ++r) {
        auto x = table.number(term_table_col[i], rows[r]);
        if (!x) throw DataError("non-numeric value in numeric column '" + t.name + "'");
        v[r] = *x;
      }
      tc.columns.push_back(static_cast<Eigen::Index>(cols.size()));
      cols.push_back(std::move(v));
      d.column_names.push_back(t.name);
    } else {
      const auto levels = sorted_levels(table, term_table_col[i]);
      const std::size_t first = spec.cell_means ? 0 : 1;
      for (std::size_t l = first; l < levels.size(); ++l) {
        Vector<double> v(n);
        for (Eigen::Index r = 0; r < n; ++r)
          v[r] = table.cell(term_table_col[i], rows[r]) == levels[l] ? 1.0 : 0.0;
        tc.columns.push_back(static_cast<Eigen::Index>(cols.size()));
        cols.push_back(std::move(v));
        d.column_names.push_back(t.name + "[" + levels[l] + "]");
      }
    }
    d.term_columns.push_back(std::move(tc));
  }

  const auto k = static_cast<Eigen::Index>(cols.size());
  if (n <= k)
    throw DataError("need more complete rows (" + std::to_string(n) + ") than design columns (" +
                    std::to_string(k) + ")");
  d.X.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c) d.X.col(c) = cols[c];
  d.means_x = k > 0 ? Vector<double>(d.X.colwise().mean().transpose()) : Vector<double>();
  d.mean_y = d.y.mean();
  d.var_y = (d.y.array() - d.mean_y).square().mean();

  for (std::size_t r = 0; r < spec.random_terms.size(); ++r) {
    const auto& g = spec.random_terms[r].group;
    if (d.group_indices.count(g)) continue;
    const auto levels = sorted_levels(table, group_cols[r]);
    std::vector<int> codes(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& cell = table.cell(group_cols[r], rows[i]);
      codes[i] = static_cast<int>(std::lower_bound(levels.begin(), levels.end(), cell) - levels.begin());
    }
    d.group_indices[g] = std::move(codes);
    d.group_levels[g] = levels;
  }
  return d;
}

}  // namespace priorforge
