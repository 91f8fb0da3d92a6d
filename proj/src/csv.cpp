#include "priorforge/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "priorforge/error.hpp"

namespace priorforge {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Splits one record starting at `pos`; advances `pos` past the record
// terminator. Returns false at end of input.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields,
                 std::size_t& line) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (quoted) {
      if (ch == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (ch == '\n') ++line;
      field += ch;
      ++pos;
      continue;
    }
    if (ch == '"') {
      if (!trim(field).empty())
        throw DataError("csv: stray quote in unquoted field on line " + std::to_string(line));
      field.clear();
      quoted = true;
      was_quoted = true;
      ++pos;
      continue;
    }
    if (ch == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
      ++pos;
      continue;
    }
    if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      ++line;
      break;
    }
    field += ch;
    ++pos;
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return true;
}

}  // namespace

Table::Table(std::vector<std::string> names) : names_(std::move(names)), cells_(names_.size()) {}

Table Table::from_numeric(const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  Table t;
  for (const auto& [name, values] : cols) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) {
      if (std::isnan(v)) {
        cells.emplace_back();
      } else {
        std::ostringstream os;
        os.precision(17);
        os << v;
        cells.push_back(os.str());
      }
    }
    t.add_column(name, std::move(cells));
  }
  return t;
}

std::optional<std::size_t> Table::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

bool Table::is_missing(std::size_t col, std::size_t row) const {
  const std::string_view s = trim(cells_[col][row]);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

bool Table::is_numeric(std::size_t col) const {
  bool any = false;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (is_missing(col, r)) continue;
    if (!parse_number(cells_[col][r])) return false;
    any = true;
  }
  return any;
}

std::optional<double> Table::number(std::size_t col, std::size_t row) const {
  if (is_missing(col, row)) return std::nullopt;
  return parse_number(cells_[col][row]);
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != names_.size())
    throw DataError("csv: row " + std::to_string(rows_ + 1) + " has " + std::to_string(row.size()) +
                    " fields, expected " + std::to_string(names_.size()));
  for (std::size_t c = 0; c < row.size(); ++c) cells_[c].push_back(std::move(row[c]));
  ++rows_;
}

void Table::add_column(std::string name, std::vector<std::string> cells) {
  if (!names_.empty() && cells.size() != rows_)
    throw DataError("table: column '" + name + "' has the wrong length");
  if (find(name)) throw DataError("table: duplicate column '" + name + "'");
  rows_ = cells.size();
  names_.push_back(std::move(name));
  cells_.push_back(std::move(cells));
}

Table read_csv(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.erase(0, 3);

  std::size_t pos = 0;
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!next_record(text, pos, fields, line)) throw DataError("csv: empty input");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].empty()) throw DataError("csv: empty column name in header");
    for (std::size_t k = 0; k < i; ++k)
      if (fields[k] == fields[i]) throw DataError("csv: duplicate column name '" + fields[i] + "'");
  }
  Table table(fields);
  while (next_record(text, pos, fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    table.add_row(fields);
  }
  return table;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace priorforge
