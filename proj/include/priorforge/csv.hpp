#ifndef PRIORFORGE_CSV_HPP
#define PRIORFORGE_CSV_HPP

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace priorforge {

/// Column-oriented table of raw string cells as read from a CSV file.
/// Empty cells and NA/NaN are missing.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> names);

  /// Build from numeric columns; NaN marks a missing value.
  static Table from_numeric(const std::vector<std::pair<std::string, std::vector<double>>>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(const std::string& name) const;

  const std::string& cell(std::size_t col, std::size_t row) const { return cells_[col][row]; }
  bool is_missing(std::size_t col, std::size_t row) const;
  /// True when every non-missing cell parses as a finite number.
  bool is_numeric(std::size_t col) const;
  /// Numeric value of a cell; nullopt when missing or not a number.
  std::optional<double> number(std::size_t col, std::size_t row) const;

  void add_row(std::vector<std::string> row);
  void add_column(std::string name, std::vector<std::string> cells);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> cells_;
  std::size_t rows_ = 0;
};

/// RFC 4180 CSV with a header row. Throws DataError on malformed input.
Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

}  // namespace priorforge

#endif  // PRIORFORGE_CSV_HPP
