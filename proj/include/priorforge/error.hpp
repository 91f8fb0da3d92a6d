#ifndef PRIORFORGE_ERROR_HPP
#define PRIORFORGE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace priorforge {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent model formula; carries the byte offset of the
/// offending token (or npos when the problem is not positional).
class FormulaError : public Error {
 public:
  FormulaError(const std::string& what, std::size_t offset = std::string::npos)
      : Error(offset == std::string::npos
                  ? what
                  : what + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Problems with the input table: unknown columns, bad values, type mismatch.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Column referenced by the formula is not in the table.
class UnknownColumnError : public DataError {
 public:
  using DataError::DataError;
};

/// Model fitting failed: rank deficiency, non-convergence, separation.
class FitError : public Error {
 public:
  using Error::Error;
};

/// A value fell outside the domain of a formula (negative discriminant,
/// |rho| >= 1, non-finite linear predictor, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The quartic profile approximation could not be constructed.
class QuarticError : public Error {
 public:
  using Error::Error;
};

/// A failure while deriving the prior of one model term; wraps the cause.
class TermError : public Error {
 public:
  TermError(std::string term, const std::string& cause)
      : Error("term '" + term + "': " + cause), term_(std::move(term)) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

}  // namespace priorforge

#endif  // PRIORFORGE_ERROR_HPP
