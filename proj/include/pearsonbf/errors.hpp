#pragma once

#include <stdexcept>

namespace pearsonbf {

// Argument outside a function's mathematical domain (z <= 0, p >= 1/e, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// An iterative scheme exhausted its budget before reaching tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data admit no F statistic (zero residual sum of squares).
struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix/table dimensions too small or inconsistent.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A consistency comparison named a method that is not in the result set.
struct MissingMethodError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed CSV input; message carries row/column diagnostics.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed simulation config file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pearsonbf
