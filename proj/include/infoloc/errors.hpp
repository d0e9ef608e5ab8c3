#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infoloc {

/// A measured quantity that failed a validation check.
struct Violation {
  std::string check;
  double value = 0.0;
  std::string detail;
};

/// Thrown when an input fails an invariant (non-Hermitian matrix, bad trace,
/// out-of-range parameter). Carries every violation found, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::string message, std::vector<Violation> violations = {})
      : std::runtime_error(std::move(message)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Dimension or factor-structure mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or JSON document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem size beyond what a solver is willing to handle.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace infoloc
