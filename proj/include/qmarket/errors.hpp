#pragma once
#include <stdexcept>

namespace qmarket {

// Malformed or inconsistent user input; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solver, quadrature, or discretization failed its accuracy contract; exit 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An oracle comparison exceeded its stated tolerance; exit 4.
struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qmarket
