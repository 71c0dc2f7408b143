#pragma once
#include <stdexcept>
#include <string>

namespace blowup {

// Bad configuration text or parameter values outside their hard domain.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation could not deliver a trustworthy number.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exponent tuple violates an inequality and no override was given.
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace blowup
