#pragma once

#include <stdexcept>
#include <string>

namespace hawkescox {

// Malformed or inconsistent input data (CSV parsing, index gaps, missing files).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure that invalidates a computation (e.g. exp overflow in the
// intensity). The sampler treats proposals that trigger this as rejected.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hawkescox
