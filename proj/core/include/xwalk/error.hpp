#pragma once

#include <stdexcept>
#include <string>

namespace xwalk {

// Bad input data or configuration, attributable to the caller.
// The CLI maps this to exit code 1; anything else is an internal error (2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "source: row N: message" -- all row/feature-level parse errors go through
// this so every rejection names its location.
inline ValidationError row_error(const std::string& source, long row,
                                 const std::string& message) {
  return ValidationError(source + ": row " + std::to_string(row) + ": " + message);
}

inline ValidationError feature_error(const std::string& source, long feature,
                                     const std::string& message) {
  return ValidationError(source + ": feature " + std::to_string(feature) + ": " +
                         message);
}

}  // namespace xwalk
