#pragma once

#include <stdexcept>
#include <string>

namespace ecsrl {

// Error taxonomy, mirrored by the CLI exit codes: usage -> 1, data -> 2,
// numeric -> 3. Precondition violations in the math layer throw dimension
// or value errors; when they surface through the CLI they are data errors.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct ValueError : std::invalid_argument {
  explicit ValueError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace ecsrl
