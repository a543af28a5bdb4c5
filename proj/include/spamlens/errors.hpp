#pragma once

#include <stdexcept>
#include <string>

namespace spamlens {

// Error categories map onto CLI exit codes: usage=1, data=2, provider=3.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProviderError : std::runtime_error {
  explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spamlens
