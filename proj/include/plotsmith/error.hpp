#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plotsmith {

/// Failure raised by engine operations. `code()` is a stable machine-readable
/// token (snake_case); `what()` carries the human text.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

} // namespace plotsmith
