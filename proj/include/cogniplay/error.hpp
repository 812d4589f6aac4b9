#pragma once

#include <stdexcept>
#include <string>

namespace cogniplay {

// Domain error carrying a stable machine-readable code ("terminal-state",
// "illegal-move", ...) next to a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)) {}

  explicit Error(std::string code) : Error(std::move(code), "") {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace cogniplay
