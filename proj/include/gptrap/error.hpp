#pragma once

#include <stdexcept>
#include <string>

namespace gptrap {

enum class ErrorKind {
  invalid_argument,  // precondition violation; CLI exit 2
  non_convergence,   // iterative method did not converge; CLI exit 3
  grid_too_small,    // boundary density above threshold; CLI exit 3
  io,                // file system failure; CLI exit 4
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library. `code` is a short kebab-case tag
// (e.g. "too-few-points") and `key` names the offending parameter when there
// is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, std::string key, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)), key_(std::move(key)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ErrorKind kind_;
  std::string code_;
  std::string key_;
};

[[noreturn]] inline void throw_invalid(std::string code, std::string key, const std::string& message) {
  throw Error(ErrorKind::invalid_argument, std::move(code), std::move(key), message);
}

}  // namespace gptrap
