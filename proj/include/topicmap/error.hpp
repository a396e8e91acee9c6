#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topicmap {

// Each kind maps to a distinct process exit code in the CLI.
enum class ErrorKind {
  invalid_argument,
  missing_input,
  format,
  provenance,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

std::string_view to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

}  // namespace topicmap
