#include "topicmap/error.hpp"

namespace topicmap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::missing_input: return "missing_input";
    case ErrorKind::format: return "format";
    case ErrorKind::provenance: return "provenance";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::missing_input: return 3;
    case ErrorKind::format: return 4;
    case ErrorKind::provenance: return 5;
    case ErrorKind::io: return 6;
  }
  return 1;
}

}  // namespace topicmap
