#pragma once

#include <stdexcept>
#include <string>

namespace pcx {

enum class ErrorKind {
  invalid_pair,
  config,
  shape,
  resource_limit,
  geometry,
  normalization,
  solver_failure,
  degenerate_root,
  completeness,
  peak_not_found,
  stats,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_pair: return "invalid pair";
    case ErrorKind::config: return "config error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::resource_limit: return "resource limit";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::normalization: return "normalization error";
    case ErrorKind::solver_failure: return "solver failure";
    case ErrorKind::degenerate_root: return "degenerate root";
    case ErrorKind::completeness: return "completeness error";
    case ErrorKind::peak_not_found: return "peak not found";
    case ErrorKind::stats: return "stats error";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` tells callers (and the CLI
/// exit-code mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pcx
