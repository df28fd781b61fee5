#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phaselab {

enum class ErrorKind {
  parameter,
  resolution,
  aliasing,
  dimension,
  numeric,
  degenerate_state,
  unwrap_failure,
  insufficient_data,
  spacing,
  node,
  instability,
  escape,
  preparation,
  no_fringe,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::aliasing: return "aliasing";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::degenerate_state: return "degenerate-state";
    case ErrorKind::unwrap_failure: return "unwrap-failure";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::spacing: return "spacing";
    case ErrorKind::node: return "node";
    case ErrorKind::instability: return "instability";
    case ErrorKind::escape: return "escape";
    case ErrorKind::preparation: return "preparation";
    case ErrorKind::no_fringe: return "no-fringe";
  }
  return "unknown";
}

/// Every failure raised by the numerical modules. The kind is stable and is
/// what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace phaselab
