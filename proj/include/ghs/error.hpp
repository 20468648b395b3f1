#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghs {

enum class ErrorKind {
  order_too_large,
  nonpositive_sigma,
  grid_too_small,
  non_square_input,
  dimension_mismatch,
  odd_size_input,
  bad_filter,
  shape_mismatch,
  size_not_divisible,
  invalid_config,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::order_too_large: return "order-too-large";
    case ErrorKind::nonpositive_sigma: return "nonpositive-sigma";
    case ErrorKind::grid_too_small: return "grid-too-small";
    case ErrorKind::non_square_input: return "non-square-input";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::odd_size_input: return "odd-size-input";
    case ErrorKind::bad_filter: return "bad-filter";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::size_not_divisible: return "size-not-divisible";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ghs
