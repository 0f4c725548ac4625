#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghostconv {

enum class Errc {
  invalid_argument,
  geometry,
  sampling,
  grid_mismatch,
  negative_intensity,
  insufficient_samples,
  division_by_zero,
  degenerate_pattern,
  invalid_range,
  window_too_small,
  no_peak,
  io,
  format,
  config,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace ghostconv
