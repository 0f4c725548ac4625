#include "ghostconv/field.hpp"

#include <cmath>

#include "ghostconv/error.hpp"

namespace ghostconv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::invalid_argument: return "invalid-argument";
  case Errc::geometry: return "geometry-error";
  case Errc::sampling: return "sampling-error";
  case Errc::grid_mismatch: return "grid-mismatch";
  case Errc::negative_intensity: return "negative-intensity";
  case Errc::insufficient_samples: return "insufficient-samples";
  case Errc::division_by_zero: return "division-by-zero";
  case Errc::degenerate_pattern: return "degenerate-pattern";
  case Errc::invalid_range: return "invalid-range";
  case Errc::window_too_small: return "window-too-small";
  case Errc::no_peak: return "no-peak";
  case Errc::io: return "io-error";
  case Errc::format: return "format-error";
  case Errc::config: return "config-error";
  }
  return "unknown";
}

std::size_t Grid::nearest(double x, int axis) const noexcept {
  const double f = std::floor(index_of(x, axis) + 0.5);
  if (f <= 0.0) return 0;
  const auto last = points[axis] - 1;
  return f >= static_cast<double>(last) ? last : static_cast<std::size_t>(f);
}

namespace {

void check_axis(std::size_t points, double pitch) {
  if (points < 2) throw Error(Errc::invalid_argument, "grid needs at least 2 points per dimension");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw Error(Errc::invalid_argument, "grid pitch must be positive");
}

} // namespace

Grid make_line(std::size_t points, double pitch, double origin) {
  check_axis(points, pitch);
  Grid g;
  g.dims = 1;
  g.points = {points, 1};
  g.pitch = {pitch, pitch};
  g.origin = {origin, 0.0};
  return g;
}

Grid make_plane(std::size_t nx, std::size_t ny, double pitch_x, double pitch_y) {
  check_axis(nx, pitch_x);
  check_axis(ny, pitch_y);
  Grid g;
  g.dims = 2;
  g.points = {nx, ny};
  g.pitch = {pitch_x, pitch_y};
  return g;
}

Grid make_grid(int dims, std::size_t points, double pitch) {
  if (dims == 1) return make_line(points, pitch);
  if (dims == 2) return make_plane(points, points, pitch, pitch);
  throw Error(Errc::invalid_argument, "grid dims must be 1 or 2");
}

ComplexField::ComplexField(Grid g, double lambda) : grid(g), wavelength(lambda), samples(g.size()) {}

ComplexField::ComplexField(Grid g, double lambda, std::vector<Complex> values)
    : grid(g), wavelength(lambda), samples(std::move(values)) {
  if (samples.size() != grid.size()) throw Error(Errc::invalid_argument, "field sample count does not match grid");
}

bool ComplexField::all_finite() const noexcept {
  for (const auto &s : samples)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
  return true;
}

RealPattern::RealPattern(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error(Errc::invalid_argument, "pattern sample count does not match grid");
}

RealPattern::RealPattern(Grid g) : grid(g), values(g.size(), 0.0) {}

RealPattern intensity(const ComplexField &field) {
  RealPattern out(field.grid);
  for (std::size_t i = 0; i < field.samples.size(); ++i) out.values[i] = power(field.samples[i].real(), field.samples[i].imag());
  return out;
}

} // namespace ghostconv
