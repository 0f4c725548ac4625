#include "ghostconv/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "ghostconv/error.hpp"

namespace ghostconv {

namespace {

// Slit edges are inclusive; the slack absorbs rounding in b/2 + a/2 so that
// a sample placed exactly on the edge is counted.
bool within(double x, double center, double half_width) noexcept {
  return std::abs(x - center) <= half_width * (1.0 + 1e-12);
}

} // namespace

double double_slit_transmittance(double x, double a, double b) noexcept {
  return (within(x, -0.5 * b, 0.5 * a) || within(x, 0.5 * b, 0.5 * a)) ? 1.0 : 0.0;
}

TransmissionMask double_slit(double a, double b, const Grid &grid) {
  if (!(a > 0.0)) throw Error(Errc::invalid_argument, "slit width must be positive");
  if (!(b > a)) throw Error(Errc::invalid_argument, "slit separation must exceed slit width (slits overlap)");
  if (grid.dims != 1) throw Error(Errc::invalid_argument, "double slit is a 1D object");
  TransmissionMask m{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) m.values[i] = double_slit_transmittance(grid.coordinate(i), a, b);
  return m;
}

TransmissionMask single_slit(double a, double center, const Grid &grid) {
  if (!(a > 0.0)) throw Error(Errc::invalid_argument, "slit width must be positive");
  TransmissionMask m{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) m.values[i] = within(grid.coordinate(i), center, 0.5 * a) ? 1.0 : 0.0;
  return m;
}

ComplexField apply_mask(const ComplexField &field, const TransmissionMask &mask) {
  if (!(field.grid == mask.grid)) throw Error(Errc::grid_mismatch, "mask grid differs from field grid");
  ComplexField out = field;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] *= mask.values[i];
  return out;
}

double sinc(double u) noexcept {
  if (u == 0.0) return 1.0;
  const double x = std::numbers::pi * u;
  return std::sin(x) / x;
}

RealPattern reference_double_slit(double a, double b, double wavelength, double d2, const Grid &grid) {
  if (!(a > 0.0) || !(b > 0.0) || !(wavelength > 0.0) || !(d2 > 0.0))
    throw Error(Errc::invalid_argument, "reference pattern parameters must be positive");
  RealPattern y(grid);
  const double scale = wavelength * d2;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i);
    const double s = sinc(a * x / scale);
    y.values[i] = 0.5 * s * s * (1.0 + std::cos(2.0 * std::numbers::pi * b * x / scale));
  }
  return y;
}

RealPattern reference_from_mask(const TransmissionMask &mask, double wavelength, double d2, const Grid &grid) {
  RealPattern y(grid);
  const double scale = wavelength * d2;
  const double dx = mask.grid.pitch[0];
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = grid.coordinate(i) / scale;
    double re = 0.0, im = 0.0;
    for (std::size_t s = 0; s < mask.values.size(); ++s) {
      if (mask.values[s] == 0.0) continue;
      const double arg = -2.0 * std::numbers::pi * mask.grid.coordinate(s) * xi;
      re += mask.values[s] * std::cos(arg);
      im += mask.values[s] * std::sin(arg);
    }
    y.values[i] = (re * re + im * im) * dx * dx;
    peak = std::max(peak, y.values[i]);
  }
  if (peak > 0.0)
    for (auto &v : y.values) v /= peak;
  return y;
}

TransmissionMask load_mask(const std::filesystem::path &path, const Grid &grid) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open mask file " + path.string());
  TransmissionMask m{grid, {}};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) {
      std::string rest;
      if (std::istringstream(line) >> rest) throw Error(Errc::format, "mask line " + std::to_string(lineno) + " is not a number");
      continue;
    }
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(Errc::format, "mask line " + std::to_string(lineno) + ": transmittance outside [0, 1]");
    m.values.push_back(v);
  }
  if (m.values.size() != grid.size())
    throw Error(Errc::format, "mask file has " + std::to_string(m.values.size()) + " values, object grid has " +
                                  std::to_string(grid.size()));
  return m;
}

} // namespace ghostconv
