#include "ghostconv/source.hpp"

#include <cmath>
#include <numbers>

#include "ghostconv/error.hpp"

namespace ghostconv {

bool SourceSpec::inside(std::size_t index) const noexcept {
  const double r = 0.5 * aperture_diameter;
  if (grid.dims == 1) return std::abs(grid.coordinate(index)) <= r;
  const double x = grid.coordinate(index % grid.points[0], 0);
  const double y = grid.coordinate(index / grid.points[0], 1);
  return x * x + y * y <= r * r;
}

void validate(const SourceSpec &spec) {
  if (!(spec.aperture_diameter > 0.0)) throw Error(Errc::geometry, "aperture diameter must be positive");
  for (int axis = 0; axis < spec.grid.dims; ++axis)
    if (spec.aperture_diameter > spec.grid.extent(axis))
      throw Error(Errc::geometry, "aperture diameter exceeds the source grid extent");
  if (!(spec.sigma2 > 0.0)) throw Error(Errc::invalid_argument, "sigma2 must be positive");
  if (!(spec.wavelength > 0.0)) throw Error(Errc::invalid_argument, "wavelength must be positive");
}

std::vector<std::size_t> aperture_indices(const SourceSpec &spec) {
  validate(spec);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < spec.grid.size(); ++i)
    if (spec.inside(i)) idx.push_back(i);
  return idx;
}

void sample_aperture(double sigma, std::size_t count, RngStream stream, std::span<double> re, std::span<double> im,
                     std::size_t stride) {
  if (count == 0) return;
  if (re.size() < (count - 1) * stride + 1 || im.size() < (count - 1) * stride + 1)
    throw Error(Errc::invalid_argument, "output span too small for aperture samples");
  CounterRng rng(stream);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < count; ++i) {
    // Unit-scale Rayleigh amplitude by inversion, then the phase.
    const double amplitude = std::sqrt(-2.0 * std::log(rng.uniform_open_closed()));
    const double phase = two_pi * rng.uniform_open_closed();
    re[i * stride] = (amplitude * std::cos(phase)) * sigma;
    im[i * stride] = (amplitude * std::sin(phase)) * sigma;
  }
}

ComplexField sample_source(const SourceSpec &spec, RngStream stream) {
  const auto idx = aperture_indices(spec);
  std::vector<double> re(idx.size()), im(idx.size());
  sample_aperture(std::sqrt(spec.sigma2), idx.size(), stream, re, im);
  ComplexField field(spec.grid, spec.wavelength);
  for (std::size_t i = 0; i < idx.size(); ++i) field.samples[idx[i]] = Complex(re[i], im[i]);
  return field;
}

} // namespace ghostconv
