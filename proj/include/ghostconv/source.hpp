#pragma once

#include <cstddef>
#include <span>

#include "ghostconv/field.hpp"
#include "ghostconv/rng.hpp"

namespace ghostconv {

enum class ApertureShape { slit, disk };

/// Pseudo-thermal source: circular-Gaussian field limited by a hard
/// aperture. 1D grids use a slit of width `aperture_diameter`, 2D grids a
/// disk of that diameter. A sample is inside when its center is.
struct SourceSpec {
  Grid grid;
  double aperture_diameter = 0.0;
  double sigma2 = 1.0;
  double wavelength = 0.0;

  ApertureShape shape() const noexcept { return grid.dims == 1 ? ApertureShape::slit : ApertureShape::disk; }
  bool inside(std::size_t index) const noexcept;
};

/// Throws geometry if the aperture is non-positive or wider than the grid,
/// invalid_argument on a non-positive sigma2 or wavelength.
void validate(const SourceSpec &spec);

/// Indices of in-aperture samples, ascending. Random draws are consumed in
/// this order.
std::vector<std::size_t> aperture_indices(const SourceSpec &spec);

/// One realization of the source field: A * exp(j phi) inside the aperture,
/// A Rayleigh with scale sigma, phi uniform on (0, 2 pi], zero elsewhere.
ComplexField sample_source(const SourceSpec &spec, RngStream stream);

/// Hot-path variant: writes the `count` in-aperture samples as split
/// real/imag parts, element i at offset i * stride, with exactly the values
/// sample_source places at aperture_indices(spec)[i].
void sample_aperture(double sigma, std::size_t count, RngStream stream, std::span<double> re, std::span<double> im,
                     std::size_t stride = 1);

} // namespace ghostconv
