#pragma once

#include <complex>
#include <vector>

#include "ghostconv/grid.hpp"

namespace ghostconv {

using Complex = std::complex<double>;

/// Sampled complex optical amplitude on a grid.
struct ComplexField {
  Grid grid;
  double wavelength = 0.0;
  std::vector<Complex> samples;

  ComplexField() = default;
  ComplexField(Grid g, double lambda);
  ComplexField(Grid g, double lambda, std::vector<Complex> values);

  bool all_finite() const noexcept;
};

/// Real samples on a grid. Intensities and reference patterns are
/// non-negative; raw correlation estimates may be signed.
struct RealPattern {
  Grid grid;
  std::vector<double> values;

  RealPattern() = default;
  RealPattern(Grid g, std::vector<double> v);
  explicit RealPattern(Grid g);
};

/// re^2 + im^2. Used instead of std::norm, which libstdc++ computes as
/// |z|^2 through hypot and so rounds differently.
inline double power(double re, double im) noexcept { return re * re + im * im; }

/// Elementwise |E|^2.
RealPattern intensity(const ComplexField &field);

} // namespace ghostconv
