#pragma once

#include <filesystem>

#include "ghostconv/field.hpp"

namespace ghostconv {

/// Real amplitude transmittance t(x) in [0, 1] on the object plane.
struct TransmissionMask {
  Grid grid;
  std::vector<double> values;
};

/// Two slits of width a centred at -b/2 and +b/2; boundaries inclusive.
double double_slit_transmittance(double x, double a, double b) noexcept;

/// Throws invalid_argument unless a > 0 and b > a.
TransmissionMask double_slit(double a, double b, const Grid &grid);

/// Single slit of width a centred at `center` (boundaries inclusive).
TransmissionMask single_slit(double a, double center, const Grid &grid);

/// Elementwise E * t. Throws grid_mismatch when the grids differ.
ComplexField apply_mask(const ComplexField &field, const TransmissionMask &mask);

/// sinc(u) = sin(pi u) / (pi u), sinc(0) = 1.
double sinc(double u) noexcept;

/// Closed-form ghost diffraction pattern of the double slit,
///   y = 1/2 sinc^2(a x / (lambda d2)) (1 + cos(2 pi b x / (lambda d2))),
/// equal to 1 at x = 0.
RealPattern reference_double_slit(double a, double b, double wavelength, double d2, const Grid &grid);

/// |T(x / (lambda d2))|^2 for an arbitrary mask, T being the Riemann-sum
/// Fourier transform of t, scaled so the largest sample equals 1.
RealPattern reference_from_mask(const TransmissionMask &mask, double wavelength, double d2, const Grid &grid);

/// Reads one transmittance per line (blank lines and '#' comments skipped).
/// The count must equal grid.size() and every value must lie in [0, 1].
TransmissionMask load_mask(const std::filesystem::path &path, const Grid &grid);

} // namespace ghostconv
