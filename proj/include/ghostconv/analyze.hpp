#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostconv/field.hpp"

namespace ghostconv {

/// Inclusive index range [first, last].
struct IndexWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const noexcept { return last - first + 1; }
  static IndexWindow full(std::size_t n) { return {0, n - 1}; }
};

/// Affine map of the window's samples onto [0, 1]. The result has
/// window.size() entries. Throws degenerate_pattern if max == min,
/// invalid_range for a window outside the data.
std::vector<double> normalize_unit(std::span<const double> values, IndexWindow window);
RealPattern normalize_unit(const RealPattern &pattern);

/// Root-mean-square difference over indices m..n inclusive. Throws
/// invalid_range if m > n or n is out of bounds.
double rms_error(std::span<const double> y_hat, std::span<const double> y, std::size_t m, std::size_t n);

/// Central third of a window (low spatial frequencies) and the two outer
/// thirds (high). The low band has floor(P/3) samples starting
/// ceil((P - floor(P/3)) / 2) samples into the window.
struct BandSplit {
  IndexWindow window;
  IndexWindow low;
  std::vector<std::size_t> high;
};

/// Throws window_too_small for fewer than 3 samples.
BandSplit split_bands(std::size_t pattern_length, IndexWindow window);

struct BandErrors {
  double global = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Errors of normalized data against a normalized reference over the global
/// window and each band. Inputs hold the window only (index 0 is
/// bands.window.first), as returned by normalize_unit.
BandErrors band_errors(std::span<const double> y_hat, std::span<const double> y, const BandSplit &bands);

/// |window| eps_g^2 - (|low| eps_l^2 + |high| eps_h^2), divided by |window|.
/// Zero up to rounding for errors from band_errors.
double partition_residual(const BandErrors &e, const BandSplit &bands);

/// Van Cittert-Zernike coherence length lambda z / phi.
double coherence_length(double wavelength, double distance, double aperture_diameter);

/// Feature size over coherence length.
double kappa(double feature_size, double coherence_length);

/// Full width at half maximum (half of the peak value) of a sampled profile,
/// with linear interpolation at both crossings nearest the peak. Throws
/// no_peak when the maximum touches the boundary, the profile is flat, or a
/// side never drops below half maximum.
double half_width(std::span<const double> values, double pitch);

struct ConvergencePoint {
  std::uint64_t n = 0;
  BandErrors errors;
};

struct ConvergenceCurve {
  std::vector<ConvergencePoint> checkpoints;
  std::string config_hash;
};

struct ThresholdResult {
  bool reached = false;
  std::uint64_t n_star = 0;   // first crossing, or the last evaluated N when not reached
  std::optional<bool> stable; // whether the following checkpoint also satisfies tau
  BandErrors at_n_star;       // errors at n_star (final errors when not reached)
  ConvergenceCurve curve;
};

/// Evaluates `errors_at(N)` for each scheduled N (ascending, <= n_max) until
/// the global error first drops to tau or below; then evaluates one more
/// checkpoint (when scheduled) to fill `stable`. The callback is invoked with
/// strictly increasing N.
ThresholdResult min_n_to_threshold(const std::function<BandErrors(std::uint64_t)> &errors_at, double tau,
                                   std::span<const std::uint64_t> schedule, std::uint64_t n_max);

/// Same search over an already computed curve.
ThresholdResult first_crossing(const ConvergenceCurve &curve, double tau);

/// Spearman rank correlation with average ranks for ties.
double rank_correlation(std::span<const double> x, std::span<const double> y);

/// Schedules: N = start * factor^i for i < count, and start, start+step, ... <= stop.
std::vector<std::uint64_t> geometric_schedule(std::uint64_t start, std::uint64_t factor, std::size_t count);
std::vector<std::uint64_t> arithmetic_schedule(std::uint64_t start, std::uint64_t step, std::uint64_t stop);

} // namespace ghostconv
