#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ghostconv/field.hpp"

namespace ghostconv {

/// One Neumaier step: sum += x, rounding error carried in comp.
inline void neumaier_add(double &sum, double &comp, double x) noexcept {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x))
    comp += (sum - t) + x;
  else
    comp += (x - t) + sum;
  sum = t;
}

/// Compensated running sum. merge() folds another sum in, carrying both
/// compensation terms.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept { neumaier_add(sum, comp, x); }
  void merge(const CompensatedSum &o) noexcept {
    add(o.sum);
    comp += o.comp;
  }
  double value() const noexcept { return sum + comp; }

  friend bool operator==(const CompensatedSum &, const CompensatedSum &) = default;
};

/// Running sums for the intensity-fluctuation correlation between a scalar
/// channel I1 and a resolved pattern I2:
///   G = (1/n) sum I1 I2 - (1/n^2) sum I1 sum I2.
/// Mergeable, so workers can own private accumulators and join later.
/// Copying an accumulator is a snapshot.
class CorrelationAccumulator {
public:
  explicit CorrelationAccumulator(const Grid &grid);

  const Grid &grid() const noexcept { return grid_; }
  std::uint64_t count() const noexcept { return count_; }
  double s1() const noexcept { return s1_.value(); }
  double s2(std::size_t i) const noexcept { return s2_[i] + c2_[i]; }
  double s12(std::size_t i) const noexcept { return s12_[i] + c12_[i]; }

  /// Throws negative_intensity or grid_mismatch.
  void update(double i1, const RealPattern &i2);
  void update(double i1, std::span<const double> i2);

  /// Throws grid_mismatch.
  void merge(const CorrelationAccumulator &other);

  /// The biased (1/n) covariance estimate per pixel; insufficient_samples
  /// below two updates.
  RealPattern finalize() const;

  // Raw state, for snapshot serialization.
  struct State {
    std::uint64_t count;
    CompensatedSum s1;
    std::vector<double> s2, c2, s12, c12;
  };
  State state() const;
  static CorrelationAccumulator from_state(const Grid &grid, State st);

  friend bool operator==(const CorrelationAccumulator &, const CorrelationAccumulator &) = default;

private:
  Grid grid_;
  std::uint64_t count_ = 0;
  CompensatedSum s1_;
  std::vector<double> s2_, c2_, s12_, c12_;
};

/// Normalized second-order coherence minus baseline,
///   |mu|^2 = [(1/n) sum I I_ref - (1/n^2) sum I sum I_ref] / [(1/n^2) sum I sum I_ref],
/// from an accumulator whose scalar channel is the reference-pixel intensity.
/// Throws division_by_zero if a mean intensity vanishes.
RealPattern coherence_map(const CorrelationAccumulator &acc);

/// Sample nearest the optical axis (per axis for 2D grids).
std::size_t reference_pixel(const Grid &grid) noexcept;

} // namespace ghostconv
