#include "ghostconv/correlate.hpp"

#include <cmath>

#include "ghostconv/error.hpp"

namespace ghostconv {

CorrelationAccumulator::CorrelationAccumulator(const Grid &grid)
    : grid_(grid), s2_(grid.size(), 0.0), c2_(grid.size(), 0.0), s12_(grid.size(), 0.0), c12_(grid.size(), 0.0) {}

void CorrelationAccumulator::update(double i1, const RealPattern &i2) {
  if (!(i2.grid == grid_)) throw Error(Errc::grid_mismatch, "intensity pattern grid differs from accumulator grid");
  update(i1, std::span<const double>(i2.values));
}

void CorrelationAccumulator::update(double i1, std::span<const double> i2) {
  if (i2.size() != s2_.size()) throw Error(Errc::grid_mismatch, "intensity pattern size differs from accumulator grid");
  if (!(i1 >= 0.0)) throw Error(Errc::negative_intensity, "scalar intensity is negative");
  for (double v : i2)
    if (!(v >= 0.0)) throw Error(Errc::negative_intensity, "pattern intensity is negative");
  ++count_;
  s1_.add(i1);
  const std::size_t n = i2.size();
  for (std::size_t i = 0; i < n; ++i) {
    neumaier_add(s2_[i], c2_[i], i2[i]);
    neumaier_add(s12_[i], c12_[i], i1 * i2[i]);
  }
}

void CorrelationAccumulator::merge(const CorrelationAccumulator &o) {
  if (!(o.grid_ == grid_)) throw Error(Errc::grid_mismatch, "cannot merge accumulators on different grids");
  count_ += o.count_;
  s1_.merge(o.s1_);
  for (std::size_t i = 0; i < s2_.size(); ++i) {
    neumaier_add(s2_[i], c2_[i], o.s2_[i]);
    c2_[i] += o.c2_[i];
    neumaier_add(s12_[i], c12_[i], o.s12_[i]);
    c12_[i] += o.c12_[i];
  }
}

RealPattern CorrelationAccumulator::finalize() const {
  if (count_ < 2) throw Error(Errc::insufficient_samples, "correlation needs at least two realizations");
  RealPattern g(grid_);
  const double n = static_cast<double>(count_);
  const double mean1 = s1() / n;
  for (std::size_t i = 0; i < s2_.size(); ++i) g.values[i] = s12(i) / n - mean1 * (s2(i) / n);
  return g;
}

CorrelationAccumulator::State CorrelationAccumulator::state() const { return {count_, s1_, s2_, c2_, s12_, c12_}; }

CorrelationAccumulator CorrelationAccumulator::from_state(const Grid &grid, State st) {
  CorrelationAccumulator acc(grid);
  if (st.s2.size() != grid.size() || st.c2.size() != grid.size() || st.s12.size() != grid.size() ||
      st.c12.size() != grid.size())
    throw Error(Errc::grid_mismatch, "accumulator state does not match grid");
  acc.count_ = st.count;
  acc.s1_ = st.s1;
  acc.s2_ = std::move(st.s2);
  acc.c2_ = std::move(st.c2);
  acc.s12_ = std::move(st.s12);
  acc.c12_ = std::move(st.c12);
  return acc;
}

RealPattern coherence_map(const CorrelationAccumulator &acc) {
  RealPattern g = acc.finalize();
  const double n = static_cast<double>(acc.count());
  const double mean_ref = acc.s1() / n;
  if (!(mean_ref > 0.0)) throw Error(Errc::division_by_zero, "reference pixel mean intensity is zero");
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double mean = acc.s2(i) / n;
    if (!(mean > 0.0)) throw Error(Errc::division_by_zero, "pixel mean intensity is zero");
    g.values[i] /= mean_ref * mean;
  }
  return g;
}

std::size_t reference_pixel(const Grid &grid) noexcept {
  const std::size_t ix = grid.nearest(0.0, 0);
  if (grid.dims == 1) return ix;
  return grid.nearest(0.0, 1) * grid.points[0] + ix;
}

} // namespace ghostconv
