#include "ghostconv/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ghostconv/error.hpp"

namespace ghostconv {

std::vector<double> normalize_unit(std::span<const double> values, IndexWindow window) {
  if (window.first > window.last || window.last >= values.size())
    throw Error(Errc::invalid_range, "normalization window outside the pattern");
  const auto sub = values.subspan(window.first, window.size());
  const auto [lo, hi] = std::minmax_element(sub.begin(), sub.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 0.0)) throw Error(Errc::degenerate_pattern, "pattern is constant over the window");
  std::vector<double> out(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) out[i] = (sub[i] - min) / range;
  return out;
}

RealPattern normalize_unit(const RealPattern &pattern) {
  return RealPattern(pattern.grid, normalize_unit(pattern.values, IndexWindow::full(pattern.values.size())));
}

double rms_error(std::span<const double> y_hat, std::span<const double> y, std::size_t m, std::size_t n) {
  if (m > n) throw Error(Errc::invalid_range, "rms window has m > n");
  if (n >= y_hat.size() || n >= y.size()) throw Error(Errc::invalid_range, "rms window exceeds the data");
  double sum = 0.0;
  for (std::size_t i = m; i <= n; ++i) {
    const double d = y_hat[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(n - m + 1));
}

BandSplit split_bands(std::size_t pattern_length, IndexWindow window) {
  if (window.first > window.last || window.last >= pattern_length)
    throw Error(Errc::invalid_range, "band window outside the pattern");
  const std::size_t p = window.size();
  if (p < 3) throw Error(Errc::window_too_small, "band split needs at least 3 samples");
  const std::size_t low_len = p / 3;
  const std::size_t offset = (p - low_len + 1) / 2;
  BandSplit b;
  b.window = window;
  b.low = {window.first + offset, window.first + offset + low_len - 1};
  for (std::size_t i = window.first; i <= window.last; ++i)
    if (i < b.low.first || i > b.low.last) b.high.push_back(i);
  return b;
}

BandErrors band_errors(std::span<const double> y_hat, std::span<const double> y, const BandSplit &bands) {
  const std::size_t p = bands.window.size();
  if (y_hat.size() != p || y.size() != p) throw Error(Errc::invalid_range, "band inputs must cover the window exactly");
  const std::size_t base = bands.window.first;
  auto sq = [&](std::size_t abs_index) {
    const double d = y_hat[abs_index - base] - y[abs_index - base];
    return d * d;
  };
  double low = 0.0, high = 0.0;
  for (std::size_t i = bands.low.first; i <= bands.low.last; ++i) low += sq(i);
  for (std::size_t i : bands.high) high += sq(i);
  BandErrors e;
  e.global = rms_error(y_hat, y, 0, p - 1);
  e.low = std::sqrt(low / static_cast<double>(bands.low.size()));
  e.high = std::sqrt(high / static_cast<double>(bands.high.size()));
  return e;
}

double partition_residual(const BandErrors &e, const BandSplit &bands) {
  const double p = static_cast<double>(bands.window.size());
  const double l = static_cast<double>(bands.low.size());
  const double h = static_cast<double>(bands.high.size());
  return (p * e.global * e.global - (l * e.low * e.low + h * e.high * e.high)) / p;
}

double coherence_length(double wavelength, double distance, double aperture_diameter) {
  if (!(wavelength > 0.0) || !(distance > 0.0) || !(aperture_diameter > 0.0))
    throw Error(Errc::invalid_argument, "coherence length inputs must be positive");
  return wavelength * distance / aperture_diameter;
}

double kappa(double feature_size, double coherence_length) {
  if (!(feature_size > 0.0) || !(coherence_length > 0.0))
    throw Error(Errc::invalid_argument, "kappa inputs must be positive");
  return feature_size / coherence_length;
}

double half_width(std::span<const double> values, double pitch) {
  if (values.size() < 3) throw Error(Errc::no_peak, "profile too short");
  const auto peak_it = std::max_element(values.begin(), values.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - values.begin());
  const double max = *peak_it;
  if (*std::min_element(values.begin(), values.end()) == max) throw Error(Errc::no_peak, "profile is flat");
  if (peak == 0 || peak + 1 == values.size()) throw Error(Errc::no_peak, "maximum lies on the boundary");
  const double half = 0.5 * max;

  // Walk outward to the first sample at or below half maximum.
  std::size_t r = peak;
  while (r + 1 < values.size() && values[r] > half) ++r;
  std::size_t l = peak;
  while (l > 0 && values[l] > half) --l;
  if (values[r] > half || values[l] > half) throw Error(Errc::no_peak, "profile never falls to half maximum");

  const double right = static_cast<double>(r - 1) + (values[r - 1] - half) / (values[r - 1] - values[r]);
  const double left = static_cast<double>(l + 1) - (values[l + 1] - half) / (values[l + 1] - values[l]);
  return (right - left) * pitch;
}

ThresholdResult min_n_to_threshold(const std::function<BandErrors(std::uint64_t)> &errors_at, double tau,
                                   std::span<const std::uint64_t> schedule, std::uint64_t n_max) {
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "threshold must be positive");
  ThresholdResult res;
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const std::uint64_t n = schedule[i];
    if (n > n_max) break;
    if (i > 0 && n <= prev) throw Error(Errc::invalid_argument, "schedule must be strictly increasing");
    prev = n;
    const BandErrors e = errors_at(n);
    res.curve.checkpoints.push_back({n, e});
    if (res.reached) {
      res.stable = e.global <= tau;
      break;
    }
    res.n_star = n;
    res.at_n_star = e;
    if (e.global <= tau) res.reached = true;
  }
  return res;
}

ThresholdResult first_crossing(const ConvergenceCurve &curve, double tau) {
  std::vector<std::uint64_t> schedule;
  for (const auto &c : curve.checkpoints) schedule.push_back(c.n);
  std::size_t k = 0;
  auto lookup = [&](std::uint64_t) { return curve.checkpoints[k++].errors; };
  const std::uint64_t n_max = schedule.empty() ? 0 : schedule.back();
  ThresholdResult r = min_n_to_threshold(lookup, tau, schedule, n_max);
  r.curve.config_hash = curve.config_hash;
  return r;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

} // namespace

double rank_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_argument, "rank correlation needs paired samples");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::uint64_t> geometric_schedule(std::uint64_t start, std::uint64_t factor, std::size_t count) {
  if (start == 0 || factor < 2) throw Error(Errc::invalid_argument, "geometric schedule needs start > 0, factor >= 2");
  std::vector<std::uint64_t> s;
  std::uint64_t n = start;
  for (std::size_t i = 0; i < count; ++i, n *= factor) s.push_back(n);
  return s;
}

std::vector<std::uint64_t> arithmetic_schedule(std::uint64_t start, std::uint64_t step, std::uint64_t stop) {
  if (start == 0 || step == 0) throw Error(Errc::invalid_argument, "arithmetic schedule needs positive start and step");
  std::vector<std::uint64_t> s;
  for (std::uint64_t n = start; n <= stop; n += step) s.push_back(n);
  return s;
}

} // namespace ghostconv
