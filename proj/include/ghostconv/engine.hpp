#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "ghostconv/correlate.hpp"

namespace ghostconv {

class RecordWriter;

/// Produces realizations [first, first + count): i1 gets count values, i2
/// count * pattern size values. Called concurrently from several workers.
using BatchProducer =
    std::function<void(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2)>;

/// Drives a producer into a CorrelationAccumulator up to requested sample
/// counts.
///
/// Realizations are grouped into chunks of `chunk_size`, also cut at every
/// requested count. Each chunk is accumulated on its own, then chunks are
/// merged in index order. The partition depends only on the sequence of
/// advance_to() targets, never on the worker count, so the result is
/// bitwise identical for any number of workers.
class CorrelationRun {
public:
  CorrelationRun(const Grid &pattern_grid, BatchProducer producer, unsigned workers, std::size_t chunk_size,
                 std::size_t batch = 32);

  /// Optional sink receiving every realization in index order.
  void set_record_sink(RecordWriter *sink) noexcept { sink_ = sink; }

  /// Accumulate up to n realizations in total (n >= position()).
  const CorrelationAccumulator &advance_to(std::uint64_t n);

  std::uint64_t position() const noexcept { return acc_.count(); }
  const CorrelationAccumulator &accumulator() const noexcept { return acc_; }

private:
  Grid grid_;
  BatchProducer producer_;
  unsigned workers_;
  std::size_t chunk_size_;
  std::size_t batch_;
  RecordWriter *sink_ = nullptr;
  CorrelationAccumulator acc_;
};

} // namespace ghostconv
