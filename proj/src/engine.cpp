#include "ghostconv/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "ghostconv/error.hpp"
#include "ghostconv/records.hpp"

namespace ghostconv {

CorrelationRun::CorrelationRun(const Grid &pattern_grid, BatchProducer producer, unsigned workers,
                               std::size_t chunk_size, std::size_t batch)
    : grid_(pattern_grid), producer_(std::move(producer)), workers_(std::max(1u, workers)),
      chunk_size_(chunk_size), batch_(std::max<std::size_t>(1, batch)), acc_(pattern_grid) {
  if (chunk_size_ == 0) throw Error(Errc::invalid_argument, "chunk size must be positive");
}

const CorrelationAccumulator &CorrelationRun::advance_to(std::uint64_t n) {
  if (n < acc_.count()) throw Error(Errc::invalid_argument, "cannot rewind a correlation run");
  const std::size_t p = grid_.size();

  struct Chunk {
    std::uint64_t first;
    std::size_t count;
  };
  std::vector<Chunk> chunks;
  for (std::uint64_t s = acc_.count(); s < n; s += chunk_size_)
    chunks.push_back({s, static_cast<std::size_t>(std::min<std::uint64_t>(chunk_size_, n - s))});

  // Bound memory by processing a limited number of chunks per wave.
  const std::size_t wave = std::max<std::size_t>(4 * workers_, 8);
  for (std::size_t w0 = 0; w0 < chunks.size(); w0 += wave) {
    const std::size_t w1 = std::min(chunks.size(), w0 + wave);
    std::vector<CorrelationAccumulator> partial(w1 - w0, CorrelationAccumulator(grid_));
    std::vector<std::vector<double>> rec_i1(sink_ ? w1 - w0 : 0), rec_i2(sink_ ? w1 - w0 : 0);

    auto run_chunk = [&](std::size_t k) {
      const Chunk c = chunks[w0 + k];
      std::vector<double> i1(batch_), i2(batch_ * p);
      if (sink_) {
        rec_i1[k].reserve(c.count);
        rec_i2[k].reserve(c.count * p);
      }
      for (std::size_t done = 0; done < c.count; done += batch_) {
        const std::size_t b = std::min(batch_, c.count - done);
        producer_(c.first + done, b, std::span(i1).first(b), std::span(i2).first(b * p));
        for (std::size_t r = 0; r < b; ++r) partial[k].update(i1[r], std::span<const double>(i2).subspan(r * p, p));
        if (sink_) {
          rec_i1[k].insert(rec_i1[k].end(), i1.begin(), i1.begin() + static_cast<std::ptrdiff_t>(b));
          rec_i2[k].insert(rec_i2[k].end(), i2.begin(), i2.begin() + static_cast<std::ptrdiff_t>(b * p));
        }
      }
    };

    const std::size_t nthreads = std::min<std::size_t>(workers_, w1 - w0);
    if (nthreads <= 1) {
      for (std::size_t k = 0; k < w1 - w0; ++k) run_chunk(k);
    } else {
      std::atomic<std::size_t> next{0};
      std::exception_ptr error;
      std::atomic<bool> failed{false};
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
          for (std::size_t k; !failed && (k = next.fetch_add(1)) < w1 - w0;) {
            try {
              run_chunk(k);
            } catch (...) {
              if (!failed.exchange(true)) error = std::current_exception();
            }
          }
        });
      for (auto &th : pool) th.join();
      if (error) std::rethrow_exception(error);
    }

    for (std::size_t k = 0; k < w1 - w0; ++k) {
      acc_.merge(partial[k]);
      if (sink_)
        for (std::size_t r = 0; r < chunks[w0 + k].count; ++r)
          sink_->append(rec_i1[k][r], std::span<const double>(rec_i2[k]).subspan(r * p, p));
    }
  }
  return acc_;
}

} // namespace ghostconv
