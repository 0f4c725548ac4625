#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "ghostconv/correlate.hpp"

namespace ghostconv {

/// Binary header shared by record files and accumulator snapshots.
/// Layout (little-endian, 112 bytes): magic "GIDAT1", version u8, kind u8,
/// detector points u64, pitch f64, origin f64, wavelength, d1, d2, d, phi,
/// sigma2 (f64 each), seed u64, stream offset u64, first index u64, count u64.
struct RecordHeader {
  enum class Kind : std::uint8_t { records = 0, snapshot = 1 };
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kSize = 112;

  Kind kind = Kind::records;
  std::uint64_t detector_points = 0;
  double detector_pitch = 0.0;
  double detector_origin = 0.0;
  double wavelength = 0.0, d1 = 0.0, d2 = 0.0, d = 0.0, phi = 0.0, sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_offset = 0;
  std::uint64_t first_index = 0;
  std::uint64_t count = 0;

  Grid detector_grid() const;
  friend bool operator==(const RecordHeader &, const RecordHeader &) = default;
};

/// Per-realization records: i1 then the detector pattern, all f64.
struct OfflineRecordFile {
  RecordHeader header;
  std::vector<double> i1;
  std::vector<double> i2; // count * detector_points, realization-major
};

/// Streams records to disk; the header count is patched on close().
class RecordWriter {
public:
  RecordWriter(const std::filesystem::path &path, RecordHeader header);
  ~RecordWriter();
  RecordWriter(const RecordWriter &) = delete;
  RecordWriter &operator=(const RecordWriter &) = delete;

  void append(double i1, std::span<const double> i2);
  void close();
  std::uint64_t count() const noexcept { return header_.count; }

private:
  std::filesystem::path path_;
  std::ofstream out_;
  RecordHeader header_;
};

void write_records(const std::filesystem::path &path, const OfflineRecordFile &file);

/// Throws io on open failure, format on bad magic/version/kind or when the
/// file size disagrees with the header count (truncation).
OfflineRecordFile read_records(const std::filesystem::path &path);
RecordHeader read_header(const std::filesystem::path &path);

/// Random-access reads of realizations [first, first + count) relative to
/// the file's first record. Safe to call from several threads.
class RecordReader {
public:
  explicit RecordReader(std::filesystem::path path);
  const RecordHeader &header() const noexcept { return header_; }
  void read(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const;

private:
  std::filesystem::path path_;
  RecordHeader header_;
};

/// Accumulator snapshot: header (kind snapshot, count = n) followed by
/// s1 sum/comp, then s2, c2, s12, c12 arrays.
void write_snapshot(const std::filesystem::path &path, RecordHeader header, const CorrelationAccumulator &acc);
CorrelationAccumulator read_snapshot(const std::filesystem::path &path, RecordHeader *header_out = nullptr);

} // namespace ghostconv
