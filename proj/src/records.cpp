#include "ghostconv/records.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "ghostconv/error.hpp"

namespace ghostconv {

namespace {

constexpr std::array<char, 6> kMagic{'G', 'I', 'D', 'A', 'T', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

void put_u64(std::vector<char> &buf, std::uint64_t v) {
  v = to_le(v);
  char b[8];
  std::memcpy(b, &v, 8);
  buf.insert(buf.end(), b, b + 8);
}
void put_f64(std::vector<char> &buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const char *p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return to_le(v);
}
double get_f64(const char *p) { return std::bit_cast<double>(get_u64(p)); }

std::vector<char> encode_header(const RecordHeader &h) {
  std::vector<char> buf(kMagic.begin(), kMagic.end());
  buf.push_back(static_cast<char>(RecordHeader::kVersion));
  buf.push_back(static_cast<char>(h.kind));
  put_u64(buf, h.detector_points);
  put_f64(buf, h.detector_pitch);
  put_f64(buf, h.detector_origin);
  for (double v : {h.wavelength, h.d1, h.d2, h.d, h.phi, h.sigma2}) put_f64(buf, v);
  for (std::uint64_t v : {h.seed, h.stream_offset, h.first_index, h.count}) put_u64(buf, v);
  return buf;
}

RecordHeader decode_header(std::istream &in) {
  std::array<char, RecordHeader::kSize> buf{};
  if (!in.read(buf.data(), buf.size())) throw Error(Errc::format, "file shorter than the record header");
  if (!std::equal(kMagic.begin(), kMagic.end(), buf.begin())) throw Error(Errc::format, "bad magic (not a GIDAT1 file)");
  if (static_cast<std::uint8_t>(buf[6]) != RecordHeader::kVersion) throw Error(Errc::format, "unsupported version");
  const auto kind = static_cast<std::uint8_t>(buf[7]);
  if (kind > 1) throw Error(Errc::format, "unknown record kind");
  RecordHeader h;
  h.kind = static_cast<RecordHeader::Kind>(kind);
  const char *p = buf.data() + 8;
  h.detector_points = get_u64(p), p += 8;
  h.detector_pitch = get_f64(p), p += 8;
  h.detector_origin = get_f64(p), p += 8;
  for (double *v : {&h.wavelength, &h.d1, &h.d2, &h.d, &h.phi, &h.sigma2}) *v = get_f64(p), p += 8;
  for (std::uint64_t *v : {&h.seed, &h.stream_offset, &h.first_index, &h.count}) *v = get_u64(p), p += 8;
  return h;
}

void write_doubles(std::ostream &out, std::span<const double> v) {
  std::vector<char> buf;
  buf.reserve(v.size() * 8);
  for (double x : v) put_f64(buf, x);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_doubles(std::istream &in, std::span<double> v) {
  std::vector<char> buf(v.size() * 8);
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) throw Error(Errc::format, "record data truncated");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_f64(buf.data() + 8 * i);
}

std::uintmax_t expected_size(const RecordHeader &h) {
  return RecordHeader::kSize + h.count * (1 + h.detector_points) * 8;
}

RecordHeader open_checked(const std::filesystem::path &path, std::ifstream &in, RecordHeader::Kind kind) {
  in.open(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  RecordHeader h = decode_header(in);
  if (h.kind != kind) throw Error(Errc::format, "unexpected record kind in " + path.string());
  return h;
}

} // namespace

Grid RecordHeader::detector_grid() const { return make_line(detector_points, detector_pitch, detector_origin); }

RecordWriter::RecordWriter(const std::filesystem::path &path, RecordHeader header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), header_(header) {
  if (!out_) throw Error(Errc::io, "cannot create " + path.string());
  header_.kind = RecordHeader::Kind::records;
  header_.count = 0;
  const auto buf = encode_header(header_);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

RecordWriter::~RecordWriter() {
  try {
    close();
  } catch (...) {
  }
}

void RecordWriter::append(double i1, std::span<const double> i2) {
  if (i2.size() != header_.detector_points) throw Error(Errc::grid_mismatch, "record pattern size differs from header");
  write_doubles(out_, std::span<const double>(&i1, 1));
  write_doubles(out_, i2);
  if (!out_) throw Error(Errc::io, "write failed on " + path_.string());
  ++header_.count;
}

void RecordWriter::close() {
  if (!out_.is_open()) return;
  out_.seekp(0);
  const auto buf = encode_header(header_);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out_.close();
  if (out_.fail()) throw Error(Errc::io, "closing " + path_.string() + " failed");
}

void write_records(const std::filesystem::path &path, const OfflineRecordFile &file) {
  const std::size_t p = file.header.detector_points;
  if (file.i2.size() != file.i1.size() * p) throw Error(Errc::invalid_argument, "record arrays inconsistent");
  RecordWriter w(path, file.header);
  for (std::size_t n = 0; n < file.i1.size(); ++n) w.append(file.i1[n], std::span(file.i2).subspan(n * p, p));
  w.close();
}

RecordHeader read_header(const std::filesystem::path &path) {
  std::ifstream in;
  const RecordHeader h = open_checked(path, in, RecordHeader::Kind::records);
  if (std::filesystem::file_size(path) != expected_size(h))
    throw Error(Errc::format, "record count in header disagrees with file size (truncated?)");
  return h;
}

OfflineRecordFile read_records(const std::filesystem::path &path) {
  OfflineRecordFile f;
  f.header = read_header(path);
  RecordReader reader(path);
  f.i1.resize(f.header.count);
  f.i2.resize(f.header.count * f.header.detector_points);
  reader.read(0, f.header.count, f.i1, f.i2);
  return f;
}

RecordReader::RecordReader(std::filesystem::path path) : path_(std::move(path)), header_(read_header(path_)) {}

void RecordReader::read(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const {
  const std::size_t p = header_.detector_points;
  if (first + count > header_.count) throw Error(Errc::format, "requested records beyond the end of the file");
  if (i1.size() < count || i2.size() < count * p) throw Error(Errc::invalid_argument, "record read buffer too small");
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path_.string());
  in.seekg(static_cast<std::streamoff>(RecordHeader::kSize + first * (1 + p) * 8));
  for (std::size_t n = 0; n < count; ++n) {
    read_doubles(in, i1.subspan(n, 1));
    read_doubles(in, i2.subspan(n * p, p));
  }
}

void write_snapshot(const std::filesystem::path &path, RecordHeader header, const CorrelationAccumulator &acc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create " + path.string());
  header.kind = RecordHeader::Kind::snapshot;
  header.count = acc.count();
  header.detector_points = acc.grid().size();
  header.detector_pitch = acc.grid().pitch[0];
  header.detector_origin = acc.grid().origin[0];
  const auto h = encode_header(header);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  const auto st = acc.state();
  const double s1[2] = {st.s1.sum, st.s1.comp};
  write_doubles(out, s1);
  for (const auto *v : {&st.s2, &st.c2, &st.s12, &st.c12}) write_doubles(out, *v);
  if (!out) throw Error(Errc::io, "write failed on " + path.string());
}

CorrelationAccumulator read_snapshot(const std::filesystem::path &path, RecordHeader *header_out) {
  std::ifstream in;
  const RecordHeader h = open_checked(path, in, RecordHeader::Kind::snapshot);
  const std::size_t p = h.detector_points;
  if (std::filesystem::file_size(path) != RecordHeader::kSize + (2 + 4 * p) * 8)
    throw Error(Errc::format, "snapshot size disagrees with header");
  CorrelationAccumulator::State st;
  st.count = h.count;
  double s1[2];
  read_doubles(in, s1);
  st.s1 = {s1[0], s1[1]};
  for (auto *v : {&st.s2, &st.c2, &st.s12, &st.c12}) {
    v->resize(p);
    read_doubles(in, *v);
  }
  if (header_out) *header_out = h;
  return CorrelationAccumulator::from_state(h.detector_grid(), std::move(st));
}

} // namespace ghostconv
