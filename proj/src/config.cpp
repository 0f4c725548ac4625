#include "ghostconv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ghostconv/error.hpp"

namespace ghostconv {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(Errc::config, std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) bad(key, text, "not a number");
  return v;
}

double parse_length(std::string_view key, std::string_view text) {
  text = trim(text);
  struct Unit {
    std::string_view suffix;
    double scale;
  };
  static constexpr Unit units[] = {{"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"m", 1.0}};
  for (const auto &u : units)
    if (text.size() > u.suffix.size() && text.ends_with(u.suffix))
      return parse_double(key, text.substr(0, text.size() - u.suffix.size())) * u.scale;
  return parse_double(key, text);
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad(key, text, "not a non-negative integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad(key, text, "not a boolean");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T, class F> std::string join(const std::vector<T> &xs, F &&f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

} // namespace

std::vector<std::uint64_t> parse_schedule(std::string_view text) {
  text = trim(text);
  auto fields = split(text, ':');
  std::vector<std::uint64_t> s;
  if (fields.size() == 4 && fields[0] == "geometric")
    s = geometric_schedule(parse_uint("schedule", fields[1]), parse_uint("schedule", fields[2]),
                           parse_uint("schedule", fields[3]));
  else if (fields.size() == 4 && fields[0] == "arithmetic")
    s = arithmetic_schedule(parse_uint("schedule", fields[1]), parse_uint("schedule", fields[2]),
                            parse_uint("schedule", fields[3]));
  else if (fields.size() == 1)
    for (auto part : split(text, ',')) s.push_back(parse_uint("schedule", part));
  else
    bad("schedule", text, "expected a list, geometric:START:FACTOR:COUNT or arithmetic:START:STEP:STOP");
  return s;
}

std::vector<double> parse_length_list(std::string_view text) {
  std::vector<double> v;
  for (auto part : split(text, ',')) v.push_back(parse_length("list", part));
  return v;
}

void set_option(ExperimentConfig &c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "wavelength") c.wavelength = parse_length(key, value);
  else if (key == "d1") c.d1 = parse_length(key, value);
  else if (key == "d2") c.d2 = parse_length(key, value);
  else if (key == "d") c.d = parse_length(key, value);
  else if (key == "source_points") c.source_points = parse_uint(key, value);
  else if (key == "source_pitch") c.source_pitch = parse_length(key, value);
  else if (key == "object_points") c.object_points = parse_uint(key, value);
  else if (key == "object_pitch") c.object_pitch = parse_length(key, value);
  else if (key == "detector_points") c.detector_points = parse_uint(key, value);
  else if (key == "detector_pitch") c.detector_pitch = parse_length(key, value);
  else if (key == "bucket_position") c.bucket_position = parse_length(key, value);
  else if (key == "slit_width") c.slit_width = parse_length(key, value);
  else if (key == "slit_separation") c.slit_separation = parse_length(key, value);
  else if (key == "mask_file") c.mask_file = std::string(value);
  else if (key == "phi") c.phi_list = {parse_length(key, value)};
  else if (key == "phi_list") c.phi_list = parse_length_list(value);
  else if (key == "sigma2") c.sigma2 = parse_double(key, value);
  else if (key == "seed") c.seed = parse_uint(key, value);
  else if (key == "schedule") c.schedule = parse_schedule(value);
  else if (key == "n_max") c.n_max = parse_uint(key, value);
  else if (key == "tau") c.tau = parse_double(key, value);
  else if (key == "workers") c.workers = static_cast<unsigned>(parse_uint(key, value));
  else if (key == "chunk_size") c.chunk_size = parse_uint(key, value);
  else if (key == "window") {
    if (value.empty() || value == "full") {
      c.window.reset();
    } else {
      auto parts = split(value, ':');
      if (parts.size() != 2) bad(key, value, "expected FIRST:LAST");
      c.window = IndexWindow{parse_uint(key, parts[0]), parse_uint(key, parts[1])};
    }
  } else if (key == "override_geometry") c.override_geometry = parse_bool(key, value);
  else if (key == "write_records") c.write_records = parse_bool(key, value);
  else if (key == "fused_test_arm") c.fused_test_arm = parse_bool(key, value);
  else if (key == "speckle_points") c.speckle_points = parse_uint(key, value);
  else if (key == "speckle_output_pitch") c.speckle_output_pitch = parse_length(key, value);
  else if (key == "speckle_distance") c.speckle_distance = parse_length(key, value);
  else if (key == "speckle_phi_list") c.speckle_phi_list = parse_length_list(value);
  else if (key == "speckle_realizations") c.speckle_realizations = parse_uint(key, value);
  else if (key == "speckle_crop") c.speckle_crop = parse_uint(key, value);
  else throw Error(Errc::config, "unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig c) {
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::config, "line " + std::to_string(lineno) + ": expected key = value");
    set_option(c, line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void validate(const ExperimentConfig &c) {
  auto positive = [](const char *name, double v) {
    if (!(v > 0.0)) throw Error(Errc::config, std::string(name) + " must be positive");
  };
  positive("wavelength", c.wavelength);
  positive("d1", c.d1);
  positive("d2", c.d2);
  positive("d", c.d);
  positive("source_pitch", c.source_pitch);
  positive("object_pitch", c.object_pitch);
  positive("detector_pitch", c.detector_pitch);
  positive("slit_width", c.slit_width);
  positive("slit_separation", c.slit_separation);
  positive("sigma2", c.sigma2);
  positive("tau", c.tau);
  positive("speckle_output_pitch", c.speckle_output_pitch);
  positive("speckle_distance", c.speckle_distance);
  if (!c.override_geometry && std::abs(c.d - (c.d1 + c.d2)) > 1e-12 * c.d)
    throw Error(Errc::config, "reference-arm distance d must equal d1 + d2 (set override_geometry to bypass)");
  if (c.source_points < 2 || c.object_points < 2 || c.detector_points < 2)
    throw Error(Errc::config, "grids need at least 2 points");
  if (c.phi_list.empty()) throw Error(Errc::config, "phi_list is empty");
  for (double phi : c.phi_list) positive("phi", phi);
  for (double phi : c.speckle_phi_list) positive("speckle phi", phi);
  if (c.schedule.empty()) throw Error(Errc::config, "schedule is empty");
  for (std::size_t i = 0; i < c.schedule.size(); ++i) {
    if (c.schedule[i] < 2) throw Error(Errc::config, "scheduled N must be at least 2");
    if (i && c.schedule[i] <= c.schedule[i - 1]) throw Error(Errc::config, "schedule must be strictly increasing");
  }
  if (c.n_max && c.n_max < c.schedule.front()) throw Error(Errc::config, "n_max is below the first scheduled N");
  if (c.workers == 0) throw Error(Errc::config, "workers must be at least 1");
  if (c.chunk_size == 0) throw Error(Errc::config, "chunk_size must be positive");
  if (c.window && (c.window->first > c.window->last || c.window->last >= c.detector_points ||
                   c.window->size() < 3))
    throw Error(Errc::config, "window must lie inside the detector and span at least 3 pixels");
  if (c.speckle_points < 2 || c.speckle_crop < 3 || c.speckle_crop > c.speckle_points ||
      (c.speckle_points - c.speckle_crop) % 2 != 0)
    throw Error(Errc::config, "speckle_crop must be in [3, speckle_points] with an even margin");
  if (c.speckle_realizations < 2) throw Error(Errc::config, "speckle_realizations must be at least 2");
}

std::string to_text(const ExperimentConfig &c) {
  std::ostringstream os;
  auto len = [](double v) { return fmt(v); };
  os << "wavelength = " << fmt(c.wavelength) << '\n'
     << "d1 = " << fmt(c.d1) << '\n'
     << "d2 = " << fmt(c.d2) << '\n'
     << "d = " << fmt(c.d) << '\n'
     << "source_points = " << c.source_points << '\n'
     << "source_pitch = " << fmt(c.source_pitch) << '\n'
     << "object_points = " << c.object_points << '\n'
     << "object_pitch = " << fmt(c.object_pitch) << '\n'
     << "detector_points = " << c.detector_points << '\n'
     << "detector_pitch = " << fmt(c.detector_pitch) << '\n'
     << "bucket_position = " << fmt(c.bucket_position) << '\n'
     << "slit_width = " << fmt(c.slit_width) << '\n'
     << "slit_separation = " << fmt(c.slit_separation) << '\n';
  if (!c.mask_file.empty()) os << "mask_file = " << c.mask_file.string() << '\n';
  os << "phi_list = " << join(c.phi_list, len) << '\n'
     << "sigma2 = " << fmt(c.sigma2) << '\n'
     << "seed = " << c.seed << '\n'
     << "schedule = " << join(c.schedule, [](std::uint64_t n) { return std::to_string(n); }) << '\n'
     << "n_max = " << c.n_max << '\n'
     << "tau = " << fmt(c.tau) << '\n'
     << "workers = " << c.workers << '\n'
     << "chunk_size = " << c.chunk_size << '\n'
     << "window = " << (c.window ? std::to_string(c.window->first) + ":" + std::to_string(c.window->last) : "full")
     << '\n'
     << "override_geometry = " << (c.override_geometry ? "true" : "false") << '\n'
     << "write_records = " << (c.write_records ? "true" : "false") << '\n'
     << "fused_test_arm = " << (c.fused_test_arm ? "true" : "false") << '\n'
     << "speckle_points = " << c.speckle_points << '\n'
     << "speckle_output_pitch = " << fmt(c.speckle_output_pitch) << '\n'
     << "speckle_distance = " << fmt(c.speckle_distance) << '\n'
     << "speckle_phi_list = " << join(c.speckle_phi_list, len) << '\n'
     << "speckle_realizations = " << c.speckle_realizations << '\n'
     << "speckle_crop = " << c.speckle_crop << '\n';
  return os.str();
}

std::string config_hash(const ExperimentConfig &c) {
  // Worker count does not affect results, so it is left out of the hash.
  ExperimentConfig copy = c;
  copy.workers = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(copy)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

} // namespace ghostconv
