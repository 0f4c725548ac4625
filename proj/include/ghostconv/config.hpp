#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostconv/analyze.hpp"

namespace ghostconv {

/// Everything that determines a run. Lengths are in metres. Defaults are the
/// desk-scale setup described in the README; only the optical geometry
/// (wavelength, distances, slit sizes, detector pitch, threshold) follows
/// the published experiment.
struct ExperimentConfig {
  double wavelength = 0.532e-6;
  double d1 = 0.060;
  double d2 = 0.075;
  double d = 0.135;

  std::size_t source_points = 1024;
  double source_pitch = 5e-6;
  std::size_t object_points = 512;
  double object_pitch = 1e-6;
  std::size_t detector_points = 256;
  double detector_pitch = 1.557e-6;
  double bucket_position = 0.0;

  double slit_width = 105e-6;
  double slit_separation = 303e-6;
  std::filesystem::path mask_file; // empty: double slit

  std::vector<double> phi_list{4.0e-3};
  double sigma2 = 1.0;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> schedule = geometric_schedule(1000, 2, 7);
  std::uint64_t n_max = 0; // 0: last scheduled N
  double tau = 0.07;
  unsigned workers = 1;
  std::size_t chunk_size = 256;
  std::optional<IndexWindow> window; // default: full detector
  bool override_geometry = false;
  bool write_records = false;
  bool fused_test_arm = true;

  std::size_t speckle_points = 256;
  double speckle_output_pitch = 1.557e-6;
  double speckle_distance = 0.060;
  std::vector<double> speckle_phi_list{2.5e-3, 1.25e-3, 0.625e-3, 0.3125e-3};
  std::uint64_t speckle_realizations = 20000;
  std::size_t speckle_crop = 128;

  std::uint64_t effective_n_max() const noexcept { return n_max ? n_max : (schedule.empty() ? 0 : schedule.back()); }
  IndexWindow effective_window() const noexcept { return window.value_or(IndexWindow::full(detector_points)); }
};

/// Throws config on any violated constraint, including d != d1 + d2
/// (relative 1e-12) unless override_geometry is set.
void validate(const ExperimentConfig &cfg);

/// Parses "key = value" lines ('#' starts a comment). Unknown keys are
/// rejected. Lengths accept nm/um/mm/m suffixes. Starts from `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base = {});

/// Applies one key/value pair; shared by the file parser and CLI flags.
void set_option(ExperimentConfig &cfg, std::string_view key, std::string_view value);

/// "1000,2000,4000", "geometric:START:FACTOR:COUNT" or
/// "arithmetic:START:STEP:STOP".
std::vector<std::uint64_t> parse_schedule(std::string_view text);

std::vector<double> parse_length_list(std::string_view text);

/// Canonical key = value dump; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig &cfg);

/// Short stable identifier (FNV-1a of to_text).
std::string config_hash(const ExperimentConfig &cfg);

} // namespace ghostconv
