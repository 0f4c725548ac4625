#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ghostconv/analyze.hpp"
#include "ghostconv/config.hpp"
#include "ghostconv/correlate.hpp"
#include "ghostconv/records.hpp"
#include "ghostconv/scene.hpp"

namespace ghostconv {

inline constexpr const char *kVersion = "0.1.0";

/// Progress messages; may be empty.
using LogFn = std::function<void(const std::string &)>;

/// Detector window, band split and normalized reference pattern used to
/// score reconstructions.
struct ScoringSetup {
  Grid detector;
  IndexWindow window;
  BandSplit bands;
  std::vector<double> reference; // normalized over the window
};

ScoringSetup scoring_setup(const ExperimentConfig &cfg, const TransmissionMask &mask);

struct Checkpoint {
  std::uint64_t n = 0;
  std::vector<double> g;              // raw correlation over the full detector
  std::vector<double> reconstruction; // normalized over the window
  BandErrors errors;
};

Checkpoint evaluate(const CorrelationAccumulator &acc, const ScoringSetup &setup);

struct ConvergeResult {
  double phi = 0.0;
  double coherence_length = 0.0;
  double kappa = 0.0;
  ScoringSetup setup;
  std::vector<Checkpoint> checkpoints;
  ConvergenceCurve curve;
};

/// Single-aperture convergence run over the whole schedule. Realizations
/// are drawn once and reused cumulatively across checkpoints. When
/// `records` is set every realization is also written there.
ConvergeResult run_converge(const ExperimentConfig &cfg, const std::optional<std::filesystem::path> &records = {},
                            const LogFn &log = {});

/// Rebuilds a convergence run from a record file instead of simulating.
/// The file must match the config's geometry, aperture and seed, and hold
/// at least the last scheduled N.
ConvergeResult replay_converge(const ExperimentConfig &cfg, const std::filesystem::path &records,
                               const LogFn &log = {});

struct KappaPoint {
  double phi = 0.0;
  double coherence_length = 0.0;
  double kappa = 0.0;
  ThresholdResult result;
  double partition_residual = 0.0; // at n_star
};

/// Minimal N per aperture in phi_list (at least two), each on its own
/// stream range.
std::vector<KappaPoint> run_kappa_sweep(const ExperimentConfig &cfg, const LogFn &log = {});

/// Same protocol as the sweep; every row is checked against the band
/// partition identity (throws if it is off by more than 1e-12).
std::vector<KappaPoint> run_bands(const ExperimentConfig &cfg, const LogFn &log = {});

struct SpeckleResult {
  double phi = 0.0;
  double coherence_length = 0.0;
  double fwhm_x = 0.0, fwhm_y = 0.0, fwhm = 0.0;
  double mu2_ref = 0.0;
  std::uint64_t n = 0;
  RealPattern snapshot; // intensity of realization 0
  RealPattern mu2;      // |mu|^2 over the crop
};

std::vector<SpeckleResult> run_speckle(const ExperimentConfig &cfg, const LogFn &log = {});

/// Header describing a ghost run for the record file.
RecordHeader make_header(const ExperimentConfig &cfg, double phi, std::uint64_t offset);

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_pattern_csv(const std::filesystem::path &path, const ScoringSetup &setup, const Checkpoint &cp);
void write_curve_csv(const std::filesystem::path &path, const ConvergenceCurve &curve);
void write_kappa_csv(const std::filesystem::path &path, const std::vector<KappaPoint> &points);
void write_bands_csv(const std::filesystem::path &path, const std::vector<KappaPoint> &points);
void write_speckle_csv(const std::filesystem::path &path, const std::vector<SpeckleResult> &results);
/// Row-major matrix, one grid row per line.
void write_matrix_csv(const std::filesystem::path &path, const RealPattern &pattern);

/// Writes pattern_N<n>.csv per checkpoint and curve.csv; returns the file names.
std::vector<std::string> write_converge_outputs(const std::filesystem::path &dir, const ConvergeResult &r);

/// manifest.json with the config echo, seed, version, command and outputs.
void write_manifest(const std::filesystem::path &path, const ExperimentConfig &cfg, const std::string &command,
                    const std::vector<std::string> &outputs);

} // namespace ghostconv
