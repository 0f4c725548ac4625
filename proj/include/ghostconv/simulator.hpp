#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghostconv/config.hpp"
#include "ghostconv/propagate.hpp"
#include "ghostconv/scene.hpp"
#include "ghostconv/source.hpp"

namespace ghostconv {

/// Realization streams of different aperture settings in one run are kept
/// apart by offsetting the realization index by slot << 40.
constexpr std::uint64_t stream_offset(std::uint64_t slot) noexcept { return slot << 40; }

struct Realization {
  double i1 = 0.0;
  RealPattern i2;
};

/// Lensless ghost-interference setup for one aperture diameter.
///
/// Test arm: source -> d1 -> mask -> d2 -> point detector at bucket_position.
/// Reference arm: source -> d -> resolving detector. Kernels are built once
/// and shared read-only by every realization.
///
/// The test arm is linear in the source field, so by default the three
/// steps are pre-composed into one weight per source sample; the literal
/// chain is kept (fused_test_arm = false, or test_arm_chain()) and agrees to
/// rounding.
class GhostSimulator {
public:
  GhostSimulator(const ExperimentConfig &cfg, double phi, std::uint64_t offset = 0);

  const SourceSpec &source() const noexcept { return source_; }
  const Grid &object_grid() const noexcept { return mask_.grid; }
  const Grid &detector_grid() const noexcept { return reference_.grid_out(); }
  const TransmissionMask &mask() const noexcept { return mask_; }
  const PropagationKernel &object_kernel() const noexcept { return object_kernel_; }
  const PropagationKernel &reference_kernel() const noexcept { return reference_; }
  double phi() const noexcept { return source_.aperture_diameter; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t offset() const noexcept { return offset_; }

  /// Realization n (0-based, before the slot offset).
  Realization run_realization(std::uint64_t n) const;

  /// Realizations first .. first + count - 1. i1 gets `count` values, i2
  /// count * detector size values (realization-major). Bitwise identical to
  /// calling run_realization for each.
  void run_batch(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const;

  /// Source field of realization n.
  ComplexField source_field(std::uint64_t n) const;

  /// Bucket field by propagate(d1) -> apply_mask -> propagate_to_point(d2).
  Complex test_arm_chain(const ComplexField &source) const;
  /// Bucket field through the pre-composed weights.
  Complex test_arm_fused(const ComplexField &source) const;

  /// Sampling warnings of all kernels in the setup.
  std::vector<std::string> sampling_warnings() const;

private:
  void run_block(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const;

  SourceSpec source_;
  std::uint64_t seed_;
  std::uint64_t offset_;
  double d2_;
  double bucket_;
  bool fused_;
  std::size_t ap_first_ = 0;
  std::size_t ap_count_ = 0;
  TransmissionMask mask_;
  PropagationKernel object_kernel_;
  PropagationKernel reference_;
  std::vector<double> w_re_, w_im_;
};

/// 2D speckle setup: a disk source propagated by the one-step FFT kernel to
/// a plane at speckle_distance, observed on a central crop.
class SpeckleSimulator {
public:
  SpeckleSimulator(const ExperimentConfig &cfg, double phi, std::uint64_t offset = 0);

  const Grid &crop_grid() const noexcept { return crop_; }
  const PropagationKernel &kernel() const noexcept { return kernel_; }
  std::size_t reference_index() const noexcept { return ref_; }

  /// Intensity of realization n on the crop.
  RealPattern intensity_crop(std::uint64_t n) const;

  /// i1 = crop intensity at the reference pixel, i2 = crop intensities.
  void run_batch(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const;

private:
  void fill_crop(std::uint64_t n, std::span<double> crop) const;

  SourceSpec source_;
  std::uint64_t seed_;
  std::uint64_t offset_;
  std::vector<std::size_t> aperture_;
  PropagationKernel kernel_;
  Grid crop_;
  std::size_t margin_;
  std::size_t ref_;
};

} // namespace ghostconv
