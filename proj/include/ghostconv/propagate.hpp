#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ghostconv/field.hpp"

namespace ghostconv {

enum class KernelForm { direct, fft_one_step };

/// Complex Fresnel weight for one (input sample, output point) pair of the
/// 1D quadrature:
///   exp(j k z) / sqrt(j lambda z) * exp(j pi (x_out - x_in)^2 / (lambda z)) * dx_in
/// Every 1D propagation path goes through this function so that they agree
/// bit for bit.
Complex fresnel_weight(double x_in, double x_out, double distance, double wavelength, double dx_in);

/// acc += k * e, spelled out in real arithmetic. All matrix products use it.
inline void cmac(double &acc_re, double &acc_im, double k_re, double k_im, double e_re, double e_im) noexcept {
  acc_re = acc_re + (k_re * e_re - k_im * e_im);
  acc_im = acc_im + (k_re * e_im + k_im * e_re);
}

class FftPlan;

/// Discretized paraxial Fresnel operator between two planes.
///
/// The direct form stores the full (out x in) quadrature matrix with split
/// real/imaginary parts and supports arbitrary output grids (1D only). The
/// one-step FFT form evaluates the same Riemann sum through a DFT and so is
/// restricted to the output pitch lambda z / (M dx_in); it handles 1D and 2D.
/// Kernels are immutable once built and may be shared between threads.
class PropagationKernel {
public:
  const Grid &grid_in() const noexcept { return in_; }
  const Grid &grid_out() const noexcept { return out_; }
  double distance() const noexcept { return distance_; }
  double wavelength() const noexcept { return wavelength_; }
  KernelForm form() const noexcept { return form_; }

  /// Matrix entry (out q, in p); direct form only.
  Complex entry(std::size_t q, std::size_t p) const;

  /// Apply to many fields at once (direct form). Inputs are laid out
  /// [input sample][batch] and only columns in [first, first + count) of the
  /// matrix are used; the caller promises the other inputs are zero.
  /// Outputs are [output sample][batch]. Each output element is accumulated
  /// in ascending input order, so the result for one batch member does not
  /// depend on the batch width.
  void apply_batch(std::span<const double> in_re, std::span<const double> in_im, std::size_t first, std::size_t count,
                   std::size_t batch, std::span<double> out_re, std::span<double> out_im) const;

  ComplexField apply(const ComplexField &field) const;

  /// Same as apply() on raw sample arrays (sizes of grid_in / grid_out).
  /// Scratch space is reused per thread.
  void apply_to(std::span<const Complex> in, std::span<Complex> out) const;

private:
  friend PropagationKernel fresnel_kernel(const Grid &, const Grid &, double, double, KernelForm);

  Grid in_;
  Grid out_;
  double distance_ = 0.0;
  double wavelength_ = 0.0;
  KernelForm form_ = KernelForm::direct;

  // direct form
  std::vector<double> re_;
  std::vector<double> im_;

  // fft form: pre-multiplier (input chirp and half-sample twiddle) and
  // post-multiplier (prefactor, output chirp, twiddle) per sample.
  std::shared_ptr<const FftPlan> plan_;
  std::vector<Complex> pre_;
  std::vector<Complex> post_;
  std::vector<std::size_t> perm_;
};

/// Output grid forced by the one-step FFT form for a given input grid.
Grid fft_output_grid(const Grid &in, double distance, double wavelength);

/// Build a propagation kernel. Throws geometry on non-positive distance or
/// wavelength, sampling if an FFT kernel is requested onto a grid other than
/// fft_output_grid(in, ...), invalid_argument for a 2D direct kernel.
PropagationKernel fresnel_kernel(const Grid &in, const Grid &out, double distance, double wavelength,
                                 KernelForm form = KernelForm::direct);

/// Throws grid_mismatch unless the field lives on the kernel's input grid at
/// the kernel's wavelength.
ComplexField propagate(const ComplexField &field, const PropagationKernel &kernel);

/// Field at a single output coordinate of a 1D propagation; O(M), no matrix.
Complex propagate_to_point(const ComplexField &field, double point, double distance, double wavelength);

/// Human-readable aliasing and paraxiality warnings; empty when the kernel
/// is adequately sampled.
std::vector<std::string> validate_sampling(const PropagationKernel &kernel);

} // namespace ghostconv
