#include "ghostconv/propagate.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "ghostconv/error.hpp"

namespace ghostconv {

namespace {

constexpr double pi = std::numbers::pi;

// exp(j k z) with the integer number of wavelengths removed first; k z itself
// is ~1e6 rad for optical wavelengths at tens of millimetres. fmod is exact.
double carrier_phase(double distance, double wavelength) {
  return 2.0 * pi * (std::fmod(distance, wavelength) / wavelength);
}

void check_geometry(double distance, double wavelength) {
  if (!(distance > 0.0) || !std::isfinite(distance)) throw Error(Errc::geometry, "propagation distance must be positive");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw Error(Errc::geometry, "wavelength must be positive");
}

bool close_rel(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

} // namespace

/// FFTW plan wrapper. Planning is serialized (the FFTW planner is not
/// thread-safe); execution with caller-provided arrays is.
class FftPlan {
public:
  FftPlan(const Grid &g) : size_(g.size()) {
    std::lock_guard lock(planner_mutex());
    std::vector<Complex> a(size_), b(size_);
    auto *in = reinterpret_cast<fftw_complex *>(a.data());
    auto *out = reinterpret_cast<fftw_complex *>(b.data());
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (g.dims == 1)
      plan_ = fftw_plan_dft_1d(static_cast<int>(g.points[0]), in, out, FFTW_FORWARD, flags);
    else
      plan_ = fftw_plan_dft_2d(static_cast<int>(g.points[1]), static_cast<int>(g.points[0]), in, out, FFTW_FORWARD,
                               flags);
    if (!plan_) throw Error(Errc::sampling, "FFTW could not create a plan");
  }
  FftPlan(const FftPlan &) = delete;
  FftPlan &operator=(const FftPlan &) = delete;
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  void execute(std::vector<Complex> &in, std::vector<Complex> &out) const {
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex *>(in.data()), reinterpret_cast<fftw_complex *>(out.data()));
  }

  std::size_t size() const noexcept { return size_; }

private:
  static std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
  }
  fftw_plan plan_ = nullptr;
  std::size_t size_;
};

Complex fresnel_weight(double x_in, double x_out, double distance, double wavelength, double dx_in) {
  const double dx = x_out - x_in;
  const double magnitude = dx_in / std::sqrt(wavelength * distance);
  // 1/sqrt(j) contributes -pi/4.
  const double phase = carrier_phase(distance, wavelength) - 0.25 * pi + pi * dx * dx / (wavelength * distance);
  return std::polar(magnitude, phase);
}

Grid fft_output_grid(const Grid &in, double distance, double wavelength) {
  check_geometry(distance, wavelength);
  Grid out = in;
  out.origin = {0.0, 0.0};
  for (int axis = 0; axis < in.dims; ++axis)
    out.pitch[axis] = wavelength * distance / (static_cast<double>(in.points[axis]) * in.pitch[axis]);
  if (in.dims == 1) out.pitch[1] = out.pitch[0];
  return out;
}

PropagationKernel fresnel_kernel(const Grid &in, const Grid &out, double distance, double wavelength, KernelForm form) {
  check_geometry(distance, wavelength);
  PropagationKernel k;
  k.in_ = in;
  k.out_ = out;
  k.distance_ = distance;
  k.wavelength_ = wavelength;
  k.form_ = form;

  if (form == KernelForm::direct) {
    if (in.dims != 1 || out.dims != 1)
      throw Error(Errc::invalid_argument, "direct-quadrature kernels are one-dimensional");
    const std::size_t m = in.points[0], p = out.points[0];
    k.re_.resize(m * p);
    k.im_.resize(m * p);
    for (std::size_t q = 0; q < p; ++q) {
      const double xq = out.coordinate(q);
      for (std::size_t s = 0; s < m; ++s) {
        const Complex w = fresnel_weight(in.coordinate(s), xq, distance, wavelength, in.pitch[0]);
        k.re_[q * m + s] = w.real();
        k.im_[q * m + s] = w.imag();
      }
    }
    return k;
  }

  const Grid forced = fft_output_grid(in, distance, wavelength);
  if (in.origin[0] != 0.0 || in.origin[1] != 0.0)
    throw Error(Errc::sampling, "one-step FFT form needs an input grid centered on the axis");
  if (out.dims != in.dims || out.points != forced.points || out.origin != forced.origin)
    throw Error(Errc::sampling, "one-step FFT form needs an output grid of the input size, centered on the axis");
  for (int axis = 0; axis < in.dims; ++axis)
    if (!close_rel(out.pitch[axis], forced.pitch[axis]))
      throw Error(Errc::sampling, "one-step FFT output pitch must equal lambda z / (M dx)");

  // For even M the grids sit on half-integers around the axis; the DFT index
  // is then shifted by s = 1/2 and the extra phases go into pre/post.
  const double lz = wavelength * distance;
  auto axis_factors = [&](int axis, std::vector<Complex> &pre, std::vector<Complex> &post, std::vector<std::size_t> &perm) {
    const std::size_t m = in.points[axis];
    const std::size_t h0 = m / 2;
    const double shift = static_cast<double>(h0) - 0.5 * static_cast<double>(m - 1);
    const double md = static_cast<double>(m);
    pre.resize(m);
    post.resize(m);
    perm.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double ip = static_cast<double>(i) - static_cast<double>(h0);
      const double xi = in.coordinate(i, axis);
      const double xo = out.coordinate(i, axis);
      pre[i] = std::polar(1.0, pi * xi * xi / lz - 2.0 * pi * shift * ip / md);
      post[i] = std::polar(1.0, pi * xo * xo / lz - 2.0 * pi * shift * ip / md - 2.0 * pi * shift * shift / md);
      perm[i] = (i + m - h0) % m;
    }
  };

  std::vector<Complex> pre_x, post_x, pre_y, post_y;
  std::vector<std::size_t> perm_x, perm_y;
  axis_factors(0, pre_x, post_x, perm_x);
  Complex prefactor;
  if (in.dims == 1) {
    prefactor = std::polar(in.pitch[0] / std::sqrt(lz), carrier_phase(distance, wavelength) - 0.25 * pi);
    k.pre_ = pre_x;
    k.perm_ = perm_x;
    k.post_.resize(post_x.size());
    for (std::size_t i = 0; i < post_x.size(); ++i) k.post_[i] = prefactor * post_x[i];
    k.plan_ = std::make_shared<const FftPlan>(in);
    return k;
  }
  axis_factors(1, pre_y, post_y, perm_y);
  prefactor = std::polar(in.pitch[0] * in.pitch[1] / lz, carrier_phase(distance, wavelength) - 0.5 * pi);
  const std::size_t nx = in.points[0], ny = in.points[1];
  k.pre_.resize(nx * ny);
  k.post_.resize(nx * ny);
  k.perm_.resize(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      k.perm_[iy * nx + ix] = perm_y[iy] * nx + perm_x[ix];
      k.pre_[iy * nx + ix] = pre_x[ix] * pre_y[iy];
      k.post_[iy * nx + ix] = prefactor * (post_x[ix] * post_y[iy]);
    }
  k.plan_ = std::make_shared<const FftPlan>(in);
  return k;
}

Complex PropagationKernel::entry(std::size_t q, std::size_t p) const {
  if (form_ != KernelForm::direct) throw Error(Errc::invalid_argument, "matrix entries exist for direct kernels only");
  const std::size_t m = in_.points[0];
  return {re_[q * m + p], im_[q * m + p]};
}

void PropagationKernel::apply_batch(std::span<const double> in_re, std::span<const double> in_im, std::size_t first,
                                    std::size_t count, std::size_t batch, std::span<double> out_re,
                                    std::span<double> out_im) const {
  if (form_ != KernelForm::direct) throw Error(Errc::invalid_argument, "batched apply needs a direct kernel");
  const std::size_t m = in_.points[0], p = out_.points[0];
  if (first + count > m || in_re.size() < m * batch || in_im.size() < m * batch || out_re.size() < p * batch ||
      out_im.size() < p * batch)
    throw Error(Errc::grid_mismatch, "batched apply: buffer sizes do not match the kernel");
  for (std::size_t q = 0; q < p; ++q) {
    double *__restrict ore = out_re.data() + q * batch;
    double *__restrict oim = out_im.data() + q * batch;
    for (std::size_t r = 0; r < batch; ++r) ore[r] = oim[r] = 0.0;
    const double *kre = re_.data() + q * m;
    const double *kim = im_.data() + q * m;
    for (std::size_t s = first; s < first + count; ++s) {
      const double kr = kre[s], ki = kim[s];
      const double *__restrict ere = in_re.data() + s * batch;
      const double *__restrict eim = in_im.data() + s * batch;
      for (std::size_t r = 0; r < batch; ++r) cmac(ore[r], oim[r], kr, ki, ere[r], eim[r]);
    }
  }
}

ComplexField PropagationKernel::apply(const ComplexField &field) const {
  ComplexField out(out_, wavelength_);
  apply_to(field.samples, out.samples);
  return out;
}

void PropagationKernel::apply_to(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != in_.size() || out.size() != out_.size())
    throw Error(Errc::grid_mismatch, "sample arrays do not match the kernel grids");
  if (form_ == KernelForm::direct) {
    const std::size_t m = in_.points[0];
    for (std::size_t q = 0; q < out_.points[0]; ++q) {
      double are = 0.0, aim = 0.0;
      for (std::size_t s = 0; s < m; ++s) cmac(are, aim, re_[q * m + s], im_[q * m + s], in[s].real(), in[s].imag());
      out[q] = {are, aim};
    }
    return;
  }

  const std::size_t n = pre_.size();
  thread_local std::vector<Complex> buf, spec;
  buf.resize(n);
  spec.resize(n);
  auto mul = [](Complex a, Complex b) {
    return Complex(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
  };
  for (std::size_t i = 0; i < n; ++i) buf[perm_[i]] = mul(in[i], pre_[i]);
  plan_->execute(buf, spec);
  for (std::size_t i = 0; i < n; ++i) out[i] = mul(post_[i], spec[perm_[i]]);
}

ComplexField propagate(const ComplexField &field, const PropagationKernel &kernel) {
  if (!(field.grid == kernel.grid_in())) throw Error(Errc::grid_mismatch, "field grid differs from kernel input grid");
  if (field.wavelength != kernel.wavelength()) throw Error(Errc::grid_mismatch, "field wavelength differs from kernel");
  return kernel.apply(field);
}

Complex propagate_to_point(const ComplexField &field, double point, double distance, double wavelength) {
  check_geometry(distance, wavelength);
  if (field.grid.dims != 1) throw Error(Errc::grid_mismatch, "point propagation is one-dimensional");
  if (field.wavelength != wavelength) throw Error(Errc::grid_mismatch, "field wavelength differs from requested");
  double are = 0.0, aim = 0.0;
  for (std::size_t s = 0; s < field.samples.size(); ++s) {
    const Complex w = fresnel_weight(field.grid.coordinate(s), point, distance, wavelength, field.grid.pitch[0]);
    cmac(are, aim, w.real(), w.imag(), field.samples[s].real(), field.samples[s].imag());
  }
  return {are, aim};
}

std::vector<std::string> validate_sampling(const PropagationKernel &kernel) {
  std::vector<std::string> warnings;
  const Grid &g = kernel.grid_in();
  const double k = 2.0 * pi / kernel.wavelength();
  for (int axis = 0; axis < g.dims; ++axis) {
    const double half = 0.5 * g.extent(axis);
    const double step = k * g.pitch[axis] * half / kernel.distance();
    if (step > pi) {
      std::ostringstream os;
      os << "chirp aliasing: edge phase step " << step << " rad exceeds pi on axis " << axis;
      warnings.push_back(os.str());
    }
    const double angle = half / kernel.distance();
    if (angle > 0.1) {
      std::ostringstream os;
      os << "paraxial approximation strained: half-angle " << angle << " rad exceeds 0.1 on axis " << axis;
      warnings.push_back(os.str());
    }
  }
  return warnings;
}

} // namespace ghostconv
