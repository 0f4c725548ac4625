#include "ghostconv/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "ghostconv/correlate.hpp"
#include "ghostconv/error.hpp"

namespace ghostconv {

namespace {

// Realizations per inner block; wide enough to vectorize across the batch,
// small enough that the block's source fields stay in L2.
constexpr std::size_t kBlock = 32;

} // namespace

GhostSimulator::GhostSimulator(const ExperimentConfig &cfg, double phi, std::uint64_t offset)
    : seed_(cfg.seed), offset_(offset), d2_(cfg.d2), bucket_(cfg.bucket_position), fused_(cfg.fused_test_arm) {
  validate(cfg);
  source_.grid = make_line(cfg.source_points, cfg.source_pitch);
  source_.aperture_diameter = phi;
  source_.sigma2 = cfg.sigma2;
  source_.wavelength = cfg.wavelength;
  const auto idx = aperture_indices(source_);
  if (idx.empty()) throw Error(Errc::geometry, "aperture contains no source samples");
  ap_first_ = idx.front();
  ap_count_ = idx.size();

  const Grid object = make_line(cfg.object_points, cfg.object_pitch);
  mask_ = cfg.mask_file.empty() ? double_slit(cfg.slit_width, cfg.slit_separation, object) : load_mask(cfg.mask_file, object);
  object_kernel_ = fresnel_kernel(source_.grid, object, cfg.d1, cfg.wavelength);
  reference_ = fresnel_kernel(source_.grid, make_line(cfg.detector_points, cfg.detector_pitch), cfg.d, cfg.wavelength);

  const std::size_t m = source_.grid.size();
  w_re_.assign(m, 0.0);
  w_im_.assign(m, 0.0);
  for (std::size_t o = 0; o < object.size(); ++o) {
    if (mask_.values[o] == 0.0) continue;
    const Complex c =
        mask_.values[o] * fresnel_weight(object.coordinate(o), bucket_, d2_, cfg.wavelength, object.pitch[0]);
    for (std::size_t p = 0; p < m; ++p) {
      const Complex k = object_kernel_.entry(o, p);
      cmac(w_re_[p], w_im_[p], c.real(), c.imag(), k.real(), k.imag());
    }
  }
}

ComplexField GhostSimulator::source_field(std::uint64_t n) const {
  return sample_source(source_, {seed_, offset_ + n});
}

Complex GhostSimulator::test_arm_chain(const ComplexField &source) const {
  const ComplexField at_object = apply_mask(propagate(source, object_kernel_), mask_);
  return propagate_to_point(at_object, bucket_, d2_, source_.wavelength);
}

Complex GhostSimulator::test_arm_fused(const ComplexField &source) const {
  if (!(source.grid == source_.grid)) throw Error(Errc::grid_mismatch, "source field is not on the source grid");
  double re = 0.0, im = 0.0;
  for (std::size_t p = 0; p < source.samples.size(); ++p)
    cmac(re, im, w_re_[p], w_im_[p], source.samples[p].real(), source.samples[p].imag());
  return {re, im};
}

Realization GhostSimulator::run_realization(std::uint64_t n) const {
  Realization r;
  r.i2 = RealPattern(detector_grid());
  run_block(n, 1, std::span<double>(&r.i1, 1), r.i2.values);
  return r;
}

void GhostSimulator::run_batch(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const {
  const std::size_t p = detector_grid().size();
  if (i1.size() < count || i2.size() < count * p) throw Error(Errc::invalid_argument, "run_batch: output too small");
  for (std::size_t done = 0; done < count; done += kBlock) {
    const std::size_t b = std::min(kBlock, count - done);
    run_block(first + done, b, i1.subspan(done, b), i2.subspan(done * p, b * p));
  }
}

void GhostSimulator::run_block(std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) const {
  const std::size_t m = source_.grid.size();
  const std::size_t p = detector_grid().size();
  const double sigma = std::sqrt(source_.sigma2);
  std::vector<double> e_re(m * count, 0.0), e_im(m * count, 0.0);
  for (std::size_t r = 0; r < count; ++r) {
    const RngStream stream{seed_, offset_ + first + r};
    sample_aperture(sigma, ap_count_, stream, std::span(e_re).subspan(ap_first_ * count + r),
                    std::span(e_im).subspan(ap_first_ * count + r), count);
  }

  if (fused_) {
    std::vector<double> a_re(count, 0.0), a_im(count, 0.0);
    for (std::size_t s = ap_first_; s < ap_first_ + ap_count_; ++s) {
      const double wr = w_re_[s], wi = w_im_[s];
      const double *er = e_re.data() + s * count;
      const double *ei = e_im.data() + s * count;
      for (std::size_t r = 0; r < count; ++r) cmac(a_re[r], a_im[r], wr, wi, er[r], ei[r]);
    }
    for (std::size_t r = 0; r < count; ++r) i1[r] = power(a_re[r], a_im[r]);
  } else {
    for (std::size_t r = 0; r < count; ++r) {
      ComplexField f(source_.grid, source_.wavelength);
      for (std::size_t s = ap_first_; s < ap_first_ + ap_count_; ++s) f.samples[s] = {e_re[s * count + r], e_im[s * count + r]};
      const Complex b = test_arm_chain(f);
      i1[r] = power(b.real(), b.imag());
    }
  }

  std::vector<double> o_re(p * count), o_im(p * count);
  reference_.apply_batch(e_re, e_im, ap_first_, ap_count_, count, o_re, o_im);
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t q = 0; q < p; ++q) i2[r * p + q] = power(o_re[q * count + r], o_im[q * count + r]);
}

std::vector<std::string> GhostSimulator::sampling_warnings() const {
  std::vector<std::string> w;
  for (const auto *k : {&object_kernel_, &reference_})
    for (auto &s : validate_sampling(*k)) w.push_back(s);
  // The object-to-bucket step is a 1-point propagation over d2.
  const Grid &g = object_grid();
  const double step = 2.0 * 3.141592653589793 / source_.wavelength * g.pitch[0] * 0.5 * g.extent() / d2_;
  if (step > 3.141592653589793) w.push_back("chirp aliasing on the object-to-bucket propagation");
  return w;
}

SpeckleSimulator::SpeckleSimulator(const ExperimentConfig &cfg, double phi, std::uint64_t offset)
    : seed_(cfg.seed), offset_(offset) {
  validate(cfg);
  const std::size_t m = cfg.speckle_points;
  const double pitch = cfg.wavelength * cfg.speckle_distance / (static_cast<double>(m) * cfg.speckle_output_pitch);
  source_.grid = make_plane(m, m, pitch, pitch);
  source_.aperture_diameter = phi;
  source_.sigma2 = cfg.sigma2;
  source_.wavelength = cfg.wavelength;
  validate(source_);
  aperture_ = aperture_indices(source_);
  kernel_ = fresnel_kernel(source_.grid, fft_output_grid(source_.grid, cfg.speckle_distance, cfg.wavelength),
                           cfg.speckle_distance, cfg.wavelength, KernelForm::fft_one_step);
  const double out_pitch = kernel_.grid_out().pitch[0];
  crop_ = make_plane(cfg.speckle_crop, cfg.speckle_crop, out_pitch, out_pitch);
  margin_ = (m - cfg.speckle_crop) / 2;
  ref_ = reference_pixel(crop_);
}

void SpeckleSimulator::fill_crop(std::uint64_t n, std::span<double> crop) const {
  const std::size_t m = source_.grid.points[0], c = crop_.points[0];
  thread_local std::vector<Complex> src, out;
  thread_local std::vector<double> re, im;
  src.assign(source_.grid.size(), Complex{});
  out.resize(source_.grid.size());
  re.resize(aperture_.size());
  im.resize(aperture_.size());
  sample_aperture(std::sqrt(source_.sigma2), aperture_.size(), {seed_, offset_ + n}, re, im);
  for (std::size_t i = 0; i < aperture_.size(); ++i) src[aperture_[i]] = {re[i], im[i]};
  kernel_.apply_to(src, out);
  for (std::size_t y = 0; y < c; ++y)
    for (std::size_t x = 0; x < c; ++x) {
      const Complex v = out[(y + margin_) * m + x + margin_];
      crop[y * c + x] = power(v.real(), v.imag());
    }
}

RealPattern SpeckleSimulator::intensity_crop(std::uint64_t n) const {
  RealPattern crop(crop_);
  fill_crop(n, crop.values);
  return crop;
}

void SpeckleSimulator::run_batch(std::uint64_t first, std::size_t count, std::span<double> i1,
                                 std::span<double> i2) const {
  const std::size_t p = crop_.size();
  if (i1.size() < count || i2.size() < count * p) throw Error(Errc::invalid_argument, "run_batch: output too small");
  for (std::size_t r = 0; r < count; ++r) {
    fill_crop(first + r, i2.subspan(r * p, p));
    i1[r] = i2[r * p + ref_];
  }
}

} // namespace ghostconv
