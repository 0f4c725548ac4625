// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ghostconv/analyze.hpp"
#include "ghostconv/config.hpp"
#include "ghostconv/correlate.hpp"
#include "ghostconv/experiments.hpp"
#include "ghostconv/propagate.hpp"
#include "ghostconv/scene.hpp"
#include "ghostconv/simulator.hpp"
#include "ghostconv/source.hpp"

namespace fs = std::filesystem;
using namespace ghostconv;

namespace {

constexpr double kLambda = 0.532e-6;
constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "ghostconv_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- 1: source statistics

Verdict source_statistics() {
  SourceSpec s;
  s.grid = make_line(1024, 5e-6);
  s.aperture_diameter = 2.0e-3;
  s.sigma2 = 1.0;
  s.wavelength = kLambda;
  const auto inside = aperture_indices(s);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::uint64_t r = 0; n < 50000; ++r) {
    const ComplexField f = sample_source(s, {2024, r});
    for (std::size_t i : inside) {
      if (n == 50000) break;
      const double v = std::norm(f.samples[i]);
      sum += v;
      sum2 += v * v;
      ++n;
    }
  }
  const double mean = sum / n, var = sum2 / n - mean * mean, ratio = var / (mean * mean);
  const bool ok = std::abs(mean - 2.0) <= 0.02 * 2.0 && std::abs(ratio - 1.0) <= 0.05;
  return {ok, "mean=" + num(mean) + " (2 +- 2%), var/mean^2=" + num(ratio) + " (1 +- 5%)"};
}

// ---- 2: estimator identity

Verdict estimator_identity() {
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    std::mt19937_64 gen(1000 + inst);
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> sc(0.01, 100.0);
    const std::size_t p = 2 + inst % 15, n = 2 + (inst * 53) % 400;
    const double scale = sc(gen);
    std::vector<double> i1(n), i2(n * p);
    for (std::size_t r = 0; r < n; ++r) {
      const double common = e(gen);
      i1[r] = scale * (common + e(gen));
      for (std::size_t q = 0; q < p; ++q) i2[r * p + q] = scale * (q % 3 ? e(gen) : common + 0.5 * e(gen));
    }
    CorrelationAccumulator acc(make_line(p, 1e-6));
    for (std::size_t r = 0; r < n; ++r) acc.update(i1[r], std::span<const double>(i2).subspan(r * p, p));
    const RealPattern g = acc.finalize();
    long double m1 = 0;
    for (double v : i1) m1 += v;
    m1 /= n;
    for (std::size_t q = 0; q < p; ++q) {
      long double m2 = 0, c = 0;
      for (std::size_t r = 0; r < n; ++r) m2 += i2[r * p + q];
      m2 /= n;
      for (std::size_t r = 0; r < n; ++r) c += (i1[r] - m1) * (i2[r * p + q] - m2);
      c /= n;
      // Relative to the mean product, the natural magnitude of each term.
      const long double denom = std::max(std::abs(c), m1 * m2);
      worst = std::max(worst, static_cast<double>(std::abs(g.values[q] - c) / denom));
    }
  }
  return {worst <= 1e-12, "max relative error " + num(worst) + " over 100 instances (<= 1e-12)"};
}

// ---- 3: band partition identity

Verdict partition_identity() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-3.0, 5.0);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t p = 3 + gen() % 500;
    std::vector<double> a(p), b(p);
    for (std::size_t i = 0; i < p; ++i) a[i] = u(gen), b[i] = u(gen);
    const IndexWindow w = IndexWindow::full(p);
    const auto ya = normalize_unit(a, w), yb = normalize_unit(b, w);
    const BandSplit bands = split_bands(p, w);
    const BandErrors e = band_errors(ya, yb, bands);
    const double lhs = static_cast<double>(p) * e.global * e.global;
    const double rhs = static_cast<double>(bands.low.size()) * e.low * e.low +
                       static_cast<double>(bands.high.size()) * e.high * e.high;
    worst = std::max(worst, std::abs(lhs - rhs) / static_cast<double>(p));
  }
  return {worst <= 1e-12, "max |P eg^2 - (|L| el^2 + |H| eh^2)| / P = " + num(worst) + " (<= 1e-12)"};
}

// ---- 4: propagator oracle

double beam_width(double w0, double z) {
  const double zr = kPi * w0 * w0 / kLambda;
  return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
}

ComplexField gaussian(const Grid &g, double w0) {
  ComplexField f(g, kLambda);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(i);
    f.samples[i] = std::exp(-x * x / (w0 * w0));
  }
  return f;
}

double central_error(const ComplexField &out, double w0, double z) {
  const double w = beam_width(w0, z);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const double x = out.grid.coordinate(i);
    if (std::abs(x) > 2.0 * w) continue;
    const double expect = std::sqrt(w0 / w) * std::exp(-x * x / (w * w));
    worst = std::max(worst, std::abs(std::abs(out.samples[i]) - expect) / expect);
  }
  return worst;
}

Verdict propagator_oracle() {
  double worst = 0.0;
  for (double w0 : {30e-6, 50e-6, 100e-6})
    for (double z : {0.020, 0.060}) {
      const Grid in = make_line(401, w0 / 40.0);
      const Grid out = make_line(301, 4.4 * beam_width(w0, z) / 300.0);
      worst = std::max(worst, central_error(propagate(gaussian(in, w0), fresnel_kernel(in, out, z, kLambda)), w0, z));
    }
  double semigroup = 0.0;
  for (double w0 : {30e-6, 50e-6, 100e-6}) {
    const double z1 = 0.020, z2 = 0.040;
    const Grid in = make_line(401, w0 / 40.0);
    const Grid mid = make_line(1601, 10.0 * beam_width(w0, z1) / 1600.0);
    const Grid out = make_line(201, 4.0 * beam_width(w0, z1 + z2) / 200.0);
    const auto two = propagate(propagate(gaussian(in, w0), fresnel_kernel(in, mid, z1, kLambda)),
                               fresnel_kernel(mid, out, z2, kLambda));
    const auto one = propagate(gaussian(in, w0), fresnel_kernel(in, out, z1 + z2, kLambda));
    double peak = 0.0, err = 0.0;
    for (std::size_t q = 0; q < out.size(); ++q) {
      peak = std::max(peak, std::abs(one.samples[q]));
      err = std::max(err, std::abs(two.samples[q] - one.samples[q]));
    }
    semigroup = std::max(semigroup, err / peak);
  }
  return {worst < 0.01 && semigroup < 0.01,
          "gaussian max rel amplitude error " + num(worst) + ", semigroup error " + num(semigroup) + " (< 1%)"};
}

// ---- 5: speckle size against the coherence length

Verdict speckle_size() {
  ExperimentConfig cfg;
  cfg.speckle_phi_list = {2.5e-3, 1.25e-3};
  cfg.speckle_realizations = 20000;
  const auto res = run_speckle(cfg);
  bool ok = res.size() == 2;
  std::string detail;
  for (const auto &r : res) {
    const double ratio = r.fwhm / r.coherence_length;
    ok = ok && std::abs(ratio - 1.0) <= 0.25;
    detail += "phi=" + num(r.phi * 1e3) + "mm fwhm/lc=" + num(ratio) + "; ";
  }
  ok = ok && res[1].fwhm > res[0].fwhm;
  return {ok, detail + "increasing as phi decreases: " + (res[1].fwhm > res[0].fwhm ? "yes" : "no")};
}

// ---- 6: ghost convergence and fringe positions

// Offset, in pixels, that best aligns the closed-form pattern with `rec`
// over one fringe period centred on window index c (maximum correlation
// coefficient, 0.01 px steps within +-3 px).
double fringe_offset(const std::vector<double> &rec, const ExperimentConfig &cfg, const Grid &det, IndexWindow win,
                     std::size_t c, std::size_t hw) {
  const double pitch = det.pitch[0];
  const std::size_t a0 = c - hw, a1 = c + hw;
  const double m = static_cast<double>(a1 - a0 + 1);
  double best = -2.0, offset = 0.0;
  for (int step = -300; step <= 300; ++step) {
    const double shift = 0.01 * step;
    const Grid g = make_line(det.size(), pitch, det.origin[0] - shift * pitch);
    const RealPattern y = reference_double_slit(cfg.slit_width, cfg.slit_separation, cfg.wavelength, cfg.d2, g);
    double mx = 0, my = 0;
    for (std::size_t i = a0; i <= a1; ++i) mx += rec[i] / m, my += y.values[win.first + i] / m;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = a0; i <= a1; ++i) {
      const double u = rec[i] - mx, v = y.values[win.first + i] - my;
      sxy += u * v, sxx += u * u, syy += v * v;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    if (r > best) best = r, offset = shift;
  }
  return offset;
}

Verdict ghost_convergence() {
  ExperimentConfig cfg;
  cfg.schedule = {1000, 4000, 16000, 64000};
  std::vector<std::vector<double>> eps(cfg.schedule.size());
  std::vector<double> mean_rec;
  Grid det;
  IndexWindow win;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.seed = seed;
    const ConvergeResult r = run_converge(cfg);
    for (std::size_t k = 0; k < r.checkpoints.size(); ++k) eps[k].push_back(r.checkpoints[k].errors.global);
    const auto &rec = r.checkpoints.back().reconstruction;
    if (mean_rec.empty()) mean_rec.assign(rec.size(), 0.0);
    for (std::size_t i = 0; i < rec.size(); ++i) mean_rec[i] += rec[i] / 3.0;
    det = r.setup.detector;
    win = r.setup.window;
  }
  std::vector<double> med;
  for (const auto &e : eps) med.push_back(median(e));
  bool decreasing = true;
  for (std::size_t k = 1; k < med.size(); ++k) decreasing = decreasing && med[k] < med[k - 1];
  const bool halved = med.back() < med.front() / 2.0;

  // Maxima of the closed-form pattern, located on a grid 100x finer than the detector.
  const double pitch = det.pitch[0];
  const std::size_t fine_n = 100 * det.size();
  const Grid fine = make_line(fine_n, pitch / 100.0, det.origin[0]);
  const RealPattern yf = reference_double_slit(cfg.slit_width, cfg.slit_separation, cfg.wavelength, cfg.d2, fine);
  const double period = cfg.wavelength * cfg.d2 / cfg.slit_separation;
  const auto hw = static_cast<std::size_t>(std::lround(0.5 * period / pitch));
  double worst = 0.0;
  int found = 0;
  for (std::size_t i = 1; i + 1 < fine_n; ++i) {
    if (!(yf.values[i] > yf.values[i - 1] && yf.values[i] >= yf.values[i + 1])) continue;
    const double idx = (fine.coordinate(i) - det.coordinate(win.first)) / pitch;
    if (idx < static_cast<double>(hw) || idx + static_cast<double>(hw) > static_cast<double>(win.size() - 1)) continue;
    const auto c = static_cast<std::size_t>(std::lround(idx));
    worst = std::max(worst, std::abs(fringe_offset(mean_rec, cfg, det, win, c, hw)));
    ++found;
  }
  const bool fringes = found >= 3 && worst <= 1.0;
  std::string detail = "median eps:";
  for (std::size_t k = 0; k < med.size(); ++k) detail += " N=" + std::to_string(cfg.schedule[k]) + ":" + num(med[k]);
  detail += "; strictly decreasing " + std::string(decreasing ? "yes" : "no") + ", eps(64k)<eps(1k)/2 " +
            (halved ? "yes" : "no") + "; " + std::to_string(found) + " fringe maxima, worst offset " + num(worst) +
            " px (<= 1)";
  return {decreasing && halved && fringes, detail};
}

// ---- 7: kappa trend

std::vector<double> average_ranks(const std::vector<double> &v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) less += w < v[i], equal += w == v[i];
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Verdict kappa_trend() {
  ExperimentConfig cfg;
  cfg.phi_list = {2.432e-3, 3.040e-3, 3.648e-3, 4.256e-3, 4.864e-3};
  cfg.tau = 0.07;
  cfg.schedule = arithmetic_schedule(2000, 2000, 200000);
  std::vector<std::vector<double>> nstar(cfg.phi_list.size());
  std::vector<double> kap;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const auto pts = run_kappa_sweep(cfg);
    kap.clear();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      nstar[k].push_back(static_cast<double>(pts[k].result.n_star));
      kap.push_back(pts[k].kappa);
    }
  }
  std::vector<double> med;
  std::string detail;
  for (std::size_t k = 0; k < nstar.size(); ++k) {
    med.push_back(median(nstar[k]));
    detail += "k=" + num(kap[k]) + ":N*=" + num(med.back()) + " ";
  }
  const double rho = spearman(kap, med);
  bool in_range = true;
  for (double k : kap) in_range = in_range && k >= 8.0 - 1e-9 && k <= 16.0 + 1e-9;
  return {in_range && rho >= 0.8, detail + "; spearman " + num(rho) + " (>= 0.8)"};
}

// ---- 8: non-attainment at small kappa

Verdict non_attainment() {
  ExperimentConfig cfg;
  cfg.phi_list = {2.432e-3, 0.6e-3};
  cfg.tau = 0.07;
  cfg.schedule = arithmetic_schedule(2000, 2000, 100000);
  const auto first = run_kappa_sweep(cfg);
  if (!first[0].result.reached) return {false, "kappa=8 point did not reach tau within 100000"};
  const std::uint64_t budget = 20 * first[0].result.n_star;
  cfg.schedule = arithmetic_schedule(2000, 2000, budget);
  cfg.n_max = budget;
  const auto second = run_kappa_sweep(cfg);
  const auto &small = second[1];
  const bool ok = !small.result.reached && second[0].result.n_star == first[0].result.n_star;
  return {ok, "N*(kappa=" + num(second[0].kappa) + ")=" + std::to_string(first[0].result.n_star) +
                  ", budget " + std::to_string(budget) + ", kappa=" + num(small.kappa) + ": reached=" +
                  (small.result.reached ? "yes" : "no") + " final eps " + num(small.result.at_n_star.global)};
}

// ---- 9: determinism and persistence

Verdict determinism() {
  ExperimentConfig cfg;
  cfg.schedule = {1000, 4000, 16000};
  cfg.seed = 77;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> contents;
  for (unsigned w : {1u, 4u, 8u}) {
    cfg.workers = w;
    const fs::path dir = scratch("workers" + std::to_string(w));
    auto files = write_converge_outputs(dir, run_converge(cfg));
    ExperimentConfig sweep = cfg;
    sweep.phi_list = {2.432e-3, 4.0e-3};
    sweep.schedule = arithmetic_schedule(2000, 2000, 20000);
    write_kappa_csv(dir / "kappa.csv", run_kappa_sweep(sweep));
    files.push_back("kappa.csv");
    names = files;
    std::vector<std::string> c;
    for (const auto &f : files) c.push_back(slurp(dir / f));
    contents.push_back(std::move(c));
  }
  const bool same_csv = contents[0] == contents[1] && contents[0] == contents[2];

  cfg.workers = 2;
  const fs::path dir = scratch("replay");
  const ConvergeResult live = run_converge(cfg, dir / "records.gidat");
  const ConvergeResult again = replay_converge(cfg, dir / "records.gidat");
  bool same_replay = live.checkpoints.size() == again.checkpoints.size();
  for (std::size_t k = 0; same_replay && k < live.checkpoints.size(); ++k)
    same_replay = live.checkpoints[k].g == again.checkpoints[k].g &&
                  live.checkpoints[k].reconstruction == again.checkpoints[k].reconstruction;
  return {same_csv && same_replay, std::to_string(names.size()) + " CSV files identical across 1/4/8 workers: " +
                                       (same_csv ? "yes" : "no") + "; replay bitwise: " +
                                       (same_replay ? "yes" : "no")};
}

// ---- 10: sigma^2 invariance

Verdict sigma_invariance() {
  ExperimentConfig cfg;
  cfg.schedule = {1000, 4000, 16000};
  cfg.seed = 5;
  cfg.sigma2 = 1.0;
  const ConvergeResult a = run_converge(cfg);
  cfg.sigma2 = 4.0;
  const ConvergeResult b = run_converge(cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    const auto &ra = a.checkpoints[k].reconstruction, &rb = b.checkpoints[k].reconstruction;
    for (std::size_t i = 0; i < ra.size(); ++i) worst = std::max(worst, std::abs(ra[i] - rb[i]));
    worst = std::max(worst, std::abs(a.checkpoints[k].errors.global - b.checkpoints[k].errors.global));
  }
  return {worst <= 1e-12, "max difference in normalized reconstruction and eps " + num(worst) + " (<= 1e-12)"};
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"source statistics", source_statistics},
      {"estimator identity", estimator_identity},
      {"band partition identity", partition_identity},
      {"propagator oracle", propagator_oracle},
      {"speckle size vs coherence length", speckle_size},
      {"ghost convergence", ghost_convergence},
      {"kappa trend", kappa_trend},
      {"non-attainment at small kappa", non_attainment},
      {"determinism and persistence", determinism},
      {"sigma^2 invariance", sigma_invariance},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-34s %s  %s  [%.1fs]\n", id, criteria[k].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
