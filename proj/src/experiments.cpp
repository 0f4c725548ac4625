#include "ghostconv/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ghostconv/engine.hpp"
#include "ghostconv/error.hpp"
#include "ghostconv/simulator.hpp"

namespace ghostconv {

namespace {

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create " + path.string());
  return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path) {
  out.flush();
  if (!out) throw Error(Errc::io, "write failed on " + path.string());
}

void say(const LogFn &log, const std::string &msg) {
  if (log) log(msg);
}

BatchProducer ghost_producer(const GhostSimulator &sim) {
  return [&sim](std::uint64_t first, std::size_t count, std::span<double> i1, std::span<double> i2) {
    sim.run_batch(first, count, i1, i2);
  };
}

double feature_kappa(const ExperimentConfig &cfg, double phi, double *lc_out) {
  const double lc = coherence_length(cfg.wavelength, cfg.d1, phi);
  if (lc_out) *lc_out = lc;
  return kappa(cfg.slit_width, lc);
}

ConvergeResult converge_with(const ExperimentConfig &cfg, double phi, const TransmissionMask &mask,
                             BatchProducer producer, RecordWriter *sink, const LogFn &log) {
  ConvergeResult r;
  r.phi = phi;
  r.kappa = feature_kappa(cfg, phi, &r.coherence_length);
  r.setup = scoring_setup(cfg, mask);
  r.curve.config_hash = config_hash(cfg);
  CorrelationRun run(r.setup.detector, std::move(producer), cfg.workers, cfg.chunk_size);
  run.set_record_sink(sink);
  for (std::uint64_t n : cfg.schedule) {
    if (n > cfg.effective_n_max()) break;
    Checkpoint cp = evaluate(run.advance_to(n), r.setup);
    say(log, "N=" + std::to_string(n) + " eps=" + format_double(cp.errors.global));
    r.curve.checkpoints.push_back({n, cp.errors});
    r.checkpoints.push_back(std::move(cp));
  }
  return r;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto &c : cells) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s + '\n';
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

} // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ScoringSetup scoring_setup(const ExperimentConfig &cfg, const TransmissionMask &mask) {
  ScoringSetup s;
  s.detector = make_line(cfg.detector_points, cfg.detector_pitch);
  s.window = cfg.effective_window();
  s.bands = split_bands(cfg.detector_points, s.window);
  const RealPattern ref = cfg.mask_file.empty()
                              ? reference_double_slit(cfg.slit_width, cfg.slit_separation, cfg.wavelength, cfg.d2, s.detector)
                              : reference_from_mask(mask, cfg.wavelength, cfg.d2, s.detector);
  s.reference = normalize_unit(ref.values, s.window);
  return s;
}

Checkpoint evaluate(const CorrelationAccumulator &acc, const ScoringSetup &setup) {
  Checkpoint cp;
  cp.n = acc.count();
  cp.g = acc.finalize().values;
  cp.reconstruction = normalize_unit(cp.g, setup.window);
  cp.errors = band_errors(cp.reconstruction, setup.reference, setup.bands);
  return cp;
}

RecordHeader make_header(const ExperimentConfig &cfg, double phi, std::uint64_t offset) {
  RecordHeader h;
  h.detector_points = cfg.detector_points;
  h.detector_pitch = cfg.detector_pitch;
  h.detector_origin = 0.0;
  h.wavelength = cfg.wavelength;
  h.d1 = cfg.d1;
  h.d2 = cfg.d2;
  h.d = cfg.d;
  h.phi = phi;
  h.sigma2 = cfg.sigma2;
  h.seed = cfg.seed;
  h.stream_offset = offset;
  h.first_index = 0;
  return h;
}

ConvergeResult run_converge(const ExperimentConfig &cfg, const std::optional<std::filesystem::path> &records,
                            const LogFn &log) {
  validate(cfg);
  if (cfg.phi_list.size() != 1) throw Error(Errc::config, "converge needs exactly one aperture diameter");
  const double phi = cfg.phi_list.front();
  const GhostSimulator sim(cfg, phi, stream_offset(0));
  for (const auto &w : sim.sampling_warnings()) say(log, "warning: " + w);
  std::optional<RecordWriter> writer;
  if (records) writer.emplace(*records, make_header(cfg, phi, sim.offset()));
  ConvergeResult r = converge_with(cfg, phi, sim.mask(), ghost_producer(sim), writer ? &*writer : nullptr, log);
  if (writer) writer->close();
  return r;
}

ConvergeResult replay_converge(const ExperimentConfig &cfg, const std::filesystem::path &records, const LogFn &log) {
  validate(cfg);
  if (cfg.phi_list.size() != 1) throw Error(Errc::config, "replay needs exactly one aperture diameter");
  const double phi = cfg.phi_list.front();
  const RecordReader reader(records);
  RecordHeader expect = make_header(cfg, phi, stream_offset(0));
  RecordHeader got = reader.header();
  expect.count = got.count;
  expect.kind = got.kind;
  if (!(expect == got)) throw Error(Errc::config, "record file does not match the configuration");
  if (got.count < cfg.effective_n_max())
    throw Error(Errc::config, "record file holds " + std::to_string(got.count) + " realizations, fewer than the schedule needs");

  const Grid object = make_line(cfg.object_points, cfg.object_pitch);
  const TransmissionMask mask = cfg.mask_file.empty() ? double_slit(cfg.slit_width, cfg.slit_separation, object)
                                                      : load_mask(cfg.mask_file, object);
  BatchProducer producer = [&reader](std::uint64_t first, std::size_t count, std::span<double> i1,
                                     std::span<double> i2) { reader.read(first, count, i1, i2); };
  return converge_with(cfg, phi, mask, std::move(producer), nullptr, log);
}

std::vector<KappaPoint> run_kappa_sweep(const ExperimentConfig &cfg, const LogFn &log) {
  validate(cfg);
  if (cfg.phi_list.size() < 2) throw Error(Errc::config, "a sweep needs at least two aperture diameters");
  std::vector<KappaPoint> points;
  for (std::size_t k = 0; k < cfg.phi_list.size(); ++k) {
    KappaPoint pt;
    pt.phi = cfg.phi_list[k];
    pt.kappa = feature_kappa(cfg, pt.phi, &pt.coherence_length);
    const GhostSimulator sim(cfg, pt.phi, stream_offset(k));
    const ScoringSetup setup = scoring_setup(cfg, sim.mask());
    CorrelationRun run(setup.detector, ghost_producer(sim), cfg.workers, cfg.chunk_size);
    auto errors_at = [&](std::uint64_t n) { return evaluate(run.advance_to(n), setup).errors; };
    pt.result = min_n_to_threshold(errors_at, cfg.tau, cfg.schedule, cfg.effective_n_max());
    pt.result.curve.config_hash = config_hash(cfg);
    pt.partition_residual = partition_residual(pt.result.at_n_star, setup.bands);
    say(log, "phi=" + format_double(pt.phi) + " kappa=" + format_double(pt.kappa) +
                 (pt.result.reached ? " N*=" + fmt(pt.result.n_star) : " not reached by N=" + fmt(pt.result.n_star)));
    points.push_back(std::move(pt));
  }
  return points;
}

std::vector<KappaPoint> run_bands(const ExperimentConfig &cfg, const LogFn &log) {
  auto points = run_kappa_sweep(cfg, log);
  for (const auto &p : points)
    if (!(std::abs(p.partition_residual) <= 1e-12))
      throw Error(Errc::invalid_range, "band partition identity violated at phi=" + format_double(p.phi));
  return points;
}

std::vector<SpeckleResult> run_speckle(const ExperimentConfig &cfg, const LogFn &log) {
  validate(cfg);
  std::vector<SpeckleResult> out;
  for (std::size_t k = 0; k < cfg.speckle_phi_list.size(); ++k) {
    SpeckleResult r;
    r.phi = cfg.speckle_phi_list[k];
    r.coherence_length = coherence_length(cfg.wavelength, cfg.speckle_distance, r.phi);
    const SpeckleSimulator sim(cfg, r.phi, stream_offset(k));
    r.snapshot = sim.intensity_crop(0);
    BatchProducer producer = [&sim](std::uint64_t first, std::size_t count, std::span<double> i1,
                                    std::span<double> i2) { sim.run_batch(first, count, i1, i2); };
    CorrelationRun run(sim.crop_grid(), std::move(producer), cfg.workers, cfg.chunk_size, 8);
    r.n = cfg.speckle_realizations;
    r.mu2 = coherence_map(run.advance_to(r.n));

    const Grid &g = sim.crop_grid();
    const std::size_t c = g.points[0], ref = sim.reference_index();
    const std::size_t rx = ref % c, ry = ref / c;
    std::vector<double> cut_x(c), cut_y(c);
    for (std::size_t i = 0; i < c; ++i) {
      cut_x[i] = r.mu2.values[ry * c + i];
      cut_y[i] = r.mu2.values[i * c + rx];
    }
    r.mu2_ref = r.mu2.values[ref];
    r.fwhm_x = half_width(cut_x, g.pitch[0]);
    r.fwhm_y = half_width(cut_y, g.pitch[1]);
    r.fwhm = 0.5 * (r.fwhm_x + r.fwhm_y);
    say(log, "phi=" + format_double(r.phi) + " fwhm=" + format_double(r.fwhm) +
                 " l_c=" + format_double(r.coherence_length));
    out.push_back(std::move(r));
  }
  return out;
}

void write_pattern_csv(const std::filesystem::path &path, const ScoringSetup &setup, const Checkpoint &cp) {
  auto out = open_out(path);
  out << "index,rho2_m,g_raw,reconstruction,reference\n";
  for (std::size_t i = setup.window.first; i <= setup.window.last; ++i) {
    const std::size_t j = i - setup.window.first;
    out << csv_row({fmt(std::uint64_t{i}), format_double(setup.detector.coordinate(i)), format_double(cp.g[i]),
                    format_double(cp.reconstruction[j]), format_double(setup.reference[j])});
  }
  finish(out, path);
}

void write_curve_csv(const std::filesystem::path &path, const ConvergenceCurve &curve) {
  auto out = open_out(path);
  out << "n,eps_global,eps_low,eps_high\n";
  for (const auto &c : curve.checkpoints)
    out << csv_row({fmt(c.n), format_double(c.errors.global), format_double(c.errors.low), format_double(c.errors.high)});
  finish(out, path);
}

void write_kappa_csv(const std::filesystem::path &path, const std::vector<KappaPoint> &points) {
  auto out = open_out(path);
  out << "phi_m,l_c_m,kappa,n_star,reached,stable,eps_global,eps_low,eps_high\n";
  for (const auto &p : points) {
    const auto &r = p.result;
    out << csv_row({format_double(p.phi), format_double(p.coherence_length), format_double(p.kappa), fmt(r.n_star),
                    fmt(r.reached), r.stable ? fmt(*r.stable) : std::string("NA"), format_double(r.at_n_star.global),
                    format_double(r.at_n_star.low), format_double(r.at_n_star.high)});
  }
  finish(out, path);
}

void write_bands_csv(const std::filesystem::path &path, const std::vector<KappaPoint> &points) {
  auto out = open_out(path);
  out << "phi_m,kappa,n,reached,eps_global,eps_low,eps_high,partition_residual\n";
  for (const auto &p : points) {
    const auto &r = p.result;
    out << csv_row({format_double(p.phi), format_double(p.kappa), fmt(r.n_star), fmt(r.reached),
                    format_double(r.at_n_star.global), format_double(r.at_n_star.low), format_double(r.at_n_star.high),
                    format_double(p.partition_residual)});
  }
  finish(out, path);
}

void write_speckle_csv(const std::filesystem::path &path, const std::vector<SpeckleResult> &results) {
  auto out = open_out(path);
  out << "k,phi_m,l_c_m,fwhm_x_m,fwhm_y_m,fwhm_m,ratio,mu2_ref,n\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto &r = results[k];
    out << csv_row({fmt(std::uint64_t{k}), format_double(r.phi), format_double(r.coherence_length),
                    format_double(r.fwhm_x), format_double(r.fwhm_y), format_double(r.fwhm),
                    format_double(r.fwhm / r.coherence_length), format_double(r.mu2_ref), fmt(r.n)});
  }
  finish(out, path);
}

void write_matrix_csv(const std::filesystem::path &path, const RealPattern &pattern) {
  auto out = open_out(path);
  const std::size_t nx = pattern.grid.points[0];
  const std::size_t ny = pattern.grid.dims == 2 ? pattern.grid.points[1] : 1;
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      if (x) out << ',';
      out << format_double(pattern.values[y * nx + x]);
    }
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::string> write_converge_outputs(const std::filesystem::path &dir, const ConvergeResult &r) {
  std::vector<std::string> files;
  for (const auto &cp : r.checkpoints) {
    files.push_back("pattern_N" + std::to_string(cp.n) + ".csv");
    write_pattern_csv(dir / files.back(), r.setup, cp);
  }
  files.push_back("curve.csv");
  write_curve_csv(dir / files.back(), r.curve);
  return files;
}

void write_manifest(const std::filesystem::path &path, const ExperimentConfig &cfg, const std::string &command,
                    const std::vector<std::string> &outputs) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::istringstream lines(to_text(cfg));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  nlohmann::ordered_json m;
  m["software"] = "ghostconv";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["config_hash"] = config_hash(cfg);
  m["config"] = std::move(config);
  m["outputs"] = outputs;
  auto out = open_out(path);
  out << m.dump(2) << '\n';
  finish(out, path);
}

} // namespace ghostconv
