#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ghostconv/engine.hpp"
#include "ghostconv/error.hpp"
#include "ghostconv/experiments.hpp"
#include "ghostconv/simulator.hpp"

using namespace ghostconv;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.source_points = 256;
  c.source_pitch = 10e-6;
  c.phi_list = {2e-3};
  c.detector_points = 64;
  c.detector_pitch = 6e-6;
  c.schedule = {200, 500};
  c.chunk_size = 64;
  return c;
}

fs::path temp_dir(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("ghostconv_sim_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("default desk setup is adequately sampled") {
  const ExperimentConfig c;
  const GhostSimulator sim(c, c.phi_list.front());
  CHECK(sim.sampling_warnings().empty());
}

TEST_CASE("fused test arm agrees with the literal chain") {
  const ExperimentConfig c = small_config();
  const GhostSimulator sim(c, 2e-3);
  for (std::uint64_t n = 0; n < 5; ++n) {
    const ComplexField src = sim.source_field(n);
    const Complex chain = sim.test_arm_chain(src), fused = sim.test_arm_fused(src);
    CHECK(std::abs(chain - fused) <= 1e-12 * std::abs(chain));
    const Realization r = sim.run_realization(n);
    CHECK(r.i1 == doctest::Approx(std::norm(fused)).epsilon(1e-15));
  }
  ExperimentConfig literal = c;
  literal.fused_test_arm = false;
  const GhostSimulator sim2(literal, 2e-3);
  for (std::uint64_t n = 0; n < 3; ++n)
    CHECK(sim2.run_realization(n).i1 == doctest::Approx(sim.run_realization(n).i1).epsilon(1e-12));
}

TEST_CASE("reference arm intensities equal a direct propagation") {
  const ExperimentConfig c = small_config();
  const GhostSimulator sim(c, 2e-3);
  const RealPattern direct = intensity(propagate(sim.source_field(3), sim.reference_kernel()));
  CHECK(sim.run_realization(3).i2.values == direct.values);
}

TEST_CASE("batches equal single realizations bitwise") {
  const ExperimentConfig c = small_config();
  const GhostSimulator sim(c, 2e-3, stream_offset(2));
  const std::size_t count = 45, p = sim.detector_grid().size();
  std::vector<double> i1(count), i2(count * p);
  sim.run_batch(10, count, i1, i2);
  for (std::size_t r = 0; r < count; ++r) {
    const Realization one = sim.run_realization(10 + r);
    CHECK(i1[r] == one.i1);
    CHECK(std::equal(one.i2.values.begin(), one.i2.values.end(), i2.begin() + static_cast<std::ptrdiff_t>(r * p)));
  }
}

TEST_CASE("dark object gives a zero bucket and zero correlation") {
  ExperimentConfig c = small_config();
  const auto mask = fs::temp_directory_path() / "ghostconv_dark_mask.txt";
  {
    std::ofstream out(mask);
    for (std::size_t i = 0; i < c.object_points; ++i) out << "0\n";
  }
  c.mask_file = mask;
  const GhostSimulator sim(c, 2e-3);
  CorrelationAccumulator acc(sim.detector_grid());
  for (std::uint64_t n = 0; n < 20; ++n) {
    const Realization r = sim.run_realization(n);
    CHECK(r.i1 == 0.0);
    acc.update(r.i1, r.i2);
  }
  for (double v : acc.finalize().values) CHECK(v == 0.0);
}

TEST_CASE("mean reference intensity carries no fringes") {
  const ExperimentConfig c;
  const GhostSimulator sim(c, c.phi_list.front());
  CorrelationRun run(sim.detector_grid(), [&](std::uint64_t f, std::size_t n, std::span<double> a, std::span<double> b) {
    sim.run_batch(f, n, a, b);
  }, 1, 256);
  const auto &acc = run.advance_to(10000);
  double lo = 1e300, hi = 0.0;
  for (std::size_t q = 0; q < sim.detector_grid().size(); ++q) {
    lo = std::min(lo, acc.s2(q));
    hi = std::max(hi, acc.s2(q));
  }
  CHECK((hi - lo) / hi < 0.1);
  // The correlation does carry them.
  const auto g = normalize_unit(acc.finalize().values, IndexWindow::full(sim.detector_grid().size()));
  CHECK(*std::min_element(g.begin(), g.end()) == 0.0);
}

TEST_CASE("engine results do not depend on workers or batch width") {
  const ExperimentConfig c = small_config();
  const GhostSimulator sim(c, 2e-3);
  BatchProducer producer = [&](std::uint64_t f, std::size_t n, std::span<double> a, std::span<double> b) {
    sim.run_batch(f, n, a, b);
  };
  CorrelationRun base(sim.detector_grid(), producer, 1, 64);
  base.advance_to(150);
  base.advance_to(700);
  for (unsigned workers : {2u, 3u, 8u})
    for (std::size_t batch : {1u, 7u, 32u}) {
      CorrelationRun other(sim.detector_grid(), producer, workers, 64, batch);
      other.advance_to(150);
      other.advance_to(700);
      CHECK(other.accumulator() == base.accumulator());
    }
  CHECK_THROWS_AS(base.advance_to(10), Error);
}

TEST_CASE("engine forwards records in order and rethrows worker errors") {
  const ExperimentConfig c = small_config();
  const GhostSimulator sim(c, 2e-3);
  BatchProducer producer = [&](std::uint64_t f, std::size_t n, std::span<double> a, std::span<double> b) {
    sim.run_batch(f, n, a, b);
  };
  const auto path = fs::temp_directory_path() / "ghostconv_engine.gidat";
  {
    RecordWriter w(path, make_header(c, 2e-3, 0));
    CorrelationRun run(sim.detector_grid(), producer, 4, 16);
    run.set_record_sink(&w);
    run.advance_to(100);
  }
  const OfflineRecordFile f = read_records(path);
  REQUIRE(f.header.count == 100);
  for (std::uint64_t n : {0, 17, 99}) {
    const Realization r = sim.run_realization(n);
    CHECK(f.i1[n] == r.i1);
    CHECK(f.i2[n * 64 + 5] == r.i2.values[5]);
  }

  BatchProducer failing = [](std::uint64_t f, std::size_t, std::span<double>, std::span<double>) {
    if (f >= 64) throw Error(Errc::io, "boom");
  };
  CorrelationRun bad(sim.detector_grid(), failing, 4, 16);
  CHECK_THROWS_AS(bad.advance_to(200), Error);
}

TEST_CASE("converge: one checkpoint per scheduled N and bitwise replay") {
  ExperimentConfig c = small_config();
  c.schedule = {1000};
  CHECK(run_converge(c).checkpoints.size() == 1);

  c.schedule = {300, 700, 1000};
  const auto dir = temp_dir("replay");
  const ConvergeResult live = run_converge(c, dir / "records.gidat");
  const ConvergeResult again = replay_converge(c, dir / "records.gidat");
  REQUIRE(live.checkpoints.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(live.checkpoints[k].g == again.checkpoints[k].g);
    CHECK(live.checkpoints[k].errors.global == again.checkpoints[k].errors.global);
  }
  const auto a = write_converge_outputs(dir / "", live);
  CHECK(a == std::vector<std::string>{"pattern_N300.csv", "pattern_N700.csv", "pattern_N1000.csv", "curve.csv"});

  ExperimentConfig other = c;
  other.seed = 99;
  CHECK_THROWS_AS(replay_converge(other, dir / "records.gidat"), Error);
  ExperimentConfig longer = c;
  longer.schedule = {300, 2000};
  CHECK_THROWS_AS(replay_converge(longer, dir / "records.gidat"), Error);
}

TEST_CASE("converge output files are identical for any worker count") {
  ExperimentConfig c = small_config();
  c.schedule = {100, 400, 900};
  std::vector<std::string> curves;
  for (unsigned w : {1u, 4u, 8u}) {
    c.workers = w;
    const auto dir = temp_dir("workers" + std::to_string(w));
    write_converge_outputs(dir, run_converge(c));
    curves.push_back(slurp(dir / "curve.csv") + slurp(dir / "pattern_N900.csv"));
  }
  CHECK(curves[0] == curves[1]);
  CHECK(curves[0] == curves[2]);
}

TEST_CASE("sweep: kappa column and trivial threshold") {
  ExperimentConfig c;
  c.phi_list = {1720e-6, 1840e-6};
  c.schedule = {500, 1000};
  c.tau = 1.0;
  const auto pts = run_kappa_sweep(c);
  REQUIRE(pts.size() == 2);
  for (const auto &p : pts) {
    CHECK(p.kappa == doctest::Approx(kappa(c.slit_width, coherence_length(c.wavelength, c.d1, p.phi))).epsilon(1e-12));
    CHECK(p.result.reached);
    CHECK(p.result.n_star == 500);
  }
  CHECK(pts[0].kappa == doctest::Approx(5.658).epsilon(2e-4));
  CHECK(pts[1].kappa == doctest::Approx(6.052).epsilon(2e-4));

  ExperimentConfig one;
  CHECK_THROWS_AS(run_kappa_sweep(one), Error);
}

TEST_CASE("bands rows satisfy the partition identity and flag unreachable thresholds") {
  ExperimentConfig c = small_config();
  c.phi_list = {1e-3, 2e-3};
  c.schedule = {200, 400};
  c.tau = 1e-6;
  const auto rows = run_bands(c);
  REQUIRE(rows.size() == 2);
  for (const auto &r : rows) {
    CHECK_FALSE(r.result.reached);
    CHECK(r.result.n_star == 400);
    CHECK(std::abs(r.partition_residual) <= 1e-12);
    const auto &e = r.result.at_n_star;
    CHECK(e.global >= std::min(e.low, e.high));
    CHECK(e.global <= std::max(e.low, e.high));
  }
}

TEST_CASE("speckle run on a small plane") {
  ExperimentConfig c;
  c.speckle_points = 64;
  c.speckle_crop = 32;
  c.speckle_output_pitch = 4e-6;
  c.speckle_phi_list = {1.5e-3};
  c.speckle_realizations = 3000;
  const auto res = run_speckle(c);
  REQUIRE(res.size() == 1);
  CHECK(res[0].mu2_ref == doctest::Approx(1.0).epsilon(0.1));
  CHECK(res[0].fwhm == doctest::Approx(res[0].coherence_length).epsilon(0.3));
  CHECK(res[0].snapshot.grid.size() == 32 * 32);
}

TEST_CASE("manifest records the configuration") {
  const auto dir = temp_dir("manifest");
  ExperimentConfig c;
  c.seed = 31;
  write_manifest(dir / "manifest.json", c, "ghostconv converge", {"curve.csv"});
  const std::string text = slurp(dir / "manifest.json");
  CHECK(text.find("\"seed\": 31") != std::string::npos);
  CHECK(text.find("\"version\"") != std::string::npos);
  CHECK(text.find("\"d1\": \"0.06\"") != std::string::npos);
  CHECK(text.find(config_hash(c)) != std::string::npos);
}
