// Command-line driver for the ghost-imaging convergence experiments.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ghostconv/config.hpp"
#include "ghostconv/error.hpp"
#include "ghostconv/experiments.hpp"

namespace fs = std::filesystem;
using namespace ghostconv;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir = "out";
  std::optional<double> tau;
  std::string schedule;
  std::string phi_list;
  bool override_geometry = false;
  bool records = false;
  std::string records_path;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App *sub, Options &o) {
  sub->add_option("--config", o.config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Base RNG seed");
  sub->add_option("--workers", o.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--tau", o.tau, "Error threshold");
  sub->add_option("--schedule", o.schedule, "N schedule: list, geometric:S:F:C or arithmetic:S:STEP:STOP");
  sub->add_option("--phi-list", o.phi_list, "Aperture diameters, comma separated (um/mm/m suffix)");
  sub->add_flag("--override-geometry", o.override_geometry, "Allow d != d1 + d2");
  sub->add_option("--set", o.sets, "Extra config entry key=value (repeatable)");
  sub->add_flag("-q,--quiet", o.quiet, "No progress output");
}

ExperimentConfig build_config(const Options &o, bool speckle) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  for (const auto &kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::config, "--set expects key=value, got '" + kv + "'");
    set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.tau) cfg.tau = *o.tau;
  if (!o.schedule.empty()) cfg.schedule = parse_schedule(o.schedule);
  if (!o.phi_list.empty()) (speckle ? cfg.speckle_phi_list : cfg.phi_list) = parse_length_list(o.phi_list);
  if (o.override_geometry) cfg.override_geometry = true;
  validate(cfg);
  return cfg;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Monte Carlo convergence of lensless ghost interference"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto *speckle = app.add_subcommand("speckle", "Speckle snapshots, |mu|^2 maps and coherence widths");
  auto *converge = app.add_subcommand("converge", "Reconstruction error against N for one aperture");
  auto *sweep = app.add_subcommand("sweep-kappa", "Minimal N to reach the threshold for each aperture");
  auto *bands = app.add_subcommand("bands", "Low/high band errors at the threshold crossing");
  auto *replay = app.add_subcommand("replay", "Rebuild a convergence run from a record file");
  for (auto *s : {speckle, converge, sweep, bands, replay}) add_common(s, o);
  converge->add_flag("--records", o.records, "Also write every realization to records.gidat");
  replay->add_option("--records", o.records_path, "Record file to replay")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
  const LogFn log = [&o](const std::string &m) {
    if (!o.quiet) std::cerr << m << '\n';
  };

  try {
    const ExperimentConfig cfg = build_config(o, speckle->parsed());
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);
    std::vector<std::string> outputs;

    if (speckle->parsed()) {
      const auto results = run_speckle(cfg, log);
      for (std::size_t k = 0; k < results.size(); ++k) {
        const std::string stem = "speckle_k" + std::to_string(k);
        write_matrix_csv(dir / (stem + "_snapshot.csv"), results[k].snapshot);
        write_matrix_csv(dir / (stem + "_mu2.csv"), results[k].mu2);
        outputs.push_back(stem + "_snapshot.csv");
        outputs.push_back(stem + "_mu2.csv");
      }
      write_speckle_csv(dir / "speckle.csv", results);
      outputs.push_back("speckle.csv");
    } else if (converge->parsed()) {
      std::optional<fs::path> rec;
      if (o.records || cfg.write_records) rec = dir / "records.gidat";
      outputs = write_converge_outputs(dir, run_converge(cfg, rec, log));
      if (rec) outputs.push_back("records.gidat");
    } else if (replay->parsed()) {
      outputs = write_converge_outputs(dir, replay_converge(cfg, o.records_path, log));
    } else if (sweep->parsed()) {
      write_kappa_csv(dir / "kappa.csv", run_kappa_sweep(cfg, log));
      outputs.push_back("kappa.csv");
    } else if (bands->parsed()) {
      write_bands_csv(dir / "bands.csv", run_bands(cfg, log));
      outputs.push_back("bands.csv");
    }
    write_manifest(dir / "manifest.json", cfg, command, outputs);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
