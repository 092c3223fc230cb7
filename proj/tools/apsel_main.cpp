// apsel: run one AP-selection scenario or a full sweep and write CSV results.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "apsel/scenario.hpp"

namespace fs = std::filesystem;
using namespace apsel;

namespace {

struct Overrides {
  std::string config;
  std::string strategy;
  std::optional<int> stas;
  std::optional<int> aps;
  std::optional<std::uint64_t> seed;
  std::optional<long> slots;
  std::optional<long> n_measure;
  std::string out = "out";
  int workers = 1;
  std::string topology;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Key = value scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--strategy", o.strategy, "SSF, MPD, DASA, OPASA or all");
  cmd->add_option("--stas", o.stas, "Number of STAs")->check(CLI::NonNegativeNumber);
  cmd->add_option("--aps", o.aps, "Number of APs")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Run only this seed");
  cmd->add_option("--slots", o.slots, "Measured run length in slots")->check(CLI::PositiveNumber);
  cmd->add_option("--n-measure", o.n_measure, "Probe window per candidate in slots")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--topology", o.topology, "Load positions and channels from a topology file")
      ->check(CLI::ExistingFile);
}

ScenarioSpec build_spec(const Overrides& o) {
  ScenarioSpec spec = o.config.empty() ? ScenarioSpec{} : load_spec(o.config);
  if (!o.strategy.empty() && o.strategy != "all" && o.strategy != "ALL") apply_setting(spec, "strategies", o.strategy);
  if (o.stas) {
    spec.net.num_stas = *o.stas;
    spec.num_stas.clear();
  }
  if (o.aps) spec.net.num_aps = *o.aps;
  if (o.seed) spec.seeds = {*o.seed};
  if (o.slots) spec.run_duration_slots = *o.slots;
  if (o.n_measure) spec.measurement_slots = *o.n_measure;
  if (!o.topology.empty()) spec.topology_file = o.topology;
  spec.validate();
  return spec;
}

int run_command(const Overrides& o, const std::string& dump_topology, const std::string& dump_association) {
  ScenarioSpec spec = build_spec(o);
  const std::uint64_t seed = spec.seeds.front();
  if (!dump_topology.empty()) {
    save_topology(scenario_topology(spec, seed, spec.sta_axis().front()), dump_topology);
    std::cerr << "topology written to " << dump_topology << '\n';
  }
  const ScenarioOutcome outcome = run_scenario(spec, seed);

  fs::create_directories(o.out);
  std::ofstream summary(fs::path(o.out) / "summary.csv");
  write_summary_header(summary);
  write_summary_rows(summary, outcome);
  std::ofstream links(fs::path(o.out) / "links.csv");
  write_links_header(links);
  write_links_rows(links, outcome);
  std::ofstream manifest(fs::path(o.out) / "manifest.txt");
  manifest << "# apsel run manifest\nversion = " << kVersion << "\nschema_version = " << kSchemaVersion
           << "\n\n[config]\n"
           << echo_spec(spec) << "\n[cells]\nindex,num_stas,frame_bytes,seed,status\n0," << outcome.num_stas << ','
           << outcome.frame_bytes << ',' << seed << ",done\n";

  if (!dump_association.empty()) {
    std::ofstream os(dump_association);
    for (const auto& s : outcome.strategies) write_association(os, s.association);
  }

  for (const auto& s : outcome.strategies) {
    std::cout << to_string(s.strategy) << ": " << s.aggregate_mbps << " Mbps, mean delay ";
    if (s.mean_delay_s) std::cout << *s.mean_delay_s * 1e3 << " ms";
    else std::cout << "n/a";
    std::cout << ", drop rate " << s.drop_rate << '\n';
  }
  return 0;
}

int sweep_command(const Overrides& o) {
  const ScenarioSpec spec = build_spec(o);
  const SweepReport report = sweep(spec, {o.out, o.workers});
  std::cout << report.cells << " cells, " << report.failed << " failed; results in " << o.out << '\n';
  return report.failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downlink-SINR access point selection simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Overrides run_opts;
  std::string dump_topology;
  std::string dump_association;
  auto* run = app.add_subcommand("run", "Run one scenario (one seed) for the selected strategies");
  add_common(run, run_opts);
  run->add_option("--dump-topology", dump_topology, "Write the deployed topology to this file");
  run->add_option("--dump-association", dump_association, "Write every strategy's association to this file");

  Overrides sweep_opts;
  auto* sw = app.add_subcommand("sweep", "Run every (STA count, frame size, seed) cell in the config");
  add_common(sw, sweep_opts);
  sw->add_option("--workers", sweep_opts.workers, "Concurrent cells")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(run_opts, dump_topology, dump_association);
    return sweep_command(sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "apsel: " << e.what() << '\n';
    return 1;
  }
}
