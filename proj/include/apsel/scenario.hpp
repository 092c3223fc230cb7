#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apsel/association.hpp"
#include "apsel/mac.hpp"
#include "apsel/metrics.hpp"
#include "apsel/phy.hpp"
#include "apsel/topology.hpp"

namespace apsel {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;
inline constexpr int kDefaultFrameBytes = 1460;

struct ScenarioSpec {
  NetworkConfig net;
  PhyConfig phy;
  MacConfig mac;
  std::vector<Strategy> strategies{Strategy::SSF, Strategy::MPD, Strategy::DASA, Strategy::OPASA};
  // Probe window per candidate, in slots.
  long measurement_slots = 1000;
  // SSF-only traffic before the probe campaign starts.
  long warmup_slots = 1000;
  long run_duration_slots = 50000;
  std::vector<std::uint64_t> seeds{1};
  // Sweep axes; empty means the single value in `net` / the default frame size.
  std::vector<int> num_stas;
  std::vector<int> frame_sizes;
  // Fixed layout instead of a random deployment.
  std::optional<std::filesystem::path> topology_file;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::vector<int> sta_axis() const;
  std::vector<int> frame_axis() const;
};

/// Parses flat `key = value` lines; `#` starts a comment. Lists are comma
/// separated and integer lists accept `a..b` ranges.
ScenarioSpec parse_spec(std::istream& in);
ScenarioSpec load_spec(const std::filesystem::path& path);
/// Sets one key; throws std::invalid_argument for unknown keys or bad values.
void apply_setting(ScenarioSpec& spec, std::string_view key, std::string_view value);
/// Every key with its value, in a form parse_spec reads back.
std::string echo_spec(const ScenarioSpec& spec);

struct StrategyOutcome {
  Strategy strategy = Strategy::SSF;
  AssociationMap association;
  ScenarioResult result;
  double aggregate_mbps = 0.0;
  std::optional<double> mean_delay_s;
  double drop_rate = 0.0;
  std::vector<LinkThroughput> links;
};

struct ScenarioOutcome {
  std::uint64_t seed = 0;
  int num_stas = 0;
  int num_aps = 0;
  int frame_bytes = kDefaultFrameBytes;
  std::vector<StrategyOutcome> strategies;
  RedundancyReport redundancy;
  std::uint64_t warmup_exclusivity_violations = 0;
  bool warmup_conserved = true;

  const StrategyOutcome* find(Strategy s) const;
};

/// Deploys, warms up under SSF, probes, selects with every requested strategy
/// and runs each frozen association on the same arrivals.
ScenarioOutcome run_scenario(const ScenarioSpec& spec, std::uint64_t seed, int num_stas, int frame_bytes);
ScenarioOutcome run_scenario(const ScenarioSpec& spec, std::uint64_t seed);

Topology scenario_topology(const ScenarioSpec& spec, std::uint64_t seed, int num_stas);

void write_summary_header(std::ostream& os);
void write_summary_rows(std::ostream& os, const ScenarioOutcome& outcome);
void write_links_header(std::ostream& os);
void write_links_rows(std::ostream& os, const ScenarioOutcome& outcome);

struct SweepOptions {
  std::filesystem::path out_dir;
  int workers = 1;
  // Called with the cell index after each cell's manifest entry is written.
  std::function<void(std::size_t)> on_cell_done;
};

struct SweepReport {
  std::size_t cells = 0;
  std::size_t failed = 0;
};

/// Runs every (num_stas, frame size, seed) cell and writes summary.csv,
/// links.csv and manifest.txt into the output directory. A failing cell is
/// recorded in the manifest and the sweep carries on.
SweepReport sweep(const ScenarioSpec& spec, const SweepOptions& options);

}  // namespace apsel
