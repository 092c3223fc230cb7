#include "apsel/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace apsel {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("invalid value for '" + std::string(key) + "': '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, text);
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, text);
}

template <typename T>
std::vector<T> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<T>(key, item));
      continue;
    }
    const T lo = parse_number<T>(key, std::string_view(item).substr(0, dots));
    const T hi = parse_number<T>(key, std::string_view(item).substr(dots + 2));
    if (hi < lo) bad_value(key, item);
    for (T v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

struct Field {
  std::function<std::string(const ScenarioSpec&)> get;
  std::function<void(ScenarioSpec&, std::string_view, std::string_view)> set;
};

template <typename T, typename Owner>
Field number_field(T Owner::*member, Owner ScenarioSpec::*owner) {
  return {[=](const ScenarioSpec& s) {
            if constexpr (std::is_floating_point_v<T>) return format_double(s.*owner.*member);
            else return std::to_string(s.*owner.*member);
          },
          [=](ScenarioSpec& s, std::string_view k, std::string_view v) { s.*owner.*member = parse_number<T>(k, v); }};
}

template <typename T>
Field spec_number(T ScenarioSpec::*member) {
  return {[=](const ScenarioSpec& s) { return std::to_string(s.*member); },
          [=](ScenarioSpec& s, std::string_view k, std::string_view v) { s.*member = parse_number<T>(k, v); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    const auto net = &ScenarioSpec::net;
    const auto phy = &ScenarioSpec::phy;
    const auto mac = &ScenarioSpec::mac;
    t["area_width_m"] = number_field(&NetworkConfig::area_width_m, net);
    t["area_height_m"] = number_field(&NetworkConfig::area_height_m, net);
    t["num_aps"] = number_field(&NetworkConfig::num_aps, net);
    t["num_stas"] = number_field(&NetworkConfig::num_stas, net);
    t["num_channels"] = number_field(&NetworkConfig::num_channels, net);
    t["ap_tx_power_mw"] = number_field(&NetworkConfig::ap_tx_power_mw, net);
    t["sta_tx_power_mw"] = number_field(&NetworkConfig::sta_tx_power_mw, net);
    t["coverage_radius_m"] = number_field(&NetworkConfig::coverage_radius_m, net);
    t["path_loss_exponent"] = number_field(&NetworkConfig::path_loss_exponent, net);
    t["reference_loss_db"] = number_field(&NetworkConfig::reference_loss_db, net);
    t["channel_policy"] = {
        [](const ScenarioSpec& s) {
          return std::string(s.net.channel_policy == ChannelPolicy::RoundRobin ? "round_robin" : "uniform_random");
        },
        [](ScenarioSpec& s, std::string_view k, std::string_view v) {
          const auto x = trim(v);
          if (x == "round_robin") s.net.channel_policy = ChannelPolicy::RoundRobin;
          else if (x == "uniform_random") s.net.channel_policy = ChannelPolicy::UniformRandom;
          else bad_value(k, v);
        }};
    t["strict_channel_balance"] = {
        [](const ScenarioSpec& s) { return std::string(s.net.strict_channel_balance ? "true" : "false"); },
        [](ScenarioSpec& s, std::string_view k, std::string_view v) { s.net.strict_channel_balance = parse_bool(k, v); }};

    t["cca_threshold_dbm"] = number_field(&PhyConfig::cca_threshold_dbm, phy);
    t["noise_floor_dbm"] = number_field(&PhyConfig::noise_floor_dbm, phy);
    t["receiver_sensitivity_dbm"] = number_field(&PhyConfig::receiver_sensitivity_dbm, phy);
    t["bandwidth_hz"] = number_field(&PhyConfig::bandwidth_hz, phy);
    t["sinr_threshold_db"] = {
        [](const ScenarioSpec& s) {
          return s.phy.sinr_threshold_db ? format_double(*s.phy.sinr_threshold_db) : std::string("auto");
        },
        [](ScenarioSpec& s, std::string_view k, std::string_view v) {
          if (trim(v) == "auto") s.phy.sinr_threshold_db.reset();
          else s.phy.sinr_threshold_db = parse_number<double>(k, v);
        }};

    t["slot_time_us"] = number_field(&MacConfig::slot_time, mac);
    t["sifs_us"] = number_field(&MacConfig::sifs, mac);
    t["difs_us"] = number_field(&MacConfig::difs, mac);
    t["cca_time_us"] = number_field(&MacConfig::cca_time, mac);
    t["cw_min"] = number_field(&MacConfig::cw_min, mac);
    t["cw_max"] = number_field(&MacConfig::cw_max, mac);
    t["retry_limit"] = number_field(&MacConfig::retry_limit, mac);
    t["buffer_size"] = number_field(&MacConfig::buffer_size, mac);
    t["arrival_rate_per_slot"] = number_field(&MacConfig::arrival_rate_per_slot, mac);
    t["mean_packet_bytes"] = number_field(&MacConfig::mean_packet_bytes, mac);
    t["packet_min_bytes"] = number_field(&MacConfig::packet_min_bytes, mac);
    t["packet_max_bytes"] = number_field(&MacConfig::packet_max_bytes, mac);
    t["mac_header_bytes"] = number_field(&MacConfig::mac_header_bytes, mac);
    t["rts_bytes"] = number_field(&MacConfig::rts_bytes, mac);
    t["cts_bytes"] = number_field(&MacConfig::cts_bytes, mac);
    t["ack_bytes"] = number_field(&MacConfig::ack_bytes, mac);
    t["probe_req_bytes"] = number_field(&MacConfig::probe_req_bytes, mac);
    t["probe_res_bytes"] = number_field(&MacConfig::probe_res_bytes, mac);
    t["basic_rate_bps"] = number_field(&MacConfig::basic_rate_bps, mac);
    t["per_frame_fading"] = {
        [](const ScenarioSpec& s) { return std::string(s.mac.per_frame_fading ? "true" : "false"); },
        [](ScenarioSpec& s, std::string_view k, std::string_view v) { s.mac.per_frame_fading = parse_bool(k, v); }};

    t["measurement_slots"] = spec_number(&ScenarioSpec::measurement_slots);
    t["warmup_slots"] = spec_number(&ScenarioSpec::warmup_slots);
    t["run_duration_slots"] = spec_number(&ScenarioSpec::run_duration_slots);
    t["strategies"] = {
        [](const ScenarioSpec& s) {
          std::string out;
          for (std::size_t k = 0; k < s.strategies.size(); ++k) out += (k ? "," : "") + std::string(to_string(s.strategies[k]));
          return out;
        },
        [](ScenarioSpec& s, std::string_view k, std::string_view v) {
          s.strategies.clear();
          for (const auto& item : split_list(v)) {
            const auto st = parse_strategy(item);
            if (!st) bad_value(k, item);
            s.strategies.push_back(*st);
          }
        }};
    t["seeds"] = {[](const ScenarioSpec& s) { return join(s.seeds); },
                  [](ScenarioSpec& s, std::string_view k, std::string_view v) {
                    s.seeds = parse_int_list<std::uint64_t>(k, v);
                  }};
    t["sweep_num_stas"] = {[](const ScenarioSpec& s) { return join(s.num_stas); },
                           [](ScenarioSpec& s, std::string_view k, std::string_view v) {
                             s.num_stas = parse_int_list<int>(k, v);
                           }};
    t["sweep_frame_bytes"] = {[](const ScenarioSpec& s) { return join(s.frame_sizes); },
                              [](ScenarioSpec& s, std::string_view k, std::string_view v) {
                                s.frame_sizes = parse_int_list<int>(k, v);
                              }};
    t["topology_file"] = {[](const ScenarioSpec& s) { return s.topology_file ? s.topology_file->string() : ""; },
                          [](ScenarioSpec& s, std::string_view, std::string_view v) {
                            const auto p = trim(v);
                            if (p.empty()) s.topology_file.reset();
                            else s.topology_file = p;
                          }};
    return t;
  }();
  return table;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void ScenarioSpec::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("invalid scenario: ") + field);
  };
  net.validate();
  phy.validate();
  mac.validate();
  require(!strategies.empty(), "strategies");
  require(measurement_slots >= 1, "measurement_slots");
  require(warmup_slots >= 0, "warmup_slots");
  require(run_duration_slots > measurement_slots, "run_duration_slots");
  require(!seeds.empty(), "seeds");
  for (int n : num_stas) require(n >= 0, "sweep_num_stas");
  for (int f : frame_sizes) require(f > 0, "sweep_frame_bytes");
}

std::vector<int> ScenarioSpec::sta_axis() const { return num_stas.empty() ? std::vector<int>{net.num_stas} : num_stas; }

std::vector<int> ScenarioSpec::frame_axis() const {
  return frame_sizes.empty() ? std::vector<int>{kDefaultFrameBytes} : frame_sizes;
}

void apply_setting(ScenarioSpec& spec, std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  it->second.set(spec, key, value);
}

ScenarioSpec parse_spec(std::istream& in) {
  ScenarioSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(spec, trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
  return spec;
}

ScenarioSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path.string());
  return parse_spec(in);
}

std::string echo_spec(const ScenarioSpec& spec) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(spec) + "\n";
  return out;
}

const StrategyOutcome* ScenarioOutcome::find(Strategy s) const {
  for (const auto& o : strategies) {
    if (o.strategy == s) return &o;
  }
  return nullptr;
}

Topology scenario_topology(const ScenarioSpec& spec, std::uint64_t seed, int num_stas) {
  NetworkConfig net = spec.net;
  net.rng_seed = seed;
  if (spec.topology_file) return load_topology(*spec.topology_file, net);
  net.num_stas = num_stas;
  return deploy(net);
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  return run_scenario(spec, seed, spec.sta_axis().front(), spec.frame_axis().front());
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, std::uint64_t seed, int num_stas, int frame_bytes) {
  spec.validate();
  const Topology topo = scenario_topology(spec, seed, num_stas);
  NetworkConfig net = spec.net;
  net.rng_seed = seed;
  net.num_stas = topo.num_stas();
  net.num_aps = topo.num_aps();
  MacConfig mac = spec.mac;
  if (!spec.frame_sizes.empty()) mac.fixed_packet_bytes = frame_bytes;
  const PhyConfig& phy = spec.phy;

  const int n_sta = topo.num_stas();
  const int n_ap = topo.num_aps();
  const Eigen::MatrixXd rx = downlink_rx_power_mw(topo, net);
  const double noise = phy.noise_floor_mw();
  const auto domains = contention_domains(topo, net, phy);

  std::vector<int> ssf(n_sta);
  std::vector<std::vector<int>> candidates(n_sta);
  for (int i = 0; i < n_sta; ++i) {
    ssf[i] = ssf_select(i, topo, net);
    candidates[i] = candidate_set(i, topo, net, phy);
  }

  // Warm-up: SSF traffic, then each STA probes its candidates strongest first.
  SimulationInput warm;
  warm.topology = &topo;
  warm.net = net;
  warm.phy = phy;
  warm.mac = mac;
  warm.serving_ap = ssf;
  warm.rate_mbps.assign(n_sta, 0.0);
  for (int i = 0; i < n_sta; ++i) {
    if (ssf[i] != kUnassociated)
      warm.rate_mbps[i] = rate_for_sinr(linear_to_db(rx(i, ssf[i]) / noise)).value_or(kLowestRateMbps);
  }
  const Tick window = spec.measurement_slots * mac.slot_time;
  const Tick campaign_start = spec.warmup_slots * mac.slot_time;
  std::size_t longest = 1;
  for (int i = 0; i < n_sta; ++i) {
    std::vector<int> order = candidates[i];
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rx(i, a) > rx(i, b); });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Tick start = campaign_start + static_cast<Tick>(k) * window;
      warm.probes.push_back({i, order[k], start, start + window});
    }
    longest = std::max(longest, order.size());
  }
  warm.duration = campaign_start + static_cast<Tick>(longest) * window;
  warm.seed = seed;
  warm.phase = 0;
  warm.record_tx_log = true;
  SimulationOutput warm_out = simulate(warm);

  ScenarioOutcome outcome;
  outcome.seed = seed;
  outcome.num_stas = n_sta;
  outcome.num_aps = n_ap;
  outcome.frame_bytes = frame_bytes;
  outcome.warmup_exclusivity_violations = warm_out.result.exclusivity_violations;
  outcome.warmup_conserved = warm_out.result.conserved();

  MacRunContext context;
  context.topology = &topo;
  context.net = net;
  context.phy = phy;
  context.mac = mac;
  context.domains = domains;
  context.ap_tx_log = std::move(warm_out.ap_tx_log);
  context.probes = std::move(warm_out.probes);

  std::vector<std::vector<std::optional<double>>> measured(n_sta);
  std::vector<int> dasa(n_sta), mpd(n_sta);
  for (int i = 0; i < n_sta; ++i) {
    std::vector<CandidateMeasurement> ms;
    std::vector<ProbeRecord> records;
    for (int j : candidates[i]) {
      SinrMeasurement m = measure_dl_sinr(i, j, context, spec.measurement_slots);
      ms.push_back({j, m.sinr_db});
      measured[i].push_back(m.sinr_db);
      records.push_back(std::move(m.record));
    }
    dasa[i] = dasa_select(ms, ssf[i]);
    mpd[i] = mpd_select(records, ssf[i]);
  }

  const Eigen::MatrixXd truth =
      ground_truth_sinr(topo, net, phy, domains, warm_out.ap_airtime_s, ticks_to_seconds(warm.duration));
  std::vector<std::vector<double>> truth_db(n_sta);
  for (int i = 0; i < n_sta; ++i) {
    for (int j : candidates[i]) truth_db[i].push_back(linear_to_db(truth(i, j)));
  }
  const double benefit_bytes = static_cast<double>(spec.mac.mean_packet_bytes);
  const AssignmentInstance instance = opasa_instance(candidates, truth_db, phy, benefit_bytes);
  outcome.redundancy = check_redundancy(instance, candidates, truth_db, rx, warm_out.max_sensed_at_access_mw, phy);

  for (Strategy s : spec.strategies) {
    AssociationMap map;
    if (s == Strategy::OPASA) {
      map = opasa_select(ssf, candidates, truth_db, phy, benefit_bytes);
    } else {
      map.strategy = s;
      map.candidates = candidates;
      map.measured_sinr_db = measured;
      map.ap_of_sta = s == Strategy::SSF ? ssf : (s == Strategy::DASA ? dasa : mpd);
    }
    map.rate_mbps.assign(n_sta, 0.0);
    for (int i = 0; i < n_sta; ++i) {
      const int j = map.ap_of_sta[i];
      if (j != kUnassociated)
        map.rate_mbps[i] = rate_for_sinr(linear_to_db(truth(i, j))).value_or(kLowestRateMbps);
    }

    StrategyOutcome so;
    so.strategy = s;
    so.result = run(spec.run_duration_slots, topo, map, net, phy, mac, seed);
    ScenarioSpec cell = spec;
    cell.net = net;
    cell.mac = mac;
    cell.strategies = {s};
    cell.seeds = {seed};
    so.result.config_echo = echo_spec(cell);
    so.aggregate_mbps = aggregate_throughput(so.result);
    so.mean_delay_s = mean_frame_delay(so.result);
    so.drop_rate = drop_rate(so.result);
    so.links = per_link_throughput(so.result);
    so.association = std::move(map);
    outcome.strategies.push_back(std::move(so));
  }
  return outcome;
}

void write_summary_header(std::ostream& os) {
  os << "schema_version,strategy,num_stas,num_aps,frame_bytes,seed,aggregate_mbps,mean_delay_ms,drop_rate\n";
}

void write_summary_rows(std::ostream& os, const ScenarioOutcome& o) {
  for (const auto& s : o.strategies) {
    os << kSchemaVersion << ',' << to_string(s.strategy) << ',' << o.num_stas << ',' << o.num_aps << ','
       << o.frame_bytes << ',' << o.seed << ',' << fixed(s.aggregate_mbps) << ','
       << (s.mean_delay_s ? fixed(*s.mean_delay_s * 1e3) : std::string()) << ',' << fixed(s.drop_rate) << '\n';
  }
}

void write_links_header(std::ostream& os) {
  os << "schema_version,strategy,num_stas,frame_bytes,seed,sta_id,ap_id,throughput_mbps\n";
}

void write_links_rows(std::ostream& os, const ScenarioOutcome& o) {
  for (const auto& s : o.strategies) {
    for (const auto& l : s.links) {
      os << kSchemaVersion << ',' << to_string(s.strategy) << ',' << o.num_stas << ',' << o.frame_bytes << ','
         << o.seed << ',' << l.sta << ',' << l.ap << ',' << fixed(l.mbps) << '\n';
    }
  }
}

SweepReport sweep(const ScenarioSpec& spec, const SweepOptions& options) {
  spec.validate();
  if (options.workers < 1) throw std::invalid_argument("sweep: workers must be >= 1");
  struct Cell {
    int num_stas;
    int frame_bytes;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : spec.sta_axis())
    for (int f : spec.frame_axis())
      for (std::uint64_t s : spec.seeds) cells.push_back({n, f, s});

  std::filesystem::create_directories(options.out_dir);
  std::vector<std::optional<ScenarioOutcome>> results(cells.size());
  std::vector<std::string> status(cells.size(), "pending");
  std::mutex mutex;

  auto write_manifest = [&] {
    const auto path = options.out_dir / "manifest.txt";
    const auto tmp = options.out_dir / "manifest.txt.tmp";
    {
      std::ofstream m(tmp);
      m << "# apsel sweep manifest\nversion = " << kVersion << "\nschema_version = " << kSchemaVersion
        << "\n\n[config]\n"
        << echo_spec(spec) << "\n[cells]\nindex,num_stas,frame_bytes,seed,status\n";
      for (std::size_t k = 0; k < cells.size(); ++k) {
        m << k << ',' << cells[k].num_stas << ',' << cells[k].frame_bytes << ',' << cells[k].seed << ',' << status[k]
          << '\n';
      }
    }
    std::filesystem::rename(tmp, path);
  };
  write_manifest();

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      std::string st = "done";
      std::optional<ScenarioOutcome> out;
      try {
        out = run_scenario(spec, cells[k].seed, cells[k].num_stas, cells[k].frame_bytes);
      } catch (const std::exception& e) {
        st = std::string("failed: ") + e.what();
        std::replace(st.begin(), st.end(), '\n', ' ');
      }
      std::lock_guard lock(mutex);
      results[k] = std::move(out);
      status[k] = st;
      write_manifest();
      if (options.on_cell_done) options.on_cell_done(k);
    }
  };
  std::vector<std::thread> pool;
  const int threads = std::min<int>(options.workers, static_cast<int>(cells.size()));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream summary(options.out_dir / "summary.csv");
  std::ofstream links(options.out_dir / "links.csv");
  write_summary_header(summary);
  write_links_header(links);
  SweepReport report;
  report.cells = cells.size();
  for (const auto& r : results) {
    if (!r) {
      ++report.failed;
      continue;
    }
    write_summary_rows(summary, *r);
    write_links_rows(links, *r);
  }
  return report;
}

}  // namespace apsel
