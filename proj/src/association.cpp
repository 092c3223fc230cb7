#include "apsel/association.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace apsel {
namespace {

double link_power_mw(int sta, int ap, const Topology& topology, const NetworkConfig& net) {
  return net.ap_tx_power_mw * topology.link_gain(sta, ap) *
         path_gain(topology.link_distance(sta, ap), net.path_loss_exponent, net.reference_loss_db);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool outside_domain(int z, int ap, const Topology& topology, const std::vector<std::vector<int>>& domains) {
  if (z == ap || topology.ap_channel[z] != topology.ap_channel[ap]) return false;
  const auto& d = domains[ap];
  return std::find(d.begin(), d.end(), z) == d.end();
}

}  // namespace

int ssf_select(int sta, const Topology& topology, const NetworkConfig& net) {
  int best = kUnassociated;
  double best_power = 0.0;
  for (int j = 0; j < topology.num_aps(); ++j) {
    if (!in_range(j, sta, topology, net)) continue;
    const double p = link_power_mw(sta, j, topology, net);
    if (best == kUnassociated || p > best_power) {
      best = j;
      best_power = p;
    }
  }
  return best;
}

std::vector<int> candidate_set(int sta, const Topology& topology, const NetworkConfig& net, const PhyConfig& phy) {
  std::vector<int> out;
  const double theta = phy.receiver_sensitivity_mw();
  for (int j = 0; j < topology.num_aps(); ++j) {
    if (in_range(j, sta, topology, net) && link_power_mw(sta, j, topology, net) >= theta) out.push_back(j);
  }
  return out;
}

std::optional<double> ProbeRecord::probe_delay_s() const {
  if (missing() || !probe_sent_time_s) return std::nullopt;
  return response_times_s.front() - *probe_sent_time_s;
}

std::optional<double> ProbeRecord::mean_response_delay_s() const { return mean_of(response_delays_s); }

std::optional<double> ProbeRecord::mean_rx_power_mw() const { return mean_of(measured_rx_power_mw); }

SinrMeasurement measure_dl_sinr(int sta, int ap, const MacRunContext& context, long n) {
  if (context.topology == nullptr) throw std::invalid_argument("measure_dl_sinr: context has no topology");
  const Topology& topo = *context.topology;
  const auto obs = std::find_if(context.probes.begin(), context.probes.end(),
                                [&](const ProbeObservation& o) { return o.sta == sta && o.ap == ap; });
  if (obs == context.probes.end()) throw std::invalid_argument("measure_dl_sinr: STA never probed this AP");
  if (obs->window_end - obs->window_start != n * context.mac.slot_time)
    throw std::invalid_argument("measure_dl_sinr: probe window is not n slots long");

  SinrMeasurement m;
  ProbeRecord& r = m.record;
  r.sta = sta;
  r.ap = ap;
  r.window_start_s = ticks_to_seconds(obs->window_start);
  r.window_s = ticks_to_seconds(obs->window_end - obs->window_start);
  if (obs->request_sent) r.probe_sent_time_s = ticks_to_seconds(*obs->request_sent);
  for (Tick t : obs->response_times) r.response_times_s.push_back(ticks_to_seconds(t));
  for (Tick t : obs->response_delays) r.response_delays_s.push_back(ticks_to_seconds(t));
  r.measured_rx_power_mw = obs->response_power_mw;

  MeasurementWindow window = MeasurementWindow::of_slots(n, context.mac.slot_time_s());
  for (int z = 0; z < topo.num_aps(); ++z) {
    if (!outside_domain(z, ap, topo, context.domains) || static_cast<std::size_t>(z) >= context.ap_tx_log.size())
      continue;
    const double p = link_power_mw(sta, z, topo, context.net);
    for (const TxRecord& tx : context.ap_tx_log[z]) {
      const Tick from = std::max(tx.start, obs->window_start);
      const Tick to = std::min(tx.end, obs->window_end);
      if (to <= from) continue;
      window.samples.push_back(
          InterferenceSample{z, p, ticks_to_seconds(to - from) * tx.rate_bps, tx.rate_bps, ticks_to_seconds(from)});
    }
  }
  r.windowed_interference_mw = windowed_interference(window);
  if (const auto signal = r.mean_rx_power_mw()) {
    m.sinr_db = linear_to_db(sinr(*signal, r.windowed_interference_mw, context.phy.noise_floor_mw()));
  }
  return m;
}

int dasa_select(std::span<const CandidateMeasurement> measurements, int ssf_ap) {
  const CandidateMeasurement* best = nullptr;
  for (const auto& c : measurements) {
    if (!c.sinr_db) continue;
    if (best == nullptr || *c.sinr_db > *best->sinr_db || (*c.sinr_db == *best->sinr_db && c.ap < best->ap)) best = &c;
  }
  if (best == nullptr || !rate_for_sinr(*best->sinr_db)) return ssf_ap;
  return best->ap;
}

int mpd_select(std::span<const ProbeRecord> records, int ssf_ap) {
  int best = kUnassociated;
  double best_delay = 0.0;
  for (const auto& r : records) {
    const auto d = r.mean_response_delay_s();
    if (!d) continue;
    if (best == kUnassociated || *d < best_delay || (*d == best_delay && r.ap < best)) {
      best = r.ap;
      best_delay = *d;
    }
  }
  return best == kUnassociated ? ssf_ap : best;
}

Eigen::MatrixXd ground_truth_sinr(const Topology& topology, const NetworkConfig& net, const PhyConfig& phy,
                                  const std::vector<std::vector<int>>& domains, std::span<const double> ap_airtime_s,
                                  double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("ground_truth_sinr: duration must be > 0");
  const int n = topology.num_stas();
  const int m = topology.num_aps();
  if (static_cast<int>(ap_airtime_s.size()) != m) throw std::invalid_argument("ground_truth_sinr: airtime size");
  const Eigen::MatrixXd rx = downlink_rx_power_mw(topology, net);
  Eigen::VectorXd duty(m);
  for (int z = 0; z < m; ++z) duty(z) = std::min(1.0, ap_airtime_s[z] / duration_s);

  Eigen::MatrixXd out(n, m);
  const double noise = phy.noise_floor_mw();
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd interference = Eigen::VectorXd::Zero(n);
    for (int z = 0; z < m; ++z) {
      if (outside_domain(z, j, topology, domains)) interference += rx.col(z) * duty(z);
    }
    out.col(j) = rx.col(j).array() / (interference.array() + noise);
  }
  return out;
}

AssignmentInstance opasa_instance(const std::vector<std::vector<int>>& candidates,
                                  const std::vector<std::vector<double>>& sinr_db, const PhyConfig& phy,
                                  double frame_bytes) {
  if (candidates.size() != sinr_db.size()) throw std::invalid_argument("opasa_instance: row count mismatch");
  if (!(frame_bytes > 0.0)) throw std::invalid_argument("opasa_instance: frame size must be > 0");
  int m = 0;
  for (const auto& row : candidates) {
    for (int j : row) m = std::max(m, j + 1);
  }
  const int n = static_cast<int>(candidates.size());
  AssignmentInstance inst;
  inst.benefit = Eigen::MatrixXd::Zero(n, m);
  inst.feasible = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, m, false);
  for (int i = 0; i < n; ++i) {
    const auto& row = sinr_db[i];
    if (row.size() != candidates[i].size()) throw std::invalid_argument("opasa_instance: row length mismatch");
    if (row.empty()) continue;
    const double gamma = phy.sinr_threshold_db.value_or(*std::min_element(row.begin(), row.end()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] < gamma) continue;
      const int j = candidates[i][k];
      inst.feasible(i, j) = true;
      inst.benefit(i, j) = rate_for_sinr(row[k]).value_or(0.0) / frame_bytes;
    }
  }
  return inst;
}

AssociationMap opasa_select(const std::vector<int>& ssf, const std::vector<std::vector<int>>& candidates,
                            const std::vector<std::vector<double>>& sinr_db, const PhyConfig& phy,
                            double frame_bytes) {
  if (ssf.size() != candidates.size()) throw std::invalid_argument("opasa_select: row count mismatch");
  const AssignmentInstance inst = opasa_instance(candidates, sinr_db, phy, frame_bytes);
  const AssignmentSolution sol = solve_exact(inst);
  AssociationMap map;
  map.strategy = Strategy::OPASA;
  map.candidates = candidates;
  map.ap_of_sta = ssf;
  map.measured_sinr_db.resize(ssf.size());
  for (std::size_t i = 0; i < ssf.size(); ++i) {
    for (double v : sinr_db[i]) map.measured_sinr_db[i].emplace_back(v);
    const int j = sol.ap_of_sta[i];
    if (j != kUnassociated && inst.benefit(static_cast<int>(i), j) > 0.0) map.ap_of_sta[i] = j;
  }
  return map;
}

RedundancyReport check_redundancy(const AssignmentInstance& instance, const std::vector<std::vector<int>>& candidates,
                                  const std::vector<std::vector<double>>& sinr_db, const Eigen::MatrixXd& rx_power_mw,
                                  std::span<const double> sensed_at_access_mw, const PhyConfig& phy) {
  RedundancyReport report;
  const double theta = phy.receiver_sensitivity_mw();
  const double cca = phy.cca_threshold_mw();
  for (int i = 0; i < instance.num_stas(); ++i) {
    const auto& row = sinr_db[i];
    if (row.empty()) continue;
    const double gamma = phy.sinr_threshold_db.value_or(*std::min_element(row.begin(), row.end()));
    for (std::size_t k = 0; k < candidates[i].size(); ++k) {
      const int j = candidates[i][k];
      if (!instance.feasible(i, j)) continue;
      ++report.cells_checked;
      if (rx_power_mw(i, j) < theta) ++report.sensitivity_violations;
      if (row[k] < gamma) ++report.sinr_violations;
      if (senses_busy(sensed_at_access_mw[j], cca)) ++report.cca_violations;
    }
  }
  return report;
}

void write_association(std::ostream& os, const AssociationMap& map) {
  os << "sta_id ap_id strategy measured_sinr_db\n";
  for (int i = 0; i < map.num_stas(); ++i) {
    os << i << ' ' << map.ap_of_sta[i] << ' ' << to_string(map.strategy) << ' ';
    if (const auto s = map.serving_sinr_db(i)) {
      os << std::fixed << std::setprecision(6) << *s << std::defaultfloat;
    } else {
      os << "NA";
    }
    os << '\n';
  }
}

}  // namespace apsel
