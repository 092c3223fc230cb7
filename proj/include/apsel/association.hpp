#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "apsel/association_map.hpp"
#include "apsel/mac.hpp"
#include "apsel/phy.hpp"
#include "apsel/solver.hpp"
#include "apsel/topology.hpp"

namespace apsel {

/// In-range AP with the strongest received beacon, or kUnassociated.
int ssf_select(int sta, const Topology& topology, const NetworkConfig& net);

/// In-range APs whose received power is at least the receiver sensitivity, ascending.
std::vector<int> candidate_set(int sta, const Topology& topology, const NetworkConfig& net, const PhyConfig& phy);

/// What one STA learned while probing one candidate AP.
struct ProbeRecord {
  int sta = -1;
  int ap = -1;
  double window_start_s = 0.0;
  double window_s = 0.0;
  std::optional<double> probe_sent_time_s;
  std::vector<double> response_times_s;
  std::vector<double> measured_rx_power_mw;
  // Request (first response) or enqueue (later responses) to reception.
  std::vector<double> response_delays_s;
  double windowed_interference_mw = 0.0;

  bool missing() const { return response_times_s.empty(); }
  /// First response time minus the probe request time.
  std::optional<double> probe_delay_s() const;
  std::optional<double> mean_response_delay_s() const;
  std::optional<double> mean_rx_power_mw() const;
};

/// Traffic observed during a probe campaign: who transmitted when, and what
/// each probing STA heard back.
struct MacRunContext {
  const Topology* topology = nullptr;
  NetworkConfig net;
  PhyConfig phy;
  MacConfig mac;
  std::vector<std::vector<int>> domains;
  std::vector<std::vector<TxRecord>> ap_tx_log;
  std::vector<ProbeObservation> probes;
};

struct SinrMeasurement {
  // Missing when no probe response arrived in the window.
  std::optional<double> sinr_db;
  ProbeRecord record;
};

/// Mean probe-response power over the time-averaged energy of co-channel APs
/// outside the candidate's contention domain (plus noise), for the window in
/// which `sta` probed `ap`. Throws if no such window of n slots exists.
SinrMeasurement measure_dl_sinr(int sta, int ap, const MacRunContext& context, long n);

struct CandidateMeasurement {
  int ap = -1;
  std::optional<double> sinr_db;
};

/// Best measured SINR; keeps `ssf_ap` when nothing was measured or the best is below the lowest rate.
int dasa_select(std::span<const CandidateMeasurement> measurements, int ssf_ap);

/// Lowest mean probe-response delay; keeps `ssf_ap` when every candidate is missing.
int mpd_select(std::span<const ProbeRecord> records, int ssf_ap);

/// Linear SINR per (sta, ap) with interference averaged from each co-channel
/// AP's airtime share, counting only APs outside the serving AP's domain.
Eigen::MatrixXd ground_truth_sinr(const Topology& topology, const NetworkConfig& net, const PhyConfig& phy,
                                  const std::vector<std::vector<int>>& domains, std::span<const double> ap_airtime_s,
                                  double duration_s);

/// Benefits Λ/F over candidate cells with SINR at least the STA's threshold.
/// The threshold is phy.sinr_threshold_db, or the minimum of the STA's row.
AssignmentInstance opasa_instance(const std::vector<std::vector<int>>& candidates,
                                  const std::vector<std::vector<double>>& sinr_db, const PhyConfig& phy,
                                  double frame_bytes);

/// Solves the assignment over ground-truth SINRs. STAs with no feasible cell, or
/// whose best cell has no usable rate, keep their SSF AP.
AssociationMap opasa_select(const std::vector<int>& ssf, const std::vector<std::vector<int>>& candidates,
                            const std::vector<std::vector<double>>& sinr_db, const PhyConfig& phy,
                            double frame_bytes = 1460.0);

struct RedundancyReport {
  std::uint64_t cells_checked = 0;
  std::uint64_t sensitivity_violations = 0;
  std::uint64_t sinr_violations = 0;
  std::uint64_t cca_violations = 0;

  std::uint64_t counterexamples() const { return sensitivity_violations + sinr_violations + cca_violations; }
};

/// Checks every cell feasible for the reduced problem against the sensitivity,
/// SINR-threshold and CCA constraints. `sensed_at_access_mw` is, per AP, the
/// largest energy it sensed when it started a transmission.
RedundancyReport check_redundancy(const AssignmentInstance& instance, const std::vector<std::vector<int>>& candidates,
                                  const std::vector<std::vector<double>>& sinr_db, const Eigen::MatrixXd& rx_power_mw,
                                  std::span<const double> sensed_at_access_mw, const PhyConfig& phy);

/// One line per STA: sta_id ap_id strategy measured_sinr_db.
void write_association(std::ostream& os, const AssociationMap& map);

}  // namespace apsel
