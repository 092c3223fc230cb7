#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "apsel/association_map.hpp"
#include "apsel/phy.hpp"
#include "apsel/random.hpp"
#include "apsel/scenario_result.hpp"
#include "apsel/topology.hpp"
#include "apsel/units.hpp"

namespace apsel {

/// DCF timing, frame sizes and traffic. Times are in microsecond ticks.
struct MacConfig {
  Tick slot_time = 20;
  Tick sifs = 10;
  Tick difs = 20;
  Tick cca_time = 15;
  int cw_min = 32;
  int cw_max = 1024;
  int retry_limit = 7;
  int buffer_size = 20;
  double arrival_rate_per_slot = 1.0;
  int mean_packet_bytes = 1460;
  int packet_min_bytes = 1400;
  int packet_max_bytes = 1500;
  // When set, every packet has exactly this many payload bytes.
  std::optional<int> fixed_packet_bytes;
  int mac_header_bytes = 34;
  int rts_bytes = 20;
  int cts_bytes = 14;
  int ack_bytes = 14;
  int probe_req_bytes = 20;
  int probe_res_bytes = 20;
  double basic_rate_bps = 1e6;
  // Redraw the desired-signal fading gain for every frame instead of per scenario.
  bool per_frame_fading = false;

  void validate() const;

  double slot_time_s() const { return ticks_to_seconds(slot_time); }
  /// Airtime of a basic-rate control frame of `bytes`.
  Tick control_airtime(int bytes) const;
  Tick data_airtime(int payload_bytes, double rate_bps) const;
};

enum class FrameKind { Data, Rts, Cts, Ack, ProbeReq, ProbeRes, Beacon };

struct Frame {
  FrameKind kind = FrameKind::Data;
  int src = -1;
  int dst = -1;
  double payload_bits = 0.0;
  double phy_rate_bps = 0.0;

  double airtime_s() const;
};

/// Transmission time of `payload_bits` at `phy_rate_bps`, in seconds.
double frame_airtime(double payload_bits, double phy_rate_bps);

/// DIFS + worst-case backoff + data + SIFS + ACK: the airtime a collided frame costs.
double collision_cycle_time(double data_airtime_s, const MacConfig& config);

/// Co-channel APs whose lone transmission AP `ap` would sense above the CCA threshold.
std::vector<int> contention_domain(int ap, const Topology& topology, const NetworkConfig& net,
                                   const PhyConfig& phy);
std::vector<std::vector<int>> contention_domains(const Topology& topology, const NetworkConfig& net,
                                                 const PhyConfig& phy);

/// Uniform slot count in [0, cw - 1].
int draw_backoff(int cw, Rng& rng);
int contention_window_after_failure(int cw, const MacConfig& config);
inline int contention_window_after_success(const MacConfig& config) { return config.cw_min; }

struct Packet {
  Tick arrival = 0;
  int bytes = 0;
  int sta = -1;
};

/// Drop-tail FIFO of downlink frames waiting at one AP.
class DownlinkQueue {
 public:
  explicit DownlinkQueue(int capacity) : capacity_(capacity) {}

  /// Appends unless the buffer (including a frame held for transmission) is full.
  bool offer(const Packet& p, bool holding_frame = false);
  bool empty() const { return packets_.empty(); }
  std::size_t size() const { return packets_.size(); }
  int capacity() const { return capacity_; }
  const Packet& front() const { return packets_.front(); }
  Packet pop();

  std::uint64_t arrived() const { return arrived_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  int capacity_;
  std::deque<Packet> packets_;
  std::uint64_t arrived_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Poisson packet arrivals for one AP. Every arrival consumes the same draws
/// whether or not it is queued, so the arrival sequence is independent of the MAC.
class TrafficSource {
 public:
  TrafficSource(const MacConfig& config, std::vector<int> destinations, Rng rng);

  double next_arrival_us() const { return next_us_; }
  bool active() const { return !destinations_.empty(); }
  /// Draws the packet due at next_arrival_us() and advances the clock.
  Packet take();

 private:
  std::vector<int> destinations_;
  Rng rng_;
  std::exponential_distribution<double> gap_;
  std::uniform_int_distribution<int> size_;
  std::uniform_real_distribution<double> pick_;
  double next_us_ = 0.0;
};

/// Moves every arrival with time <= `until` into `queue`, counting overflow drops.
/// Returns the number of arrivals generated.
std::uint64_t enqueue_arrivals(DownlinkQueue& queue, TrafficSource& source, Tick until, bool holding_frame = false);

// ---------------------------------------------------------------------------
// Event-driven DCF run.

/// One transmission by an AP, for interference measurement.
struct TxRecord {
  Tick start = 0;
  Tick end = 0;
  FrameKind kind = FrameKind::Data;
  double bits = 0.0;
  double rate_bps = 0.0;
};

/// A STA tunes to `ap`'s channel, sends one probe request and keeps the AP
/// answering with probe responses until `end`.
struct ProbeWindowSpec {
  int sta = -1;
  int ap = -1;
  Tick start = 0;
  Tick end = 0;
};

struct ProbeObservation {
  int sta = -1;
  int ap = -1;
  Tick window_start = 0;
  Tick window_end = 0;
  // Start of the first probe request transmission, if one was sent.
  std::optional<Tick> request_sent;
  std::vector<Tick> response_times;      // reception end of each probe response
  std::vector<Tick> response_delays;     // request/enqueue to reception end
  std::vector<double> response_power_mw;
};

struct SimulationInput {
  const Topology* topology = nullptr;
  NetworkConfig net;
  PhyConfig phy;
  MacConfig mac;
  // Serving AP and PHY rate per STA.
  std::vector<int> serving_ap;
  std::vector<double> rate_mbps;
  Tick duration = 0;
  std::uint64_t seed = 0;
  // Distinguishes independent phases run with the same seed.
  std::uint64_t phase = 0;
  std::vector<ProbeWindowSpec> probes;
  bool record_tx_log = false;
};

struct SimulationOutput {
  ScenarioResult result;
  // Per AP, chronological.
  std::vector<std::vector<TxRecord>> ap_tx_log;
  std::vector<ProbeObservation> probes;
  // Total radiated time per AP (s).
  std::vector<double> ap_airtime_s;
  // Largest energy an AP sensed at the instant it won contention (mW).
  std::vector<double> max_sensed_at_access_mw;
};

SimulationOutput simulate(const SimulationInput& input);

/// Runs the frozen association for `duration_slots` and reports metrics inputs.
ScenarioResult run(long duration_slots, const Topology& topology, const AssociationMap& association,
                   const NetworkConfig& net, const PhyConfig& phy, const MacConfig& mac, std::uint64_t seed);

}  // namespace apsel
