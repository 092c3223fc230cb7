#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apsel {

/// Per-AP frame bookkeeping at the end of a run.
struct ApAccounting {
  std::uint64_t arrived = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_overflow = 0;
  std::uint64_t dropped_retry = 0;
  std::uint64_t in_queue = 0;
  std::uint64_t in_flight = 0;

  bool conserved() const {
    return arrived == delivered + dropped_overflow + dropped_retry + in_queue + in_flight;
  }
};

struct ScenarioResult {
  std::uint64_t seed = 0;
  // Measured interval the throughput is normalized by.
  double active_duration_s = 0.0;
  // Indexed by STA; only associated STAs are links.
  std::vector<int> link_ap;
  std::vector<double> link_delivered_bits;
  std::vector<double> link_rate_mbps;
  // Head-of-line to ACK per delivered frame.
  std::vector<double> frame_delays_s;
  std::vector<ApAccounting> ap_accounting;

  std::uint64_t unassociated_stas = 0;
  std::uint64_t exclusivity_violations = 0;
  std::uint64_t events_processed = 0;
  // Key/value echo of the configuration that produced this result.
  std::string config_echo;

  std::uint64_t total_arrived() const;
  std::uint64_t total_dropped() const;
  std::uint64_t total_delivered() const;
  bool conserved() const;
};

}  // namespace apsel
