#include "apsel/mac.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace apsel {

void MacConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("invalid mac config: ") + field);
  };
  auto pow2 = [](int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); };
  require(slot_time > 0, "slot_time");
  require(sifs > 0, "sifs");
  require(difs > 0, "difs");
  require(cca_time > 0, "cca_time");
  require(pow2(cw_min), "cw_min");
  require(pow2(cw_max) && cw_min <= cw_max, "cw_max");
  require(retry_limit >= 0, "retry_limit");
  require(buffer_size >= 1, "buffer_size");
  require(arrival_rate_per_slot > 0.0, "arrival_rate_per_slot");
  require(packet_min_bytes > 0 && packet_min_bytes <= packet_max_bytes, "packet_size_range");
  require(mean_packet_bytes >= packet_min_bytes && mean_packet_bytes <= packet_max_bytes, "mean_packet_bytes");
  require(!fixed_packet_bytes || *fixed_packet_bytes > 0, "frame_bytes");
  require(mac_header_bytes >= 0, "mac_header_bytes");
  require(rts_bytes > 0 && cts_bytes > 0 && ack_bytes > 0, "control frame sizes");
  require(probe_req_bytes > 0 && probe_res_bytes > 0, "probe frame sizes");
  require(basic_rate_bps > 0.0, "basic_rate_bps");
}

Tick MacConfig::control_airtime(int bytes) const {
  return seconds_to_ticks(frame_airtime(8.0 * bytes, basic_rate_bps));
}

Tick MacConfig::data_airtime(int payload_bytes, double rate_bps) const {
  return seconds_to_ticks(frame_airtime(8.0 * (payload_bytes + mac_header_bytes), rate_bps));
}

double Frame::airtime_s() const { return frame_airtime(payload_bits, phy_rate_bps); }

double frame_airtime(double payload_bits, double phy_rate_bps) {
  if (!(phy_rate_bps > 0.0)) throw std::invalid_argument("frame_airtime: rate must be > 0");
  if (payload_bits < 0.0) throw std::invalid_argument("frame_airtime: negative length");
  return payload_bits / phy_rate_bps;
}

double collision_cycle_time(double data_airtime_s, const MacConfig& config) {
  if (!(data_airtime_s > 0.0)) throw std::invalid_argument("collision_cycle_time: airtime must be > 0");
  const double backoff = (config.cw_max / 2.0) * config.slot_time_s();
  const double ack = frame_airtime(8.0 * config.ack_bytes, config.basic_rate_bps);
  return ticks_to_seconds(config.difs) + backoff + data_airtime_s + ticks_to_seconds(config.sifs) + ack;
}

std::vector<int> contention_domain(int ap, const Topology& topology, const NetworkConfig& net,
                                   const PhyConfig& phy) {
  if (ap < 0 || ap >= topology.num_aps()) throw std::out_of_range("contention_domain: bad AP index");
  const double threshold = phy.cca_threshold_mw();
  std::vector<int> domain;
  for (int m = 0; m < topology.num_aps(); ++m) {
    if (m == ap || topology.ap_channel[m] != topology.ap_channel[ap]) continue;
    const double d = (topology.ap_positions.col(m) - topology.ap_positions.col(ap)).norm();
    const double p = net.ap_tx_power_mw * path_gain(d, net.path_loss_exponent, net.reference_loss_db);
    if (senses_busy(p, threshold)) domain.push_back(m);
  }
  return domain;
}

std::vector<std::vector<int>> contention_domains(const Topology& topology, const NetworkConfig& net,
                                                 const PhyConfig& phy) {
  std::vector<std::vector<int>> all;
  all.reserve(static_cast<std::size_t>(topology.num_aps()));
  for (int j = 0; j < topology.num_aps(); ++j) all.push_back(contention_domain(j, topology, net, phy));
  return all;
}

int draw_backoff(int cw, Rng& rng) {
  if (cw < 1) throw std::invalid_argument("draw_backoff: cw must be >= 1");
  return std::uniform_int_distribution<int>(0, cw - 1)(rng);
}

int contention_window_after_failure(int cw, const MacConfig& config) {
  return std::min(2 * cw, config.cw_max);
}

bool DownlinkQueue::offer(const Packet& p, bool holding_frame) {
  ++arrived_;
  const std::size_t occupied = packets_.size() + (holding_frame ? 1 : 0);
  if (occupied >= static_cast<std::size_t>(capacity_)) {
    ++dropped_;
    return false;
  }
  packets_.push_back(p);
  return true;
}

Packet DownlinkQueue::pop() {
  Packet p = packets_.front();
  packets_.pop_front();
  return p;
}

TrafficSource::TrafficSource(const MacConfig& config, std::vector<int> destinations, Rng rng)
    : destinations_(std::move(destinations)),
      rng_(std::move(rng)),
      gap_(config.arrival_rate_per_slot / static_cast<double>(config.slot_time)),
      size_(config.fixed_packet_bytes.value_or(config.packet_min_bytes),
            config.fixed_packet_bytes.value_or(config.packet_max_bytes)),
      pick_(0.0, 1.0) {
  next_us_ = gap_(rng_);
}

Packet TrafficSource::take() {
  Packet p;
  p.arrival = static_cast<Tick>(next_us_);
  p.bytes = size_(rng_);
  const double u = pick_(rng_);
  if (!destinations_.empty()) {
    const auto k = std::min(destinations_.size() - 1, static_cast<std::size_t>(u * destinations_.size()));
    p.sta = destinations_[k];
  }
  next_us_ += gap_(rng_);
  return p;
}

std::uint64_t enqueue_arrivals(DownlinkQueue& queue, TrafficSource& source, Tick until, bool holding_frame) {
  if (!source.active()) return 0;
  std::uint64_t n = 0;
  while (source.next_arrival_us() <= static_cast<double>(until)) {
    queue.offer(source.take(), holding_frame);
    ++n;
  }
  return n;
}

}  // namespace apsel
