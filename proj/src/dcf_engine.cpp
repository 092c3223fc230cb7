// Event-driven DCF engine: energy-detect carrier sensing with a CCA latency,
// duration-field NAV, RTS/CTS/DATA/ACK exchanges, SINR-gated receptions,
// binary exponential backoff and drop-tail AP buffers.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "apsel/mac.hpp"

namespace apsel {
namespace {

// Lower value runs first among events at the same tick.
enum class Ev : std::uint8_t {
  TxEnd = 0,
  CcaSense,
  WindowEnd,
  WindowStart,
  ResponseCheck,
  StartFrame,
  ProbeRequest,
  NavExpire,
  Access,
  Arrival,
};

struct Event {
  Tick time;
  Ev kind;
  std::uint64_t seq;
  int a;
  int b;
  std::uint64_t token;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    if (x.kind != y.kind) return x.kind > y.kind;
    return x.seq > y.seq;
  }
};

struct Transmission {
  std::uint64_t serial = 0;
  int node = -1;
  int dst = -1;
  FrameKind kind = FrameKind::Data;
  int channel = -1;
  Tick start = 0;
  Tick end = 0;
  double bits = 0.0;
  double rate_bps = 0.0;
  // NAV announced to overhearers, counted from the end of this frame.
  Tick nav_after = 0;
  // AP that owns the exchange this frame belongs to.
  int exchange_ap = -1;
  int reception = -1;
  bool sensed = false;
};

struct Reception {
  int tx = -1;
  int node = -1;
  double signal_mw = 0.0;
  double interference_mw = 0.0;
  double peak_interference_mw = 0.0;
  double threshold = 0.0;
  bool broken = false;
};

struct ProbeResponse {
  int sta = -1;
  int observation = -1;
  Tick requested = 0;
};

enum class Stage { Idle, Rts, Data, ProbeRes };

struct ApState {
  DownlinkQueue queue;
  TrafficSource source;
  Rng backoff_rng;

  std::optional<Packet> current;
  Tick head_since = 0;
  Tick last_departure = 0;
  int retries = 0;
  int cw = 32;
  int backoff = -1;

  bool in_exchange = false;
  Stage stage = Stage::Idle;
  std::uint64_t exchange_id = 0;
  Tick exchange_start = 0;
  bool response_ok = false;
  ProbeResponse probe;
  std::deque<ProbeResponse> management;

  double sensed_mw = 0.0;
  bool energy_busy = false;
  Tick nav_until = 0;
  Tick nav_event_at = -1;
  bool medium_idle = true;
  Tick idle_since = 0;
  bool access_pending = false;
  std::uint64_t access_token = 0;
  bool wakeup_pending = false;

  int radiating = -1;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_retry = 0;
  double airtime_s = 0.0;
  double max_sensed_at_access = 0.0;

  ApState(int capacity, TrafficSource src, Rng rng)
      : queue(capacity), source(std::move(src)), backoff_rng(std::move(rng)) {}
};

struct StaState {
  int serving_ap = kUnassociated;
  double rate_bps = 0.0;
  double data_threshold = 0.0;
  int listen_channel = -1;
  int window = -1;
  int radiating = -1;
  std::vector<int> receptions;
  Rng rng;
};

class DcfEngine {
 public:
  explicit DcfEngine(const SimulationInput& in);
  SimulationOutput run();

 private:
  int node_of_sta(int sta) const { return num_aps_ + sta; }
  bool is_ap(int node) const { return node < num_aps_; }
  double power(int from, int to) const { return power_(from, to); }

  void push(Tick t, Ev kind, int a = 0, int b = 0, std::uint64_t token = 0) {
    events_.push(Event{t, kind, seq_++, a, b, token});
  }

  // Radio layer.
  int start_tx(int node, int dst, FrameKind kind, int channel, double bits, double rate_bps, Tick airtime,
               int exchange_ap, Tick nav_after, double threshold_db);
  void on_tx_end(int id);
  void on_cca_sense(int id, std::uint64_t serial);
  void refresh_sensing(int channel);
  int listening_channel(int node) const;
  std::vector<int>& receptions_of(int node);
  void switch_sta_channel(int sta, int channel);
  double desired_signal(int from, int to);

  // DCF layer.
  void reevaluate(int ap);
  void freeze(int ap);
  void schedule_access(int ap);
  bool has_backlog(int ap);
  void refill(int ap);
  void wake(int ap);
  void on_access(int ap, std::uint64_t token);
  void start_data_exchange(int ap);
  void start_probe_response(int ap);
  void finish_exchange(int ap, bool success);
  void check_exclusivity(int ap);

  // Protocol handlers.
  void on_frame_end(const Transmission& tx, bool received, double signal_mw);
  void on_response_check(int ap, std::uint64_t exchange);
  void on_start_frame(int node, int what, std::uint64_t exchange);
  void on_window_start(int obs);
  void on_window_end(int obs);
  void on_probe_request(int obs);
  void enqueue_probe_response(int ap, ProbeResponse r);

  const SimulationInput& in_;
  const Topology& topo_;
  int num_aps_;
  int num_stas_;
  Eigen::MatrixXd power_;
  Eigen::MatrixXd path_only_;
  std::vector<std::vector<int>> domains_;
  double cca_mw_;
  double noise_mw_;
  double control_threshold_db_;

  Tick rts_air_, cts_air_, ack_air_, preq_air_, pres_air_;

  std::vector<ApState> aps_;
  std::vector<StaState> stas_;
  std::vector<std::vector<int>> aps_on_channel_;
  std::vector<std::vector<int>> active_tx_;
  std::vector<std::vector<int>> sensed_tx_;
  std::vector<std::vector<int>> active_rx_;
  std::vector<std::vector<int>> ap_receptions_;

  std::vector<Transmission> txs_;
  std::vector<int> free_tx_;
  std::vector<Reception> rxs_;
  std::vector<int> free_rx_;
  std::uint64_t serial_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
  Rng fading_rng_;

  SimulationOutput out_;
  std::vector<Tick> probe_first_request_;
};

DcfEngine::DcfEngine(const SimulationInput& in)
    : in_(in),
      topo_(*in.topology),
      num_aps_(in.topology->num_aps()),
      num_stas_(in.topology->num_stas()),
      fading_rng_(make_stream(in.seed, "frame-fading", in.phase)) {
  in_.net.validate();
  in_.phy.validate();
  in_.mac.validate();
  if (static_cast<int>(in_.serving_ap.size()) != num_stas_ || static_cast<int>(in_.rate_mbps.size()) != num_stas_)
    throw std::invalid_argument("simulate: per-STA association vectors must match the topology");

  const NetworkConfig& net = in_.net;
  const MacConfig& mac = in_.mac;
  const int nodes = num_aps_ + num_stas_;

  // Dense node-to-node received power. Fading applies to AP<->STA links only.
  Eigen::Matrix2Xd pos(2, nodes);
  pos.leftCols(num_aps_) = topo_.ap_positions;
  pos.rightCols(num_stas_) = topo_.sta_positions;
  Eigen::VectorXd tx_power(nodes);
  tx_power.head(num_aps_).setConstant(net.ap_tx_power_mw);
  tx_power.tail(num_stas_).setConstant(net.sta_tx_power_mw);
  path_only_.resize(nodes, nodes);
  for (int v = 0; v < nodes; ++v) {
    path_only_.col(v) =
        path_gain((pos.colwise() - pos.col(v)).colwise().norm().transpose().array(), net.path_loss_exponent,
                  net.reference_loss_db)
            .matrix();
  }
  power_ = tx_power.asDiagonal() * path_only_;
  for (int i = 0; i < num_stas_; ++i) {
    for (int j = 0; j < num_aps_; ++j) {
      const double g = topo_.link_gain(i, j);
      power_(j, num_aps_ + i) *= g;
      power_(num_aps_ + i, j) *= g;
    }
  }
  power_.diagonal().setZero();

  domains_ = contention_domains(topo_, net, in_.phy);
  cca_mw_ = in_.phy.cca_threshold_mw();
  noise_mw_ = in_.phy.noise_floor_mw();
  control_threshold_db_ = kRateTable.front().min_sinr_db;

  rts_air_ = mac.control_airtime(mac.rts_bytes);
  cts_air_ = mac.control_airtime(mac.cts_bytes);
  ack_air_ = mac.control_airtime(mac.ack_bytes);
  preq_air_ = mac.control_airtime(mac.probe_req_bytes);
  pres_air_ = mac.control_airtime(mac.probe_res_bytes);

  int channels = 0;
  for (int c : topo_.ap_channel) channels = std::max(channels, c + 1);
  aps_on_channel_.resize(channels);
  active_tx_.resize(channels);
  sensed_tx_.resize(channels);
  active_rx_.resize(channels);
  ap_receptions_.resize(num_aps_);

  std::vector<std::vector<int>> served(num_aps_);
  stas_.resize(num_stas_);
  for (int i = 0; i < num_stas_; ++i) {
    StaState& s = stas_[i];
    s.serving_ap = in_.serving_ap[i];
    s.rng = make_stream(in_.seed, "sta", (in_.phase << 32) ^ static_cast<std::uint64_t>(i));
    if (s.serving_ap != kUnassociated) {
      if (s.serving_ap < 0 || s.serving_ap >= num_aps_) throw std::out_of_range("simulate: bad serving AP");
      const double mbps = std::max(in_.rate_mbps[i], kLowestRateMbps);
      s.rate_bps = mbps * 1e6;
      s.data_threshold = min_sinr_db_for_rate(mbps);
      s.listen_channel = topo_.ap_channel[s.serving_ap];
      served[s.serving_ap].push_back(i);
    } else {
      ++out_.result.unassociated_stas;
    }
  }

  aps_.reserve(num_aps_);
  for (int j = 0; j < num_aps_; ++j) {
    const std::uint64_t idx = (in_.phase << 32) ^ static_cast<std::uint64_t>(j);
    aps_.emplace_back(mac.buffer_size, TrafficSource(mac, served[j], make_stream(in_.seed, "arrivals", idx)),
                      make_stream(in_.seed, "backoff", idx));
    aps_on_channel_[topo_.ap_channel[j]].push_back(j);
    aps_[j].cw = mac.cw_min;
  }

  out_.ap_tx_log.resize(in_.record_tx_log ? num_aps_ : 0);
  out_.probes.resize(in_.probes.size());
  probe_first_request_.assign(in_.probes.size(), -1);
  for (std::size_t k = 0; k < in_.probes.size(); ++k) {
    const auto& p = in_.probes[k];
    if (p.sta < 0 || p.sta >= num_stas_ || p.ap < 0 || p.ap >= num_aps_ || p.end <= p.start)
      throw std::invalid_argument("simulate: malformed probe window");
    out_.probes[k].sta = p.sta;
    out_.probes[k].ap = p.ap;
    out_.probes[k].window_start = p.start;
    out_.probes[k].window_end = p.end;
  }
}

// ---------------------------------------------------------------------------
// Radio layer

int DcfEngine::listening_channel(int node) const {
  if (is_ap(node)) return topo_.ap_channel[node];
  return stas_[node - num_aps_].listen_channel;
}

std::vector<int>& DcfEngine::receptions_of(int node) {
  return is_ap(node) ? ap_receptions_[node] : stas_[node - num_aps_].receptions;
}

double DcfEngine::desired_signal(int from, int to) {
  if (!in_.mac.per_frame_fading || is_ap(from) == is_ap(to)) return power(from, to);
  const double tx_mw = is_ap(from) ? in_.net.ap_tx_power_mw : in_.net.sta_tx_power_mw;
  return tx_mw * path_only_(from, to) * std::exponential_distribution<double>(1.0)(fading_rng_);
}

int DcfEngine::start_tx(int node, int dst, FrameKind kind, int channel, double bits, double rate_bps, Tick airtime,
                        int exchange_ap, Tick nav_after, double threshold_db) {
  int id;
  if (!free_tx_.empty()) {
    id = free_tx_.back();
    free_tx_.pop_back();
  } else {
    id = static_cast<int>(txs_.size());
    txs_.emplace_back();
  }
  Transmission& tx = txs_[id];
  tx = Transmission{};
  tx.serial = ++serial_;
  tx.node = node;
  tx.dst = dst;
  tx.kind = kind;
  tx.channel = channel;
  tx.start = now_;
  tx.end = now_ + airtime;
  tx.bits = bits;
  tx.rate_bps = rate_bps;
  tx.exchange_ap = exchange_ap;
  tx.nav_after = nav_after;

  // Half duplex: anything this node was receiving is lost.
  for (int r : receptions_of(node)) rxs_[r].broken = true;
  for (int r : active_rx_[channel]) {
    Reception& rx = rxs_[r];
    if (rx.node == node) continue;
    rx.interference_mw += power(node, rx.node);
    rx.peak_interference_mw = std::max(rx.peak_interference_mw, rx.interference_mw);
  }

  if (dst >= 0) {
    int rid;
    if (!free_rx_.empty()) {
      rid = free_rx_.back();
      free_rx_.pop_back();
    } else {
      rid = static_cast<int>(rxs_.size());
      rxs_.emplace_back();
    }
    Reception& rx = rxs_[rid];
    rx = Reception{};
    rx.tx = id;
    rx.node = dst;
    rx.signal_mw = desired_signal(node, dst);
    rx.threshold = db_to_linear(threshold_db);
    double interference = 0.0;
    for (int other : active_tx_[channel]) interference += power(txs_[other].node, dst);
    rx.interference_mw = interference;
    rx.peak_interference_mw = interference;
    const bool dst_radiating = is_ap(dst) ? aps_[dst].radiating >= 0 : stas_[dst - num_aps_].radiating >= 0;
    rx.broken = dst_radiating || listening_channel(dst) != channel;
    active_rx_[channel].push_back(rid);
    receptions_of(dst).push_back(rid);
    tx.reception = rid;
  }

  active_tx_[channel].push_back(id);
  if (is_ap(node)) {
    ApState& ap = aps_[node];
    ap.radiating = id;
    ap.airtime_s += ticks_to_seconds(airtime);
    if (in_.record_tx_log) out_.ap_tx_log[node].push_back(TxRecord{tx.start, tx.end, kind, bits, rate_bps});
  } else {
    stas_[node - num_aps_].radiating = id;
  }
  push(now_ + in_.mac.cca_time, Ev::CcaSense, id, 0, tx.serial);
  push(tx.end, Ev::TxEnd, id, 0, tx.serial);
  return id;
}

void DcfEngine::refresh_sensing(int channel) {
  for (int a : aps_on_channel_[channel]) {
    double sensed = 0.0;
    for (int t : sensed_tx_[channel]) {
      if (txs_[t].node != a) sensed += power(txs_[t].node, a);
    }
    ApState& ap = aps_[a];
    ap.sensed_mw = sensed;
    ap.energy_busy = senses_busy(sensed, cca_mw_);
    reevaluate(a);
  }
}

void DcfEngine::on_cca_sense(int id, std::uint64_t serial) {
  Transmission& tx = txs_[id];
  if (tx.serial != serial || tx.end <= now_) return;
  tx.sensed = true;
  sensed_tx_[tx.channel].push_back(id);
  refresh_sensing(tx.channel);
}

void DcfEngine::on_tx_end(int id) {
  const Transmission tx = txs_[id];
  auto erase = [](std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) {
      *it = v.back();
      v.pop_back();
    }
  };
  erase(active_tx_[tx.channel], id);
  for (int r : active_rx_[tx.channel]) {
    Reception& rx = rxs_[r];
    if (rx.tx == id || rx.node == tx.node) continue;
    rx.interference_mw = std::max(0.0, rx.interference_mw - power(tx.node, rx.node));
  }

  bool received = false;
  double signal = 0.0;
  if (tx.reception >= 0) {
    const Reception& rx = rxs_[tx.reception];
    received = !rx.broken && listening_channel(rx.node) == tx.channel &&
               sinr(rx.signal_mw, rx.peak_interference_mw, noise_mw_) >= rx.threshold;
    signal = rx.signal_mw;
    erase(active_rx_[tx.channel], tx.reception);
    erase(receptions_of(rx.node), tx.reception);
    free_rx_.push_back(tx.reception);
  }

  // Duration field: every AP that detects the frame defers for the rest of the exchange.
  if (tx.nav_after > 0) {
    for (int a : aps_on_channel_[tx.channel]) {
      if (a == tx.node || a == tx.exchange_ap) continue;
      if (senses_busy(power(tx.node, a), cca_mw_)) aps_[a].nav_until = std::max(aps_[a].nav_until, tx.end + tx.nav_after);
    }
  }

  if (is_ap(tx.node)) {
    aps_[tx.node].radiating = -1;
  } else {
    stas_[tx.node - num_aps_].radiating = -1;
  }
  if (tx.sensed) erase(sensed_tx_[tx.channel], id);
  txs_[id].serial = 0;
  free_tx_.push_back(id);
  refresh_sensing(tx.channel);

  on_frame_end(tx, received, signal);
}

void DcfEngine::switch_sta_channel(int sta, int channel) {
  StaState& s = stas_[sta];
  if (s.listen_channel == channel) return;
  for (int r : s.receptions) rxs_[r].broken = true;
  s.listen_channel = channel;
}

// ---------------------------------------------------------------------------
// DCF layer

bool DcfEngine::has_backlog(int a) {
  ApState& ap = aps_[a];
  if (ap.current || !ap.queue.empty()) return true;
  for (const auto& m : ap.management) {
    if (stas_[m.sta].window == m.observation) return true;
  }
  return ap.source.active() && ap.source.next_arrival_us() <= static_cast<double>(now_);
}

void DcfEngine::refill(int a) {
  ApState& ap = aps_[a];
  enqueue_arrivals(ap.queue, ap.source, now_, ap.current.has_value());
}

void DcfEngine::reevaluate(int a) {
  ApState& ap = aps_[a];
  const bool idle = !ap.energy_busy && now_ >= ap.nav_until && !ap.in_exchange;
  if (idle && !ap.medium_idle) {
    ap.medium_idle = true;
    ap.idle_since = now_;
    schedule_access(a);
  } else if (!idle && ap.medium_idle) {
    freeze(a);
    ap.medium_idle = false;
  }
  if (!idle && !ap.energy_busy && !ap.in_exchange && ap.nav_until > now_ && ap.nav_event_at != ap.nav_until) {
    ap.nav_event_at = ap.nav_until;
    push(ap.nav_until, Ev::NavExpire, a);
  }
}

void DcfEngine::freeze(int a) {
  ApState& ap = aps_[a];
  if (!ap.access_pending) return;
  const Tick counting_from = ap.idle_since + in_.mac.difs;
  if (now_ > counting_from && ap.backoff > 0) {
    const Tick slots = (now_ - counting_from) / in_.mac.slot_time;
    ap.backoff -= static_cast<int>(std::min<Tick>(slots, ap.backoff));
  }
  ap.access_pending = false;
  ++ap.access_token;
}

void DcfEngine::schedule_access(int a) {
  ApState& ap = aps_[a];
  if (!ap.medium_idle || ap.access_pending || ap.in_exchange || ap.backoff < 0) return;
  if (ap.backoff == 0 && !has_backlog(a)) {
    wake(a);
    return;
  }
  const Tick at = std::max(now_, ap.idle_since + in_.mac.difs + ap.backoff * in_.mac.slot_time);
  ap.access_pending = true;
  push(at, Ev::Access, a, 0, ++ap.access_token);
}

void DcfEngine::wake(int a) {
  ApState& ap = aps_[a];
  if (ap.wakeup_pending || !ap.source.active()) return;
  ap.wakeup_pending = true;
  push(static_cast<Tick>(std::ceil(ap.source.next_arrival_us())), Ev::Arrival, a);
}

void DcfEngine::on_access(int a, std::uint64_t token) {
  ApState& ap = aps_[a];
  if (!ap.access_pending || token != ap.access_token) return;
  ap.access_pending = false;
  ap.backoff = 0;
  refill(a);
  while (!ap.management.empty() && stas_[ap.management.front().sta].window != ap.management.front().observation)
    ap.management.pop_front();
  if (!ap.management.empty()) {
    start_probe_response(a);
  } else if (ap.current || !ap.queue.empty()) {
    start_data_exchange(a);
  } else {
    wake(a);
  }
}

void DcfEngine::check_exclusivity(int a) {
  for (int m : domains_[a]) {
    const int t = aps_[m].radiating;
    if (t >= 0 && now_ - txs_[t].start >= in_.mac.cca_time) ++out_.result.exclusivity_violations;
  }
}

void DcfEngine::start_data_exchange(int a) {
  ApState& ap = aps_[a];
  if (!ap.current) {
    ap.current = ap.queue.pop();
    ap.head_since = std::max(ap.last_departure, ap.current->arrival);
  }
  ap.in_exchange = true;
  ap.stage = Stage::Rts;
  ap.exchange_start = now_;
  ap.response_ok = false;
  ++ap.exchange_id;
  ap.max_sensed_at_access = std::max(ap.max_sensed_at_access, ap.sensed_mw);
  reevaluate(a);
  check_exclusivity(a);

  const StaState& sta = stas_[ap.current->sta];
  const Tick data_air = in_.mac.data_airtime(ap.current->bytes, sta.rate_bps);
  const Tick sifs = in_.mac.sifs;
  start_tx(a, node_of_sta(ap.current->sta), FrameKind::Rts, topo_.ap_channel[a], 8.0 * in_.mac.rts_bytes,
           in_.mac.basic_rate_bps, rts_air_, a, sifs + cts_air_ + sifs + data_air + sifs + ack_air_,
           control_threshold_db_);
  push(now_ + rts_air_ + sifs + cts_air_, Ev::ResponseCheck, a, 0, ap.exchange_id);
}

void DcfEngine::start_probe_response(int a) {
  ApState& ap = aps_[a];
  ap.probe = ap.management.front();
  ap.management.pop_front();
  ap.in_exchange = true;
  ap.stage = Stage::ProbeRes;
  ap.exchange_start = now_;
  ++ap.exchange_id;
  ap.max_sensed_at_access = std::max(ap.max_sensed_at_access, ap.sensed_mw);
  reevaluate(a);
  check_exclusivity(a);
  start_tx(a, node_of_sta(ap.probe.sta), FrameKind::ProbeRes, topo_.ap_channel[a], 8.0 * in_.mac.probe_res_bytes,
           in_.mac.basic_rate_bps, pres_air_, a, 0, control_threshold_db_);
}

void DcfEngine::finish_exchange(int a, bool success) {
  ApState& ap = aps_[a];
  const MacConfig& mac = in_.mac;
  if (ap.stage == Stage::Rts || ap.stage == Stage::Data) {
    if (success) {
      refill(a);
      const Packet p = *ap.current;
      ap.current.reset();
      ++ap.delivered;
      out_.result.link_delivered_bits[p.sta] += 8.0 * p.bytes;
      out_.result.frame_delays_s.push_back(ticks_to_seconds(now_ - ap.head_since));
      ap.last_departure = now_;
      ap.retries = 0;
      ap.cw = contention_window_after_success(mac);
    } else if (++ap.retries > mac.retry_limit) {
      refill(a);
      ap.current.reset();
      ++ap.dropped_retry;
      ap.last_departure = now_;
      ap.retries = 0;
      ap.cw = contention_window_after_success(mac);
    } else {
      ap.cw = contention_window_after_failure(ap.cw, mac);
    }
  }
  ap.in_exchange = false;
  ap.stage = Stage::Idle;
  ap.backoff = draw_backoff(ap.cw, ap.backoff_rng);
  reevaluate(a);
  if (ap.medium_idle) schedule_access(a);
}

// ---------------------------------------------------------------------------
// Protocol handlers

void DcfEngine::on_frame_end(const Transmission& tx, bool received, double signal_mw) {
  const Tick sifs = in_.mac.sifs;
  switch (tx.kind) {
    case FrameKind::Rts: {
      if (received) push(now_ + sifs, Ev::StartFrame, tx.dst, static_cast<int>(FrameKind::Cts),
                         (static_cast<std::uint64_t>(tx.node) << 40) | aps_[tx.node].exchange_id);
      break;
    }
    case FrameKind::Data: {
      if (received) push(now_ + sifs, Ev::StartFrame, tx.dst, static_cast<int>(FrameKind::Ack),
                         (static_cast<std::uint64_t>(tx.node) << 40) | aps_[tx.node].exchange_id);
      break;
    }
    case FrameKind::Cts:
    case FrameKind::Ack: {
      ApState& ap = aps_[tx.dst];
      if (ap.in_exchange) ap.response_ok = received;
      break;
    }
    case FrameKind::ProbeRes: {
      const int a = tx.node;
      ApState& ap = aps_[a];
      const ProbeResponse r = ap.probe;
      const bool open = stas_[r.sta].window == r.observation;
      if (open && received) {
        ProbeObservation& obs = out_.probes[r.observation];
        obs.response_times.push_back(now_);
        obs.response_delays.push_back(now_ - r.requested);
        obs.response_power_mw.push_back(signal_mw);
      }
      finish_exchange(a, true);
      if (open && now_ < in_.probes[r.observation].end) enqueue_probe_response(a, {r.sta, r.observation, now_});
      break;
    }
    case FrameKind::ProbeReq: {
      const int sta = tx.node - num_aps_;
      const int obs = stas_[sta].window;
      if (obs < 0 || in_.probes[obs].ap != tx.dst) break;
      if (received) {
        enqueue_probe_response(tx.dst, {sta, obs, probe_first_request_[obs]});
      } else {
        const Tick retry = sifs + ack_air_ + in_.mac.difs +
                           draw_backoff(in_.mac.cw_min, stas_[sta].rng) * in_.mac.slot_time;
        if (now_ + retry < in_.probes[obs].end) push(now_ + retry, Ev::ProbeRequest, obs);
      }
      break;
    }
    case FrameKind::Beacon:
      break;
  }
}

void DcfEngine::on_response_check(int a, std::uint64_t exchange) {
  ApState& ap = aps_[a];
  if (!ap.in_exchange || ap.exchange_id != exchange) return;
  if (!ap.response_ok) {
    finish_exchange(a, false);
    return;
  }
  ap.response_ok = false;
  if (ap.stage == Stage::Rts) {
    ap.stage = Stage::Data;
    push(now_ + in_.mac.sifs, Ev::StartFrame, a, static_cast<int>(FrameKind::Data),
         (static_cast<std::uint64_t>(a) << 40) | ap.exchange_id);
  } else {
    finish_exchange(a, true);
  }
}

void DcfEngine::on_start_frame(int node, int what, std::uint64_t tag) {
  const int owner = static_cast<int>(tag >> 40);
  const std::uint64_t exchange = tag & ((1ULL << 40) - 1);
  ApState& ap = aps_[owner];
  if (!ap.in_exchange || ap.exchange_id != exchange) return;
  const int channel = topo_.ap_channel[owner];
  const auto kind = static_cast<FrameKind>(what);
  const Tick sifs = in_.mac.sifs;

  if (kind == FrameKind::Data) {
    const StaState& sta = stas_[ap.current->sta];
    const Tick data_air = in_.mac.data_airtime(ap.current->bytes, sta.rate_bps);
    check_exclusivity(owner);
    start_tx(owner, node_of_sta(ap.current->sta), FrameKind::Data, channel,
             8.0 * (ap.current->bytes + in_.mac.mac_header_bytes), sta.rate_bps, data_air, owner,
             sifs + ack_air_, sta.data_threshold);
    push(now_ + data_air + sifs + ack_air_, Ev::ResponseCheck, owner, 0, ap.exchange_id);
    return;
  }

  StaState& sta = stas_[node - num_aps_];
  if (sta.radiating >= 0 || sta.listen_channel != channel) return;
  if (kind == FrameKind::Cts) {
    const Tick data_air = in_.mac.data_airtime(ap.current->bytes, sta.rate_bps);
    start_tx(node, owner, FrameKind::Cts, channel, 8.0 * in_.mac.cts_bytes, in_.mac.basic_rate_bps, cts_air_, owner,
             sifs + data_air + sifs + ack_air_, control_threshold_db_);
  } else {
    start_tx(node, owner, FrameKind::Ack, channel, 8.0 * in_.mac.ack_bytes, in_.mac.basic_rate_bps, ack_air_, owner,
             0, control_threshold_db_);
  }
}

void DcfEngine::enqueue_probe_response(int a, ProbeResponse r) {
  aps_[a].management.push_back(r);
  ApState& ap = aps_[a];
  if (ap.backoff < 0) ap.backoff = draw_backoff(ap.cw, ap.backoff_rng);
  if (ap.medium_idle) schedule_access(a);
}

void DcfEngine::on_window_start(int obs) {
  const ProbeWindowSpec& w = in_.probes[obs];
  StaState& s = stas_[w.sta];
  s.window = obs;
  switch_sta_channel(w.sta, topo_.ap_channel[w.ap]);
  on_probe_request(obs);
}

void DcfEngine::on_window_end(int obs) {
  const ProbeWindowSpec& w = in_.probes[obs];
  StaState& s = stas_[w.sta];
  if (s.window != obs) return;
  s.window = -1;
  switch_sta_channel(w.sta, s.serving_ap == kUnassociated ? -1 : topo_.ap_channel[s.serving_ap]);
}

void DcfEngine::on_probe_request(int obs) {
  const ProbeWindowSpec& w = in_.probes[obs];
  StaState& s = stas_[w.sta];
  if (s.window != obs || now_ >= w.end) return;
  if (s.radiating >= 0) {
    push(txs_[s.radiating].end + in_.mac.sifs, Ev::ProbeRequest, obs);
    return;
  }
  if (probe_first_request_[obs] < 0) {
    probe_first_request_[obs] = now_;
    out_.probes[obs].request_sent = now_;
  }
  start_tx(node_of_sta(w.sta), w.ap, FrameKind::ProbeReq, topo_.ap_channel[w.ap], 8.0 * in_.mac.probe_req_bytes,
           in_.mac.basic_rate_bps, preq_air_, -1, 0, control_threshold_db_);
}

// ---------------------------------------------------------------------------

SimulationOutput DcfEngine::run() {
  ScenarioResult& res = out_.result;
  res.seed = in_.seed;
  res.active_duration_s = ticks_to_seconds(in_.duration);
  res.link_ap = in_.serving_ap;
  res.link_delivered_bits.assign(num_stas_, 0.0);
  res.link_rate_mbps.assign(num_stas_, 0.0);
  for (int i = 0; i < num_stas_; ++i) {
    if (stas_[i].serving_ap != kUnassociated) res.link_rate_mbps[i] = stas_[i].rate_bps / 1e6;
  }

  for (std::size_t k = 0; k < in_.probes.size(); ++k) {
    push(in_.probes[k].start, Ev::WindowStart, static_cast<int>(k));
    push(in_.probes[k].end, Ev::WindowEnd, static_cast<int>(k));
  }
  for (int a = 0; a < num_aps_; ++a) {
    ApState& ap = aps_[a];
    ap.backoff = draw_backoff(ap.cw, ap.backoff_rng);
    ap.idle_since = 0;
    schedule_access(a);
  }

  while (!events_.empty()) {
    const Event ev = events_.top();
    if (ev.time >= in_.duration) break;
    events_.pop();
    now_ = ev.time;
    ++res.events_processed;
    switch (ev.kind) {
      case Ev::TxEnd:
        if (txs_[ev.a].serial == ev.token) on_tx_end(ev.a);
        break;
      case Ev::CcaSense:
        on_cca_sense(ev.a, ev.token);
        break;
      case Ev::WindowEnd:
        on_window_end(ev.a);
        break;
      case Ev::WindowStart:
        on_window_start(ev.a);
        break;
      case Ev::ResponseCheck:
        on_response_check(ev.a, ev.token);
        break;
      case Ev::StartFrame:
        on_start_frame(ev.a, ev.b, ev.token);
        break;
      case Ev::ProbeRequest:
        on_probe_request(ev.a);
        break;
      case Ev::NavExpire:
        if (aps_[ev.a].nav_event_at == now_) aps_[ev.a].nav_event_at = -1;
        reevaluate(ev.a);
        break;
      case Ev::Access:
        on_access(ev.a, ev.token);
        break;
      case Ev::Arrival: {
        ApState& ap = aps_[ev.a];
        ap.wakeup_pending = false;
        if (has_backlog(ev.a)) {
          if (ap.backoff < 0) ap.backoff = draw_backoff(ap.cw, ap.backoff_rng);
          schedule_access(ev.a);
        } else {
          wake(ev.a);
        }
        break;
      }
    }
  }

  now_ = in_.duration;
  bool stalled = events_.empty();
  res.ap_accounting.resize(num_aps_);
  out_.ap_airtime_s.resize(num_aps_);
  out_.max_sensed_at_access_mw.resize(num_aps_);
  for (int a = 0; a < num_aps_; ++a) {
    ApState& ap = aps_[a];
    refill(a);
    if (stalled && (ap.current || !ap.queue.empty())) {
      throw std::logic_error("simulate: event queue drained with frames pending at AP " + std::to_string(a));
    }
    ApAccounting& acc = res.ap_accounting[a];
    acc.arrived = ap.queue.arrived();
    acc.dropped_overflow = ap.queue.dropped();
    acc.delivered = ap.delivered;
    acc.dropped_retry = ap.dropped_retry;
    acc.in_queue = ap.queue.size();
    acc.in_flight = ap.current ? 1 : 0;
    out_.ap_airtime_s[a] = ap.airtime_s;
    out_.max_sensed_at_access_mw[a] = ap.max_sensed_at_access;
  }
  return std::move(out_);
}

}  // namespace

SimulationOutput simulate(const SimulationInput& input) {
  if (input.topology == nullptr) throw std::invalid_argument("simulate: topology required");
  if (input.duration <= 0) throw std::invalid_argument("simulate: duration must be positive");
  DcfEngine engine(input);
  return engine.run();
}

ScenarioResult run(long duration_slots, const Topology& topology, const AssociationMap& association,
                   const NetworkConfig& net, const PhyConfig& phy, const MacConfig& mac, std::uint64_t seed) {
  SimulationInput in;
  in.topology = &topology;
  in.net = net;
  in.phy = phy;
  in.mac = mac;
  in.serving_ap = association.ap_of_sta;
  in.rate_mbps = association.rate_mbps;
  if (in.rate_mbps.size() != in.serving_ap.size()) in.rate_mbps.assign(in.serving_ap.size(), kLowestRateMbps);
  in.duration = duration_slots * mac.slot_time;
  in.seed = seed;
  in.phase = 1;
  return simulate(in).result;
}

}  // namespace apsel
