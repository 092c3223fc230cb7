#include "apsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "apsel/association_map.hpp"

namespace apsel {

double aggregate_throughput(const ScenarioResult& result) {
  if (!(result.active_duration_s > 0.0)) throw std::invalid_argument("aggregate_throughput: zero duration");
  double bits = 0.0;
  for (std::size_t i = 0; i < result.link_delivered_bits.size(); ++i) {
    if (i < result.link_ap.size() && result.link_ap[i] != kUnassociated) bits += result.link_delivered_bits[i];
  }
  return bits / result.active_duration_s / 1e6;
}

std::vector<LinkThroughput> per_link_throughput(const ScenarioResult& result) {
  if (!(result.active_duration_s > 0.0)) throw std::invalid_argument("per_link_throughput: zero duration");
  std::vector<LinkThroughput> out;
  for (std::size_t i = 0; i < result.link_ap.size(); ++i) {
    if (result.link_ap[i] == kUnassociated) continue;
    const double bits = i < result.link_delivered_bits.size() ? result.link_delivered_bits[i] : 0.0;
    out.push_back({static_cast<int>(i), result.link_ap[i], bits / result.active_duration_s / 1e6});
  }
  return out;
}

double nearest_rank(std::vector<double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("nearest_rank: no samples");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("nearest_rank: percentile out of range");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  return samples[std::clamp<std::size_t>(rank, 1, n) - 1];
}

std::vector<CdfPoint> throughput_cdf(const ScenarioResult& result) {
  std::vector<double> rates;
  for (const auto& l : per_link_throughput(result)) rates.push_back(l.mbps);
  if (rates.empty()) throw std::invalid_argument("throughput_cdf: no links");
  std::sort(rates.begin(), rates.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(101);
  const auto n = rates.size();
  for (int p = 0; p <= 100; ++p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    cdf.push_back({p, rates[std::clamp<std::size_t>(rank, 1, n) - 1]});
  }
  return cdf;
}

std::optional<double> mean_frame_delay(const ScenarioResult& result) {
  const auto& d = result.frame_delays_s;
  if (d.empty()) return std::nullopt;
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

double drop_rate(const ScenarioResult& result) {
  const auto arrived = result.total_arrived();
  if (arrived == 0) return 0.0;
  return static_cast<double>(result.total_dropped()) / static_cast<double>(arrived);
}

}  // namespace apsel
