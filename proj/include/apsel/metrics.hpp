#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "apsel/scenario_result.hpp"

namespace apsel {

/// Delivered payload over the measured interval, in Mbps. Throws on a zero duration.
double aggregate_throughput(const ScenarioResult& result);

struct LinkThroughput {
  int sta = -1;
  int ap = -1;
  double mbps = 0.0;
};

/// One entry per associated STA, in STA order.
std::vector<LinkThroughput> per_link_throughput(const ScenarioResult& result);

struct CdfPoint {
  int percentile = 0;
  double mbps = 0.0;
};

/// Nearest-rank percentiles 0..100 of the per-link throughputs.
/// Percentile 0 maps to the smallest sample. Throws when there are no links.
std::vector<CdfPoint> throughput_cdf(const ScenarioResult& result);

/// Nearest-rank percentile of `samples` (unsorted), p in [0, 100].
double nearest_rank(std::vector<double> samples, double p);

/// Mean per-frame delay (s); nullopt when nothing was delivered.
std::optional<double> mean_frame_delay(const ScenarioResult& result);

/// Dropped over arrived frames; 0 when nothing arrived.
double drop_rate(const ScenarioResult& result);

}  // namespace apsel
