#include <doctest.h>

#include <algorithm>
#include <random>

#include "apsel/association_map.hpp"
#include "apsel/metrics.hpp"

using namespace apsel;

namespace {

ScenarioResult with_links(std::vector<double> bits, double duration_s) {
  ScenarioResult r;
  r.active_duration_s = duration_s;
  r.link_delivered_bits = std::move(bits);
  r.link_ap.assign(r.link_delivered_bits.size(), 0);
  r.link_rate_mbps.assign(r.link_delivered_bits.size(), 54.0);
  return r;
}

}  // namespace

TEST_CASE("aggregate and per-link throughput") {
  ScenarioResult r = with_links({1e6, 3e6, 5e5}, 2.0);
  r.link_ap[2] = kUnassociated;
  CHECK(aggregate_throughput(r) == doctest::Approx(2.0));
  const auto links = per_link_throughput(r);
  REQUIRE(links.size() == 2);
  CHECK(links[0].sta == 0);
  CHECK(links[1].mbps == doctest::Approx(1.5));
  r.active_duration_s = 0.0;
  CHECK_THROWS_AS(aggregate_throughput(r), std::invalid_argument);
}

TEST_CASE("aggregate throughput equals the sum of link throughputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> bits(1 + rng() % 40);
    for (double& b : bits) b = u(rng);
    const ScenarioResult r = with_links(bits, 0.5 + trial);
    double sum = 0.0;
    for (const auto& l : per_link_throughput(r)) sum += l.mbps;
    CHECK(aggregate_throughput(r) == doctest::Approx(sum));
  }
}

TEST_CASE("nearest-rank percentiles") {
  const std::vector<double> s{4.0, 1.0, 3.0, 2.0};
  CHECK(nearest_rank(s, 50) == 2.0);
  CHECK(nearest_rank(s, 0) == 1.0);
  CHECK(nearest_rank(s, 100) == 4.0);
  CHECK(nearest_rank(s, 75) == 3.0);
  CHECK(nearest_rank(s, 76) == 4.0);
  CHECK_THROWS_AS(nearest_rank({}, 50), std::invalid_argument);
  CHECK_THROWS_AS(nearest_rank(s, 101), std::invalid_argument);
}

TEST_CASE("throughput CDF has 101 monotone points ending at the maximum") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  std::vector<double> bits(37);
  for (double& b : bits) b = u(rng);
  const ScenarioResult r = with_links(bits, 1.0);
  const auto cdf = throughput_cdf(r);
  REQUIRE(cdf.size() == 101);
  for (std::size_t k = 0; k < cdf.size(); ++k) CHECK(cdf[k].percentile == static_cast<int>(k));
  for (std::size_t k = 1; k < cdf.size(); ++k) CHECK(cdf[k].mbps >= cdf[k - 1].mbps);
  CHECK(cdf.back().mbps == doctest::Approx(*std::max_element(bits.begin(), bits.end()) / 1e6));
  CHECK(cdf.front().mbps == doctest::Approx(*std::min_element(bits.begin(), bits.end()) / 1e6));

  // Order of links does not matter.
  auto shuffled = bits;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = throughput_cdf(with_links(shuffled, 1.0));
  for (std::size_t k = 0; k < cdf.size(); ++k) CHECK(again[k].mbps == cdf[k].mbps);

  CHECK_THROWS_AS(throughput_cdf(with_links({}, 1.0)), std::invalid_argument);
}

TEST_CASE("delay and drop rate") {
  ScenarioResult r = with_links({0.0}, 1.0);
  CHECK_FALSE(mean_frame_delay(r).has_value());
  CHECK(drop_rate(r) == 0.0);
  r.frame_delays_s = {0.001, 0.003};
  CHECK(*mean_frame_delay(r) == doctest::Approx(0.002));
  ApAccounting a;
  a.arrived = 100;
  a.delivered = 10;
  a.dropped_overflow = 85;
  a.dropped_retry = 3;
  a.in_queue = 2;
  r.ap_accounting = {a};
  CHECK(drop_rate(r) == doctest::Approx(0.88));
  CHECK(r.conserved());
}
