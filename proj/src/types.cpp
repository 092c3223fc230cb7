#include <algorithm>
#include <cctype>
#include <numeric>

#include "apsel/association_map.hpp"
#include "apsel/scenario_result.hpp"

namespace apsel {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::SSF:
      return "SSF";
    case Strategy::MPD:
      return "MPD";
    case Strategy::DASA:
      return "DASA";
    case Strategy::OPASA:
      return "OPASA";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (Strategy s : {Strategy::SSF, Strategy::MPD, Strategy::DASA, Strategy::OPASA}) {
    if (upper == to_string(s)) return s;
  }
  return std::nullopt;
}

int AssociationMap::num_associated() const {
  return static_cast<int>(std::count_if(ap_of_sta.begin(), ap_of_sta.end(), [](int j) { return j != kUnassociated; }));
}

std::optional<double> AssociationMap::serving_sinr_db(int sta) const {
  const int ap = ap_of_sta.at(sta);
  if (ap == kUnassociated || static_cast<std::size_t>(sta) >= candidates.size()) return std::nullopt;
  const auto& c = candidates[sta];
  const auto it = std::find(c.begin(), c.end(), ap);
  if (it == c.end() || static_cast<std::size_t>(sta) >= measured_sinr_db.size()) return std::nullopt;
  return measured_sinr_db[sta].at(static_cast<std::size_t>(it - c.begin()));
}

std::uint64_t ScenarioResult::total_arrived() const {
  return std::accumulate(ap_accounting.begin(), ap_accounting.end(), std::uint64_t{0},
                         [](std::uint64_t s, const ApAccounting& a) { return s + a.arrived; });
}

std::uint64_t ScenarioResult::total_dropped() const {
  return std::accumulate(ap_accounting.begin(), ap_accounting.end(), std::uint64_t{0},
                         [](std::uint64_t s, const ApAccounting& a) { return s + a.dropped_overflow + a.dropped_retry; });
}

std::uint64_t ScenarioResult::total_delivered() const {
  return std::accumulate(ap_accounting.begin(), ap_accounting.end(), std::uint64_t{0},
                         [](std::uint64_t s, const ApAccounting& a) { return s + a.delivered; });
}

bool ScenarioResult::conserved() const {
  return std::all_of(ap_accounting.begin(), ap_accounting.end(), [](const ApAccounting& a) { return a.conserved(); });
}

}  // namespace apsel
