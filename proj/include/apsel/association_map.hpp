#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apsel {

inline constexpr int kUnassociated = -1;

enum class Strategy { SSF, MPD, DASA, OPASA };

std::string_view to_string(Strategy s);
/// Accepts the names above, case-insensitive.
std::optional<Strategy> parse_strategy(std::string_view name);

struct AssociationMap {
  Strategy strategy = Strategy::SSF;
  // Serving AP per STA, or kUnassociated.
  std::vector<int> ap_of_sta;
  // Candidate APs per STA (in-range and above sensitivity), ascending.
  std::vector<std::vector<int>> candidates;
  // SINR (dB) per candidate as seen by the strategy; nullopt = no measurement.
  std::vector<std::vector<std::optional<double>>> measured_sinr_db;
  // PHY rate the serving AP uses towards each STA (Mbps); 0 when unassociated.
  std::vector<double> rate_mbps;

  int num_stas() const { return static_cast<int>(ap_of_sta.size()); }
  int num_associated() const;
  /// SINR the strategy recorded for the serving AP, if any.
  std::optional<double> serving_sinr_db(int sta) const;
};

}  // namespace apsel
