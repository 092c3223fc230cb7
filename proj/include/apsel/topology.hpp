#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "apsel/random.hpp"

namespace apsel {

enum class ChannelPolicy { RoundRobin, UniformRandom };

struct NetworkConfig {
  double area_width_m = 1000.0;
  double area_height_m = 1000.0;
  int num_aps = 50;
  int num_stas = 400;
  int num_channels = 3;
  double ap_tx_power_mw = 100.0;
  double sta_tx_power_mw = 15.85;
  double coverage_radius_m = 50.0;
  double path_loss_exponent = 3.0;
  // Extra attenuation applied to every link on top of the d^-alpha law.
  double reference_loss_db = 0.0;
  ChannelPolicy channel_policy = ChannelPolicy::RoundRobin;
  // Round-robin must give every channel at least one AP.
  bool strict_channel_balance = false;
  std::uint64_t rng_seed = 1;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

/// Deployment geometry. Matrices are indexed (sta, ap).
struct Topology {
  Eigen::Matrix2Xd ap_positions;
  Eigen::Matrix2Xd sta_positions;
  std::vector<int> ap_channel;
  Eigen::MatrixXd link_distance;
  Eigen::MatrixXd link_gain;

  int num_aps() const { return static_cast<int>(ap_positions.cols()); }
  int num_stas() const { return static_cast<int>(sta_positions.cols()); }
};

/// Distances below this are clamped before the path-loss law is applied.
inline constexpr double kMinLinkDistanceM = 1.0;

/// P^t * G * d^-alpha. Distance must be strictly positive.
template <typename Scalar>
Scalar received_power(Scalar tx_power_mw, Scalar gain, Scalar distance_m, Scalar alpha) {
  using std::pow;
  if (!(distance_m > Scalar(0))) throw std::invalid_argument("received_power: distance must be > 0");
  if (!(gain > Scalar(0))) throw std::invalid_argument("received_power: gain must be > 0");
  return tx_power_mw * gain * pow(distance_m, -alpha);
}

/// Deterministic part of the link budget: reference loss times the clamped power law.
template <typename Derived>
auto path_gain(const Eigen::ArrayBase<Derived>& distance_m, double alpha, double reference_loss_db) {
  const double l0 = std::pow(10.0, -reference_loss_db / 10.0);
  return l0 * distance_m.max(kMinLinkDistanceM).pow(-alpha);
}

double path_gain(double distance_m, double alpha, double reference_loss_db);

std::vector<int> assign_channels(int num_aps, int num_channels, ChannelPolicy policy, Rng& rng);

/// Draws positions from `rng`; fading gains come from a separate stream of
/// config.rng_seed so a reloaded layout reproduces the same gains.
Topology deploy(const NetworkConfig& config, Rng& rng);
Topology deploy(const NetworkConfig& config);

/// Builds a topology from explicit geometry. Gains default to 1 when empty.
Topology make_topology(const Eigen::Matrix2Xd& ap_positions, const Eigen::Matrix2Xd& sta_positions,
                       std::vector<int> ap_channel, Eigen::MatrixXd link_gain = {});

Eigen::MatrixXd draw_fading_gains(int num_stas, int num_aps, std::uint64_t seed);

bool in_range(int ap, int sta, const Topology& topology, const NetworkConfig& config);

/// AP->STA received power including the block-fading gain, N x M (mW).
Eigen::MatrixXd downlink_rx_power_mw(const Topology& topology, const NetworkConfig& config);

/// AP->AP received power with unit gain, M x M (mW); the diagonal is zero.
Eigen::MatrixXd ap_to_ap_power_mw(const Topology& topology, const NetworkConfig& config);

void save_topology(const Topology& topology, const std::filesystem::path& path);
/// Reads positions and channels; gains are redrawn from config.rng_seed.
Topology load_topology(const std::filesystem::path& path, const NetworkConfig& config);

}  // namespace apsel
