#include "apsel/topology.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace apsel {

void NetworkConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("invalid network config: ") + field);
  };
  require(area_width_m > 0.0, "area_width_m");
  require(area_height_m > 0.0, "area_height_m");
  require(num_aps > 0, "num_aps");
  require(num_stas >= 0, "num_stas");
  require(num_channels >= 1, "num_channels");
  require(ap_tx_power_mw > 0.0, "ap_tx_power_mw");
  require(sta_tx_power_mw > 0.0, "sta_tx_power_mw");
  require(coverage_radius_m > 0.0, "coverage_radius_m");
  require(path_loss_exponent > 0.0, "path_loss_exponent");
  require(std::isfinite(reference_loss_db), "reference_loss_db");
  require(!(strict_channel_balance && channel_policy == ChannelPolicy::RoundRobin && num_channels > num_aps),
          "num_channels");
}

double path_gain(double distance_m, double alpha, double reference_loss_db) {
  return std::pow(10.0, -reference_loss_db / 10.0) * std::pow(std::max(distance_m, kMinLinkDistanceM), -alpha);
}

std::vector<int> assign_channels(int num_aps, int num_channels, ChannelPolicy policy, Rng& rng) {
  if (num_aps < 0 || num_channels < 1) throw std::invalid_argument("assign_channels: bad counts");
  std::vector<int> channels(static_cast<std::size_t>(num_aps));
  if (policy == ChannelPolicy::RoundRobin) {
    for (int j = 0; j < num_aps; ++j) channels[j] = j % num_channels;
  } else {
    std::uniform_int_distribution<int> pick(0, num_channels - 1);
    for (auto& c : channels) c = pick(rng);
  }
  return channels;
}

Eigen::MatrixXd draw_fading_gains(int num_stas, int num_aps, std::uint64_t seed) {
  // Unit-mean exponential power gain (Rayleigh amplitude), one draw per link.
  Rng rng = make_stream(seed, "fading");
  std::exponential_distribution<double> exp1(1.0);
  Eigen::MatrixXd gains(num_stas, num_aps);
  for (int i = 0; i < num_stas; ++i) {
    for (int j = 0; j < num_aps; ++j) {
      double g = exp1(rng);
      while (g <= 0.0) g = exp1(rng);
      gains(i, j) = g;
    }
  }
  return gains;
}

namespace {

Eigen::MatrixXd pairwise_distance(const Eigen::Matrix2Xd& stas, const Eigen::Matrix2Xd& aps) {
  Eigen::MatrixXd d(stas.cols(), aps.cols());
  for (Eigen::Index j = 0; j < aps.cols(); ++j) {
    d.col(j) = (stas.colwise() - aps.col(j)).colwise().norm().transpose();
  }
  return d;
}

Eigen::Matrix2Xd uniform_positions(int count, double width, double height, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, width);
  std::uniform_real_distribution<double> uy(0.0, height);
  Eigen::Matrix2Xd p(2, count);
  for (int k = 0; k < count; ++k) {
    p(0, k) = ux(rng);
    p(1, k) = uy(rng);
  }
  return p;
}

}  // namespace

Topology make_topology(const Eigen::Matrix2Xd& ap_positions, const Eigen::Matrix2Xd& sta_positions,
                       std::vector<int> ap_channel, Eigen::MatrixXd link_gain) {
  if (static_cast<Eigen::Index>(ap_channel.size()) != ap_positions.cols())
    throw std::invalid_argument("make_topology: one channel per AP required");
  Topology t;
  t.ap_positions = ap_positions;
  t.sta_positions = sta_positions;
  t.ap_channel = std::move(ap_channel);
  t.link_distance = pairwise_distance(sta_positions, ap_positions);
  if (link_gain.size() == 0) {
    t.link_gain = Eigen::MatrixXd::Ones(sta_positions.cols(), ap_positions.cols());
  } else {
    if (link_gain.rows() != sta_positions.cols() || link_gain.cols() != ap_positions.cols())
      throw std::invalid_argument("make_topology: gain matrix shape mismatch");
    if ((link_gain.array() <= 0.0).any()) throw std::invalid_argument("make_topology: gains must be > 0");
    t.link_gain = std::move(link_gain);
  }
  return t;
}

Topology deploy(const NetworkConfig& config, Rng& rng) {
  config.validate();
  Eigen::Matrix2Xd aps = uniform_positions(config.num_aps, config.area_width_m, config.area_height_m, rng);
  Eigen::Matrix2Xd stas = uniform_positions(config.num_stas, config.area_width_m, config.area_height_m, rng);
  std::vector<int> channels = assign_channels(config.num_aps, config.num_channels, config.channel_policy, rng);
  return make_topology(aps, stas, std::move(channels),
                       draw_fading_gains(config.num_stas, config.num_aps, config.rng_seed));
}

Topology deploy(const NetworkConfig& config) {
  Rng rng = make_stream(config.rng_seed, "deploy");
  return deploy(config, rng);
}

bool in_range(int ap, int sta, const Topology& topology, const NetworkConfig& config) {
  return topology.link_distance(sta, ap) <= config.coverage_radius_m;
}

Eigen::MatrixXd downlink_rx_power_mw(const Topology& topology, const NetworkConfig& config) {
  return (config.ap_tx_power_mw * topology.link_gain.array() *
          path_gain(topology.link_distance.array(), config.path_loss_exponent, config.reference_loss_db))
      .matrix();
}

Eigen::MatrixXd ap_to_ap_power_mw(const Topology& topology, const NetworkConfig& config) {
  const Eigen::MatrixXd d = pairwise_distance(topology.ap_positions, topology.ap_positions);
  Eigen::MatrixXd p =
      (config.ap_tx_power_mw * path_gain(d.array(), config.path_loss_exponent, config.reference_loss_db)).matrix();
  p.diagonal().setZero();
  return p;
}

void save_topology(const Topology& topology, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write topology file: " + path.string());
  out << "# role id x y channel\n" << std::setprecision(17);
  for (int j = 0; j < topology.num_aps(); ++j) {
    out << "ap " << j << ' ' << topology.ap_positions(0, j) << ' ' << topology.ap_positions(1, j) << ' '
        << topology.ap_channel[j] << '\n';
  }
  for (int i = 0; i < topology.num_stas(); ++i) {
    out << "sta " << i << ' ' << topology.sta_positions(0, i) << ' ' << topology.sta_positions(1, i) << " -1\n";
  }
}

Topology load_topology(const std::filesystem::path& path, const NetworkConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read topology file: " + path.string());
  std::vector<Eigen::Vector2d> aps, stas;
  std::vector<int> channels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string role;
    int id = -1, channel = -1;
    double x = 0.0, y = 0.0;
    if (!(fields >> role >> id >> x >> y >> channel))
      throw std::runtime_error("malformed topology record at line " + std::to_string(line_no));
    auto& list = role == "ap" ? aps : stas;
    if (role != "ap" && role != "sta") throw std::runtime_error("unknown role at line " + std::to_string(line_no));
    if (id != static_cast<int>(list.size()))
      throw std::runtime_error("out-of-order id at line " + std::to_string(line_no));
    list.emplace_back(x, y);
    if (role == "ap") channels.push_back(channel);
  }
  Eigen::Matrix2Xd ap_pos(2, aps.size()), sta_pos(2, stas.size());
  for (std::size_t j = 0; j < aps.size(); ++j) ap_pos.col(j) = aps[j];
  for (std::size_t i = 0; i < stas.size(); ++i) sta_pos.col(i) = stas[i];
  return make_topology(ap_pos, sta_pos, std::move(channels),
                       draw_fading_gains(static_cast<int>(stas.size()), static_cast<int>(aps.size()),
                                         config.rng_seed));
}

}  // namespace apsel
