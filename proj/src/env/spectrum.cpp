#include "fastaj/env/spectrum.hpp"

#include <stdexcept>
#include <string>

namespace fastaj {
namespace {

void check_channel(int channel, int channels) {
  if (channel < 0 || channel >= channels) {
    throw std::out_of_range("channel " + std::to_string(channel) + " outside [0, " +
                            std::to_string(channels) + ")");
  }
}

}  // namespace

ChannelPowerMap compose_power(const EnvConfig& cfg, std::optional<int> user_channel,
                              std::span<const JamEmission> jammers, std::int64_t slot) {
  const int m = cfg.channels;
  ChannelPowerMap map{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m),
                      Eigen::VectorXd::Constant(m, dbm_to_mw(cfg.noise_dbm))};
  if (user_channel) {
    check_channel(*user_channel, m);
    map.signal[*user_channel] =
        dbm_to_mw(cfg.user_power_dbm) * link_gain(cfg.user_link, cfg.seed, slot);
  }
  for (const auto& j : jammers) {
    check_channel(j.channel, m);
    map.jam[j.channel] += dbm_to_mw(j.power_dbm) * j.gain;
  }
  return map;
}

double sinr_db(const ChannelPowerMap& map, int user_channel) {
  check_channel(user_channel, static_cast<int>(map.signal.size()));
  const double s = map.signal[user_channel];
  if (!(s > 0.0)) {
    throw std::invalid_argument("no user signal on channel " + std::to_string(user_channel));
  }
  return to_db(s / (map.jam[user_channel] + map.noise[user_channel]));
}

Eigen::VectorXd spectrum_vector(const ChannelPowerMap& map, int freq_bins) {
  const auto m = map.signal.size();
  if (freq_bins <= 0 || freq_bins % m != 0) {
    throw std::invalid_argument("freq_bins must be a positive multiple of the channel count");
  }
  const int per_channel = freq_bins / static_cast<int>(m);
  const Eigen::VectorXd total = map.total();
  Eigen::VectorXd s(freq_bins);
  for (Eigen::Index c = 0; c < m; ++c) {
    s.segment(c * per_channel, per_channel).setConstant(to_db(total[c] / per_channel));
  }
  return s;
}

Eigen::VectorXd coarse_spectrum(std::span<const ChannelPowerMap> slot_maps, int slots_per_hop,
                                CoarseSource source) {
  if (static_cast<int>(slot_maps.size()) != slots_per_hop || slot_maps.empty()) {
    throw std::invalid_argument("coarse spectrum needs exactly " + std::to_string(slots_per_hop) +
                                " slot maps, got " + std::to_string(slot_maps.size()));
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(slot_maps.front().signal.size());
  for (const auto& map : slot_maps) {
    sum += source == CoarseSource::Total ? map.total() : map.interference();
  }
  return (sum / static_cast<double>(slots_per_hop)).unaryExpr([](double p) { return to_db(p); });
}

}  // namespace fastaj
