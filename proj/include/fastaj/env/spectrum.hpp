#pragma once

#include "fastaj/env/config.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>

namespace fastaj {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

// Received linear power per channel (mW) for one slot, split by source.
struct ChannelPowerMap {
  Eigen::VectorXd signal;
  Eigen::VectorXd jam;
  Eigen::VectorXd noise;

  Eigen::VectorXd total() const { return signal + jam + noise; }
  Eigen::VectorXd interference() const { return jam + noise; }
};

struct JamEmission {
  int channel = 0;
  double power_dbm = 0.0;
  double gain = 1.0;
};

// Rectangular channel masks: each emission lands entirely on its channel.
ChannelPowerMap compose_power(const EnvConfig& cfg, std::optional<int> user_channel,
                              std::span<const JamEmission> jammers, std::int64_t slot);

// SINR (dB) on the user's channel; throws if the user is silent there.
double sinr_db(const ChannelPowerMap& map, int user_channel);

// One dB sample per frequency bin; each channel's power is spread evenly
// over its bins.
Eigen::VectorXd spectrum_vector(const ChannelPowerMap& map, int freq_bins);

enum class CoarseSource { Total, InterferencePlusNoise };

// Per-channel dB of the hop-mean linear power.
Eigen::VectorXd coarse_spectrum(std::span<const ChannelPowerMap> slot_maps, int slots_per_hop,
                                CoarseSource source = CoarseSource::Total);

}  // namespace fastaj
