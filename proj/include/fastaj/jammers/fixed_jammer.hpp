#pragma once

#include "fastaj/env/environment.hpp"

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

namespace fastaj {

enum class FixedMode { Sweep, Comb, SwitchComb, Dynamic, PartialBand, Follower };

FixedMode parse_fixed_mode(std::string_view name);
std::string_view to_string(FixedMode mode);

struct FixedJammerConfig {
  FixedMode mode = FixedMode::Sweep;
  double power_dbm = 50.0;
  std::size_t link = 0;

  double sweep_rate_hz_per_s = 500e6;

  ChannelSet comb_channels{1, 4, 7};

  ChannelSet comb_pair_a{1, 4, 7};
  ChannelSet comb_pair_b{2, 5, 8};
  int switch_period_hops = 50;

  // Only Sweep, Comb and PartialBand may appear in the cycle.
  std::vector<FixedMode> mode_cycle{FixedMode::Sweep, FixedMode::Comb, FixedMode::PartialBand};
  int cycle_period_hops = 50;

  int band_start = 0;
  int band_width_channels = 3;
  int rehop_period_hops = 50;

  int delay_hops = 1;

  std::uint64_t seed = 0;

  void validate(const EnvConfig& env) const;
};

// Swept channel at absolute slot k.
int sweep_channel(double sweep_rate_hz_per_s, const EnvConfig& env, std::int64_t slot);

// First channel of the partial-band block during `hop`.
int partial_band_start(const FixedJammerConfig& cfg, const EnvConfig& env, std::int64_t hop);

// user_history holds the user's channels of past hops, most recent last.
ChannelSet fixed_action(const FixedJammerConfig& cfg, const EnvConfig& env, std::int64_t hop,
                        std::int64_t slot, std::span<const int> user_history);

class FixedJammer {
 public:
  FixedJammer(FixedJammerConfig cfg, const EnvConfig& env);

  const FixedJammerConfig& config() const { return cfg_; }
  JammerHopPlan plan_hop(std::int64_t hop) const;
  void record_user_channel(int channel);

 private:
  FixedJammerConfig cfg_;
  EnvConfig env_;
  std::deque<int> history_;
};

}  // namespace fastaj
