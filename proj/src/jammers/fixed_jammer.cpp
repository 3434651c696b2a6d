#include "fastaj/jammers/fixed_jammer.hpp"

#include "fastaj/env/hash.hpp"

#include <cmath>
#include <string>

namespace fastaj {
namespace {

void check_channels(const ChannelSet& set, int channels, const char* field) {
  if (set.empty()) throw ConfigError(std::string(field) + " must not be empty");
  for (int c : set) {
    if (c < 0 || c >= channels) {
      throw ConfigError(std::string(field) + " contains channel " + std::to_string(c) +
                        " outside [0, " + std::to_string(channels) + ")");
    }
  }
}

void check_period(int period, const char* field) {
  if (period < 1) throw ConfigError(std::string(field) + " must be >= 1");
}

ChannelSet simple_action(FixedMode mode, const FixedJammerConfig& cfg, const EnvConfig& env,
                         std::int64_t hop, std::int64_t slot) {
  switch (mode) {
    case FixedMode::Sweep:
      return {sweep_channel(cfg.sweep_rate_hz_per_s, env, slot)};
    case FixedMode::Comb:
      return cfg.comb_channels;
    case FixedMode::PartialBand: {
      const int start = partial_band_start(cfg, env, hop);
      ChannelSet block;
      for (int c = 0; c < cfg.band_width_channels; ++c) block.push_back(start + c);
      return block;
    }
    default:
      throw ConfigError("mode " + std::string(to_string(mode)) + " cannot appear in a dynamic cycle");
  }
}

}  // namespace

FixedMode parse_fixed_mode(std::string_view name) {
  if (name == "sweep") return FixedMode::Sweep;
  if (name == "comb") return FixedMode::Comb;
  if (name == "switch_comb") return FixedMode::SwitchComb;
  if (name == "dynamic") return FixedMode::Dynamic;
  if (name == "partial_band") return FixedMode::PartialBand;
  if (name == "follower") return FixedMode::Follower;
  throw ConfigError("unknown jammer mode '" + std::string(name) + "'");
}

std::string_view to_string(FixedMode mode) {
  switch (mode) {
    case FixedMode::Sweep: return "sweep";
    case FixedMode::Comb: return "comb";
    case FixedMode::SwitchComb: return "switch_comb";
    case FixedMode::Dynamic: return "dynamic";
    case FixedMode::PartialBand: return "partial_band";
    case FixedMode::Follower: return "follower";
  }
  return "unknown";
}

void FixedJammerConfig::validate(const EnvConfig& env) const {
  const int m = env.channels;
  if (!std::isfinite(power_dbm)) throw ConfigError("jammer power_dbm must be finite");
  switch (mode) {
    case FixedMode::Sweep:
      break;
    case FixedMode::Comb:
      check_channels(comb_channels, m, "comb_channels");
      break;
    case FixedMode::SwitchComb:
      check_channels(comb_pair_a, m, "comb_pair[0]");
      check_channels(comb_pair_b, m, "comb_pair[1]");
      check_period(switch_period_hops, "switch_period_hops");
      break;
    case FixedMode::Dynamic:
      if (mode_cycle.empty()) throw ConfigError("mode_cycle must not be empty");
      check_period(cycle_period_hops, "cycle_period_hops");
      for (FixedMode sub : mode_cycle) {
        if (sub != FixedMode::Sweep && sub != FixedMode::Comb && sub != FixedMode::PartialBand) {
          throw ConfigError("mode_cycle may only contain sweep, comb and partial_band");
        }
      }
      break;
    case FixedMode::PartialBand:
    case FixedMode::Follower:
      break;
  }
  const auto uses = [&](FixedMode want) {
    if (mode == want) return true;
    if (mode != FixedMode::Dynamic) return false;
    for (FixedMode sub : mode_cycle) {
      if (sub == want) return true;
    }
    return false;
  };
  if (uses(FixedMode::Sweep) && !(sweep_rate_hz_per_s > 0.0)) {
    throw ConfigError("sweep_rate must be positive");
  }
  if (uses(FixedMode::Comb)) check_channels(comb_channels, m, "comb_channels");
  if (uses(FixedMode::PartialBand)) {
    if (band_width_channels < 1 || band_width_channels > m) {
      throw ConfigError("band_width_channels must lie in [1, " + std::to_string(m) + "]");
    }
    if (band_start < 0 || band_start + band_width_channels > m) {
      throw ConfigError("band_start puts the block outside the band");
    }
    check_period(rehop_period_hops, "rehop_period_hops");
  }
  if (mode == FixedMode::Follower && delay_hops < 1) throw ConfigError("delay_hops must be >= 1");
}

int sweep_channel(double sweep_rate_hz_per_s, const EnvConfig& env, std::int64_t slot) {
  const double f = std::fmod(sweep_rate_hz_per_s * env.slot_duration_s * static_cast<double>(slot),
                             env.bandwidth_hz);
  // The epsilon absorbs rounding at exact channel edges (k * 0.25 lands on integers).
  const int ch = static_cast<int>(std::floor(f / env.channel_bandwidth_hz + 1e-9));
  return ch >= env.channels ? ch - env.channels : ch;
}

int partial_band_start(const FixedJammerConfig& cfg, const EnvConfig& env, std::int64_t hop) {
  const std::int64_t epoch = hop / cfg.rehop_period_hops;
  if (epoch == 0) return cfg.band_start;
  const std::uint64_t key =
      mix64(mix64(cfg.seed ^ 0x7f4a7c159e3779b9ULL) ^ static_cast<std::uint64_t>(epoch));
  const auto starts = static_cast<std::uint64_t>(env.channels - cfg.band_width_channels + 1);
  return static_cast<int>(key % starts);
}

ChannelSet fixed_action(const FixedJammerConfig& cfg, const EnvConfig& env, std::int64_t hop,
                        std::int64_t slot, std::span<const int> user_history) {
  switch (cfg.mode) {
    case FixedMode::Sweep:
    case FixedMode::Comb:
    case FixedMode::PartialBand:
      return simple_action(cfg.mode, cfg, env, hop, slot);
    case FixedMode::SwitchComb:
      return (hop / cfg.switch_period_hops) % 2 == 0 ? cfg.comb_pair_a : cfg.comb_pair_b;
    case FixedMode::Dynamic: {
      const auto n = static_cast<std::int64_t>(cfg.mode_cycle.size());
      const FixedMode sub = cfg.mode_cycle[static_cast<std::size_t>((hop / cfg.cycle_period_hops) % n)];
      return simple_action(sub, cfg, env, hop, slot);
    }
    case FixedMode::Follower: {
      const auto d = static_cast<std::size_t>(cfg.delay_hops);
      if (user_history.size() < d) return {};
      return {user_history[user_history.size() - d]};
    }
  }
  return {};
}

FixedJammer::FixedJammer(FixedJammerConfig cfg, const EnvConfig& env)
    : cfg_(std::move(cfg)), env_(env) {
  cfg_.validate(env_);
}

JammerHopPlan FixedJammer::plan_hop(std::int64_t hop) const {
  const std::vector<int> history(history_.begin(), history_.end());
  JammerHopPlan plan;
  plan.link = cfg_.link;
  plan.power_dbm = cfg_.power_dbm;
  plan.slots.reserve(static_cast<std::size_t>(env_.slots_per_hop));
  for (int i = 0; i < env_.slots_per_hop; ++i) {
    plan.slots.push_back(fixed_action(cfg_, env_, hop, hop * env_.slots_per_hop + i, history));
  }
  return plan;
}

void FixedJammer::record_user_channel(int channel) {
  history_.push_back(channel);
  while (static_cast<int>(history_.size()) > cfg_.delay_hops) history_.pop_front();
}

}  // namespace fastaj
