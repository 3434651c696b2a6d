#include "fastaj/env/config.hpp"

#include "fastaj/env/hash.hpp"

#include <cmath>
#include <limits>

namespace fastaj {
namespace {

const LinkGain kUnitLink{};

}  // namespace

double link_gain(const LinkGain& link, std::uint64_t seed, std::int64_t slot) {
  if (!(link.distance_m > 0.0)) {
    throw ConfigError("link distance must be positive, got " + std::to_string(link.distance_m));
  }
  const double path = std::pow(link.distance_m, -link.path_loss_exponent);
  if (link.fading == FadingMode::DeterministicUnit) return path;
  // Counter-based: the draw depends only on (seed, stream, slot).
  const std::uint64_t key =
      mix64(mix64(seed ^ 0x5bd1e995ULL) ^ mix64(link.stream + 0x632be59bd9b4e019ULL) ^
            static_cast<std::uint64_t>(slot));
  // Uniform in (0, 1); the exponential power gain -ln(u) has unit mean.
  const double u = (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53;
  return path * -std::log(u);
}

const LinkGain& EnvConfig::jammer_link(std::size_t jammer) const {
  return jammer < jammer_links.size() ? jammer_links[jammer] : kUnitLink;
}

EnvConfig EnvConfig::paper_scale() {
  EnvConfig cfg;
  cfg.freq_bins = 200;
  cfg.history_slots = 200;
  return cfg;
}

EnvConfig EnvConfig::desk_scale() { return EnvConfig{}; }

void EnvConfig::validate() const {
  if (channels < 2) throw ConfigError("env.channels must be >= 2");
  if (freq_bins < channels || freq_bins % channels != 0) {
    throw ConfigError("env.freq_bins must be a positive multiple of env.channels");
  }
  if (slots_per_hop < 1) throw ConfigError("env.slots_per_hop must be >= 1");
  if (history_slots < 1) throw ConfigError("env.history_slots must be >= 1");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("env.bandwidth_hz must be positive");
  if (std::abs(channel_bandwidth_hz * channels - bandwidth_hz) > 1e-9 * bandwidth_hz) {
    throw ConfigError("env.channel_bandwidth_hz * env.channels must equal env.bandwidth_hz");
  }
  if (!(slot_duration_s > 0.0)) throw ConfigError("env.slot_duration_s must be positive");
  if (!std::isfinite(user_power_dbm) || !std::isfinite(noise_dbm) ||
      !std::isfinite(sinr_threshold_db)) {
    throw ConfigError("env power levels and threshold must be finite");
  }
  auto check_link = [](const LinkGain& l, const std::string& what) {
    if (!(l.distance_m > 0.0)) throw ConfigError(what + ".distance_m must be positive");
  };
  check_link(user_link, "env.user_link");
  for (std::size_t i = 0; i < jammer_links.size(); ++i) {
    check_link(jammer_links[i], "env.jammer_links[" + std::to_string(i) + "]");
  }
}

}  // namespace fastaj
