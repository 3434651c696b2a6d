#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastaj {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class FadingMode { DeterministicUnit, RayleighBlock };

// Path loss d^-alpha, optionally times a block-Rayleigh power coefficient
// redrawn every slot.
struct LinkGain {
  double distance_m = 1.0;
  double path_loss_exponent = 2.0;
  FadingMode fading = FadingMode::DeterministicUnit;
  std::uint64_t stream = 0;  // separates fading draws of distinct links
};

double link_gain(const LinkGain& link, std::uint64_t seed, std::int64_t slot);

struct EnvConfig {
  int channels = 10;                   // M
  double bandwidth_hz = 20e6;          // B
  double channel_bandwidth_hz = 2e6;   // b = B / M
  int freq_bins = 40;                  // N_F, spectrum samples per slot
  int history_slots = 40;              // N_T, waterfall rows
  int slots_per_hop = 10;              // N_h
  double slot_duration_s = 1e-3;
  double sinr_threshold_db = 0.0;
  double user_power_dbm = 30.0;
  double noise_dbm = 0.0;              // per channel
  LinkGain user_link;
  std::vector<LinkGain> jammer_links;  // indexed by jammer; missing entries are unit links
  std::uint64_t seed = 1;

  int bins_per_channel() const { return freq_bins / channels; }
  double hop_duration_s() const { return slots_per_hop * slot_duration_s; }
  const LinkGain& jammer_link(std::size_t jammer) const;

  // Dimensions of the paper's sensing setup: 200 bins x 200 slots.
  static EnvConfig paper_scale();
  static EnvConfig desk_scale();

  void validate() const;
};

}  // namespace fastaj
