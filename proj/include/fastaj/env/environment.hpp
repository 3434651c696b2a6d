#pragma once

#include "fastaj/env/config.hpp"
#include "fastaj/env/spectrum.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace fastaj {

// N_T x N_F dB samples, oldest slot in row 0.
class SpectrumWaterfall {
 public:
  SpectrumWaterfall(int history_slots, int freq_bins, double fill_db);

  int rows() const { return static_cast<int>(samples_.rows()); }
  int cols() const { return static_cast<int>(samples_.cols()); }
  const Eigen::MatrixXd& samples() const { return samples_; }

  // Appends rows (newest last), evicting the oldest.
  void push(std::span<const Eigen::VectorXd> rows);

  bool operator==(const SpectrumWaterfall& other) const { return samples_ == other.samples_; }

 private:
  Eigen::MatrixXd samples_;
};

using WaterfallPtr = std::shared_ptr<const SpectrumWaterfall>;
using ChannelSet = std::vector<int>;

// What one jammer emits during a hop: a channel set per slot.
struct JammerHopPlan {
  std::size_t link = 0;  // index into EnvConfig::jammer_links
  double power_dbm = 50.0;
  std::vector<ChannelSet> slots;
};

struct HopOutcome {
  std::int64_t hop = 0;
  int user_channel = 0;
  std::vector<double> sinr_per_slot;  // dB
  double user_reward_db = 0.0;        // min SINR over the hop
  bool ack = false;
  int jammer_reward = 0;              // +1 on NACK, -1 on ACK
  Eigen::VectorXd coarse;             // total received power, dB
  Eigen::VectorXd coarse_interference;  // jam + noise only, dB
  WaterfallPtr next_state;
};

class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  const WaterfallPtr& state() const { return state_; }
  std::int64_t hop() const { return hop_; }
  // First slot index of the upcoming hop.
  std::int64_t slot() const { return hop_ * cfg_.slots_per_hop; }
  // dB value of a noise-only spectrum bin.
  double noise_floor_db() const;

  HopOutcome step_hop(int user_channel, std::span<const JammerHopPlan> jammers);

 private:
  EnvConfig cfg_;
  WaterfallPtr state_;
  std::int64_t hop_ = 0;
};

}  // namespace fastaj
