#pragma once

#include "fastaj/agents/learning.hpp"
#include "fastaj/env/environment.hpp"

#include <cstdint>
#include <optional>

namespace fastaj {

struct IntelligentJammerConfig {
  int jammed_channels = 3;  // N_I
  double power_dbm = 50.0;
  std::size_t link = 0;
  // Hops between gradient steps; nullopt freezes the initial greedy policy.
  std::optional<int> update_step = 10;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_updates = 100;
  DqnConfig learner;
  std::uint64_t seed = 0;

  int action_count(int channels) const { return channels - jammed_channels + 1; }
  void validate(const EnvConfig& env) const;
};

ChannelSet jammed_block(int start, int jammed_channels);

class IntelligentJammer {
 public:
  IntelligentJammer(IntelligentJammerConfig cfg, const EnvConfig& env, double noise_floor_db);

  const IntelligentJammerConfig& config() const { return cfg_; }
  DqnLearner& learner() { return learner_; }
  const DqnLearner& learner() const { return learner_; }

  double epsilon() const;
  // Block start for the coming hop.
  int act(const WaterfallPtr& state);
  JammerHopPlan plan(int start) const;
  // Stores (S, a_j, r_j, S') and trains when the hop count hits the update step.
  void observe(const WaterfallPtr& state, int start, const HopOutcome& outcome,
               std::int64_t hops_completed);

 private:
  IntelligentJammerConfig cfg_;
  int channels_;
  int slots_per_hop_;
  WaterfallEncoder encoder_;
  DqnLearner learner_;
  Rng rng_;
};

}  // namespace fastaj
