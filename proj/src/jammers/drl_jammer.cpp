#include "fastaj/jammers/drl_jammer.hpp"

#include <string>

namespace fastaj {

void IntelligentJammerConfig::validate(const EnvConfig& env) const {
  if (jammed_channels < 1 || jammed_channels > env.channels) {
    throw ConfigError("N_I must lie in [1, " + std::to_string(env.channels) + "]");
  }
  if (update_step && *update_step < 1) throw ConfigError("update_step must be >= 1 or infinity");
  if (epsilon_decay_updates < 0) throw ConfigError("epsilon_decay_updates must be >= 0");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("jammer epsilon values must lie in [0, 1]");
  }
}

ChannelSet jammed_block(int start, int jammed_channels) {
  ChannelSet block;
  for (int c = 0; c < jammed_channels; ++c) block.push_back(start + c);
  return block;
}

namespace {

const IntelligentJammerConfig& checked(const IntelligentJammerConfig& cfg, const EnvConfig& env) {
  cfg.validate(env);
  return cfg;
}

}  // namespace

IntelligentJammer::IntelligentJammer(IntelligentJammerConfig cfg, const EnvConfig& env,
                                     double noise_floor_db)
    : cfg_(checked(cfg, env)),
      channels_(env.channels),
      slots_per_hop_(env.slots_per_hop),
      encoder_(noise_floor_db),
      learner_(make_network_config(env, cfg_.learner.fc1_width, cfg_.learner.fc2_width,
                                   cfg_.action_count(env.channels), 0),
               cfg_.learner, cfg_.seed),
      rng_(cfg_.seed ^ 0xa5a5a5a5a5a5a5a5ULL) {}

double IntelligentJammer::epsilon() const {
  if (!cfg_.update_step) return 0.0;
  return linear_schedule(cfg_.epsilon_start, cfg_.epsilon_end, cfg_.epsilon_decay_updates,
                         learner_.gradient_steps());
}

int IntelligentJammer::act(const WaterfallPtr& state) {
  return epsilon_greedy(learner_.q_values(encoder_.encode(state)), epsilon(), rng_);
}

JammerHopPlan IntelligentJammer::plan(int start) const {
  JammerHopPlan p;
  p.link = cfg_.link;
  p.power_dbm = cfg_.power_dbm;
  p.slots.assign(static_cast<std::size_t>(slots_per_hop_), jammed_block(start, cfg_.jammed_channels));
  return p;
}

void IntelligentJammer::observe(const WaterfallPtr& state, int start, const HopOutcome& outcome,
                                std::int64_t hops_completed) {
  learner_.remember({encoder_.encode(state), start, static_cast<double>(outcome.jammer_reward),
                     encoder_.encode(outcome.next_state)});
  if (!cfg_.update_step) return;
  if (hops_completed % *cfg_.update_step == 0 && learner_.ready()) learner_.train_step(rng_);
  learner_.maybe_sync(hops_completed);
}

}  // namespace fastaj
