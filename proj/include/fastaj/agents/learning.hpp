#pragma once

#include "fastaj/agents/replay_memory.hpp"
#include "fastaj/env/environment.hpp"
#include "fastaj/nn/losses.hpp"
#include "fastaj/nn/network.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <vector>

// Pieces shared by every DQN-style learner in the project (the user agents
// and the intelligent jammer).

namespace fastaj {

using Network = nn::TwoHeadNetwork<double>;
using InputPtr = std::shared_ptr<const Eigen::VectorXd>;
using Rng = std::mt19937_64;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Maps a waterfall to the network input: time-major flattening, with the
// noise floor at 0 and noise floor + span_db at 1.
class WaterfallEncoder {
 public:
  WaterfallEncoder(double noise_floor_db, double span_db = 60.0)
      : floor_db_(noise_floor_db), span_db_(span_db) {}

  InputPtr encode(const WaterfallPtr& state);

 private:
  double floor_db_;
  double span_db_;
  WaterfallPtr last_state_;
  InputPtr last_input_;
};

nn::NetworkConfig make_network_config(const EnvConfig& env, int fc1_width, int fc2_width,
                                      int q_outputs, int cg_outputs);

Eigen::MatrixXd gather_inputs(std::span<const InputPtr> inputs);

// Lowest index wins ties.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& v);
int argmin(const Eigen::Ref<const Eigen::VectorXd>& v);

// With probability epsilon a uniform action, otherwise argmax(q).
int epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, double epsilon, Rng& rng);

// Linear decay from `start` to `end` over `steps`, constant afterwards.
double linear_schedule(double start, double end, std::int64_t steps, std::int64_t t);

struct QTransition {
  InputPtr state;
  int action = 0;
  double reward = 0.0;
  InputPtr next_state;
  // max_a Q(next_state, a) under the target parameters of `target_version`.
  double target_max = 0.0;
  std::uint64_t target_version = 0;
};

struct DqnConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int memory_capacity = 1000;
  int target_sync_hops = 1000;
  double gamma = 0.1;
  int fc1_width = 512;
  int fc2_width = 256;
};

// Online network, target copy, and a version counter for lazily cached
// bootstrap values. The target parameters only change at sync, so a cached
// max_a Q(S', a; target) stays exact until the next sync.
class TargetedNetwork {
 public:
  TargetedNetwork(const nn::NetworkConfig& cfg, std::uint64_t seed);

  Network& online() { return *online_; }
  const Network& online() const { return *online_; }
  const Network& target() const { return *target_; }
  std::uint64_t version() const { return version_; }

  void sync() {
    target_->params().copy_values_from(online_->params());
    ++version_;
  }

  // For restoring a checkpoint; invalidates cached bootstrap values.
  Network& mutable_target() {
    ++version_;
    return *target_;
  }

  // Fills eta = r + gamma * max_a Q(S', a; target) for the sampled
  // transitions, evaluating the target network only for stale entries.
  std::vector<double> td_targets(ReplayMemory<QTransition>& memory,
                                 std::span<const std::size_t> indices, double gamma);

 private:
  std::unique_ptr<Network> online_;
  std::unique_ptr<Network> target_;
  std::uint64_t version_ = 1;
};

// Plain DQN update machinery: memory, sampling, one SGD step per call.
class DqnLearner {
 public:
  DqnLearner(const nn::NetworkConfig& net_cfg, const DqnConfig& cfg, std::uint64_t seed);

  const DqnConfig& config() const { return cfg_; }
  Network& network() { return nets_.online(); }
  const Network& network() const { return nets_.online(); }
  const Network& target() const { return nets_.target(); }
  ReplayMemory<QTransition>& memory() { return memory_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }

  Eigen::VectorXd q_values(const InputPtr& input) const;
  void remember(QTransition t) { memory_.push(std::move(t)); }
  bool ready() const { return memory_.size() > static_cast<std::size_t>(cfg_.batch_size); }
  // One minibatch step; returns L^Q.
  double train_step(Rng& rng);
  // Call once per completed hop (1-based count).
  void maybe_sync(std::int64_t hops_completed);

 private:
  DqnConfig cfg_;
  TargetedNetwork nets_;
  ReplayMemory<QTransition> memory_;
  std::int64_t gradient_steps_ = 0;
};

}  // namespace fastaj
