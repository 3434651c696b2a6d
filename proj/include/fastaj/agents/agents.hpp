#pragma once

#include "fastaj/agents/learning.hpp"
#include "fastaj/env/environment.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastaj {

enum class CgLabel { InterferencePlusNoise, Total };

struct JointAgentConfig {
  double alpha_q = 1e-4;
  double alpha_c = 1e-4;
  int batch_q = 64;
  int batch_c = 64;
  int memory_q = 1000;
  int memory_c = 256;
  int target_sync_hops = 1000;  // N_u
  double gamma = 0.1;
  double explore_threshold = 10.0;
  double loss_init = 100.0;
  double lambda_max = 1e3;
  // Added to every min-SINR reward so Q-values stay positive under the
  // Q / 10^(c/10) decision rule.
  double reward_offset_db = 30.0;
  CgLabel cg_label = CgLabel::InterferencePlusNoise;
  int fc1_width = 512;
  int fc2_width = 256;
  // Plain-DQN exploration, in hops.
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_hops = 5000;

  void validate() const;
  DqnConfig dqn() const;
};

struct StepStats {
  bool trained = false;
  double loss_q = kNaN;
  double loss_c = kNaN;
  double lambda = kNaN;
};

struct AggregatedLoss {
  double lambda;
  double loss;
};

// lambda = 1 / sqrt(L^C), capped at lambda_max.
AggregatedLoss aggregated_loss(double loss_q, double loss_c, double lambda_max = 1e3);

// argmax_a q[a] / 10^(c_hat[a] / 10); lowest index on ties.
int joint_decide(const Eigen::Ref<const Eigen::VectorXd>& q,
                 const Eigen::Ref<const Eigen::VectorXd>& c_hat);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string_view name() const = 0;
  virtual int act(const WaterfallPtr& state, std::int64_t hop) = 0;
  // hops_completed is 1-based: the count including this hop.
  virtual StepStats observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                            std::int64_t hops_completed) = 0;
};

class RandomFhAgent final : public Agent {
 public:
  RandomFhAgent(int channels, std::size_t length, std::uint64_t seed);

  std::string_view name() const override { return "random_fh"; }
  int act(const WaterfallPtr& state, std::int64_t hop) override;
  StepStats observe(const WaterfallPtr&, int, const HopOutcome&, std::int64_t) override {
    return {};
  }
  const std::vector<int>& sequence() const { return sequence_; }

 private:
  std::vector<int> sequence_;
};

struct CgSample {
  InputPtr state;
  Eigen::VectorXd label;
};

class DqnAgent final : public Agent {
 public:
  DqnAgent(const EnvConfig& env, double noise_floor_db, const JointAgentConfig& cfg,
           std::uint64_t seed);

  std::string_view name() const override { return "dqn"; }
  int act(const WaterfallPtr& state, std::int64_t hop) override;
  StepStats observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                    std::int64_t hops_completed) override;

  double epsilon() const;
  Eigen::VectorXd q_values(const WaterfallPtr& state);
  DqnLearner& learner() { return learner_; }

 private:
  JointAgentConfig cfg_;
  WaterfallEncoder encoder_;
  DqnLearner learner_;
  Rng rng_;
  std::int64_t hops_seen_ = 0;
};

class PredictorOnlyAgent final : public Agent {
 public:
  PredictorOnlyAgent(const EnvConfig& env, double noise_floor_db, const JointAgentConfig& cfg,
                     std::uint64_t seed);

  std::string_view name() const override { return "predictor_only"; }
  int act(const WaterfallPtr& state, std::int64_t hop) override;
  StepStats observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                    std::int64_t hops_completed) override;

  Eigen::VectorXd predict_cg(const WaterfallPtr& state);
  Network& network() { return *net_; }

 private:
  JointAgentConfig cfg_;
  WaterfallEncoder encoder_;
  std::unique_ptr<Network> net_;
  ReplayMemory<CgSample> memory_;
  Rng rng_;
};

class JointAgent final : public Agent {
 public:
  struct TrainOptions {
    std::optional<double> lambda;  // overrides 1/sqrt(L^C)
    bool q_pass = true;
  };

  JointAgent(const EnvConfig& env, double noise_floor_db, const JointAgentConfig& cfg,
             std::uint64_t seed);

  std::string_view name() const override { return "joint"; }
  int act(const WaterfallPtr& state, std::int64_t hop) override;
  StepStats observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                    std::int64_t hops_completed) override;

  // Pushes into D_Q and D_C without training.
  void remember(const WaterfallPtr& state, int action, const HopOutcome& outcome);
  bool ready() const;
  // One step of the aggregated loss on fresh minibatches.
  StepStats train_step(const TrainOptions& options);

  Eigen::VectorXd q_values(const WaterfallPtr& state);
  Eigen::VectorXd predict_cg(const WaterfallPtr& state);
  bool exploring() const { return loss_estimate_ > cfg_.explore_threshold; }
  double loss_estimate() const { return loss_estimate_; }
  void set_loss_estimate(double v) { loss_estimate_ = v; }

  const JointAgentConfig& config() const { return cfg_; }
  Network& network() { return nets_.online(); }
  const Network& target() const { return nets_.target(); }
  std::uint64_t target_version() const { return nets_.version(); }
  ReplayMemory<QTransition>& memory_q() { return memory_q_; }
  ReplayMemory<CgSample>& memory_c() { return memory_c_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  JointAgentConfig cfg_;
  WaterfallEncoder encoder_;
  TargetedNetwork nets_;
  ReplayMemory<QTransition> memory_q_;
  ReplayMemory<CgSample> memory_c_;
  Rng rng_;
  double loss_estimate_;
};

Eigen::VectorXd cg_label(const HopOutcome& outcome, CgLabel source);

}  // namespace fastaj
