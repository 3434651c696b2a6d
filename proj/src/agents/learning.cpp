#include "fastaj/agents/learning.hpp"

#include "fastaj/nn/sgd.hpp"

namespace fastaj {

InputPtr WaterfallEncoder::encode(const WaterfallPtr& state) {
  if (state == last_state_ && last_input_) return last_input_;
  const auto& s = state->samples();
  auto x = std::make_shared<Eigen::VectorXd>(s.size());
  // Row-major flattening: input index = t * N_F + f.
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
      x->data(), s.rows(), s.cols());
  view = (s.array() - floor_db_) / span_db_;
  last_state_ = state;
  last_input_ = std::move(x);
  return last_input_;
}

nn::NetworkConfig make_network_config(const EnvConfig& env, int fc1_width, int fc2_width,
                                      int q_outputs, int cg_outputs) {
  nn::NetworkConfig cfg;
  cfg.input_height = env.history_slots;
  cfg.input_width = env.freq_bins;
  cfg.fc1_width = fc1_width;
  cfg.fc2_width = fc2_width;
  cfg.q_outputs = q_outputs;
  cfg.cg_outputs = cg_outputs;
  return cfg;
}

Eigen::MatrixXd gather_inputs(std::span<const InputPtr> inputs) {
  if (inputs.empty()) return {};
  Eigen::MatrixXd x(inputs.front()->size(), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = *inputs[i];
  return x;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

int argmin(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = static_cast<int>(i);
  }
  return best;
}

int epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, double epsilon, Rng& rng) {
  // Always consume both draws so the stream does not depend on the branch taken.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const int random_action =
      std::uniform_int_distribution<int>(0, static_cast<int>(q.size()) - 1)(rng);
  return u < epsilon ? random_action : argmax(q);
}

double linear_schedule(double start, double end, std::int64_t steps, std::int64_t t) {
  if (steps <= 0 || t >= steps) return end;
  const double frac = static_cast<double>(t) / static_cast<double>(steps);
  return start + (end - start) * frac;
}

TargetedNetwork::TargetedNetwork(const nn::NetworkConfig& cfg, std::uint64_t seed)
    : online_(std::make_unique<Network>(cfg)), target_(std::make_unique<Network>(cfg)) {
  online_->initialize(seed);
  target_->params().copy_values_from(online_->params());
}

std::vector<double> TargetedNetwork::td_targets(ReplayMemory<QTransition>& memory,
                                                std::span<const std::size_t> indices,
                                                double gamma) {
  std::vector<std::size_t> stale;
  std::vector<InputPtr> inputs;
  for (std::size_t i : indices) {
    const auto& t = memory.at(i);
    if (t.target_version != version_) {
      stale.push_back(i);
      inputs.push_back(t.next_state);
    }
  }
  if (!stale.empty()) {
    const Eigen::MatrixXd next_q = target_->infer(gather_inputs(inputs)).q;
    for (std::size_t k = 0; k < stale.size(); ++k) {
      auto& t = memory.at(stale[k]);
      t.target_max = next_q.col(static_cast<Eigen::Index>(k)).maxCoeff();
      t.target_version = version_;
    }
  }
  std::vector<double> eta;
  eta.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& t = memory.at(i);
    eta.push_back(t.reward + gamma * t.target_max);
  }
  return eta;
}

DqnLearner::DqnLearner(const nn::NetworkConfig& net_cfg, const DqnConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), nets_(net_cfg, seed), memory_(static_cast<std::size_t>(cfg.memory_capacity)) {
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (cfg.target_sync_hops < 1) throw ConfigError("target sync interval must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
}

Eigen::VectorXd DqnLearner::q_values(const InputPtr& input) const {
  return nets_.online().infer(*input).q.col(0);
}

double DqnLearner::train_step(Rng& rng) {
  const auto idx = memory_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng);
  const std::vector<double> eta = nets_.td_targets(memory_, idx, cfg_.gamma);
  std::vector<InputPtr> states;
  std::vector<int> actions;
  for (std::size_t i : idx) {
    states.push_back(memory_.at(i).state);
    actions.push_back(memory_.at(i).action);
  }
  auto& net = nets_.online();
  const auto out = net.forward(gather_inputs(states));
  const auto loss = nn::dqn_loss<double>(out.q, actions, eta);
  net.backward(loss.grad, {});
  net.clear_cache();
  nn::sgd_step(net.params(), cfg_.learning_rate);
  ++gradient_steps_;
  return loss.loss;
}

void DqnLearner::maybe_sync(std::int64_t hops_completed) {
  if (hops_completed > 0 && hops_completed % cfg_.target_sync_hops == 0) nets_.sync();
}

}  // namespace fastaj
