#include "fastaj/agents/agents.hpp"

#include "fastaj/nn/checkpoint.hpp"
#include "fastaj/nn/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastaj {
namespace {

void require_positive(double v, const char* field) {
  if (!(v > 0.0)) throw ConfigError(std::string("agent.") + field + " must be positive");
}

void check_state(const WaterfallPtr& state, const nn::NetworkConfig& net) {
  if (!state || state->rows() != net.input_height || state->cols() != net.input_width) {
    throw std::invalid_argument("state shape does not match the network input " +
                                std::to_string(net.input_height) + "x" +
                                std::to_string(net.input_width));
  }
}

// Shared extractor weights sit under both theta and psi and move with both rates.
auto joint_learning_rates(const JointAgentConfig& cfg) {
  return [a_q = cfg.alpha_q, a_c = cfg.alpha_c](std::string_view name) {
    if (name.starts_with("q.")) return a_q;
    if (name.starts_with("cg.")) return a_c;
    return a_q + a_c;
  };
}

Eigen::MatrixXd gather_labels(const ReplayMemory<CgSample>& memory,
                              std::span<const std::size_t> idx, std::vector<InputPtr>& states) {
  Eigen::MatrixXd labels(memory.at(idx[0]).label.size(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& s = memory.at(idx[k]);
    states.push_back(s.state);
    labels.col(static_cast<Eigen::Index>(k)) = s.label;
  }
  return labels;
}

}  // namespace

void JointAgentConfig::validate() const {
  require_positive(alpha_q, "alpha_q");
  require_positive(alpha_c, "alpha_c");
  require_positive(batch_q, "batch_q");
  require_positive(batch_c, "batch_c");
  require_positive(memory_q, "memory_q");
  require_positive(memory_c, "memory_c");
  require_positive(target_sync_hops, "target_sync_hops");
  require_positive(explore_threshold, "explore_threshold");
  require_positive(loss_init, "loss_init");
  require_positive(lambda_max, "lambda_max");
  require_positive(fc1_width, "fc1_width");
  require_positive(fc2_width, "fc2_width");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma must lie in (0, 1]");
  if (!std::isfinite(reward_offset_db)) throw ConfigError("agent.reward_offset_db must be finite");
  if (epsilon_decay_hops < 0) throw ConfigError("agent.epsilon_decay_hops must be >= 0");
}

DqnConfig JointAgentConfig::dqn() const {
  DqnConfig d;
  d.learning_rate = alpha_q;
  d.batch_size = batch_q;
  d.memory_capacity = memory_q;
  d.target_sync_hops = target_sync_hops;
  d.gamma = gamma;
  d.fc1_width = fc1_width;
  d.fc2_width = fc2_width;
  return d;
}

AggregatedLoss aggregated_loss(double loss_q, double loss_c, double lambda_max) {
  const double lambda = loss_c > 0.0 ? std::min(1.0 / std::sqrt(loss_c), lambda_max) : lambda_max;
  return {lambda, lambda * loss_q + loss_c};
}

int joint_decide(const Eigen::Ref<const Eigen::VectorXd>& q,
                 const Eigen::Ref<const Eigen::VectorXd>& c_hat) {
  if (q.size() != c_hat.size() || q.size() == 0) {
    throw std::invalid_argument("joint_decide: Q and predicted spectrum lengths differ");
  }
  if (!q.allFinite() || !c_hat.allFinite()) {
    throw std::invalid_argument("joint_decide: non-finite input");
  }
  const Eigen::VectorXd score =
      q.array() / c_hat.array().unaryExpr([](double c) { return std::pow(10.0, c / 10.0); });
  return argmax(score);
}

Eigen::VectorXd cg_label(const HopOutcome& outcome, CgLabel source) {
  return source == CgLabel::Total ? outcome.coarse : outcome.coarse_interference;
}

RandomFhAgent::RandomFhAgent(int channels, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ConfigError("random_fh sequence length must be >= 1");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, channels - 1);
  sequence_.resize(length);
  for (auto& c : sequence_) c = pick(rng);
}

int RandomFhAgent::act(const WaterfallPtr&, std::int64_t hop) {
  return sequence_[static_cast<std::size_t>(hop) % sequence_.size()];
}

DqnAgent::DqnAgent(const EnvConfig& env, double noise_floor_db, const JointAgentConfig& cfg,
                   std::uint64_t seed)
    : cfg_(cfg),
      encoder_(noise_floor_db),
      learner_(make_network_config(env, cfg.fc1_width, cfg.fc2_width, env.channels, 0), cfg.dqn(),
               seed),
      rng_(seed ^ 0x3c6ef372fe94f82bULL) {
  cfg_.validate();
}

double DqnAgent::epsilon() const {
  return linear_schedule(cfg_.epsilon_start, cfg_.epsilon_end, cfg_.epsilon_decay_hops, hops_seen_);
}

Eigen::VectorXd DqnAgent::q_values(const WaterfallPtr& state) {
  check_state(state, learner_.network().config());
  return learner_.q_values(encoder_.encode(state));
}

int DqnAgent::act(const WaterfallPtr& state, std::int64_t) {
  return epsilon_greedy(q_values(state), epsilon(), rng_);
}

StepStats DqnAgent::observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                            std::int64_t hops_completed) {
  hops_seen_ = hops_completed;
  learner_.remember({encoder_.encode(state), action, outcome.user_reward_db + cfg_.reward_offset_db,
                     encoder_.encode(outcome.next_state)});
  StepStats stats;
  if (learner_.ready()) {
    stats.trained = true;
    stats.loss_q = learner_.train_step(rng_);
  }
  learner_.maybe_sync(hops_completed);
  return stats;
}

PredictorOnlyAgent::PredictorOnlyAgent(const EnvConfig& env, double noise_floor_db,
                                       const JointAgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      encoder_(noise_floor_db),
      net_(std::make_unique<Network>(
          make_network_config(env, cfg.fc1_width, cfg.fc2_width, 0, env.channels))),
      memory_(static_cast<std::size_t>(cfg.memory_c)),
      rng_(seed ^ 0x3c6ef372fe94f82bULL) {
  cfg_.validate();
  net_->initialize(seed);
}

Eigen::VectorXd PredictorOnlyAgent::predict_cg(const WaterfallPtr& state) {
  check_state(state, net_->config());
  return net_->infer(*encoder_.encode(state)).cg.col(0);
}

int PredictorOnlyAgent::act(const WaterfallPtr& state, std::int64_t) {
  return argmin(predict_cg(state));
}

StepStats PredictorOnlyAgent::observe(const WaterfallPtr& state, int, const HopOutcome& outcome,
                                      std::int64_t) {
  memory_.push({encoder_.encode(state), cg_label(outcome, cfg_.cg_label)});
  StepStats stats;
  if (memory_.size() <= static_cast<std::size_t>(cfg_.batch_c)) return stats;
  const auto idx = memory_.sample_indices(static_cast<std::size_t>(cfg_.batch_c), rng_);
  std::vector<InputPtr> states;
  const Eigen::MatrixXd labels = gather_labels(memory_, idx, states);
  const auto out = net_->forward(gather_inputs(states));
  const auto loss = nn::rmse_loss<double>(out.cg, labels);
  net_->backward({}, loss.grad);
  net_->clear_cache();
  nn::sgd_step(net_->params(), cfg_.alpha_c);
  stats.trained = true;
  stats.loss_c = loss.loss;
  return stats;
}

JointAgent::JointAgent(const EnvConfig& env, double noise_floor_db, const JointAgentConfig& cfg,
                       std::uint64_t seed)
    : cfg_(cfg),
      encoder_(noise_floor_db),
      nets_(make_network_config(env, cfg.fc1_width, cfg.fc2_width, env.channels, env.channels),
            seed),
      memory_q_(static_cast<std::size_t>(cfg.memory_q)),
      memory_c_(static_cast<std::size_t>(cfg.memory_c)),
      rng_(seed ^ 0x3c6ef372fe94f82bULL),
      loss_estimate_(cfg.loss_init) {
  cfg_.validate();
}

Eigen::VectorXd JointAgent::q_values(const WaterfallPtr& state) {
  check_state(state, nets_.online().config());
  return nets_.online().infer(*encoder_.encode(state)).q.col(0);
}

Eigen::VectorXd JointAgent::predict_cg(const WaterfallPtr& state) {
  check_state(state, nets_.online().config());
  return nets_.online().infer(*encoder_.encode(state)).cg.col(0);
}

int JointAgent::act(const WaterfallPtr& state, std::int64_t) {
  // The draw happens on both branches so the gate does not shift the stream.
  const int random_action =
      std::uniform_int_distribution<int>(0, nets_.online().config().q_outputs - 1)(rng_);
  if (exploring()) return random_action;
  check_state(state, nets_.online().config());
  const auto out = nets_.online().infer(*encoder_.encode(state));
  return joint_decide(out.q.col(0), out.cg.col(0));
}

void JointAgent::remember(const WaterfallPtr& state, int action, const HopOutcome& outcome) {
  const InputPtr s = encoder_.encode(state);
  memory_q_.push({s, action, outcome.user_reward_db + cfg_.reward_offset_db,
                  encoder_.encode(outcome.next_state)});
  memory_c_.push({s, cg_label(outcome, cfg_.cg_label)});
}

bool JointAgent::ready() const {
  return memory_q_.size() > static_cast<std::size_t>(cfg_.batch_q) &&
         memory_c_.size() > static_cast<std::size_t>(cfg_.batch_c);
}

StepStats JointAgent::train_step(const TrainOptions& options) {
  const auto idx_q = memory_q_.sample_indices(static_cast<std::size_t>(cfg_.batch_q), rng_);
  const auto idx_c = memory_c_.sample_indices(static_cast<std::size_t>(cfg_.batch_c), rng_);
  auto& net = nets_.online();

  // Coarse-spectrum term.
  std::vector<InputPtr> c_states;
  const Eigen::MatrixXd labels = gather_labels(memory_c_, idx_c, c_states);
  const auto out_c = net.forward(gather_inputs(c_states));
  const auto loss_c = nn::rmse_loss<double>(out_c.cg, labels);
  net.backward({}, loss_c.grad);

  StepStats stats;
  stats.trained = true;
  stats.loss_c = loss_c.loss;
  stats.lambda = options.lambda ? *options.lambda
                                : aggregated_loss(0.0, loss_c.loss, cfg_.lambda_max).lambda;

  // Q term, scaled by lambda; gradients accumulate on top of the first pass.
  if (options.q_pass) {
    const std::vector<double> eta = nets_.td_targets(memory_q_, idx_q, cfg_.gamma);
    std::vector<InputPtr> q_states;
    std::vector<int> actions;
    for (std::size_t i : idx_q) {
      q_states.push_back(memory_q_.at(i).state);
      actions.push_back(memory_q_.at(i).action);
    }
    const auto out_q = net.forward(gather_inputs(q_states));
    const auto loss_q = nn::dqn_loss<double>(out_q.q, actions, eta);
    net.backward(stats.lambda * loss_q.grad, {});
    stats.loss_q = loss_q.loss;
  }
  net.clear_cache();
  nn::sgd_step<double>(net.params(), joint_learning_rates(cfg_));
  loss_estimate_ = loss_c.loss;
  return stats;
}

StepStats JointAgent::observe(const WaterfallPtr& state, int action, const HopOutcome& outcome,
                              std::int64_t hops_completed) {
  remember(state, action, outcome);
  StepStats stats;
  if (ready()) stats = train_step({});
  if (hops_completed % cfg_.target_sync_hops == 0) nets_.sync();
  return stats;
}

void JointAgent::save(const std::string& path) const {
  auto tensors = nn::collect_values(nets_.online().params(), "online/");
  auto target = nn::collect_values(nets_.target().params(), "target/");
  tensors.insert(tensors.end(), target.begin(), target.end());
  nn::Tensor<double> loss({1});
  loss.data()[0] = loss_estimate_;
  tensors.push_back({"state/loss_estimate", loss});
  nn::save_checkpoint(path, tensors);
}

void JointAgent::load(const std::string& path) {
  const auto tensors = nn::load_checkpoint(path);
  nn::restore_values(nets_.online().params(), tensors, "online/");
  nn::restore_values(nets_.mutable_target().params(), tensors, "target/");
  for (const auto& t : tensors) {
    if (t.name == "state/loss_estimate") loss_estimate_ = t.tensor.data()[0];
  }
}

}  // namespace fastaj
