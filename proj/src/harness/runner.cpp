#include "fastaj/harness/runner.hpp"

#include "fastaj/env/hash.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

namespace fastaj {
namespace {

enum SeedTag : std::uint64_t { kEnvSeed = 1, kAgentSeed = 2, kJammerSeed = 16 };

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return mix64(mix64(seed) ^ tag); }

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg, const Environment& env,
                                  std::uint64_t seed) {
  const auto& e = env.config();
  switch (cfg.agent) {
    case AgentKind::RandomFh:
      return std::make_unique<RandomFhAgent>(e.channels, cfg.fh_sequence_length, seed);
    case AgentKind::Dqn:
      return std::make_unique<DqnAgent>(e, env.noise_floor_db(), cfg.agent_params, seed);
    case AgentKind::PredictorOnly:
      return std::make_unique<PredictorOnlyAgent>(e, env.noise_floor_db(), cfg.agent_params, seed);
    case AgentKind::Joint:
      return std::make_unique<JointAgent>(e, env.noise_floor_db(), cfg.agent_params, seed);
  }
  throw ConfigError("unknown agent kind");
}

// Running sums for one episode.
struct EpisodeAccumulator {
  int hops = 0;
  int acks = 0;
  double reward = 0.0;
  double loss_q = 0.0;
  int n_q = 0;
  double loss_c = 0.0;
  int n_c = 0;

  void add(const HopOutcome& o, const StepStats& s) {
    ++hops;
    acks += o.ack ? 1 : 0;
    reward += o.user_reward_db;
    if (!std::isnan(s.loss_q)) {
      loss_q += s.loss_q;
      ++n_q;
    }
    if (!std::isnan(s.loss_c)) {
      loss_c += s.loss_c;
      ++n_c;
    }
  }

  EpisodeMetrics finish() const {
    EpisodeMetrics m;
    m.normalized_throughput = static_cast<double>(acks) / hops;
    m.mean_reward_db = reward / hops;
    m.mean_loss_q = n_q ? loss_q / n_q : kNaN;
    m.mean_loss_c = n_c ? loss_c / n_c : kNaN;
    return m;
  }
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string target_cell(const std::optional<int>& e) { return e ? std::to_string(*e) : "none"; }

}  // namespace

double normalized_throughput(std::span<const bool> acks) {
  if (acks.empty()) return 0.0;
  const auto n = std::count(acks.begin(), acks.end(), true);
  return static_cast<double>(n) / static_cast<double>(acks.size());
}

std::optional<int> episodes_to_target(std::span<const double> throughput, double target) {
  for (std::size_t i = 0; i < throughput.size(); ++i) {
    if (throughput[i] >= target) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

std::optional<int> first_sustained(std::span<const double> throughput, double target, int length) {
  int run = 0;
  for (std::size_t i = 0; i < throughput.size(); ++i) {
    run = throughput[i] >= target ? run + 1 : 0;
    if (run == length) return static_cast<int>(i + 2 - length);
  }
  return std::nullopt;
}

double mean_throughput(std::span<const double> throughput, int first, int last) {
  first = std::max(first, 1);
  last = std::min<int>(last, static_cast<int>(throughput.size()));
  if (last < first) return kNaN;
  double sum = 0.0;
  for (int e = first; e <= last; ++e) sum += throughput[static_cast<std::size_t>(e - 1)];
  return sum / (last - first + 1);
}

std::vector<double> throughput_series(const TrialResult& trial) {
  std::vector<double> out;
  out.reserve(trial.episodes.size());
  for (const auto& e : trial.episodes) out.push_back(e.normalized_throughput);
  return out;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial) {
  return cfg.base_seed + static_cast<std::uint64_t>(trial);
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed(cfg, trial);

  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = derive(result.seed, kEnvSeed);
  Environment env(env_cfg);
  auto agent = make_agent(cfg, env, derive(result.seed, kAgentSeed));

  std::vector<FixedJammer> fixed;
  std::vector<IntelligentJammer> smart;
  for (std::size_t i = 0; i < cfg.jammers.size(); ++i) {
    const std::uint64_t seed = derive(result.seed, kJammerSeed + i);
    if (const auto* f = std::get_if<FixedJammerConfig>(&cfg.jammers[i])) {
      FixedJammerConfig c = *f;
      c.seed = seed;
      fixed.emplace_back(c, env_cfg);
    } else {
      IntelligentJammerConfig c = std::get<IntelligentJammerConfig>(cfg.jammers[i]);
      c.seed = seed;
      smart.emplace_back(c, env_cfg, env.noise_floor_db());
    }
  }

  std::vector<JammerHopPlan> plans;
  std::vector<int> smart_actions(smart.size());
  result.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  if (cfg.telemetry) result.telemetry.reserve(static_cast<std::size_t>(cfg.total_hops()));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    EpisodeAccumulator acc;
    for (int h = 0; h < cfg.hops_per_episode; ++h) {
      const WaterfallPtr state = env.state();
      const std::int64_t hop = env.hop();
      const int action = agent->act(state, hop);
      plans.clear();
      for (const auto& j : fixed) plans.push_back(j.plan_hop(hop));
      for (std::size_t i = 0; i < smart.size(); ++i) {
        smart_actions[i] = smart[i].act(state);
        plans.push_back(smart[i].plan(smart_actions[i]));
      }
      const HopOutcome outcome = env.step_hop(action, plans);
      const std::int64_t completed = hop + 1;
      const StepStats stats = agent->observe(state, action, outcome, completed);
      for (auto& j : fixed) j.record_user_channel(action);
      for (std::size_t i = 0; i < smart.size(); ++i) {
        smart[i].observe(state, smart_actions[i], outcome, completed);
      }
      acc.add(outcome, stats);
      if (cfg.telemetry) {
        result.telemetry.push_back({hop, action, outcome.user_reward_db, outcome.ack, stats});
      }
    }
    result.episodes.push_back(acc.finish());
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  ExperimentResult result{cfg, std::vector<TrialResult>(static_cast<std::size_t>(cfg.trials))};
  jobs = std::clamp(jobs, 1, cfg.trials);
  if (jobs == 1) {
    for (int t = 0; t < cfg.trials; ++t) result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, t);
    return result;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int t = next++; t < cfg.trials; t = next++) {
        try {
          result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
  return result;
}

std::string manifest_path(const std::string& metrics_path) {
  return metrics_path + ".manifest.json";
}

void write_metrics(const ExperimentResult& result, const std::string& path) {
  const auto& cfg = result.config;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write metrics to " + path);
  out << "row_type,trial,episode,normalized_throughput,mean_reward_db,mean_loss_q,mean_loss_c,"
         "episodes_to_target\n";
  for (const auto& t : result.trials) {
    const auto series = throughput_series(t);
    const std::string ett = target_cell(episodes_to_target(series, cfg.target_throughput));
    for (std::size_t e = 0; e < t.episodes.size(); ++e) {
      const auto& m = t.episodes[e];
      out << "trial," << t.trial << ',' << e + 1 << ',' << num(m.normalized_throughput) << ','
          << num(m.mean_reward_db) << ',' << num(m.mean_loss_q) << ',' << num(m.mean_loss_c) << ','
          << ett << '\n';
    }
  }
  // Aggregate rows: per-episode means over trials. NaN losses are skipped.
  const auto n_trials = static_cast<double>(result.trials.size());
  for (int e = 0; e < cfg.episodes; ++e) {
    double thr = 0.0, rew = 0.0, lq = 0.0, lc = 0.0;
    int nq = 0, nc = 0;
    for (const auto& t : result.trials) {
      const auto& m = t.episodes[static_cast<std::size_t>(e)];
      thr += m.normalized_throughput;
      rew += m.mean_reward_db;
      if (!std::isnan(m.mean_loss_q)) {
        lq += m.mean_loss_q;
        ++nq;
      }
      if (!std::isnan(m.mean_loss_c)) {
        lc += m.mean_loss_c;
        ++nc;
      }
    }
    out << "mean,all," << e + 1 << ',' << num(thr / n_trials) << ',' << num(rew / n_trials) << ','
        << num(nq ? lq / nq : kNaN) << ',' << num(nc ? lc / nc : kNaN) << ",\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);

  nlohmann::json manifest = {{"schema_version", kMetricsSchemaVersion},
                             {"columns",
                              {"row_type", "trial", "episode", "normalized_throughput",
                               "mean_reward_db", "mean_loss_q", "mean_loss_c",
                               "episodes_to_target"}},
                             {"config", to_json(cfg)},
                             {"trial_seeds", nlohmann::json::array()}};
  for (const auto& t : result.trials) manifest["trial_seeds"].push_back(t.seed);
  std::ofstream mf(manifest_path(path), std::ios::trunc);
  if (!mf) throw std::runtime_error("cannot write " + manifest_path(path));
  mf << manifest.dump(2) << '\n';

  if (cfg.telemetry) {
    std::ofstream tf(path + ".telemetry.csv", std::ios::trunc);
    if (!tf) throw std::runtime_error("cannot write " + path + ".telemetry.csv");
    tf << "trial,hop,action,reward_db,ack,trained,loss_q,loss_c,lambda\n";
    for (const auto& t : result.trials) {
      for (const auto& h : t.telemetry) {
        tf << t.trial << ',' << h.hop << ',' << h.action << ',' << num(h.reward_db) << ','
           << (h.ack ? 1 : 0) << ',' << (h.stats.trained ? 1 : 0) << ',' << num(h.stats.loss_q)
           << ',' << num(h.stats.loss_c) << ',' << num(h.stats.lambda) << '\n';
      }
    }
  }
}

}  // namespace fastaj
