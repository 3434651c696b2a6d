#pragma once

#include "fastaj/harness/runner.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fastaj {

struct RunSummary {
  std::string agent;
  int episodes = 0;
  std::vector<std::optional<int>> episodes_to_target;  // per trial
  // Trials that never reach the target count as episodes + 1.
  double mean_episodes_to_target = 0.0;
  int censored_trials = 0;
};

struct ConvergenceReport {
  RunSummary a;
  RunSummary b;
  double ratio = 0.0;  // mean A / mean B
};

// Metrics file contents: resolved config from the manifest plus per-trial
// throughput series.
struct LoadedMetrics {
  nlohmann::json config;
  std::vector<std::vector<double>> throughput;
};

LoadedMetrics load_metrics(const std::string& metrics_path);

RunSummary summarize(const std::string& agent, std::span<const std::vector<double>> throughput,
                     int episodes, double target);
RunSummary summarize(const ExperimentResult& result);

// Throws ConfigError when the two runs differ in environment, jammers,
// trial count, episode count, episode length or target.
ConvergenceReport compare_convergence(const std::string& metrics_a, const std::string& metrics_b);
ConvergenceReport compare_convergence(const RunSummary& a, const RunSummary& b);

std::string format_report(const ConvergenceReport& report);

// Throughput of a uniformly random channel choice per hop against fixed
// sweep / comb / switch-comb jammers under deterministic gains, computed
// without the environment code: min-SINR ACK rule evaluated slot by slot.
struct OracleResult {
  double monte_carlo = 0.0;
  double exact = 0.0;  // full enumeration of one schedule period
  std::int64_t samples = 0;
  std::int64_t period_hops = 0;
};

OracleResult random_fh_oracle(const EnvConfig& env, std::span<const FixedJammerConfig> jammers,
                              std::int64_t samples, std::uint64_t seed);

}  // namespace fastaj
