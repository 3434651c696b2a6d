#pragma once

#include "fastaj/harness/experiment.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fastaj {

inline constexpr int kMetricsSchemaVersion = 1;

struct EpisodeMetrics {
  double normalized_throughput = 0.0;
  double mean_reward_db = 0.0;
  double mean_loss_q = kNaN;  // NaN when no training step ran
  double mean_loss_c = kNaN;
};

struct HopTelemetry {
  std::int64_t hop;
  int action;
  double reward_db;
  bool ack;
  StepStats stats;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeMetrics> episodes;
  std::vector<HopTelemetry> telemetry;  // empty unless requested
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
};

// ACK count / hop count.
double normalized_throughput(std::span<const bool> acks);

// 1-based index of the first episode at or above target.
std::optional<int> episodes_to_target(std::span<const double> throughput, double target);
// 1-based index of the first episode that starts a run of `length`
// consecutive episodes at or above target.
std::optional<int> first_sustained(std::span<const double> throughput, double target, int length);
// Mean over the 1-based inclusive episode range [first, last].
double mean_throughput(std::span<const double> throughput, int first, int last);

std::vector<double> throughput_series(const TrialResult& trial);

// Per-trial component seeds derive from base_seed + trial index.
std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial);

TrialResult run_trial(const ExperimentConfig& cfg, int trial);
// jobs > 1 runs trials on worker threads; output is identical either way.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// Writes the metrics CSV, <path>.manifest.json and, when telemetry is on,
// <path>.telemetry.csv.
void write_metrics(const ExperimentResult& result, const std::string& path);

std::string manifest_path(const std::string& metrics_path);

}  // namespace fastaj
