#pragma once

#include "fastaj/agents/agents.hpp"
#include "fastaj/env/config.hpp"
#include "fastaj/jammers/drl_jammer.hpp"
#include "fastaj/jammers/fixed_jammer.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fastaj {

enum class Scale { Desk, Paper };
enum class AgentKind { RandomFh, Dqn, PredictorOnly, Joint };

Scale parse_scale(std::string_view name);
std::string_view to_string(Scale scale);
AgentKind parse_agent_kind(std::string_view name);
std::string_view to_string(AgentKind kind);

using JammerConfig = std::variant<FixedJammerConfig, IntelligentJammerConfig>;

struct ExperimentConfig {
  Scale scale = Scale::Desk;
  EnvConfig env;
  std::vector<JammerConfig> jammers;
  AgentKind agent = AgentKind::Joint;
  JointAgentConfig agent_params;
  std::size_t fh_sequence_length = 10000;  // random_fh only
  int episodes = 300;
  int hops_per_episode = 100;
  int trials = 5;
  std::uint64_t base_seed = 1;
  double target_throughput = 0.9;
  bool telemetry = false;  // per-hop rows in <output>.telemetry.csv
  std::string output_path = "metrics.csv";

  void validate() const;
  std::int64_t total_hops() const { return std::int64_t{episodes} * hops_per_episode; }
};

// Fields absent from the JSON keep their defaults; env fields given
// explicitly override the scale preset. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
// Fully resolved config, suitable for the run manifest.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace fastaj
