// One PASS/FAIL line per acceptance criterion. Long experiment runs are
// cached under --runs; a cached metrics file is reused only when its manifest
// holds exactly the resolved config that would be run now.

#include "fastaj/agents/agents.hpp"
#include "fastaj/harness/analysis.hpp"
#include "fastaj/harness/experiment.hpp"
#include "fastaj/harness/runner.hpp"
#include "fastaj/nn/gradcheck.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace fastaj;

namespace {

// Tolerances and thresholds.
constexpr int kGradSeeds = 20;
constexpr double kGradEps = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr double kOracleTol = 0.02;
constexpr std::int64_t kOracleHops = 10000;
constexpr std::int64_t kOracleSamples = 1000000;
constexpr double kTarget = 0.9;
constexpr int kSustain = 20;
constexpr int kMinTrialsConverged = 4;
constexpr double kMaxEpisodeRatio = 0.5;
constexpr double kMinAdvantage = 0.05;
constexpr int kConvergedFirst = 201;
constexpr int kConvergedLast = 300;
constexpr double kFrozenJammerFloor = 0.9;
constexpr std::size_t kCapacityQ = 1000;
constexpr std::size_t kCapacityC = 256;
constexpr int kSyncHops = 1000;
constexpr std::int64_t kSyncRunHops = 2100;

struct Options {
  std::string configs;
  std::string runs;
  std::set<int> only;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class RunCache {
 public:
  explicit RunCache(const Options& o) : configs_(o.configs), runs_(o.runs) {
    fs::create_directories(runs_);
  }

  // Per-trial throughput series of the named experiment.
  const LoadedMetrics& get(const std::string& name) {
    if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
    std::ifstream in(fs::path(configs_) / (name + ".json"));
    if (!in) throw ConfigError("missing acceptance config " + name);
    nlohmann::json j = nlohmann::json::parse(in);
    const std::string out = (fs::path(runs_) / (name + ".csv")).string();
    j["output_path"] = out;
    const ExperimentConfig cfg = parse_experiment_config(j);
    if (!cached(cfg, out)) {
      std::fprintf(stderr, "running %s (%d trials x %d episodes)\n", name.c_str(), cfg.trials,
                   cfg.episodes);
      write_metrics(run_experiment(cfg), out);
    }
    return loaded_.emplace(name, load_metrics(out)).first->second;
  }

 private:
  static bool cached(const ExperimentConfig& cfg, const std::string& out) {
    if (!fs::exists(out) || !fs::exists(manifest_path(out))) return false;
    try {
      const auto manifest = nlohmann::json::parse(slurp(manifest_path(out)));
      return manifest.at("schema_version") == kMetricsSchemaVersion &&
             manifest.at("config") == to_json(cfg);
    } catch (const std::exception&) {
      return false;
    }
  }

  std::string configs_;
  std::string runs_;
  std::map<std::string, LoadedMetrics> loaded_;
};

double converged(const LoadedMetrics& m) {
  double sum = 0.0;
  for (const auto& t : m.throughput) sum += mean_throughput(t, kConvergedFirst, kConvergedLast);
  return sum / static_cast<double>(m.throughput.size());
}

RunSummary summary(const LoadedMetrics& m) {
  return summarize(m.config.at("agent").at("kind").get<std::string>(), m.throughput,
                   m.config.at("episodes").get<int>(), kTarget);
}

std::string per_trial(const RunSummary& s) {
  std::string out;
  for (const auto& e : s.episodes_to_target) out += (out.empty() ? "" : " ") + (e ? std::to_string(*e) : "never");
  return out;
}

Verdict gradient_fidelity(const Options&) {
  Verdict v{true, ""};
  for (const auto& r : nn::gradcheck_suite(kGradSeeds, kGradEps)) {
    const bool ok = r.max_rel_error < kGradTol && r.seeds >= kGradSeeds;
    v.pass = v.pass && ok;
    v.detail += fmt("%s%s %.1e", v.detail.empty() ? "" : ", ", r.component.c_str(), r.max_rel_error);
  }
  v.detail = fmt("max rel error < %.0e over %d seeds: ", kGradTol, kGradSeeds) + v.detail;
  return v;
}

Verdict oracle_equivalence(const Options&) {
  ExperimentConfig cfg = parse_experiment_config(
      {{"agent", {{"kind", "random_fh"}}}, {"jammers", {{{"type", "sweep"}, {"sweep_rate", 500e6}}}},
       {"trials", 1}, {"episodes", kOracleHops / 100}, {"hops_per_episode", 100}});
  const auto result = run_experiment(cfg);
  double acks = 0.0;
  for (const auto& e : result.trials[0].episodes) acks += e.normalized_throughput * cfg.hops_per_episode;
  const double simulated = acks / static_cast<double>(kOracleHops);
  const std::vector<FixedJammerConfig> fixed{std::get<FixedJammerConfig>(cfg.jammers[0])};
  const auto oracle = random_fh_oracle(cfg.env, fixed, kOracleSamples, 99);
  const double gap = std::abs(simulated - oracle.monte_carlo);
  return {gap <= kOracleTol,
          fmt("simulated %.4f over %lld hops, oracle %.4f (exact %.4f), |diff| %.4f <= %.2f", simulated,
              static_cast<long long>(kOracleHops), oracle.monte_carlo, oracle.exact, gap, kOracleTol)};
}

Verdict fixed_convergence(RunCache& runs) {
  Verdict v{true, ""};
  for (const char* name : {"joint_sweep", "joint_comb"}) {
    const auto& m = runs.get(name);
    int ok = 0;
    std::string starts;
    for (const auto& t : m.throughput) {
      const auto s = first_sustained(t, kTarget, kSustain);
      ok += s ? 1 : 0;
      starts += (starts.empty() ? "" : " ") + (s ? std::to_string(*s) : "never");
    }
    v.pass = v.pass && ok >= kMinTrialsConverged && m.throughput.size() == 5;
    v.detail += fmt("%s%s %d/5 sustain %d episodes >= %.2f (start: %s)", v.detail.empty() ? "" : "; ",
                    name, ok, kSustain, kTarget, starts.c_str());
  }
  return v;
}

Verdict acceleration(RunCache& runs) {
  const auto joint = summary(runs.get("joint_sweep"));
  const auto dqn = summary(runs.get("dqn_sweep"));
  const auto r = compare_convergence(joint, dqn);
  return {r.ratio <= kMaxEpisodeRatio,
          fmt("episodes to %.2f: joint %.1f [%s], dqn %.1f [%s], ratio %.3f <= %.2f", kTarget,
              joint.mean_episodes_to_target, per_trial(joint).c_str(), dqn.mean_episodes_to_target,
              per_trial(dqn).c_str(), r.ratio, kMaxEpisodeRatio)};
}

Verdict jammer_advantage(RunCache& runs) {
  const double joint = converged(runs.get("joint_drl10"));
  const double dqn = converged(runs.get("dqn_drl10"));
  return {joint - dqn >= kMinAdvantage,
          fmt("throughput over episodes %d-%d: joint %.4f, dqn %.4f, gap %.4f >= %.2f",
              kConvergedFirst, kConvergedLast, joint, dqn, joint - dqn, kMinAdvantage)};
}

Verdict update_step_order(RunCache& runs) {
  const double s1 = converged(runs.get("joint_drl1"));
  const double s10 = converged(runs.get("joint_drl10"));
  const double sinf = converged(runs.get("joint_drlinf"));
  return {s1 <= s10 && s10 <= sinf && sinf >= kFrozenJammerFloor,
          fmt("converged throughput step 1 %.4f <= step 10 %.4f <= infinity %.4f, infinity >= %.2f", s1,
              s10, sinf, kFrozenJammerFloor)};
}

Verdict ablation(RunCache& runs) {
  const auto& jm = runs.get("joint_drl10");
  const auto& pm = runs.get("predictor_drl10");
  const auto& dm = runs.get("dqn_drl10");
  const double jt = converged(jm), pt = converged(pm);
  const auto js = summary(jm), ps = summary(pm), ds = summary(dm);
  const bool ok = jt > pt && js.mean_episodes_to_target < ps.mean_episodes_to_target &&
                  ps.mean_episodes_to_target < ds.mean_episodes_to_target;
  return {ok, fmt("converged joint %.4f > predictor %.4f; episodes to %.2f joint %.1f [%s] < predictor "
                  "%.1f [%s] < dqn %.1f [%s]",
                  jt, pt, kTarget, js.mean_episodes_to_target, per_trial(js).c_str(),
                  ps.mean_episodes_to_target, per_trial(ps).c_str(), ds.mean_episodes_to_target,
                  per_trial(ds).c_str())};
}

Verdict determinism(const Options& o) {
  std::ifstream in(fs::path(o.configs) / "determinism.json");
  nlohmann::json j = nlohmann::json::parse(in);
  const fs::path dir = fs::path(o.runs) / "determinism";
  fs::create_directories(dir);
  std::string bytes[2];
  for (int i = 0; i < 2; ++i) {
    j["output_path"] = (dir / fmt("run%d.csv", i)).string();
    const auto cfg = parse_experiment_config(j);
    write_metrics(run_experiment(cfg), cfg.output_path);
    bytes[i] = slurp(cfg.output_path);
  }
  return {bytes[0] == bytes[1] && !bytes[0].empty(),
          fmt("two executions, %zu metric bytes each, %s", bytes[0].size(),
              bytes[0] == bytes[1] ? "identical" : "different")};
}

Verdict fifo_and_sync(const Options&) {
  std::mt19937_64 rng(2024);
  bool fifo = true;
  for (std::size_t capacity : {kCapacityQ, kCapacityC}) {
    for (int round = 0; round < 20; ++round) {
      ReplayMemory<std::uint64_t> m(capacity);
      const std::size_t pushes = 1 + rng() % (4 * capacity);
      for (std::size_t i = 0; i < pushes; ++i) m.push(i);
      const std::size_t held = std::min(pushes, capacity);
      fifo = fifo && m.size() == held;
      for (std::size_t i = 0; i < held; ++i) fifo = fifo && m.at(i) == pushes - held + i;
    }
  }

  // Paper hyper-parameters at desk resolution.
  const EnvConfig env = EnvConfig::desk_scale();
  Environment e(env);
  JointAgentConfig cfg;
  JointAgent agent(env, e.noise_floor_db(), cfg, 11);
  const bool paper_settings = cfg.target_sync_hops == kSyncHops && cfg.memory_q == static_cast<int>(kCapacityQ) &&
                              cfg.memory_c == static_cast<int>(kCapacityC);
  Network last(agent.target().config());
  last.params().copy_values_from(agent.target().params());
  std::vector<std::int64_t> changes;
  bool snapshot_ok = true;
  for (std::int64_t hop = 0; hop < kSyncRunHops; ++hop) {
    const auto state = e.state();
    const int a = agent.act(state, hop);
    const auto out = e.step_hop(a, {});
    agent.observe(state, a, out, hop + 1);
    if (!last.params().values_equal(agent.target().params())) {
      changes.push_back(hop + 1);
      snapshot_ok = snapshot_ok && agent.target().params().values_equal(agent.network().params());
      last.params().copy_values_from(agent.target().params());
    }
  }
  const bool sync = changes == std::vector<std::int64_t>{1000, 2000} && snapshot_ok;
  std::string hops;
  for (auto h : changes) hops += (hops.empty() ? "" : " ") + std::to_string(h);
  return {fifo && sync && paper_settings,
          fmt("FIFO at capacities %zu/%zu %s; target changed after hops [%s] of %lld, equal to online at "
              "each change: %s",
              kCapacityQ, kCapacityC, fifo ? "ok" : "broken", hops.c_str(),
              static_cast<long long>(kSyncRunHops), snapshot_ok ? "yes" : "no")};
}

Verdict architecture(const Options&) {
  const EnvConfig env = EnvConfig::paper_scale();
  Network net(make_network_config(env, 512, 256, env.channels, env.channels));
  const auto trace = net.shape_trace(Eigen::MatrixXd::Zero(net.input_features(), 1));
  const std::vector<std::pair<std::string, nn::Shape>> expected{
      {"input", {200, 200}}, {"extractor.conv1", {16, 100, 100}}, {"extractor.conv2", {32, 50, 50}},
      {"q.fc1", {512}},      {"cg.fc1", {512}},                   {"concat", {1024}},
      {"q.fc2", {256}},      {"q.fc3", {10}},                     {"cg.fc2", {256}},
      {"cg.fc3", {10}}};
  bool ok = trace.size() == expected.size();
  std::string chain;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (ok) ok = trace[i].stage == expected[i].first && trace[i].shape == expected[i].second;
    chain += (chain.empty() ? "" : " -> ") + nn::shape_string(trace[i].shape);
  }
  return {ok, chain + fmt(" (%lld parameters)", static_cast<long long>(net.params().parameter_count()))};
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.configs = FASTAJ_ACCEPTANCE_CONFIGS;
  o.runs = "acceptance_runs";
  std::vector<int> only;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--configs", o.configs, "directory of experiment configs");
  app.add_option("--runs", o.runs, "directory for cached experiment runs");
  app.add_option("--only", only, "criteria to evaluate (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  o.only = {only.begin(), only.end()};

  RunCache runs(o);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient fidelity", [&] { return gradient_fidelity(o); }},
      {"environment oracle equivalence", [&] { return oracle_equivalence(o); }},
      {"fixed-jammer convergence", [&] { return fixed_convergence(runs); }},
      {"convergence acceleration", [&] { return acceleration(runs); }},
      {"intelligent-jammer advantage", [&] { return jammer_advantage(runs); }},
      {"update-step monotonicity", [&] { return update_step_order(runs); }},
      {"ablation ordering", [&] { return ablation(runs); }},
      {"determinism", [&] { return determinism(o); }},
      {"FIFO and target-network invariants", [&] { return fifo_and_sync(o); }},
      {"architecture shape check", [&] { return architecture(o); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!o.only.empty() && !o.only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("criterion %2d %-36s %s  %s\n", id, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
