#include "fastaj/harness/analysis.hpp"
#include "fastaj/harness/experiment.hpp"
#include "fastaj/harness/runner.hpp"
#include "fastaj/nn/gradcheck.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> scale;
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "base seed override");
  cmd->add_option("--out", o.out, "metrics output path override");
  cmd->add_option("--scale", o.scale, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--trials", o.trials, "trial count override")->check(CLI::PositiveNumber);
}

fastaj::ExperimentConfig resolve(const CommonOptions& o) {
  std::ifstream in(o.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw fastaj::ConfigError("config " + o.config + " is not valid JSON: " + e.what());
  }
  if (o.seed) j["base_seed"] = *o.seed;
  if (o.out) j["output_path"] = *o.out;
  if (o.scale) j["scale"] = *o.scale;
  if (o.trials) j["trials"] = *o.trials;
  return fastaj::parse_experiment_config(j);
}

int cmd_run(const CommonOptions& o, int jobs) {
  const auto cfg = resolve(o);
  const auto result = fastaj::run_experiment(cfg, jobs);
  fastaj::write_metrics(result, cfg.output_path);
  const auto summary = fastaj::summarize(result);
  std::printf("%s: %d trial(s) x %d episodes -> %s\n", summary.agent.c_str(), cfg.trials,
              cfg.episodes, cfg.output_path.c_str());
  for (const auto& t : result.trials) {
    const auto series = fastaj::throughput_series(t);
    const auto e = fastaj::episodes_to_target(series, cfg.target_throughput);
    std::printf("  trial %d (seed %llu): final throughput %.3f, episodes to %.2f: %s\n", t.trial,
                static_cast<unsigned long long>(t.seed), series.back(), cfg.target_throughput,
                e ? std::to_string(*e).c_str() : "never");
  }
  return 0;
}

int cmd_gradcheck(int seeds, double tolerance) {
  bool ok = true;
  for (const auto& r : fastaj::nn::gradcheck_suite(seeds)) {
    const bool pass = r.max_rel_error < tolerance;
    ok = ok && pass;
    std::printf("%-18s seeds=%d entries=%lld redraws=%d max_rel_error=%.3e %s\n",
                r.component.c_str(), r.seeds, static_cast<long long>(r.entries), r.redraws,
                r.max_rel_error, pass ? "PASS" : "FAIL");
  }
  return ok ? 0 : 1;
}

int cmd_oracle(const CommonOptions& o, std::int64_t samples) {
  const auto cfg = resolve(o);
  std::vector<fastaj::FixedJammerConfig> fixed;
  for (const auto& j : cfg.jammers) {
    const auto* f = std::get_if<fastaj::FixedJammerConfig>(&j);
    if (!f) throw fastaj::ConfigError("oracle does not model intelligent jammers");
    fixed.push_back(*f);
  }
  const auto r = fastaj::random_fh_oracle(cfg.env, fixed, samples, cfg.base_seed);
  std::printf("random channel access vs %zu jammer(s): period %lld hops\n", fixed.size(),
              static_cast<long long>(r.period_hops));
  std::printf("  exact enumeration  %.6f\n", r.exact);
  std::printf("  monte carlo (n=%lld) %.6f\n", static_cast<long long>(r.samples), r.monte_carlo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anti-jamming channel access simulator and learners"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "execute an experiment config");
  add_common(run, run_opts);
  run->add_option("--jobs", jobs, "trials to run concurrently")->check(CLI::PositiveNumber);

  std::string metrics_a, metrics_b;
  auto* compare = app.add_subcommand("compare", "convergence report for two metrics files");
  compare->add_option("metrics_a", metrics_a)->required()->check(CLI::ExistingFile);
  compare->add_option("metrics_b", metrics_b)->required()->check(CLI::ExistingFile);

  int seeds = 20;
  double tolerance = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--trials", seeds, "random seeds per component")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tolerance", tolerance, "max relative error");

  CommonOptions oracle_opts;
  std::int64_t samples = 100000;
  auto* oracle = app.add_subcommand("oracle", "Monte-Carlo throughput of random channel access");
  add_common(oracle, oracle_opts);
  oracle->add_option("--samples", samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, jobs);
    if (*compare) {
      std::cout << fastaj::format_report(fastaj::compare_convergence(metrics_a, metrics_b));
      return 0;
    }
    if (*gradcheck) return cmd_gradcheck(seeds, tolerance);
    if (*oracle) return cmd_oracle(oracle_opts, samples);
  } catch (const fastaj::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
