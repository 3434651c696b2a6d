#include "fastaj/harness/analysis.hpp"
#include "fastaj/harness/experiment.hpp"
#include "fastaj/harness/runner.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace fastaj;
using nlohmann::json;

namespace {

std::string temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fastaj_harness_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> rows(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

json small_learning_config(const std::string& kind) {
  return {{"env", {{"freq_bins", 20}, {"history_slots", 12}}},
          {"agent", {{"kind", kind}, {"fc1_width", 16}, {"fc2_width", 8}, {"batch_q", 8}, {"batch_c", 8}}},
          {"jammers",
           {{{"type", "sweep"}},
            {{"type", "intelligent"}, {"fc1_width", 8}, {"fc2_width", 8}, {"batch_size", 8}, {"update_step", 2}}}},
          {"episodes", 4},
          {"hops_per_episode", 25},
          {"trials", 3}};
}

std::vector<FixedJammerConfig> jammers(std::vector<FixedJammerConfig> v) { return v; }

void check_config_error(json j, const std::string& field) {
  INFO(j.dump());
  CHECK_THROWS_WITH_AS(parse_experiment_config(j), doctest::Contains(field.c_str()), ConfigError);
}

}  // namespace

TEST_CASE("config parsing defaults and scale presets") {
  const auto desk = parse_experiment_config(json::object());
  CHECK(desk.scale == Scale::Desk);
  CHECK(desk.env.freq_bins == 40);
  CHECK(desk.env.history_slots == 40);
  CHECK(desk.trials == 5);
  CHECK(desk.episodes == 300);

  const auto paper = parse_experiment_config({{"scale", "paper"}});
  CHECK(paper.env.freq_bins == 200);
  CHECK(paper.env.history_slots == 200);

  const auto cfg = parse_experiment_config(
      {{"jammers", {{{"type", "intelligent"}, {"update_step", "infinity"}}, {{"type", "comb"}, {"comb_channels", {0, 5}}}}}});
  REQUIRE(cfg.jammers.size() == 2);
  const auto& smart = std::get<IntelligentJammerConfig>(cfg.jammers[0]);
  CHECK_FALSE(smart.update_step.has_value());
  CHECK(smart.link == 0);
  const auto& comb = std::get<FixedJammerConfig>(cfg.jammers[1]);
  CHECK(comb.comb_channels == ChannelSet{0, 5});
  CHECK(comb.link == 1);

  // The resolved config round-trips.
  const json resolved = to_json(cfg);
  CHECK(to_json(parse_experiment_config(resolved)) == resolved);
}

TEST_CASE("config errors name the field") {
  check_config_error({{"trials", 0}}, "trials");
  check_config_error({{"episodes", -1}}, "episodes");
  check_config_error({{"scale", "huge"}}, "scale");
  check_config_error({{"bogus", 1}}, "bogus");
  check_config_error({{"env", {{"freq_bins", 45}}}}, "freq_bins");
  check_config_error({{"agent", {{"kind", "oracle"}}}}, "agent.kind");
  check_config_error({{"agent", {{"batch_q", 0}}}}, "batch_q");
  check_config_error({{"jammers", {{{"type", "comb"}, {"comb_channels", {12}}}}}}, "comb_channels");
  check_config_error({{"jammers", {{{"type", "intelligent"}, {"update_step", 0}}}}}, "update_step");
  check_config_error({{"jammers", {{{"type", "intelligent"}, {"update_step", "never"}}}}}, "update_step");
  check_config_error({{"trials", "five"}}, "trials");
}

TEST_CASE("throughput helpers") {
  std::array<bool, 100> alt{};
  for (int i = 0; i < 100; ++i) alt[static_cast<std::size_t>(i)] = i % 2 == 0;
  CHECK(normalized_throughput(std::span<const bool>(alt)) == 0.5);
  std::array<bool, 4> ok{true, true, true, true};
  CHECK(normalized_throughput(std::span<const bool>(ok)) == 1.0);

  const std::vector<double> series{0.5, 0.95, 0.8, 0.9, 0.91, 0.92};
  CHECK(episodes_to_target(series, 0.9) == 2);
  CHECK(first_sustained(series, 0.9, 3) == 4);
  CHECK_FALSE(first_sustained(series, 0.9, 4).has_value());
  CHECK_FALSE(episodes_to_target(series, 0.99).has_value());
  CHECK(mean_throughput(series, 5, 6) == doctest::Approx(0.915));
  CHECK(mean_throughput(series, 5, 600) == doctest::Approx(0.915));
}

TEST_CASE("random FH without jammers: 1500 detail rows, 300 aggregates, all ones") {
  auto cfg = parse_experiment_config({{"agent", {{"kind", "random_fh"}}}, {"trials", 5}, {"episodes", 300}});
  cfg.output_path = temp_file("fh_clean.csv");
  const auto result = run_experiment(cfg);
  write_metrics(result, cfg.output_path);
  const auto r = rows(cfg.output_path);
  REQUIRE(r.size() == 1 + 1500 + 300);
  CHECK(r[0].size() == 8);
  int detail = 0, aggregate = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    CHECK(r[i][3] == "1");
    if (r[i][0] == "trial") {
      ++detail;
      CHECK(r[i][7] == "1");
    } else {
      ++aggregate;
      CHECK(r[i][1] == "all");
    }
  }
  CHECK(detail == 1500);
  CHECK(aggregate == 300);

  const json manifest = json::parse(slurp(manifest_path(cfg.output_path)));
  CHECK(manifest["schema_version"] == kMetricsSchemaVersion);
  CHECK(manifest["trial_seeds"] == json{1, 2, 3, 4, 5});
  CHECK(manifest["columns"].size() == 8);
}

TEST_CASE("identical runs are byte-identical, serial or concurrent") {
  auto cfg = parse_experiment_config(small_learning_config("joint"));
  cfg.telemetry = true;
  const std::string a = temp_file("det_a.csv"), b = temp_file("det_b.csv"), c = temp_file("det_c.csv");
  write_metrics(run_experiment(cfg, 1), a);
  write_metrics(run_experiment(cfg, 1), b);
  write_metrics(run_experiment(cfg, 3), c);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  CHECK(slurp(a + ".telemetry.csv") == slurp(c + ".telemetry.csv"));

  cfg.base_seed = 2;
  const std::string d = temp_file("det_d.csv");
  write_metrics(run_experiment(cfg, 1), d);
  CHECK(slurp(a) != slurp(d));
}

TEST_CASE("aggregate rows are the mean of trial rows") {
  for (const char* kind : {"dqn", "predictor_only"}) {
    auto cfg = parse_experiment_config(small_learning_config(kind));
    const std::string path = temp_file(std::string("agg_") + kind + ".csv");
    write_metrics(run_experiment(cfg), path);
    const auto r = rows(path);
    std::map<int, std::array<double, 4>> sum;
    std::map<int, std::array<int, 4>> count;
    std::map<int, std::array<std::string, 4>> agg;
    for (std::size_t i = 1; i < r.size(); ++i) {
      const int e = std::stoi(r[i][2]);
      for (int k = 0; k < 4; ++k) {
        const std::string& cell = r[i][static_cast<std::size_t>(3 + k)];
        if (r[i][0] == "mean") {
          agg[e][static_cast<std::size_t>(k)] = cell;
        } else if (cell != "nan") {
          sum[e][static_cast<std::size_t>(k)] += std::stod(cell);
          ++count[e][static_cast<std::size_t>(k)];
        }
      }
    }
    for (const auto& [e, cells] : agg) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (count[e][k] == 0) {
          CHECK(cells[k] == "nan");
          continue;
        }
        const double mean = sum[e][k] / count[e][k];
        CHECK(std::abs(std::stod(cells[k]) - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
      }
    }
  }
}

TEST_CASE("compare_convergence") {
  const std::vector<std::vector<double>> a{{0.5, 0.95}}, b{{0.1, 0.2, 0.95}};
  RunSummary sa{"a", 200, {20}, 20.0, 0}, sb{"b", 200, {100}, 100.0, 0};
  CHECK(compare_convergence(sa, sb).ratio == doctest::Approx(0.2));
  CHECK(compare_convergence(sa, sa).ratio == 1.0);

  const auto censored = summarize("x", std::vector<std::vector<double>>{{0.1, 0.2}, {0.95, 0.99}}, 2, 0.9);
  CHECK(censored.censored_trials == 1);
  CHECK(censored.mean_episodes_to_target == doctest::Approx((3 + 1) / 2.0));
  CHECK(format_report(compare_convergence(censored, censored)).find("never reached") != std::string::npos);

  auto cfg = parse_experiment_config({{"agent", {{"kind", "random_fh"}}}, {"jammers", {{{"type", "sweep"}}}}, {"trials", 2}, {"episodes", 20}});
  const std::string p1 = temp_file("cmp1.csv"), p2 = temp_file("cmp2.csv"), p3 = temp_file("cmp3.csv");
  write_metrics(run_experiment(cfg), p1);
  write_metrics(run_experiment(cfg), p2);
  const auto same = compare_convergence(p1, p2);
  CHECK(same.ratio == 1.0);
  cfg.jammers = {FixedJammerConfig{.mode = FixedMode::Comb}};
  write_metrics(run_experiment(cfg), p3);
  CHECK_THROWS_AS(compare_convergence(p1, p3), ConfigError);
}

TEST_CASE("random FH against the sweep matches the oracle") {
  auto cfg = parse_experiment_config({{"agent", {{"kind", "random_fh"}}}, {"jammers", {{{"type", "sweep"}}}}, {"trials", 1}, {"episodes", 100}});
  const auto result = run_experiment(cfg);
  double mean = 0.0;
  for (double t : throughput_series(result.trials[0])) mean += t / 100.0;
  const auto oracle = random_fh_oracle(cfg.env, jammers({std::get<FixedJammerConfig>(cfg.jammers[0])}), 100000, 7);
  CHECK(oracle.period_hops == 4);
  CHECK(oracle.exact == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(std::abs(oracle.monte_carlo - oracle.exact) < 0.01);
  CHECK(std::abs(mean - oracle.monte_carlo) <= 0.02);
}

TEST_CASE("oracle covers combs and rejects unsupported jammers") {
  EnvConfig env;
  FixedJammerConfig comb{.mode = FixedMode::Comb};
  CHECK(random_fh_oracle(env, jammers({comb}), 1000, 1).exact == doctest::Approx(0.7));
  FixedJammerConfig sw{.mode = FixedMode::SwitchComb};
  const auto r = random_fh_oracle(env, jammers({sw, comb}), 1000, 1);
  CHECK(r.period_hops == 100);
  CHECK(r.exact == doctest::Approx(0.55));
  FixedJammerConfig weak{.mode = FixedMode::Comb, .power_dbm = 20.0};
  CHECK(random_fh_oracle(env, jammers({weak}), 1000, 1).exact == 1.0);
  FixedJammerConfig follower{.mode = FixedMode::Follower};
  CHECK_THROWS_AS(random_fh_oracle(env, jammers({follower}), 10, 1), ConfigError);
}
