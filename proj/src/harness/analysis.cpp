#include "fastaj/harness/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace fastaj {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void require_same(const nlohmann::json& a, const nlohmann::json& b, const char* key) {
  if (a.at(key) != b.at(key)) {
    throw ConfigError(std::string("runs are not comparable: '") + key + "' differs");
  }
}

std::int64_t integral_hz(double v, const char* what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-6 * std::max(1.0, std::abs(v)) || r <= 0) {
    throw ConfigError(std::string("oracle needs a positive integral ") + what + " in Hz");
  }
  return static_cast<std::int64_t>(r);
}

// Per-slot jammed channel sets over one period, for the oracle.
class OracleSchedule {
 public:
  OracleSchedule(const EnvConfig& env, std::span<const FixedJammerConfig> jammers)
      : env_(env), jammers_(jammers.begin(), jammers.end()) {
    std::int64_t period = 1;
    for (const auto& j : jammers_) {
      std::int64_t p = 1;
      switch (j.mode) {
        case FixedMode::Sweep: {
          const std::int64_t band = integral_hz(env.bandwidth_hz, "bandwidth");
          const std::int64_t step =
              integral_hz(j.sweep_rate_hz_per_s * env.slot_duration_s, "sweep step per slot");
          const std::int64_t slots = band / std::gcd(band, step);
          p = std::lcm(slots, std::int64_t{env.slots_per_hop}) / env.slots_per_hop;
          break;
        }
        case FixedMode::Comb:
          break;
        case FixedMode::SwitchComb:
          p = 2 * std::int64_t{j.switch_period_hops};
          break;
        default:
          throw ConfigError("oracle supports sweep, comb and switch_comb jammers only");
      }
      period = std::lcm(period, p);
    }
    period_hops_ = period;
  }

  std::int64_t period_hops() const { return period_hops_; }

  // Received jamming power (mW) on `channel` during absolute slot k.
  double jam_mw(int channel, std::int64_t hop, std::int64_t k) const {
    double mw = 0.0;
    for (const auto& j : jammers_) {
      const double p = std::pow(10.0, j.power_dbm / 10.0) * path_gain(env_.jammer_link(j.link));
      bool hit = false;
      switch (j.mode) {
        case FixedMode::Sweep: {
          const std::int64_t band = integral_hz(env_.bandwidth_hz, "bandwidth");
          const std::int64_t step =
              integral_hz(j.sweep_rate_hz_per_s * env_.slot_duration_s, "sweep step per slot");
          const std::int64_t b = integral_hz(env_.channel_bandwidth_hz, "channel bandwidth");
          hit = ((step * k) % band) / b == channel;
          break;
        }
        case FixedMode::Comb:
          for (int c : j.comb_channels) hit = hit || c == channel;
          break;
        case FixedMode::SwitchComb: {
          const auto& set = (hop / j.switch_period_hops) % 2 == 0 ? j.comb_pair_a : j.comb_pair_b;
          for (int c : set) hit = hit || c == channel;
          break;
        }
        default:
          break;
      }
      if (hit) mw += p;
    }
    return mw;
  }

  bool ack(int channel, std::int64_t hop) const {
    const double s = std::pow(10.0, env_.user_power_dbm / 10.0) * path_gain(env_.user_link);
    const double n = std::pow(10.0, env_.noise_dbm / 10.0);
    for (int i = 0; i < env_.slots_per_hop; ++i) {
      const std::int64_t k = hop * env_.slots_per_hop + i;
      const double sinr = 10.0 * std::log10(s / (jam_mw(channel, hop, k) + n));
      if (sinr < env_.sinr_threshold_db) return false;
    }
    return true;
  }

 private:
  static double path_gain(const LinkGain& l) {
    if (l.fading != FadingMode::DeterministicUnit) {
      throw ConfigError("oracle requires deterministic link gains");
    }
    return std::pow(l.distance_m, -l.path_loss_exponent);
  }

  EnvConfig env_;
  std::vector<FixedJammerConfig> jammers_;
  std::int64_t period_hops_ = 1;
};

}  // namespace

LoadedMetrics load_metrics(const std::string& metrics_path) {
  LoadedMetrics out;
  std::ifstream mf(manifest_path(metrics_path));
  if (!mf) throw ConfigError("missing manifest " + manifest_path(metrics_path));
  const auto manifest = nlohmann::json::parse(mf);
  if (manifest.at("schema_version") != kMetricsSchemaVersion) {
    throw ConfigError("unsupported metrics schema in " + metrics_path);
  }
  out.config = manifest.at("config");
  const int trials = out.config.at("trials").get<int>();
  const int episodes = out.config.at("episodes").get<int>();
  out.throughput.assign(static_cast<std::size_t>(trials),
                        std::vector<double>(static_cast<std::size_t>(episodes), kNaN));

  std::ifstream in(metrics_path);
  if (!in) throw ConfigError("cannot read " + metrics_path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("row_type,", 0) != 0) throw ConfigError(metrics_path + " has no header row");
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    if (cells.size() != 8) throw ConfigError("malformed metrics row in " + metrics_path);
    if (cells[0] != "trial") continue;
    const int t = std::stoi(cells[1]);
    const int e = std::stoi(cells[2]);
    if (t < 0 || t >= trials || e < 1 || e > episodes) {
      throw ConfigError("metrics row outside the manifest's trials/episodes in " + metrics_path);
    }
    out.throughput[static_cast<std::size_t>(t)][static_cast<std::size_t>(e - 1)] =
        std::stod(cells[3]);
  }
  return out;
}

RunSummary summarize(const std::string& agent, std::span<const std::vector<double>> throughput,
                     int episodes, double target) {
  RunSummary s;
  s.agent = agent;
  s.episodes = episodes;
  double sum = 0.0;
  for (const auto& series : throughput) {
    const auto e = episodes_to_target(series, target);
    s.episodes_to_target.push_back(e);
    if (!e) ++s.censored_trials;
    sum += e ? *e : episodes + 1;
  }
  s.mean_episodes_to_target = throughput.empty() ? kNaN : sum / static_cast<double>(throughput.size());
  return s;
}

RunSummary summarize(const ExperimentResult& result) {
  std::vector<std::vector<double>> series;
  for (const auto& t : result.trials) series.push_back(throughput_series(t));
  return summarize(std::string(to_string(result.config.agent)), series, result.config.episodes,
                   result.config.target_throughput);
}

ConvergenceReport compare_convergence(const RunSummary& a, const RunSummary& b) {
  return {a, b, a.mean_episodes_to_target / b.mean_episodes_to_target};
}

ConvergenceReport compare_convergence(const std::string& metrics_a, const std::string& metrics_b) {
  const auto a = load_metrics(metrics_a);
  const auto b = load_metrics(metrics_b);
  for (const char* key :
       {"env", "jammers", "trials", "episodes", "hops_per_episode", "target_throughput"}) {
    require_same(a.config, b.config, key);
  }
  const double target = a.config.at("target_throughput").get<double>();
  const int episodes = a.config.at("episodes").get<int>();
  return compare_convergence(
      summarize(a.config.at("agent").at("kind").get<std::string>(), a.throughput, episodes, target),
      summarize(b.config.at("agent").at("kind").get<std::string>(), b.throughput, episodes, target));
}

std::string format_report(const ConvergenceReport& r) {
  std::ostringstream out;
  for (const RunSummary* s : {&r.a, &r.b}) {
    out << s->agent << ": mean episodes to target " << s->mean_episodes_to_target << " (per trial:";
    for (const auto& e : s->episodes_to_target) out << ' ' << (e ? std::to_string(*e) : "never");
    out << ')';
    if (s->censored_trials > 0) {
      out << " [" << s->censored_trials << " trial(s) never reached target, counted as "
          << s->episodes + 1 << "]";
    }
    out << '\n';
  }
  out << "ratio " << r.a.agent << "/" << r.b.agent << " = " << r.ratio << '\n';
  return out.str();
}

OracleResult random_fh_oracle(const EnvConfig& env, std::span<const FixedJammerConfig> jammers,
                              std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("oracle needs at least one sample");
  const OracleSchedule schedule(env, jammers);
  OracleResult r;
  r.samples = samples;
  r.period_hops = schedule.period_hops();

  std::int64_t ok = 0;
  for (std::int64_t h = 0; h < r.period_hops; ++h) {
    for (int c = 0; c < env.channels; ++c) ok += schedule.ack(c, h) ? 1 : 0;
  }
  r.exact = static_cast<double>(ok) / static_cast<double>(r.period_hops * env.channels);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> hop(0, r.period_hops - 1);
  std::uniform_int_distribution<int> channel(0, env.channels - 1);
  ok = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const std::int64_t h = hop(rng);
    ok += schedule.ack(channel(rng), h) ? 1 : 0;
  }
  r.monte_carlo = static_cast<double>(ok) / static_cast<double>(samples);
  return r;
}

}  // namespace fastaj
