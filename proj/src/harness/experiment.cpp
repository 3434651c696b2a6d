#include "fastaj/harness/experiment.hpp"

#include <fstream>
#include <set>
#include <string>

namespace fastaj {
namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
  }

  void get(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    out = v.get<double>();
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const char* key, Int& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.get<std::int64_t>() < 0) fail(field(key), "expected a non-negative integer");
    }
    out = v.get<Int>();
  }

  void get(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    out = v.get<bool>();
  }

  void get(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    out = v.get<std::string>();
  }

  void get(const char* key, ChannelSet& out) {
    if (!has(key)) return;
    out = channel_set(raw(key), field(key));
  }

  static ChannelSet channel_set(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of channel indices");
    ChannelSet set;
    for (const auto& c : v) {
      if (!c.is_number_integer()) fail(where, "expected integer channel indices");
      set.push_back(c.get<int>());
    }
    return set;
  }

  Reader child(const char* key) { return Reader(raw(key), field(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(field(key.c_str()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FadingMode parse_fading(const std::string& name, const std::string& where) {
  if (name == "none") return FadingMode::DeterministicUnit;
  if (name == "rayleigh") return FadingMode::RayleighBlock;
  Reader::fail(where, "expected \"none\" or \"rayleigh\"");
}

LinkGain parse_link(Reader r, std::uint64_t stream) {
  LinkGain link;
  link.stream = stream;
  r.get("distance_m", link.distance_m);
  r.get("path_loss_exponent", link.path_loss_exponent);
  if (r.has("fading")) {
    std::string f;
    r.get("fading", f);
    link.fading = parse_fading(f, r.field("fading"));
  }
  r.finish();
  return link;
}

void parse_env(Reader r, EnvConfig& env) {
  r.get("channels", env.channels);
  r.get("bandwidth_hz", env.bandwidth_hz);
  if (r.has("channel_bandwidth_hz")) {
    r.get("channel_bandwidth_hz", env.channel_bandwidth_hz);
  } else {
    env.channel_bandwidth_hz = env.bandwidth_hz / env.channels;
  }
  r.get("freq_bins", env.freq_bins);
  r.get("history_slots", env.history_slots);
  r.get("slots_per_hop", env.slots_per_hop);
  r.get("slot_duration_s", env.slot_duration_s);
  r.get("sinr_threshold_db", env.sinr_threshold_db);
  r.get("user_power_dbm", env.user_power_dbm);
  r.get("noise_dbm", env.noise_dbm);
  if (r.has("user_link")) env.user_link = parse_link(r.child("user_link"), 0);
  if (r.has("jammer_links")) {
    const json& links = r.raw("jammer_links");
    if (!links.is_array()) Reader::fail(r.field("jammer_links"), "expected an array");
    env.jammer_links.clear();
    for (std::size_t i = 0; i < links.size(); ++i) {
      env.jammer_links.push_back(
          parse_link(Reader(links[i], r.field("jammer_links") + "[" + std::to_string(i) + "]"),
                     i + 1));
    }
  }
  r.finish();
}

CgLabel parse_cg_label(const std::string& name, const std::string& where) {
  if (name == "interference") return CgLabel::InterferencePlusNoise;
  if (name == "total") return CgLabel::Total;
  Reader::fail(where, "expected \"interference\" or \"total\"");
}

std::string_view to_string(CgLabel label) {
  return label == CgLabel::Total ? "total" : "interference";
}

void parse_agent(Reader r, ExperimentConfig& cfg) {
  auto& a = cfg.agent_params;
  std::string kind;
  r.get("kind", kind);
  if (!kind.empty()) {
    try {
      cfg.agent = parse_agent_kind(kind);
    } catch (const ConfigError& e) {
      Reader::fail(r.field("kind"), e.what());
    }
  }
  r.get("alpha_q", a.alpha_q);
  r.get("alpha_c", a.alpha_c);
  r.get("batch_q", a.batch_q);
  r.get("batch_c", a.batch_c);
  r.get("memory_q", a.memory_q);
  r.get("memory_c", a.memory_c);
  r.get("target_sync_hops", a.target_sync_hops);
  r.get("gamma", a.gamma);
  r.get("explore_threshold", a.explore_threshold);
  r.get("loss_init", a.loss_init);
  r.get("lambda_max", a.lambda_max);
  r.get("reward_offset_db", a.reward_offset_db);
  if (r.has("cg_label")) {
    std::string label;
    r.get("cg_label", label);
    a.cg_label = parse_cg_label(label, r.field("cg_label"));
  }
  r.get("fc1_width", a.fc1_width);
  r.get("fc2_width", a.fc2_width);
  r.get("epsilon_start", a.epsilon_start);
  r.get("epsilon_end", a.epsilon_end);
  r.get("epsilon_decay_hops", a.epsilon_decay_hops);
  r.get("sequence_length", cfg.fh_sequence_length);
  r.finish();
}

JammerConfig parse_jammer(Reader r, std::size_t position, const JointAgentConfig& user) {
  std::string type;
  r.get("type", type);
  if (type.empty()) Reader::fail(r.field("type"), "missing jammer type");

  if (type == "intelligent") {
    IntelligentJammerConfig j;
    j.link = position;
    j.learner = user.dqn();
    r.get("n_i", j.jammed_channels);
    r.get("power_dbm", j.power_dbm);
    r.get("link", j.link);
    if (r.has("update_step")) {
      const json& v = r.raw("update_step");
      if (v.is_string() && v.get<std::string>() == "infinity") {
        j.update_step.reset();
      } else if (v.is_number_integer()) {
        j.update_step = v.get<int>();
      } else {
        Reader::fail(r.field("update_step"), "expected an integer or \"infinity\"");
      }
    }
    r.get("epsilon_start", j.epsilon_start);
    r.get("epsilon_end", j.epsilon_end);
    r.get("epsilon_decay_updates", j.epsilon_decay_updates);
    r.get("learning_rate", j.learner.learning_rate);
    r.get("batch_size", j.learner.batch_size);
    r.get("memory_capacity", j.learner.memory_capacity);
    r.get("target_sync_hops", j.learner.target_sync_hops);
    r.get("gamma", j.learner.gamma);
    r.get("fc1_width", j.learner.fc1_width);
    r.get("fc2_width", j.learner.fc2_width);
    r.finish();
    return j;
  }

  FixedJammerConfig j;
  try {
    j.mode = parse_fixed_mode(type);
  } catch (const ConfigError& e) {
    Reader::fail(r.field("type"), e.what());
  }
  j.link = position;
  r.get("power_dbm", j.power_dbm);
  r.get("link", j.link);
  r.get("sweep_rate", j.sweep_rate_hz_per_s);
  r.get("comb_channels", j.comb_channels);
  if (r.has("comb_pair")) {
    const json& pair = r.raw("comb_pair");
    if (!pair.is_array() || pair.size() != 2) {
      Reader::fail(r.field("comb_pair"), "expected two channel arrays");
    }
    j.comb_pair_a = Reader::channel_set(pair[0], r.field("comb_pair") + "[0]");
    j.comb_pair_b = Reader::channel_set(pair[1], r.field("comb_pair") + "[1]");
  }
  r.get("switch_period_hops", j.switch_period_hops);
  if (r.has("mode_cycle")) {
    const json& cycle = r.raw("mode_cycle");
    if (!cycle.is_array()) Reader::fail(r.field("mode_cycle"), "expected an array of modes");
    j.mode_cycle.clear();
    for (const auto& m : cycle) {
      if (!m.is_string()) Reader::fail(r.field("mode_cycle"), "expected mode names");
      try {
        j.mode_cycle.push_back(parse_fixed_mode(m.get<std::string>()));
      } catch (const ConfigError& e) {
        Reader::fail(r.field("mode_cycle"), e.what());
      }
    }
  }
  r.get("cycle_period_hops", j.cycle_period_hops);
  r.get("band_start", j.band_start);
  r.get("band_width_channels", j.band_width_channels);
  r.get("rehop_period_hops", j.rehop_period_hops);
  r.get("delay_hops", j.delay_hops);
  r.finish();
  return j;
}

json link_json(const LinkGain& l) {
  return {{"distance_m", l.distance_m},
          {"path_loss_exponent", l.path_loss_exponent},
          {"fading", l.fading == FadingMode::RayleighBlock ? "rayleigh" : "none"}};
}

json channels_json(const ChannelSet& s) { return json(s); }

}  // namespace

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw ConfigError("unknown scale '" + std::string(name) + "', expected paper or desk");
}

std::string_view to_string(Scale scale) { return scale == Scale::Paper ? "paper" : "desk"; }

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "random_fh") return AgentKind::RandomFh;
  if (name == "dqn") return AgentKind::Dqn;
  if (name == "predictor_only") return AgentKind::PredictorOnly;
  if (name == "joint") return AgentKind::Joint;
  throw ConfigError("unknown agent '" + std::string(name) +
                    "', expected random_fh, dqn, predictor_only or joint");
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::RandomFh: return "random_fh";
    case AgentKind::Dqn: return "dqn";
    case AgentKind::PredictorOnly: return "predictor_only";
    case AgentKind::Joint: return "joint";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  env.validate();
  agent_params.validate();
  if (episodes < 1) throw ConfigError("config field 'episodes': must be >= 1");
  if (hops_per_episode < 1) throw ConfigError("config field 'hops_per_episode': must be >= 1");
  if (trials < 1) throw ConfigError("config field 'trials': must be >= 1");
  if (fh_sequence_length < 1) throw ConfigError("config field 'agent.sequence_length': must be >= 1");
  if (!(target_throughput > 0.0 && target_throughput <= 1.0)) {
    throw ConfigError("config field 'target_throughput': must lie in (0, 1]");
  }
  for (std::size_t i = 0; i < jammers.size(); ++i) {
    try {
      std::visit([&](const auto& j) { j.validate(env); }, jammers[i]);
    } catch (const ConfigError& e) {
      throw ConfigError("config field 'jammers[" + std::to_string(i) + "]': " + e.what());
    }
  }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  Reader r(j, "");
  if (r.has("scale")) {
    std::string scale;
    r.get("scale", scale);
    try {
      cfg.scale = parse_scale(scale);
    } catch (const ConfigError& e) {
      Reader::fail("scale", e.what());
    }
  }
  cfg.env = cfg.scale == Scale::Paper ? EnvConfig::paper_scale() : EnvConfig::desk_scale();
  if (r.has("env")) parse_env(r.child("env"), cfg.env);
  r.get("episodes", cfg.episodes);
  r.get("hops_per_episode", cfg.hops_per_episode);
  r.get("trials", cfg.trials);
  r.get("base_seed", cfg.base_seed);
  r.get("target_throughput", cfg.target_throughput);
  r.get("telemetry", cfg.telemetry);
  r.get("output_path", cfg.output_path);
  std::string description;
  r.get("description", description);
  if (r.has("agent")) parse_agent(r.child("agent"), cfg);
  if (r.has("jammers")) {
    const json& list = r.raw("jammers");
    if (!list.is_array()) Reader::fail("jammers", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.jammers.push_back(
          parse_jammer(Reader(list[i], "jammers[" + std::to_string(i) + "]"), i, cfg.agent_params));
    }
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  const auto& e = cfg.env;
  json env = {{"channels", e.channels},
              {"bandwidth_hz", e.bandwidth_hz},
              {"channel_bandwidth_hz", e.channel_bandwidth_hz},
              {"freq_bins", e.freq_bins},
              {"history_slots", e.history_slots},
              {"slots_per_hop", e.slots_per_hop},
              {"slot_duration_s", e.slot_duration_s},
              {"sinr_threshold_db", e.sinr_threshold_db},
              {"user_power_dbm", e.user_power_dbm},
              {"noise_dbm", e.noise_dbm},
              {"user_link", link_json(e.user_link)},
              {"jammer_links", json::array()}};
  for (const auto& l : e.jammer_links) env["jammer_links"].push_back(link_json(l));

  const auto& a = cfg.agent_params;
  json agent = {{"kind", to_string(cfg.agent)},
                {"alpha_q", a.alpha_q},
                {"alpha_c", a.alpha_c},
                {"batch_q", a.batch_q},
                {"batch_c", a.batch_c},
                {"memory_q", a.memory_q},
                {"memory_c", a.memory_c},
                {"target_sync_hops", a.target_sync_hops},
                {"gamma", a.gamma},
                {"explore_threshold", a.explore_threshold},
                {"loss_init", a.loss_init},
                {"lambda_max", a.lambda_max},
                {"reward_offset_db", a.reward_offset_db},
                {"cg_label", to_string(a.cg_label)},
                {"fc1_width", a.fc1_width},
                {"fc2_width", a.fc2_width},
                {"epsilon_start", a.epsilon_start},
                {"epsilon_end", a.epsilon_end},
                {"epsilon_decay_hops", a.epsilon_decay_hops},
                {"sequence_length", cfg.fh_sequence_length}};

  json jammers = json::array();
  for (const auto& jc : cfg.jammers) {
    if (const auto* f = std::get_if<FixedJammerConfig>(&jc)) {
      json modes = json::array();
      for (FixedMode m : f->mode_cycle) modes.push_back(to_string(m));
      jammers.push_back({{"type", to_string(f->mode)},
                         {"power_dbm", f->power_dbm},
                         {"link", f->link},
                         {"sweep_rate", f->sweep_rate_hz_per_s},
                         {"comb_channels", channels_json(f->comb_channels)},
                         {"comb_pair", {channels_json(f->comb_pair_a), channels_json(f->comb_pair_b)}},
                         {"switch_period_hops", f->switch_period_hops},
                         {"mode_cycle", modes},
                         {"cycle_period_hops", f->cycle_period_hops},
                         {"band_start", f->band_start},
                         {"band_width_channels", f->band_width_channels},
                         {"rehop_period_hops", f->rehop_period_hops},
                         {"delay_hops", f->delay_hops}});
    } else {
      const auto& i = std::get<IntelligentJammerConfig>(jc);
      jammers.push_back({{"type", "intelligent"},
                         {"n_i", i.jammed_channels},
                         {"power_dbm", i.power_dbm},
                         {"link", i.link},
                         {"update_step", i.update_step ? json(*i.update_step) : json("infinity")},
                         {"epsilon_start", i.epsilon_start},
                         {"epsilon_end", i.epsilon_end},
                         {"epsilon_decay_updates", i.epsilon_decay_updates},
                         {"learning_rate", i.learner.learning_rate},
                         {"batch_size", i.learner.batch_size},
                         {"memory_capacity", i.learner.memory_capacity},
                         {"target_sync_hops", i.learner.target_sync_hops},
                         {"gamma", i.learner.gamma},
                         {"fc1_width", i.learner.fc1_width},
                         {"fc2_width", i.learner.fc2_width}});
    }
  }

  return {{"scale", to_string(cfg.scale)},
          {"episodes", cfg.episodes},
          {"hops_per_episode", cfg.hops_per_episode},
          {"trials", cfg.trials},
          {"base_seed", cfg.base_seed},
          {"target_throughput", cfg.target_throughput},
          {"telemetry", cfg.telemetry},
          {"output_path", cfg.output_path},
          {"env", env},
          {"agent", agent},
          {"jammers", jammers}};
}

}  // namespace fastaj
