#include "fastaj/env/environment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fastaj {

SpectrumWaterfall::SpectrumWaterfall(int history_slots, int freq_bins, double fill_db)
    : samples_(Eigen::MatrixXd::Constant(history_slots, freq_bins, fill_db)) {}

void SpectrumWaterfall::push(std::span<const Eigen::VectorXd> rows) {
  const Eigen::Index n = samples_.rows();
  const auto incoming = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index keep = std::max<Eigen::Index>(0, n - incoming);
  if (keep > 0) {
    Eigen::MatrixXd kept = samples_.bottomRows(keep);
    samples_.topRows(keep) = kept;
  }
  // Only the newest n incoming rows survive.
  const Eigen::Index first = std::max<Eigen::Index>(0, incoming - n);
  for (Eigen::Index i = first; i < incoming; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (row.size() != samples_.cols()) {
      throw std::invalid_argument("spectrum vector has " + std::to_string(row.size()) +
                                  " bins, waterfall expects " + std::to_string(samples_.cols()));
    }
    samples_.row(keep + i - first) = row.transpose();
  }
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  state_ = std::make_shared<const SpectrumWaterfall>(cfg_.history_slots, cfg_.freq_bins,
                                                     noise_floor_db());
}

double Environment::noise_floor_db() const {
  return cfg_.noise_dbm - to_db(static_cast<double>(cfg_.bins_per_channel()));
}

HopOutcome Environment::step_hop(int user_channel, std::span<const JammerHopPlan> jammers) {
  const int slots = cfg_.slots_per_hop;
  if (user_channel < 0 || user_channel >= cfg_.channels) {
    throw std::out_of_range("user channel " + std::to_string(user_channel) + " outside [0, " +
                            std::to_string(cfg_.channels) + ")");
  }
  for (const auto& plan : jammers) {
    if (static_cast<int>(plan.slots.size()) != slots) {
      throw std::invalid_argument("jammer plan covers " + std::to_string(plan.slots.size()) +
                                  " slots, hop has " + std::to_string(slots));
    }
  }

  HopOutcome out;
  out.hop = hop_;
  out.user_channel = user_channel;
  out.sinr_per_slot.reserve(slots);
  std::vector<ChannelPowerMap> maps;
  maps.reserve(slots);
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(slots);
  std::vector<JamEmission> emissions;

  for (int i = 0; i < slots; ++i) {
    const std::int64_t slot = hop_ * slots + i;
    emissions.clear();
    for (const auto& plan : jammers) {
      const double gain = link_gain(cfg_.jammer_link(plan.link), cfg_.seed, slot);
      for (int ch : plan.slots[i]) emissions.push_back({ch, plan.power_dbm, gain});
    }
    maps.push_back(compose_power(cfg_, user_channel, emissions, slot));
    out.sinr_per_slot.push_back(sinr_db(maps.back(), user_channel));
    rows.push_back(spectrum_vector(maps.back(), cfg_.freq_bins));
  }

  out.user_reward_db = *std::min_element(out.sinr_per_slot.begin(), out.sinr_per_slot.end());
  out.ack = std::all_of(out.sinr_per_slot.begin(), out.sinr_per_slot.end(),
                        [&](double s) { return s >= cfg_.sinr_threshold_db; });
  out.jammer_reward = out.ack ? -1 : 1;
  out.coarse = coarse_spectrum(maps, slots, CoarseSource::Total);
  out.coarse_interference = coarse_spectrum(maps, slots, CoarseSource::InterferencePlusNoise);

  auto next = std::make_shared<SpectrumWaterfall>(*state_);
  next->push(rows);
  state_ = std::move(next);
  out.next_state = state_;
  ++hop_;
  return out;
}

}  // namespace fastaj
