#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fastaj::nn {

struct GradcheckReport {
  std::string component;
  int seeds = 0;
  std::int64_t entries = 0;  // gradient entries compared
  double max_rel_error = 0.0;
  int redraws = 0;  // draws discarded for straddling a ReLU kink
};

// |a - n| / max(|a|, |n|, floor); the floor keeps entries whose true
// gradient is zero from dividing rounding noise by ~0.
inline constexpr double kRelErrorFloor = 1e-6;
double relative_error(double analytic, double numeric, double floor = kRelErrorFloor);

// Each check draws fresh inputs and parameters per seed, compares every
// analytic gradient entry with a central difference of step eps, and
// reports the worst relative error.
GradcheckReport check_conv2d(int seeds, double eps = 1e-5);
GradcheckReport check_fully_connected(int seeds, double eps = 1e-5);
GradcheckReport check_relu(int seeds, double eps = 1e-5);
GradcheckReport check_concat(int seeds, double eps = 1e-5);
GradcheckReport check_rmse_loss(int seeds, double eps = 1e-5);
GradcheckReport check_dqn_loss(int seeds, double eps = 1e-5);
// Small two-head network end to end, both losses.
GradcheckReport check_network(int seeds, double eps = 1e-5);

std::vector<GradcheckReport> gradcheck_suite(int seeds, double eps = 1e-5);

}  // namespace fastaj::nn
