#include "fastaj/nn/gradcheck.hpp"

#include "fastaj/nn/layers.hpp"
#include "fastaj/nn/losses.hpp"
#include "fastaj/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace fastaj::nn {
namespace {

using Mat = Matrix<double>;
using Rng = std::mt19937_64;

Mat uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

void randomize(ParameterSet<double>& params, Rng& rng) {
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (auto& [name, p] : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.raw()[i] = d(rng);
    p.grad.set_zero();
  }
}

// Returns false if some perturbation crossed a non-differentiable point,
// detected by disagreeing one-sided differences.
bool compare(double* values, Eigen::Index n, const double* analytic,
             const std::function<double()>& f, double eps, GradcheckReport& report) {
  const double f0 = f();
  bool smooth = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double old = values[i];
    values[i] = old + eps;
    const double fp = f();
    values[i] = old - eps;
    const double fm = f();
    values[i] = old;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double forward = (fp - f0) / eps;
    const double backward = (f0 - fm) / eps;
    if (relative_error(forward, backward, 1e-3) > 1e-2) smooth = false;
    report.max_rel_error = std::max(report.max_rel_error, relative_error(analytic[i], numeric));
    ++report.entries;
  }
  return smooth;
}

bool compare_params(ParameterSet<double>& params, const std::function<double()>& f, double eps,
                    GradcheckReport& report) {
  bool smooth = true;
  for (auto& [name, p] : params) {
    const Vector<double> analytic = p.grad.data();
    smooth = compare(p.value.raw(), p.value.size(), analytic.data(), f, eps, report) && smooth;
  }
  return smooth;
}

GradcheckReport check_layer(const std::string& component, int seeds,
                            const std::function<void(Rng&, GradcheckReport&)>& body) {
  GradcheckReport report{component, seeds, 0, 0.0};
  for (int s = 0; s < seeds; ++s) {
    Rng rng(0x9d2c5680u + static_cast<std::uint64_t>(s));
    body(rng, report);
  }
  return report;
}

bool network_draw(Rng& rng, double eps, GradcheckReport& report) {
  NetworkConfig cfg;
  cfg.input_height = 12;
  cfg.input_width = 12;
  cfg.conv1 = {4, 2, 3};
  cfg.conv2 = {4, 2, 4};
  cfg.fc1_width = 6;
  cfg.fc2_width = 5;
  cfg.q_outputs = 4;
  cfg.cg_outputs = 4;
  TwoHeadNetwork<double> net(cfg);
  randomize(net.params(), rng);
  const Mat x = uniform(144, 3, rng);
  const Mat labels = uniform(4, 3, rng, -2.0, 2.0);
  const std::vector<int> actions{0, 3, 1};
  const std::vector<double> targets{0.5, -0.25, 1.0};
  const double lambda = 0.7;
  auto f = [&] {
    const auto out = net.infer(x);
    return lambda * dqn_loss<double>(out.q, actions, targets).loss +
           rmse_loss<double>(out.cg, labels).loss;
  };
  const auto out = net.forward(x);
  net.backward(lambda * dqn_loss<double>(out.q, actions, targets).grad,
               rmse_loss<double>(out.cg, labels).grad);
  net.clear_cache();
  return compare_params(net.params(), f, eps, report);
}


}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradcheckReport check_conv2d(int seeds, double eps) {
  const ConvGeometry shapes[] = {
      {10, 9, 1, 8, 2, 3, 3},  // conv1 layout
      {6, 6, 3, 4, 2, 1, 4},   // conv2 layout
      {5, 7, 2, 3, 1, 1, 2},
  };
  int k = 0;
  return check_layer("conv2d", seeds, [&](Rng& rng, GradcheckReport& report) {
    const ConvGeometry g = shapes[k++ % 3];
    ParameterSet<double> params;
    Conv2d<double> conv("conv", g, params);
    randomize(params, rng);
    Mat x = uniform(g.in_features(), 2, rng);
    const Mat w = uniform(g.out_features(), 2, rng);
    auto f = [&] { return (w.array() * conv.infer(x).array()).sum(); };
    conv.forward(x);
    const Mat dx = conv.backward(w, true);
    conv.clear_cache();
    compare(x.data(), x.size(), dx.data(), f, eps, report);
    compare_params(params, f, eps, report);
  });
}

GradcheckReport check_fully_connected(int seeds, double eps) {
  return check_layer("fully_connected", seeds, [&](Rng& rng, GradcheckReport& report) {
    ParameterSet<double> params;
    FullyConnected<double> fc("fc", 7, 5, params);
    randomize(params, rng);
    Mat x = uniform(7, 3, rng);
    const Mat w = uniform(5, 3, rng);
    auto f = [&] { return (w.array() * fc.infer(x).array()).sum(); };
    fc.forward(x);
    const Mat dx = fc.backward(w, true);
    compare(x.data(), x.size(), dx.data(), f, eps, report);
    compare_params(params, f, eps, report);
  });
}

GradcheckReport check_relu(int seeds, double eps) {
  return check_layer("relu", seeds, [&](Rng& rng, GradcheckReport& report) {
    Relu<double> relu("relu", 9);
    // Keep inputs away from the kink so the central difference stays on one side.
    Mat x = uniform(9, 4, rng, 0.05, 1.0);
    const Mat sign = uniform(9, 4, rng);
    x = (sign.array() < 0).select(-x, x);
    const Mat w = uniform(9, 4, rng);
    auto f = [&] { return (w.array() * relu.infer(x).array()).sum(); };
    relu.forward(x);
    const Mat dx = relu.backward(w, true);
    compare(x.data(), x.size(), dx.data(), f, eps, report);
  });
}

GradcheckReport check_concat(int seeds, double eps) {
  return check_layer("concat", seeds, [&](Rng& rng, GradcheckReport& report) {
    Mat top = uniform(4, 3, rng);
    Mat bottom = uniform(6, 3, rng);
    const Mat w = uniform(10, 3, rng);
    auto f = [&] {
      const Mat y = concat_rows(top, bottom);
      return (w.array() * y.array() * y.array()).sum();
    };
    const Mat y = concat_rows(top, bottom);
    const Mat dy = 2.0 * (w.array() * y.array()).matrix();
    const auto [d_top, d_bottom] = split_rows(dy, top.rows());
    compare(top.data(), top.size(), d_top.data(), f, eps, report);
    compare(bottom.data(), bottom.size(), d_bottom.data(), f, eps, report);
  });
}

GradcheckReport check_rmse_loss(int seeds, double eps) {
  return check_layer("rmse_loss", seeds, [&](Rng& rng, GradcheckReport& report) {
    Mat pred = uniform(10, 5, rng, -20.0, 20.0);
    const Mat target = uniform(10, 5, rng, -20.0, 20.0);
    auto f = [&] { return rmse_loss<double>(pred, target).loss; };
    const Mat grad = rmse_loss<double>(pred, target).grad;
    compare(pred.data(), pred.size(), grad.data(), f, eps, report);
  });
}

GradcheckReport check_dqn_loss(int seeds, double eps) {
  return check_layer("dqn_loss", seeds, [&](Rng& rng, GradcheckReport& report) {
    Mat q = uniform(10, 6, rng, -5.0, 5.0);
    std::vector<int> actions(6);
    std::vector<double> targets(6);
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> eta(-5.0, 5.0);
    for (int b = 0; b < 6; ++b) {
      actions[b] = pick(rng);
      targets[b] = eta(rng);
    }
    auto f = [&] { return dqn_loss<double>(q, actions, targets).loss; };
    const Mat grad = dqn_loss<double>(q, actions, targets).grad;
    compare(q.data(), q.size(), grad.data(), f, eps, report);
  });
}

GradcheckReport check_network(int seeds, double eps) {
  return check_layer("two_head_network", seeds, [&](Rng& rng, GradcheckReport& report) {
    // Hidden ReLUs make kink crossings possible; such draws are replaced.
    for (;;) {
      GradcheckReport draw{report.component, 0, 0, 0.0};
      if (network_draw(rng, eps, draw)) {
        report.entries += draw.entries;
        report.max_rel_error = std::max(report.max_rel_error, draw.max_rel_error);
        return;
      }
      ++report.redraws;
    }
  });
}

std::vector<GradcheckReport> gradcheck_suite(int seeds, double eps) {
  return {check_conv2d(seeds, eps),     check_fully_connected(seeds, eps),
          check_relu(seeds, eps),       check_concat(seeds, eps),
          check_rmse_loss(seeds, eps),  check_dqn_loss(seeds, eps),
          check_network(seeds, eps)};
}

}  // namespace fastaj::nn
