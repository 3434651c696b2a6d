#include "fastaj/nn/checkpoint.hpp"
#include "fastaj/nn/gradcheck.hpp"
#include "fastaj/nn/losses.hpp"
#include "fastaj/nn/network.hpp"
#include "fastaj/nn/sgd.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace fastaj::nn;
using Mat = Matrix<double>;
using Vec = Vector<double>;

namespace {

Mat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

// Direct nested-loop convolution on (h, w, c) channel-fastest layout.
Vec direct_conv(const Vec& x, const ConvGeometry& g, const Mat& w, const Vec& bias) {
  Vec y(g.out_features());
  for (int oy = 0; oy < g.out_height(); ++oy) {
    for (int ox = 0; ox < g.out_width(); ++ox) {
      for (int f = 0; f < g.filters; ++f) {
        double acc = bias[f];
        for (int ky = 0; ky < g.kernel; ++ky) {
          for (int kx = 0; kx < g.kernel; ++kx) {
            const int iy = oy * g.stride - g.padding + ky;
            const int ix = ox * g.stride - g.padding + kx;
            if (iy < 0 || ix < 0 || iy >= g.in_height || ix >= g.in_width) continue;
            for (int c = 0; c < g.in_channels; ++c) {
              acc += w(f, (ky * g.kernel + kx) * g.in_channels + c) *
                     x[(iy * g.in_width + ix) * g.in_channels + c];
            }
          }
        }
        y[(oy * g.out_width() + ox) * g.filters + f] = acc;
      }
    }
  }
  return y;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("tensor shape checks") {
  Tensor<double> t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.matrix().rows() == 2);
  CHECK_THROWS_AS(Tensor<double>({2, 3}, Vec::Zero(5)), std::invalid_argument);
  CHECK(shape_string({16, 100, 100}) == "[16x100x100]");
}

TEST_CASE("relu") {
  ParameterSet<double> params;
  Relu<double> relu("r", 3);
  Mat x(3, 1);
  x << -1, 0, 2;
  const Mat y = relu.forward(x);
  CHECK(y(0) == 0.0);
  CHECK(y(1) == 0.0);
  CHECK(y(2) == 2.0);
  const Mat dx = relu.backward(Mat::Ones(3, 1), true);
  CHECK(dx(0) == 0.0);
  CHECK(dx(2) == 1.0);
}

TEST_CASE("1x1 identity convolution returns its input") {
  ParameterSet<double> params;
  const ConvGeometry g{5, 4, 3, 1, 1, 0, 3};
  Conv2d<double> conv("c", g, params);
  params.at("c.weight").value.matrix() = Mat::Identity(3, 3);
  const Mat x = random_matrix(g.in_features(), 2, 1);
  CHECK(conv.forward(x) == x);
}

TEST_CASE("im2col convolution matches the direct loop") {
  const std::vector<ConvGeometry> geometries{
      {12, 12, 1, 8, 2, 3, 4}, {6, 6, 4, 4, 2, 1, 5}, {7, 5, 2, 3, 1, 1, 3}, {9, 9, 1, 3, 3, 0, 2}};
  std::uint64_t seed = 10;
  for (const auto& g : geometries) {
    ParameterSet<double> params;
    Conv2d<double> conv("c", g, params);
    auto w = params.at("c.weight").value.matrix();
    w = random_matrix(w.rows(), w.cols(), seed++);
    params.at("c.bias").value.data() = random_matrix(g.filters, 1, seed++);
    const Mat x = random_matrix(g.in_features(), 3, seed++);
    const Mat y = conv.infer(x);
    for (Eigen::Index b = 0; b < 3; ++b) {
      const Vec ref = direct_conv(x.col(b), g, w, params.at("c.bias").value.data());
      CHECK((y.col(b) - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("fully connected layer") {
  ParameterSet<double> params;
  FullyConnected<double> fc("fc", 4, 3, params);
  params.at("fc.bias").value.data() << 1.5, -2.0, 0.25;
  SUBCASE("zero weights give the bias") {
    const Mat y = fc.forward(random_matrix(4, 5, 3));
    for (Eigen::Index b = 0; b < 5; ++b) {
      CHECK(y(0, b) == 1.5);
      CHECK(y(1, b) == -2.0);
      CHECK(y(2, b) == 0.25);
    }
  }
  SUBCASE("weight gradient is g x^T") {
    params.at("fc.weight").value.matrix() = random_matrix(3, 4, 4);
    const Mat x = random_matrix(4, 1, 5);
    const Mat g = random_matrix(3, 1, 6);
    fc.forward(x);
    const Mat dx = fc.backward(g, true);
    CHECK((params.at("fc.weight").grad.matrix() - g * x.transpose()).norm() == 0.0);
    CHECK((dx - params.at("fc.weight").value.matrix().transpose() * g).norm() == 0.0);
  }
  CHECK_THROWS_AS(fc.forward(Mat::Zero(5, 1)), std::invalid_argument);
  FullyConnected<double> fresh("fresh", 4, 3, params);
  CHECK_THROWS_AS(fresh.backward(Mat::Zero(3, 1), true), std::logic_error);
}

TEST_CASE("concat and split are adjoint") {
  const Mat a = random_matrix(3, 2, 1);
  const Mat b = random_matrix(5, 2, 2);
  const Mat ab = concat_rows(a, b);
  CHECK(ab.rows() == 8);
  const auto [top, bottom] = split_rows(ab, 3);
  CHECK(top == a);
  CHECK(bottom == b);
  CHECK_THROWS(concat_rows(a, Mat(5, 3)));
}

TEST_CASE("rmse loss") {
  Mat pred = Mat::Zero(10, 1), target = Mat::Zero(10, 1);
  CHECK(rmse_loss(pred, target).loss == 0.0);
  CHECK(rmse_loss(pred, target).grad.isZero());
  pred(0) = 3;
  pred(1) = 4;
  const auto r = rmse_loss(pred, target);
  CHECK(r.loss == doctest::Approx(5.0));
  CHECK(r.grad(0) == doctest::Approx(0.6));
  CHECK(r.grad(1) == doctest::Approx(0.8));

  Mat p2 = Mat::Zero(3, 2), t2 = Mat::Zero(3, 2);
  p2(0, 0) = 3;
  p2(1, 0) = 4;
  p2(0, 1) = 5;
  p2(2, 1) = 12;
  CHECK(rmse_loss(p2, t2).loss == doctest::Approx(9.0));
  CHECK_THROWS(rmse_loss(p2, Mat(3, 1)));
}

TEST_CASE("dqn loss and target") {
  Mat q(3, 1);
  q << 0.5, 1.0, -2.0;
  const std::vector<int> actions{1};
  SUBCASE("target equal to Q") {
    const std::vector<double> eta{1.0};
    const auto r = dqn_loss<double>(q, actions, eta);
    CHECK(r.loss == 0.0);
    CHECK(r.grad.isZero());
  }
  SUBCASE("quadratic derivative") {
    const std::vector<double> eta{3.0};
    const auto r = dqn_loss<double>(q, actions, eta);
    CHECK(r.loss == doctest::Approx(4.0));
    CHECK(r.grad(1) == doctest::Approx(-4.0));
    CHECK(r.grad(0) == 0.0);
    CHECK(r.grad(2) == 0.0);
  }
  Vec next(3);
  next << 1.0, 5.0, 2.0;
  CHECK(dqn_target<double>(2.0, 0.1, next) == doctest::Approx(2.5));
  const std::vector<int> bad{3};
  const std::vector<double> eta{0.0};
  CHECK_THROWS_AS(dqn_loss<double>(q, bad, eta), std::out_of_range);
}

TEST_CASE("sgd") {
  ParameterSet<double> params;
  auto& p = params.add("p", {1});
  p.value.data()[0] = 1.0;
  p.grad.data()[0] = 2.0;
  sgd_step(params, 0.0);
  CHECK(p.value.data()[0] == 1.0);
  CHECK(p.grad.data()[0] == 0.0);
  p.grad.data()[0] = 2.0;
  sgd_step(params, 0.1);
  CHECK(p.value.data()[0] == doctest::Approx(0.8));

  ParameterSet<double> a, b;
  auto& pa = a.add("p", {4});
  auto& pb = b.add("p", {4});
  const Vec g = random_matrix(4, 1, 9);
  for (int i = 0; i < 2; ++i) {
    pa.grad.data() = g;
    sgd_step(a, 0.05);
  }
  pb.grad.data() = 2 * g;
  sgd_step(b, 0.05);
  CHECK((pa.value.data() - pb.value.data()).norm() < 1e-15);

  ParameterSet<double> named;
  auto& x = named.add("x.w", {1});
  auto& y = named.add("y.w", {1});
  x.grad.data()[0] = y.grad.data()[0] = 1.0;
  sgd_step<double>(named, [](std::string_view n) { return n.starts_with("x") ? 1.0 : 0.5; });
  CHECK(x.value.data()[0] == -1.0);
  CHECK(y.value.data()[0] == -0.5);
}

TEST_CASE("network shapes at desk scale") {
  NetworkConfig cfg;
  cfg.q_outputs = 10;
  cfg.cg_outputs = 10;
  cfg.fc1_width = 32;
  cfg.fc2_width = 16;
  TwoHeadNetwork<double> net(cfg);
  net.initialize(3);
  const auto trace = net.shape_trace(Mat::Zero(1600, 1));
  const std::vector<std::pair<std::string, Shape>> expected{
      {"input", {40, 40}},   {"extractor.conv1", {16, 20, 20}}, {"extractor.conv2", {32, 10, 10}},
      {"q.fc1", {32}},       {"cg.fc1", {32}},                  {"concat", {64}},
      {"q.fc2", {16}},       {"q.fc3", {10}},                   {"cg.fc2", {16}},
      {"cg.fc3", {10}}};
  REQUIRE(trace.size() == expected.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(trace[i].stage == expected[i].first);
    CHECK(trace[i].shape == expected[i].second);
  }
  const auto out = net.infer(Mat::Zero(1600, 3));
  CHECK(out.q.rows() == 10);
  CHECK(out.q.cols() == 3);
  CHECK(out.cg.rows() == 10);
  CHECK_THROWS_AS(net.infer(Mat::Zero(1599, 1)), std::invalid_argument);
}

TEST_CASE("single-head networks skip the concatenation") {
  NetworkConfig cfg;
  cfg.q_outputs = 8;
  cfg.fc1_width = 32;
  cfg.fc2_width = 16;
  TwoHeadNetwork<double> net(cfg);
  CHECK(net.params().at("q.fc2.weight").value.shape() == Shape{16, 32});
  CHECK_FALSE(net.params().contains("cg.fc1.weight"));
  cfg.q_outputs = 0;
  CHECK_THROWS_AS(TwoHeadNetwork<double>{cfg}, std::invalid_argument);
}

TEST_CASE("initialization is deterministic and Xavier-bounded") {
  NetworkConfig cfg;
  cfg.q_outputs = 10;
  cfg.cg_outputs = 10;
  cfg.fc1_width = 32;
  cfg.fc2_width = 16;
  TwoHeadNetwork<double> a(cfg), b(cfg), c(cfg);
  a.initialize(7);
  b.initialize(7);
  c.initialize(8);
  CHECK(a.params().values_equal(b.params()));
  CHECK_FALSE(a.params().values_equal(c.params()));
  CHECK(a.params().at("q.fc3.bias").value.data().isZero());
  const double limit = std::sqrt(6.0 / (16 + 10));
  CHECK(a.params().at("q.fc3.weight").value.data().cwiseAbs().maxCoeff() <= limit);

  // Identical training steps stay bit-identical.
  const Mat x = random_matrix(1600, 4, 2);
  for (auto* n : {&a, &b}) {
    const auto out = n->forward(x);
    n->backward(out.q, out.cg);
    sgd_step(n->params(), 1e-3);
  }
  CHECK(a.params().values_equal(b.params()));
}

TEST_CASE("gradient checks") {
  for (const auto& r : gradcheck_suite(3)) {
    INFO(r.component);
    CHECK(r.entries > 0);
    CHECK(r.max_rel_error < 1e-4);
  }
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("checkpoint round trip") {
  NetworkConfig cfg;
  cfg.q_outputs = 4;
  cfg.cg_outputs = 10;
  cfg.fc1_width = 16;
  cfg.fc2_width = 8;
  TwoHeadNetwork<double> a(cfg), b(cfg);
  a.initialize(1);
  b.initialize(2);
  const std::string path = temp_path("fastaj_test.ckpt");
  save_checkpoint(path, collect_values(a.params(), "net/"));
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.size() == a.params().size());
  restore_values(b.params(), loaded, "net/");
  CHECK(a.params().values_equal(b.params()));

  std::ifstream manifest(path + ".manifest.txt");
  std::string line;
  std::getline(manifest, line);
  CHECK_FALSE(line.empty());

  SUBCASE("missing prefix") { CHECK_THROWS(restore_values(b.params(), loaded, "other/")); }
  SUBCASE("truncated file") {
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
    CHECK_THROWS(load_checkpoint(path));
  }
  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
    f.close();
    CHECK_THROWS(load_checkpoint(path));
  }
  SUBCASE("shape mismatch") {
    NetworkConfig other = cfg;
    other.fc1_width = 12;
    TwoHeadNetwork<double> c(other);
    CHECK_THROWS(restore_values(c.params(), loaded, "net/"));
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.txt");
}
