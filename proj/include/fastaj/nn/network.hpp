#pragma once

#include "fastaj/nn/layers.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fastaj::nn {

struct ConvStage {
  int kernel = 8;
  int stride = 2;
  int filters = 16;
  // Symmetric padding that makes the output exactly input/stride.
  int padding() const { return (kernel - stride) / 2; }
};

struct NetworkConfig {
  int input_height = 40;  // waterfall history rows
  int input_width = 40;   // spectrum bins
  ConvStage conv1{8, 2, 16};
  ConvStage conv2{4, 2, 32};
  int fc1_width = 512;
  int fc2_width = 256;
  int q_outputs = 0;   // 0 disables the Q head
  int cg_outputs = 0;  // 0 disables the coarse-spectrum head

  bool has_q() const { return q_outputs > 0; }
  bool has_cg() const { return cg_outputs > 0; }
  bool joint() const { return has_q() && has_cg(); }
};

struct ShapeRecord {
  std::string stage;
  Shape shape;  // per sample
};

// Shared two-conv feature extractor feeding a Q head and/or a coarse-spectrum
// head. With both heads present the FC1 outputs of each head are concatenated
// and the concatenation feeds both heads' FC2.
template <typename Scalar>
class TwoHeadNetwork {
 public:
  struct Output {
    Matrix<Scalar> q;   // q_outputs x batch (empty without a Q head)
    Matrix<Scalar> cg;  // cg_outputs x batch (empty without a CG head)
  };

  explicit TwoHeadNetwork(const NetworkConfig& cfg) : cfg_(cfg) {
    if (!cfg.has_q() && !cfg.has_cg()) {
      throw std::invalid_argument("network needs at least one head");
    }
    ConvGeometry g1{cfg.input_height, cfg.input_width, 1, cfg.conv1.kernel, cfg.conv1.stride,
                    cfg.conv1.padding(), cfg.conv1.filters};
    ConvGeometry g2{g1.out_height(), g1.out_width(), g1.filters, cfg.conv2.kernel,
                    cfg.conv2.stride, cfg.conv2.padding(), cfg.conv2.filters};
    geometry_ = {g1, g2};
    extractor_ = Sequential<Scalar>(
        {LayerSpec::conv2d("extractor.conv1", g1), LayerSpec::relu("extractor.relu1", g1.out_features()),
         LayerSpec::conv2d("extractor.conv2", g2), LayerSpec::relu("extractor.relu2", g2.out_features())},
        params_);
    const std::int64_t features = g2.out_features();
    const std::int64_t hidden = cfg.joint() ? 2 * std::int64_t{cfg.fc1_width} : cfg.fc1_width;
    if (cfg.has_q()) {
      q_fc1_ = Sequential<Scalar>({LayerSpec::fully_connected("q.fc1", features, cfg.fc1_width),
                                   LayerSpec::relu("q.relu1", cfg.fc1_width)},
                                  params_);
      q_tail_ = Sequential<Scalar>({LayerSpec::fully_connected("q.fc2", hidden, cfg.fc2_width),
                                    LayerSpec::relu("q.relu2", cfg.fc2_width),
                                    LayerSpec::fully_connected("q.fc3", cfg.fc2_width, cfg.q_outputs)},
                                   params_);
    }
    if (cfg.has_cg()) {
      cg_fc1_ = Sequential<Scalar>({LayerSpec::fully_connected("cg.fc1", features, cfg.fc1_width),
                                    LayerSpec::relu("cg.relu1", cfg.fc1_width)},
                                   params_);
      cg_tail_ = Sequential<Scalar>({LayerSpec::fully_connected("cg.fc2", hidden, cfg.fc2_width),
                                     LayerSpec::relu("cg.relu2", cfg.fc2_width),
                                     LayerSpec::fully_connected("cg.fc3", cfg.fc2_width, cfg.cg_outputs)},
                                    params_);
    }
  }

  TwoHeadNetwork(const TwoHeadNetwork&) = delete;
  TwoHeadNetwork& operator=(const TwoHeadNetwork&) = delete;

  const NetworkConfig& config() const { return cfg_; }
  ParameterSet<Scalar>& params() { return params_; }
  const ParameterSet<Scalar>& params() const { return params_; }
  std::int64_t input_features() const { return std::int64_t{cfg_.input_height} * cfg_.input_width; }

  // Xavier-uniform weights, zero biases, in parameter-name order.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& [name, p] : params_) {
      if (name.ends_with(".bias")) {
        p.value.set_zero();
        continue;
      }
      const auto& shape = p.value.shape();
      std::int64_t fan_in = shape[1], fan_out = shape[0];
      if (name.starts_with("extractor.conv")) {
        const auto& g = name == "extractor.conv1.weight" ? geometry_[0] : geometry_[1];
        fan_in = g.patch_size();
        fan_out = std::int64_t{g.kernel} * g.kernel * g.filters;
      }
      xavier_uniform(p.value, fan_in, fan_out, rng);
    }
    params_.zero_grad();
  }

  Output forward(const Matrix<Scalar>& x) {
    check_input(x);
    const Matrix<Scalar> features = extractor_.forward(x);
    return forward_heads(features);
  }

  Output infer(const Matrix<Scalar>& x) const {
    check_input(x);
    const Matrix<Scalar> features = extractor_.infer(x);
    Output out;
    Matrix<Scalar> hq, hc;
    if (cfg_.has_q()) hq = q_fc1_.infer(features);
    if (cfg_.has_cg()) hc = cg_fc1_.infer(features);
    if (cfg_.joint()) {
      const Matrix<Scalar> h = concat_rows(hq, hc);
      out.q = q_tail_.infer(h);
      out.cg = cg_tail_.infer(h);
    } else if (cfg_.has_q()) {
      out.q = q_tail_.infer(hq);
    } else {
      out.cg = cg_tail_.infer(hc);
    }
    return out;
  }

  // Accumulates parameter gradients for upstream gradients on either head.
  // An empty matrix means no gradient flows from that head.
  void backward(const Matrix<Scalar>& dq, const Matrix<Scalar>& dcg) {
    const bool use_q = cfg_.has_q() && dq.size() > 0;
    const bool use_cg = cfg_.has_cg() && dcg.size() > 0;
    if (!use_q && !use_cg) return;
    Matrix<Scalar> dfeatures;
    if (cfg_.joint()) {
      Matrix<Scalar> dh;
      if (use_q) dh = q_tail_.backward(dq);
      if (use_cg) {
        Matrix<Scalar> from_cg = cg_tail_.backward(dcg);
        dh = use_q ? Matrix<Scalar>(dh + from_cg) : from_cg;
      }
      auto [dhq, dhc] = split_rows(dh, cfg_.fc1_width);
      dfeatures = q_fc1_.backward(dhq);
      dfeatures += cg_fc1_.backward(dhc);
    } else if (use_q) {
      dfeatures = q_fc1_.backward(q_tail_.backward(dq));
    } else {
      dfeatures = cg_fc1_.backward(cg_tail_.backward(dcg));
    }
    extractor_.backward(dfeatures, /*need_input_grad=*/false);
  }

  // Per-sample activation shapes along the forward chain, for one input.
  std::vector<ShapeRecord> shape_trace(const Matrix<Scalar>& x) const {
    check_input(x);
    std::vector<ShapeRecord> trace;
    trace.push_back({"input", {cfg_.input_height, cfg_.input_width}});
    Matrix<Scalar> h = x;
    for (std::size_t i = 0; i < extractor_.size(); i += 2) {
      h = extractor_.layer(i + 1).infer(extractor_.layer(i).infer(h));
      const auto& g = geometry_[i / 2];
      if (h.rows() != g.out_features()) throw std::logic_error("extractor shape drift");
      trace.push_back({extractor_.layer(i).name(), {g.filters, g.out_height(), g.out_width()}});
    }
    Matrix<Scalar> hq, hc;
    if (cfg_.has_q()) {
      hq = q_fc1_.infer(h);
      trace.push_back({"q.fc1", {hq.rows()}});
    }
    if (cfg_.has_cg()) {
      hc = cg_fc1_.infer(h);
      trace.push_back({"cg.fc1", {hc.rows()}});
    }
    Matrix<Scalar> hidden = cfg_.joint() ? concat_rows(hq, hc) : (cfg_.has_q() ? hq : hc);
    if (cfg_.joint()) trace.push_back({"concat", {hidden.rows()}});
    for (const auto* tail : {cfg_.has_q() ? &q_tail_ : nullptr, cfg_.has_cg() ? &cg_tail_ : nullptr}) {
      if (!tail) continue;
      Matrix<Scalar> t = hidden;
      for (std::size_t i = 0; i < tail->size(); ++i) {
        t = tail->layer(i).infer(t);
        if (i == 0 || i + 1 == tail->size()) trace.push_back({tail->layer(i).name(), {t.rows()}});
      }
    }
    return trace;
  }

  void clear_cache() {
    extractor_.clear_cache();
    if (cfg_.has_q()) {
      q_fc1_.clear_cache();
      q_tail_.clear_cache();
    }
    if (cfg_.has_cg()) {
      cg_fc1_.clear_cache();
      cg_tail_.clear_cache();
    }
  }

 private:
  Output forward_heads(const Matrix<Scalar>& features) {
    Output out;
    Matrix<Scalar> hq, hc;
    if (cfg_.has_q()) hq = q_fc1_.forward(features);
    if (cfg_.has_cg()) hc = cg_fc1_.forward(features);
    if (cfg_.joint()) {
      const Matrix<Scalar> h = concat_rows(hq, hc);
      out.q = q_tail_.forward(h);
      out.cg = cg_tail_.forward(h);
    } else if (cfg_.has_q()) {
      out.q = q_tail_.forward(hq);
    } else {
      out.cg = cg_tail_.forward(hc);
    }
    return out;
  }

  void check_input(const Matrix<Scalar>& x) const {
    if (x.rows() != input_features()) {
      throw std::invalid_argument("network expects " + std::to_string(input_features()) +
                                  " input features (" + std::to_string(cfg_.input_height) + "x" +
                                  std::to_string(cfg_.input_width) + "), got " +
                                  std::to_string(x.rows()));
    }
  }

  NetworkConfig cfg_;
  ParameterSet<Scalar> params_;
  std::array<ConvGeometry, 2> geometry_{};
  Sequential<Scalar> extractor_;
  Sequential<Scalar> q_fc1_, q_tail_;
  Sequential<Scalar> cg_fc1_, cg_tail_;
};

}  // namespace fastaj::nn
