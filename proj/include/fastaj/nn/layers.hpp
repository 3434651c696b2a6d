#pragma once

#include "fastaj/nn/parameter_set.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Activations travel as (features x batch) matrices, one sample per column.
// Image-shaped activations are flattened height-width-channel, channel fastest.

namespace fastaj::nn {

enum class LayerKind { Conv2d, FullyConnected, Relu, Concat };

struct ConvGeometry {
  int in_height = 0;
  int in_width = 0;
  int in_channels = 1;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int filters = 1;

  int out_height() const { return (in_height + 2 * padding - kernel) / stride + 1; }
  int out_width() const { return (in_width + 2 * padding - kernel) / stride + 1; }
  std::int64_t in_features() const {
    return std::int64_t{in_height} * in_width * in_channels;
  }
  std::int64_t out_features() const {
    return std::int64_t{out_height()} * out_width() * filters;
  }
  std::int64_t patch_size() const { return std::int64_t{kernel} * kernel * in_channels; }
};

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  std::string name;
  ConvGeometry conv;             // Conv2d
  std::int64_t in_features = 0;  // FullyConnected / Relu
  std::int64_t out_features = 0; // FullyConnected

  static LayerSpec conv2d(std::string name, ConvGeometry g) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.name = std::move(name);
    s.conv = g;
    s.in_features = g.in_features();
    s.out_features = g.out_features();
    return s;
  }
  static LayerSpec fully_connected(std::string name, std::int64_t in, std::int64_t out) {
    LayerSpec s;
    s.kind = LayerKind::FullyConnected;
    s.name = std::move(name);
    s.in_features = in;
    s.out_features = out;
    return s;
  }
  static LayerSpec relu(std::string name, std::int64_t width) {
    LayerSpec s;
    s.kind = LayerKind::Relu;
    s.name = std::move(name);
    s.in_features = width;
    s.out_features = width;
    return s;
  }
};

template <typename Scalar>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::int64_t in_features() const = 0;
  virtual std::int64_t out_features() const = 0;

  // Caches what backward() needs.
  virtual Matrix<Scalar> forward(const Matrix<Scalar>& x) = 0;
  // No cache; safe to call on a layer that is mid-training.
  virtual Matrix<Scalar> infer(const Matrix<Scalar>& x) const = 0;
  // Accumulates parameter gradients and returns dL/dx (empty when
  // need_input_grad is false).
  virtual Matrix<Scalar> backward(const Matrix<Scalar>& dy, bool need_input_grad = true) = 0;
  virtual void clear_cache() = 0;

 protected:
  void check_input(const Matrix<Scalar>& x) const {
    if (x.rows() != in_features()) {
      throw std::invalid_argument("layer '" + name_ + "' expects " +
                                  std::to_string(in_features()) + " input features, got " +
                                  std::to_string(x.rows()));
    }
  }
  [[noreturn]] void missing_cache() const {
    throw std::logic_error("layer '" + name_ + "': backward called without a forward cache");
  }

 private:
  std::string name_;
};

template <typename Scalar>
class FullyConnected final : public Layer<Scalar> {
 public:
  FullyConnected(std::string name, std::int64_t in, std::int64_t out, ParameterSet<Scalar>& params)
      : Layer<Scalar>(name), in_(in), out_(out),
        weight_(&params.add(name + ".weight", {out, in})),
        bias_(&params.add(name + ".bias", {out})) {}

  std::int64_t in_features() const override { return in_; }
  std::int64_t out_features() const override { return out_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) override {
    Matrix<Scalar> y = infer(x);
    input_ = x;
    return y;
  }

  Matrix<Scalar> infer(const Matrix<Scalar>& x) const override {
    this->check_input(x);
    Matrix<Scalar> y(out_, x.cols());
    y.noalias() = weight_->value.matrix() * x;
    y.colwise() += bias_->value.data();
    return y;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, bool need_input_grad) override {
    if (!input_) this->missing_cache();
    weight_->grad.matrix().noalias() += dy * input_->transpose();
    bias_->grad.data() += dy.rowwise().sum();
    if (!need_input_grad) return {};
    Matrix<Scalar> dx(in_, dy.cols());
    dx.noalias() = weight_->value.matrix().transpose() * dy;
    return dx;
  }

  void clear_cache() override { input_.reset(); }

 private:
  std::int64_t in_;
  std::int64_t out_;
  Parameter<Scalar>* weight_;
  Parameter<Scalar>* bias_;
  std::optional<Matrix<Scalar>> input_;
};

// Convolution lowered to a GEMM over an im2col buffer. Weight layout is
// (filters x kernel*kernel*in_channels) with the patch ordered (ky, kx, c).
template <typename Scalar>
class Conv2d final : public Layer<Scalar> {
 public:
  Conv2d(std::string name, const ConvGeometry& g, ParameterSet<Scalar>& params)
      : Layer<Scalar>(name), g_(g),
        weight_(&params.add(name + ".weight", {g.filters, g.patch_size()})),
        bias_(&params.add(name + ".bias", {g.filters})) {
    if (g.kernel < 1 || g.stride < 1 || g.padding < 0 || g.out_height() < 1 ||
        g.out_width() < 1) {
      throw std::invalid_argument("layer '" + name + "': invalid convolution geometry");
    }
  }

  const ConvGeometry& geometry() const { return g_; }
  std::int64_t in_features() const override { return g_.in_features(); }
  std::int64_t out_features() const override { return g_.out_features(); }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) override {
    this->check_input(x);
    im2col(x, cols_);
    batch_ = x.cols();
    cached_ = true;
    return apply(cols_, batch_);
  }

  Matrix<Scalar> infer(const Matrix<Scalar>& x) const override {
    this->check_input(x);
    Matrix<Scalar> cols;
    im2col(x, cols);
    return apply(cols, x.cols());
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, bool need_input_grad) override {
    if (!cached_) this->missing_cache();
    const Eigen::Index positions = std::int64_t{g_.out_height()} * g_.out_width();
    Eigen::Map<const Matrix<Scalar>> dy_map(dy.data(), g_.filters, positions * batch_);
    weight_->grad.matrix().noalias() += dy_map * cols_.transpose();
    bias_->grad.data() += dy_map.rowwise().sum();
    if (!need_input_grad) return {};
    dcols_.resize(g_.patch_size(), positions * batch_);
    dcols_.noalias() = weight_->value.matrix().transpose() * dy_map;
    return col2im(dcols_, batch_);
  }

  void clear_cache() override { cached_ = false; }

 private:
  Matrix<Scalar> apply(const Matrix<Scalar>& cols, Eigen::Index batch) const {
    const Eigen::Index positions = std::int64_t{g_.out_height()} * g_.out_width();
    Matrix<Scalar> y(g_.out_features(), batch);
    Eigen::Map<Matrix<Scalar>> y_map(y.data(), g_.filters, positions * batch);
    y_map.noalias() = weight_->value.matrix() * cols;
    y_map.colwise() += bias_->value.data();
    return y;
  }

  // Valid kernel-column range [lo, hi) for an output column.
  std::pair<int, int> kernel_cols(int ox) const {
    const int ix0 = ox * g_.stride - g_.padding;
    return {std::max(0, -ix0), std::min(g_.kernel, g_.in_width - ix0)};
  }

  void im2col(const Matrix<Scalar>& x, Matrix<Scalar>& cols) const {
    const int oh = g_.out_height(), ow = g_.out_width();
    const int c = g_.in_channels, k = g_.kernel;
    const std::int64_t patch = g_.patch_size();
    const std::int64_t positions = std::int64_t{oh} * ow;
    cols.resize(patch, positions * x.cols());
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
      const Scalar* src = x.col(b).data();
      Scalar* dst_sample = cols.data() + b * positions * patch;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          Scalar* col = dst_sample + (std::int64_t{oy} * ow + ox) * patch;
          const auto [lo, hi] = kernel_cols(ox);
          const int ix0 = ox * g_.stride - g_.padding;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * g_.stride - g_.padding + ky;
            Scalar* row = col + std::int64_t{ky} * k * c;
            if (iy < 0 || iy >= g_.in_height || lo >= hi) {
              std::fill(row, row + std::int64_t{k} * c, Scalar(0));
              continue;
            }
            std::fill(row, row + std::int64_t{lo} * c, Scalar(0));
            std::memcpy(row + std::int64_t{lo} * c,
                        src + (std::int64_t{iy} * g_.in_width + ix0 + lo) * c,
                        sizeof(Scalar) * (hi - lo) * c);
            std::fill(row + std::int64_t{hi} * c, row + std::int64_t{k} * c, Scalar(0));
          }
        }
      }
    }
  }

  Matrix<Scalar> col2im(const Matrix<Scalar>& dcols, Eigen::Index batch) const {
    const int oh = g_.out_height(), ow = g_.out_width();
    const int c = g_.in_channels, k = g_.kernel;
    const std::int64_t patch = g_.patch_size();
    const std::int64_t positions = std::int64_t{oh} * ow;
    Matrix<Scalar> dx = Matrix<Scalar>::Zero(g_.in_features(), batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      Scalar* dst = dx.col(b).data();
      const Scalar* src_sample = dcols.data() + b * positions * patch;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const Scalar* col = src_sample + (std::int64_t{oy} * ow + ox) * patch;
          const auto [lo, hi] = kernel_cols(ox);
          const int ix0 = ox * g_.stride - g_.padding;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * g_.stride - g_.padding + ky;
            if (iy < 0 || iy >= g_.in_height || lo >= hi) continue;
            const Scalar* s = col + (std::int64_t{ky} * k + lo) * c;
            Scalar* d = dst + (std::int64_t{iy} * g_.in_width + ix0 + lo) * c;
            const std::int64_t run = std::int64_t{hi - lo} * c;
            for (std::int64_t i = 0; i < run; ++i) d[i] += s[i];
          }
        }
      }
    }
    return dx;
  }

  ConvGeometry g_;
  Parameter<Scalar>* weight_;
  Parameter<Scalar>* bias_;
  Matrix<Scalar> cols_;
  Matrix<Scalar> dcols_;
  Eigen::Index batch_ = 0;
  bool cached_ = false;
};

template <typename Scalar>
class Relu final : public Layer<Scalar> {
 public:
  Relu(std::string name, std::int64_t width) : Layer<Scalar>(std::move(name)), width_(width) {}

  std::int64_t in_features() const override { return width_; }
  std::int64_t out_features() const override { return width_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) override {
    Matrix<Scalar> y = infer(x);
    output_ = y;
    return y;
  }
  Matrix<Scalar> infer(const Matrix<Scalar>& x) const override {
    this->check_input(x);
    return x.cwiseMax(Scalar(0));
  }
  Matrix<Scalar> backward(const Matrix<Scalar>& dy, bool) override {
    if (!output_) this->missing_cache();
    return (output_->array() > Scalar(0)).select(dy.array(), Scalar(0)).matrix();
  }
  void clear_cache() override { output_.reset(); }

 private:
  std::int64_t width_;
  std::optional<Matrix<Scalar>> output_;
};

template <typename Scalar>
Matrix<Scalar> concat_rows(const Matrix<Scalar>& top, const Matrix<Scalar>& bottom) {
  if (top.cols() != bottom.cols()) {
    throw std::invalid_argument("concat: batch sizes differ (" + std::to_string(top.cols()) +
                                " vs " + std::to_string(bottom.cols()) + ")");
  }
  Matrix<Scalar> out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// Adjoint of concat_rows: the upstream gradient splits into the two segments.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> split_rows(const Matrix<Scalar>& g,
                                                     Eigen::Index top_rows) {
  if (top_rows < 0 || top_rows > g.rows()) throw std::invalid_argument("split: bad segment size");
  return {g.topRows(top_rows), g.bottomRows(g.rows() - top_rows)};
}

template <typename Scalar>
std::unique_ptr<Layer<Scalar>> make_layer(const LayerSpec& spec, ParameterSet<Scalar>& params) {
  switch (spec.kind) {
    case LayerKind::Conv2d:
      return std::make_unique<Conv2d<Scalar>>(spec.name, spec.conv, params);
    case LayerKind::FullyConnected:
      return std::make_unique<FullyConnected<Scalar>>(spec.name, spec.in_features,
                                                      spec.out_features, params);
    case LayerKind::Relu:
      return std::make_unique<Relu<Scalar>>(spec.name, spec.in_features);
    case LayerKind::Concat:
      break;
  }
  throw std::invalid_argument("layer '" + spec.name + "': concat is not a sequential layer");
}

template <typename Scalar>
class Sequential {
 public:
  Sequential() = default;
  Sequential(const std::vector<LayerSpec>& specs, ParameterSet<Scalar>& params) {
    for (const auto& s : specs) {
      if (!layers_.empty() && layers_.back()->out_features() != s.in_features) {
        throw std::invalid_argument("layer '" + s.name + "' input width " +
                                    std::to_string(s.in_features) + " does not follow '" +
                                    layers_.back()->name() + "' output width " +
                                    std::to_string(layers_.back()->out_features()));
      }
      layers_.push_back(make_layer(s, params));
    }
  }

  std::int64_t in_features() const { return layers_.front()->in_features(); }
  std::int64_t out_features() const { return layers_.back()->out_features(); }
  std::size_t size() const { return layers_.size(); }
  const Layer<Scalar>& layer(std::size_t i) const { return *layers_.at(i); }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    Matrix<Scalar> h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
  }

  Matrix<Scalar> infer(const Matrix<Scalar>& x) const {
    Matrix<Scalar> h = x;
    for (const auto& l : layers_) h = l->infer(h);
    return h;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, bool need_input_grad = true) {
    Matrix<Scalar> g = dy;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const bool need = need_input_grad || i > 0;
      g = layers_[i]->backward(g, need);
    }
    return g;
  }

  void clear_cache() {
    for (auto& l : layers_) l->clear_cache();
  }

 private:
  std::vector<std::unique_ptr<Layer<Scalar>>> layers_;
};

}  // namespace fastaj::nn
