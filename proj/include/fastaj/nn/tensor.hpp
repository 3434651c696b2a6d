#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastaj::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major-agnostic buffer with a shape header. Rank-2 tensors are
// viewed as column-major Eigen matrices (shape[0] rows, shape[1] cols).
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(Vector<Scalar>::Zero(shape_size(shape_))) {}

  Tensor(Shape shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return data_.size(); }

  Vector<Scalar>& data() { return data_; }
  const Vector<Scalar>& data() const { return data_; }

  Scalar* raw() { return data_.data(); }
  const Scalar* raw() const { return data_.data(); }

  Eigen::Map<Matrix<Scalar>> matrix() {
    auto [r, c] = matrix_dims();
    return {data_.data(), r, c};
  }
  Eigen::Map<const Matrix<Scalar>> matrix() const {
    auto [r, c] = matrix_dims();
    return {data_.data(), r, c};
  }

  void set_zero() { data_.setZero(); }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::pair<Eigen::Index, Eigen::Index> matrix_dims() const {
    if (shape_.size() == 1) return {shape_[0], 1};
    if (shape_.size() == 2) return {shape_[0], shape_[1]};
    throw std::logic_error("matrix view requires rank 1 or 2, got " + shape_string(shape_));
  }

  Shape shape_;
  Vector<Scalar> data_;
};

}  // namespace fastaj::nn
