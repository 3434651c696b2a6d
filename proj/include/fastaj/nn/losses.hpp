#pragma once

#include "fastaj/nn/tensor.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace fastaj::nn {

template <typename Scalar>
struct LossResult {
  Scalar loss = 0;
  Matrix<Scalar> grad;  // d(loss)/d(prediction), same shape as the prediction
};

// Batch-mean Euclidean error, one sample per column. The per-sample gradient
// is the unit residual (ĉ - c)/||ĉ - c||, taken as zero where ĉ == c.
template <typename Scalar>
LossResult<Scalar> rmse_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("rmse_loss: prediction and target shapes differ");
  }
  LossResult<Scalar> out;
  out.grad = Matrix<Scalar>::Zero(pred.rows(), pred.cols());
  if (pred.cols() == 0) return out;
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(pred.cols());
  for (Eigen::Index b = 0; b < pred.cols(); ++b) {
    const Vector<Scalar> residual = pred.col(b) - target.col(b);
    const Scalar norm = residual.norm();
    out.loss += norm;
    if (norm > Scalar(0)) out.grad.col(b) = residual * (inv_batch / norm);
  }
  out.loss *= inv_batch;
  return out;
}

// Batch-mean squared TD error on the taken action only.
template <typename Scalar>
LossResult<Scalar> dqn_loss(const Matrix<Scalar>& q_pred, std::span<const int> actions,
                            std::span<const Scalar> targets) {
  if (static_cast<Eigen::Index>(actions.size()) != q_pred.cols() ||
      targets.size() != actions.size()) {
    throw std::invalid_argument("dqn_loss: batch size mismatch");
  }
  LossResult<Scalar> out;
  out.grad = Matrix<Scalar>::Zero(q_pred.rows(), q_pred.cols());
  if (q_pred.cols() == 0) return out;
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(q_pred.cols());
  for (Eigen::Index b = 0; b < q_pred.cols(); ++b) {
    const int a = actions[b];
    if (a < 0 || a >= q_pred.rows()) {
      throw std::out_of_range("dqn_loss: action " + std::to_string(a) + " out of range");
    }
    const Scalar td = targets[b] - q_pred(a, b);
    out.loss += td * td;
    out.grad(a, b) = Scalar(-2) * td * inv_batch;
  }
  out.loss *= inv_batch;
  return out;
}

// eta = r + gamma * max_a' Q(S', a'; target params)
template <typename Scalar>
Scalar dqn_target(Scalar reward, Scalar gamma, const Eigen::Ref<const Vector<Scalar>>& next_q) {
  return reward + gamma * next_q.maxCoeff();
}

}  // namespace fastaj::nn
