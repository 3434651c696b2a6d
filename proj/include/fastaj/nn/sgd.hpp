#pragma once

#include "fastaj/nn/parameter_set.hpp"

#include <functional>
#include <string_view>

namespace fastaj::nn {

// p <- p - lr * grad for every parameter, then zero the gradients.
template <typename Scalar>
void sgd_step(ParameterSet<Scalar>& params, Scalar learning_rate) {
  for (auto& [name, p] : params) {
    p.value.data() -= learning_rate * p.grad.data();
    p.grad.set_zero();
  }
}

// Per-parameter learning rate, e.g. distinct rates for separate heads.
template <typename Scalar>
void sgd_step(ParameterSet<Scalar>& params,
              const std::function<Scalar(std::string_view)>& learning_rate_for) {
  for (auto& [name, p] : params) {
    p.value.data() -= learning_rate_for(name) * p.grad.data();
    p.grad.set_zero();
  }
}

}  // namespace fastaj::nn
