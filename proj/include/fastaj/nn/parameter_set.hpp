#pragma once

#include "fastaj/nn/tensor.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace fastaj::nn {

template <typename Scalar>
struct Parameter {
  Tensor<Scalar> value;
  Tensor<Scalar> grad;
};

// Named parameters with same-shape gradient slots. Node-based storage keeps
// references returned by add()/at() valid for the lifetime of the set.
template <typename Scalar>
class ParameterSet {
 public:
  using Map = std::map<std::string, Parameter<Scalar>, std::less<>>;

  Parameter<Scalar>& add(const std::string& name, Shape shape) {
    auto [it, inserted] = params_.try_emplace(name, Parameter<Scalar>{Tensor<Scalar>(shape),
                                                                      Tensor<Scalar>(shape)});
    if (!inserted) throw std::invalid_argument("duplicate parameter '" + name + "'");
    return it->second;
  }

  Parameter<Scalar>& at(std::string_view name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return it->second;
  }
  const Parameter<Scalar>& at(std::string_view name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return it->second;
  }

  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }
  std::size_t size() const { return params_.size(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& [name, p] : params_) p.grad.set_zero();
  }

  // Copies values (not gradients) from a set with identical names and shapes.
  void copy_values_from(const ParameterSet& other) {
    if (other.params_.size() != params_.size()) {
      throw std::invalid_argument("parameter sets differ in size");
    }
    for (auto& [name, p] : params_) {
      const auto& src = other.at(name);
      if (src.value.shape() != p.value.shape()) {
        throw std::invalid_argument("shape mismatch copying '" + name + "'");
      }
      p.value.data() = src.value.data();
    }
  }

  bool values_equal(const ParameterSet& other) const {
    if (other.params_.size() != params_.size()) return false;
    for (const auto& [name, p] : params_) {
      if (!other.contains(name) || !(other.at(name).value == p.value)) return false;
    }
    return true;
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
  }

 private:
  Map params_;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename Scalar, typename Rng>
void xavier_uniform(Tensor<Scalar>& t, std::int64_t fan_in, std::int64_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::int64_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Scalar>(dist(rng));
}

}  // namespace fastaj::nn
