#pragma once

#include "fastaj/nn/parameter_set.hpp"

#include <string>
#include <string_view>
#include <vector>

// Byte layout (all integers u64 little-endian, values f64 little-endian):
//   magic "FAJCKPT1" (8 bytes)
//   tensor count
//   per tensor: name length, name bytes (UTF-8, no terminator),
//               rank, rank dims, prod(dims) values
// A text manifest with one "name shape" line per tensor is written next to
// the container as <path>.manifest.txt.

namespace fastaj::nn {

struct NamedTensor {
  std::string name;
  Tensor<double> tensor;
};

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

// Parameter values as tensors named prefix + parameter name.
std::vector<NamedTensor> collect_values(const ParameterSet<double>& params, std::string_view prefix);
// Inverse of collect_values; every parameter must be present with a matching shape.
void restore_values(ParameterSet<double>& params, const std::vector<NamedTensor>& tensors,
                    std::string_view prefix);

}  // namespace fastaj::nn
