#include "fastaj/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fastaj::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'F', 'A', 'J', 'C', 'K', 'P', 'T', '1'};
// Guards against reading garbage lengths from a corrupt file.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw std::runtime_error("checkpoint " + path + " is truncated");
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  put_u64(out, tensors.size());
  std::ofstream manifest(path + ".manifest.txt", std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot open " + path + ".manifest.txt for writing");
  manifest << "# fastaj checkpoint, " << tensors.size() << " tensors, f64 little-endian\n";
  for (const auto& [name, t] : tensors) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, t.shape().size());
    for (auto d : t.shape()) put_u64(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(t.raw()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    manifest << name << ' ' << shape_string(t.shape()) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error(path + " is not a fastaj checkpoint");
  }
  const std::uint64_t count = get_u64(in, path);
  if (count > kMaxCount) throw std::runtime_error("checkpoint " + path + " is corrupt");
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = get_u64(in, path);
    if (len > kMaxCount) throw std::runtime_error("checkpoint " + path + " is corrupt");
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) {
      throw std::runtime_error("checkpoint " + path + " is truncated");
    }
    const std::uint64_t rank = get_u64(in, path);
    if (rank > 8) throw std::runtime_error("checkpoint " + path + " is corrupt");
    Shape shape;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const std::uint64_t d = get_u64(in, path);
      if (d > kMaxCount) throw std::runtime_error("checkpoint " + path + " is corrupt");
      shape.push_back(static_cast<std::int64_t>(d));
    }
    Tensor<double> t(shape);
    if (!in.read(reinterpret_cast<char*>(t.raw()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw std::runtime_error("checkpoint " + path + " is truncated");
    }
    tensors.push_back({std::move(name), std::move(t)});
  }
  return tensors;
}

std::vector<NamedTensor> collect_values(const ParameterSet<double>& params,
                                        std::string_view prefix) {
  std::vector<NamedTensor> out;
  for (const auto& [name, p] : params) out.push_back({std::string(prefix) + name, p.value});
  return out;
}

void restore_values(ParameterSet<double>& params, const std::vector<NamedTensor>& tensors,
                    std::string_view prefix) {
  for (auto& [name, p] : params) {
    const std::string key = std::string(prefix) + name;
    const NamedTensor* found = nullptr;
    for (const auto& t : tensors) {
      if (t.name == key) found = &t;
    }
    if (!found) throw std::runtime_error("checkpoint has no tensor '" + key + "'");
    if (found->tensor.shape() != p.value.shape()) {
      throw std::runtime_error("tensor '" + key + "' has shape " +
                               shape_string(found->tensor.shape()) + ", expected " +
                               shape_string(p.value.shape()));
    }
    p.value = found->tensor;
  }
}

}  // namespace fastaj::nn
