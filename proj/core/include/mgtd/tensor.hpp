#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mgtd {

// Dense row-major tensor of doubles. Training math runs in double; the
// checkpoint format narrows to float32 (see checkpoint.hpp).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const { return data.size(); }

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  void fill(double v);
};

// Ordered, named tensor collection. The entire model (encoder and head) lives
// in a single ParamSet, so weight sharing between the two branches of a pair
// is structural rather than enforced by convention.
class ParamSet {
 public:
  Tensor& add(std::string name, Tensor t);
  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }

  std::size_t tensor_count() const { return entries_.size(); }
  std::size_t total_size() const;

  // Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  void zero();

  // Narrows every value through float and back; the identity for values that
  // are already exactly representable in float32. Snapshots taken for
  // checkpointing go through this so that save/load is bit-exact.
  ParamSet quantized_f32() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace mgtd
