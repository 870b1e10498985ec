#include "mgtd/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mgtd {

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, 0.0);
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

Tensor& ParamSet::add(std::string name, Tensor t) {
  if (contains(name)) {
    throw std::runtime_error("ParamSet: duplicate tensor name: " + name);
  }
  entries_.emplace_back(std::move(name), std::move(t));
  return entries_.back().second;
}

Tensor& ParamSet::get(std::string_view name) {
  for (auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw std::runtime_error("ParamSet: no tensor named: " + std::string(name));
}

const Tensor& ParamSet::get(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw std::runtime_error("ParamSet: no tensor named: " + std::string(name));
}

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

std::size_t ParamSet::total_size() const {
  return std::accumulate(entries_.begin(), entries_.end(), std::size_t{0},
                         [](std::size_t acc, const auto& e) {
                           return acc + e.second.size();
                         });
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) {
    out.add(name, Tensor(t.shape));
  }
  return out;
}

void ParamSet::zero() {
  for (auto& [name, t] : entries_) t.fill(0.0);
}

ParamSet ParamSet::quantized_f32() const {
  ParamSet out = *this;
  for (auto& [name, t] : out.entries()) {
    for (double& v : t.data) v = static_cast<double>(static_cast<float>(v));
  }
  return out;
}

}  // namespace mgtd
