#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fragforge/nn/tensor.hpp"

namespace fragforge::nn {

using ParamId = std::size_t;

// Named, ordered collection of parameter tensors.
class ParameterSet {
 public:
  ParamId add(std::string name, Tensor value);

  std::size_t size() const { return values_.size(); }
  const std::string& name(ParamId id) const { return names_[id]; }
  const Tensor& value(ParamId id) const { return values_[id]; }
  Tensor& value(ParamId id) { return values_[id]; }
  std::optional<ParamId> find(std::string_view name) const;
  std::size_t element_count() const;

  std::vector<Tensor> zeros_like() const;
  bool operator==(const ParameterSet& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, ParamId> index_;
};

// One gradient tensor per parameter, same order and shapes.
using Gradients = std::vector<Tensor>;

void add_into(Gradients& acc, const Gradients& g, double scale = 1.0);
double global_norm(const Gradients& g);
// Rescales so the global L2 norm is at most `max_norm`; returns the norm before clipping.
double clip_global_norm(Gradients& g, double max_norm);

// Fills `t` with a (semi-)orthogonal matrix scaled by `gain`.
void orthogonal_init(Tensor& t, std::mt19937_64& rng, double gain = 1.0);

}  // namespace fragforge::nn
