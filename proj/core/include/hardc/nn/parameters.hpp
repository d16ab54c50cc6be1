#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hardc/nn/blob.hpp"
#include "hardc/nn/graph.hpp"

namespace hardc::nn {

// Owns named parameters at stable addresses, in creation order.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, Tensor value, bool trainable = true);
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn from rng.
  Parameter& add_uniform(const std::string& name, Shape shape, std::size_t fan_in, std::mt19937_64& rng);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter*> trainable();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  void zero_grad();

  NamedTensors state() const;
  // Every stored name must appear exactly once with the same shape.
  void load(const NamedTensors& tensors);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace hardc::nn
