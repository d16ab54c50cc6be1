#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardc/nn/graph.hpp"
#include "hardc/nn/parameters.hpp"

namespace hardc::model {

struct ModelSpec {
  std::size_t segment_len = 360;
  std::size_t rnn_units_block1 = 64;   // BiGRU units per direction
  std::size_t rnn_units_block2 = 128;  // BiLSTM units per direction
  std::size_t conv_blocks = 3;         // L
  std::size_t kernel_width = 8;        // w
  std::size_t filters = 64;            // k
  std::size_t routing_iters = 3;
  std::size_t target_convs = 6;  // M: one per class plus the orphan
  std::size_t attention_dim = 64;  // d_v
  double dropout = 0.5;
  std::size_t classes = 5;

  // Throws SpecError.
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  // Unknown keys and malformed values raise SpecError; missing keys keep defaults.
  static ModelSpec from_map(const std::map<std::string, std::string>& kv);
  static std::vector<std::string> keys();

  bool operator==(const ModelSpec&) const = default;
};

// Dilation of conv block l (1-based): 1 for the first block, then 2^(l-2).
std::vector<std::size_t> dilation_schedule(const ModelSpec& spec);

// (w-1)*2^(L-1) + 1: footprint of the conv stack including the center tap.
std::size_t receptive_field(const ModelSpec& spec);
// Same without the +1.
std::size_t receptive_field_span(const ModelSpec& spec);
// Support of the response of a linear causal stack built with the model's
// kernel widths and dilations to a unit impulse.
std::size_t measure_receptive_field(const ModelSpec& spec);

struct LayerEntry {
  std::string name;
  nn::Shape shape;
};

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  // x [B, segment_len] -> class probabilities [B, classes].
  nn::Var forward(nn::Graph& g, const nn::Tensor& x) const;

  // Eval mode, dropout off. beat length must equal segment_len.
  nn::Tensor predict(std::span<const double> beat) const;
  nn::Tensor predict_batch(const nn::Tensor& x) const;

  std::vector<nn::Parameter*> trainable() { return params_.trainable(); }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  std::vector<LayerEntry> layer_plan() const;

  nn::NamedTensors state() const { return params_.state(); }
  void load_state(const nn::NamedTensors& tensors) { params_.load(tensors); }

 private:
  ModelSpec spec_;
  std::uint64_t seed_;
  // Parameters are mutated through Graph::param during training only.
  mutable nn::ParameterSet params_;
};

}  // namespace hardc::model
