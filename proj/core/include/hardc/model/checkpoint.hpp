#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hardc/model/hardc.hpp"
#include "hardc/model/train.hpp"
#include "hardc/nn/blob.hpp"

namespace hardc::model {

struct Checkpoint {
  ModelSpec spec;
  std::uint64_t seed = 0;
  std::vector<EpochStats> history;
  nn::NamedTensors tensors;
};

Checkpoint make_checkpoint(const Model& model, std::vector<EpochStats> history);
// Rebuilds the model and loads every tensor; throws FormatError on a
// missing or extra tensor.
Model restore_model(const Checkpoint& ckpt);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// "epoch,loss,accuracy" with one row per epoch.
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace hardc::model
