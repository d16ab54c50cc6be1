#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hardc/io/record_io.hpp"
#include "hardc/model/hardc.hpp"

namespace hardc::model {

struct TrainHyper {
  std::size_t batch = 32;
  double lr = 1e-3;
  std::size_t epochs = 100;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  // Stop once an epoch's training accuracy reaches this value.
  std::optional<double> stop_accuracy;
};

struct EpochStats {
  std::size_t epoch = 0;    // 1-based
  double loss = 0.0;        // mean cross-entropy over the epoch's batches
  double accuracy = 0.0;    // eval-mode accuracy on the training set after the epoch
  bool operator==(const EpochStats&) const = default;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Batch-mean cross-entropy, with the L2 term applied through the optimizer.
std::vector<EpochStats> train(Model& model, const io::BeatDataset& ds, const TrainHyper& hyper,
                              const EpochCallback& on_epoch = {});

// Stacks beats into [n, segment_len].
nn::Tensor beats_tensor(const io::BeatDataset& ds, std::span<const std::size_t> rows);
std::vector<std::size_t> label_indices(const io::BeatDataset& ds, std::span<const std::size_t> rows);

// Class probabilities for every beat, in eval mode, chunked.
nn::Tensor predict_dataset(const Model& model, const io::BeatDataset& ds, std::size_t chunk = 64);
std::vector<std::size_t> argmax_rows(const nn::Tensor& probs);

}  // namespace hardc::model
