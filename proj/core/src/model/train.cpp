#include "hardc/model/train.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "hardc/error.hpp"
#include "hardc/nn/adam.hpp"
#include "hardc/nn/layers.hpp"

namespace hardc::model {

using nn::Tensor;

Tensor beats_tensor(const io::BeatDataset& ds, std::span<const std::size_t> rows) {
  const std::size_t len = ds.segment_len();
  Tensor x({rows.size(), len});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto beat = ds.beat(rows[r]);
    std::copy(beat.begin(), beat.end(), x.ptr() + r * len);
  }
  return x;
}

std::vector<std::size_t> label_indices(const io::BeatDataset& ds, std::span<const std::size_t> rows) {
  std::vector<std::size_t> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(static_cast<std::size_t>(ds.label(r)));
  return y;
}

std::vector<std::size_t> argmax_rows(const Tensor& probs) {
  const std::size_t k = probs.shape().back();
  std::vector<std::size_t> out;
  for (std::size_t off = 0; off < probs.size(); off += k) {
    const double* row = probs.ptr() + off;
    out.push_back(static_cast<std::size_t>(std::max_element(row, row + k) - row));
  }
  return out;
}

Tensor predict_dataset(const Model& model, const io::BeatDataset& ds, std::size_t chunk) {
  const std::size_t k = model.spec().classes;
  Tensor out({ds.size(), k});
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < ds.size(); start += chunk) {
    const std::size_t end = std::min(ds.size(), start + chunk);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor p = model.predict_batch(beats_tensor(ds, rows));
    std::copy(p.ptr(), p.ptr() + p.size(), out.ptr() + start * k);
  }
  return out;
}

std::vector<EpochStats> train(Model& model, const io::BeatDataset& ds, const TrainHyper& hyper,
                              const EpochCallback& on_epoch) {
  if (ds.empty()) throw EmptyDataset("training set has no beats");
  if (ds.segment_len() != model.spec().segment_len)
    throw ShapeMismatch("dataset segment length " + std::to_string(ds.segment_len()) + " does not match model " +
                        std::to_string(model.spec().segment_len));
  if (hyper.batch == 0) throw SpecError("batch size must be positive");
  for (auto l : ds.labels())
    if (static_cast<std::size_t>(l) >= model.spec().classes) throw IndexOutOfRange("label outside model classes");

  nn::Adam adam({hyper.lr, 0.9, 0.999, 1e-8, hyper.l2});
  const auto params = model.trainable();
  std::mt19937_64 shuffle_rng(hyper.seed);
  std::mt19937_64 dropout_rng(hyper.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochStats> history;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Tensor x = beats_tensor(ds, rows);
      const auto y = label_indices(ds, rows);
      for (auto* p : params) p->zero_grad();
      nn::Graph g(nn::Mode::train, dropout_rng());
      const nn::Var probs = model.forward(g, x);
      const nn::Var loss = nn::ops::cross_entropy(g, probs, y);
      loss_sum += g.value(loss).item() * static_cast<double>(rows.size());
      seen += rows.size();
      g.backward(loss);
      adam.step(params);
    }
    const auto preds = argmax_rows(predict_dataset(model, ds));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) correct += preds[i] == static_cast<std::size_t>(ds.label(i));
    EpochStats stats{epoch, loss_sum / static_cast<double>(seen),
                     static_cast<double>(correct) / static_cast<double>(ds.size())};
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (hyper.stop_accuracy && stats.accuracy >= *hyper.stop_accuracy) break;
  }
  return history;
}

}  // namespace hardc::model
