#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hardc/nn/tensor.hpp"

namespace hardc::metrics {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = 0) : k_(k), counts_(k * k, 0) {}

  std::size_t classes() const { return k_; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * k_ + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;
  std::uint64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

// Throws LengthMismatch and IndexOutOfRange.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                 std::size_t k);

struct ClassMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

// 0/0 ratios are 0.
ClassMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn);
// One-vs-rest for class c. Throws EmptyMatrix when the matrix holds no samples.
ClassMetrics metrics_from_confusion(const ConfusionMatrix& cm, std::size_t c);
// Unweighted mean of the per-class rates; counts are summed.
ClassMetrics macro_average(std::span<const ClassMetrics> per_class);

// Mean categorical cross-entropy over rows of probs [n, K], clipped like
// the training loss. Throws LengthMismatch.
double log_loss(const nn::Tensor& probs, std::span<const std::size_t> labels);

// Pearson correlation of the columns of x [n, d]. Constant columns get a 0
// row/column and a unit diagonal. Throws SignalTooShort when n < 2.
nn::Tensor correlation_matrix(const nn::Tensor& x, std::vector<bool>* constant_columns = nullptr);

}  // namespace hardc::metrics
