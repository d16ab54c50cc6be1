#include "hardc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hardc/error.hpp"
#include "hardc/nn/kernels.hpp"

namespace hardc::metrics {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < k_; ++p) t += at(truth, p);
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t t = 0;
  for (std::size_t r = 0; r < k_; ++r) t += at(r, pred);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                 std::size_t k) {
  if (preds.size() != labels.size())
    throw LengthMismatch(std::to_string(preds.size()) + " predictions for " + std::to_string(labels.size()) +
                         " labels");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= k || labels[i] >= k)
      throw IndexOutOfRange("class index at position " + std::to_string(i) + " is not below " + std::to_string(k));
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

ClassMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
  ClassMetrics m{tp, fp, fn, tn};
  const double TP = static_cast<double>(tp), FP = static_cast<double>(fp), FN = static_cast<double>(fn),
               TN = static_cast<double>(tn);
  m.accuracy = ratio(TP + TN, TP + TN + FP + FN);
  m.precision = ratio(TP, TP + FP);
  m.recall = ratio(TP, TP + FN);
  m.specificity = ratio(TN, TN + FP);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

ClassMetrics metrics_from_confusion(const ConfusionMatrix& cm, std::size_t c) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw EmptyMatrix("confusion matrix has no samples");
  if (c >= cm.classes()) throw IndexOutOfRange("class " + std::to_string(c) + " outside the matrix");
  const std::uint64_t tp = cm.at(c, c);
  const std::uint64_t fp = cm.col_sum(c) - tp;
  const std::uint64_t fn = cm.row_sum(c) - tp;
  return metrics_from_counts(tp, fp, fn, total - tp - fp - fn);
}

ClassMetrics macro_average(std::span<const ClassMetrics> per_class) {
  ClassMetrics m;
  if (per_class.empty()) return m;
  for (const auto& c : per_class) {
    m.tp += c.tp;
    m.fp += c.fp;
    m.fn += c.fn;
    m.tn += c.tn;
    m.accuracy += c.accuracy;
    m.precision += c.precision;
    m.recall += c.recall;
    m.specificity += c.specificity;
    m.f1 += c.f1;
  }
  const double n = static_cast<double>(per_class.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.specificity /= n;
  m.f1 /= n;
  return m;
}

double log_loss(const nn::Tensor& probs, std::span<const std::size_t> labels) {
  nn::require_rank(probs, 2, "log_loss probabilities");
  if (probs.dim(0) != labels.size())
    throw LengthMismatch(std::to_string(probs.dim(0)) + " probability rows for " + std::to_string(labels.size()) +
                         " labels");
  for (auto l : labels)
    if (l >= probs.dim(1)) throw IndexOutOfRange("label outside probability columns");
  return nn::cross_entropy(probs, labels);
}

nn::Tensor correlation_matrix(const nn::Tensor& x, std::vector<bool>* constant_columns) {
  nn::require_rank(x, 2, "correlation input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (n < 2) throw SignalTooShort("correlation needs at least two rows");
  std::vector<double> mean(d, 0.0), ss(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x.at(r, c);
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double v = x.at(r, c) - mean[c];
      ss[c] += v * v;
    }
  std::vector<bool> constant(d);
  for (std::size_t c = 0; c < d; ++c) constant[c] = ss[c] == 0.0;
  nn::Tensor out({d, d}, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    out.at(i, i) = 1.0;
    if (constant[i]) continue;
    for (std::size_t j = i + 1; j < d; ++j) {
      if (constant[j]) continue;
      double cross = 0.0;
      for (std::size_t r = 0; r < n; ++r) cross += (x.at(r, i) - mean[i]) * (x.at(r, j) - mean[j]);
      const double rho = std::clamp(cross / std::sqrt(ss[i] * ss[j]), -1.0, 1.0);
      out.at(i, j) = rho;
      out.at(j, i) = rho;
    }
  }
  if (constant_columns) *constant_columns = std::move(constant);
  return out;
}

}  // namespace hardc::metrics
