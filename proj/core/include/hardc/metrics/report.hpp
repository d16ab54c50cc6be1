#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hardc/metrics/metrics.hpp"

namespace hardc::metrics {

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  ClassMetrics macro;
  double sample_accuracy = 0.0;  // trace / total
  double log_loss = 0.0;
  ConfusionMatrix confusion;
  double wall_seconds = 0.0;
};

// probs [n, K]; K must equal class_names.size().
EvalReport evaluate(const nn::Tensor& probs, std::span<const std::size_t> labels,
                    const std::vector<std::string>& class_names);
// Without probabilities; log_loss stays 0.
EvalReport evaluate_predictions(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                const std::vector<std::string>& class_names);

enum class ReportFormat { text, csv, json_lines };

// csv: class,accuracy,precision,recall,specificity,f1 plus a trailing macro row.
// json_lines: one object per class, a macro object and a summary object.
// Wall-clock time appears only in the text form so files stay reproducible.
std::string emit_report(const EvalReport& report, ReportFormat format);
std::string emit_confusion_csv(const ConfusionMatrix& cm);

struct MetricsRow {
  std::string name;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, specificity = 0.0, f1 = 0.0;
  bool operator==(const MetricsRow&) const = default;
};

std::vector<MetricsRow> report_rows(const EvalReport& report);  // classes then macro
// Throws ParseError.
std::vector<MetricsRow> parse_report_csv(const std::string& text);
std::vector<MetricsRow> parse_report_json_lines(const std::string& text);

}  // namespace hardc::metrics
