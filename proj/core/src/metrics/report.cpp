#include "hardc/metrics/report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hardc/error.hpp"

namespace hardc::metrics {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void finish(EvalReport& r, const std::vector<std::string>& names) {
  if (r.confusion.classes() != names.size()) throw ShapeMismatch("class name count does not match K");
  r.class_names = names;
  r.per_class.clear();
  for (std::size_t c = 0; c < names.size(); ++c) r.per_class.push_back(metrics_from_confusion(r.confusion, c));
  r.macro = macro_average(r.per_class);
  r.sample_accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(r.confusion.total());
}

}  // namespace

EvalReport evaluate_predictions(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                const std::vector<std::string>& class_names) {
  EvalReport r;
  r.confusion = confusion_matrix(preds, labels, class_names.size());
  finish(r, class_names);
  return r;
}

EvalReport evaluate(const nn::Tensor& probs, std::span<const std::size_t> labels,
                    const std::vector<std::string>& class_names) {
  nn::require_rank(probs, 2, "evaluation probabilities");
  if (probs.dim(1) != class_names.size()) throw ShapeMismatch("probability columns do not match class names");
  std::vector<std::size_t> preds;
  const std::size_t k = probs.dim(1);
  for (std::size_t r = 0; r < probs.dim(0); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (probs.at(r, c) > probs.at(r, best)) best = c;
    preds.push_back(best);
  }
  EvalReport r = evaluate_predictions(preds, labels, class_names);
  r.log_loss = log_loss(probs, labels);
  return r;
}

std::vector<MetricsRow> report_rows(const EvalReport& report) {
  std::vector<MetricsRow> rows;
  auto row = [](const std::string& name, const ClassMetrics& m) {
    return MetricsRow{name, m.accuracy, m.precision, m.recall, m.specificity, m.f1};
  };
  for (std::size_t c = 0; c < report.per_class.size(); ++c) rows.push_back(row(report.class_names[c], report.per_class[c]));
  rows.push_back(row("macro", report.macro));
  return rows;
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  const auto rows = report_rows(report);
  std::string out;
  switch (format) {
    case ReportFormat::csv:
      out = "class,accuracy,precision,recall,specificity,f1\n";
      for (const auto& r : rows)
        out += r.name + "," + real(r.accuracy) + "," + real(r.precision) + "," + real(r.recall) + "," +
               real(r.specificity) + "," + real(r.f1) + "\n";
      return out;
    case ReportFormat::json_lines: {
      for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["class"] = r.name;
        j["accuracy"] = r.accuracy;
        j["precision"] = r.precision;
        j["recall"] = r.recall;
        j["specificity"] = r.specificity;
        j["f1"] = r.f1;
        out += j.dump() + "\n";
      }
      nlohmann::ordered_json s;
      s["summary"] = true;
      s["samples"] = report.confusion.total();
      s["sample_accuracy"] = report.sample_accuracy;
      s["log_loss"] = report.log_loss;
      nlohmann::json cm = nlohmann::json::array();
      for (std::size_t t = 0; t < report.confusion.classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < report.confusion.classes(); ++p) row.push_back(report.confusion.at(t, p));
        cm.push_back(row);
      }
      s["confusion"] = cm;
      out += s.dump() + "\n";
      return out;
    }
    case ReportFormat::text: {
      char line[160];
      std::snprintf(line, sizeof line, "%-8s %9s %9s %9s %11s %9s\n", "class", "accuracy", "precision", "recall",
                    "specificity", "f1");
      out += line;
      for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-8s %9.4f %9.4f %9.4f %11.4f %9.4f\n", r.name.c_str(), r.accuracy,
                      r.precision, r.recall, r.specificity, r.f1);
        out += line;
      }
      std::snprintf(line, sizeof line, "samples %llu  sample accuracy %.4f  log loss %.6f  time %.3f s\n",
                    static_cast<unsigned long long>(report.confusion.total()), report.sample_accuracy,
                    report.log_loss, report.wall_seconds);
      out += line;
      return out;
    }
  }
  return out;
}

std::string emit_confusion_csv(const ConfusionMatrix& cm) {
  std::string out;
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      if (p) out += ",";
      out += std::to_string(cm.at(t, p));
    }
    out += "\n";
  }
  return out;
}

namespace {

double field_real(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "not a number: '" + s + "'");
  return v;
}

}  // namespace

std::vector<MetricsRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "class,accuracy,precision,recall,specificity,f1") throw ParseError(1, "unexpected report header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      f.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (f.size() != 6) throw ParseError(lineno, "expected 6 fields, got " + std::to_string(f.size()));
    rows.push_back({f[0], field_real(f[1], lineno), field_real(f[2], lineno), field_real(f[3], lineno),
                    field_real(f[4], lineno), field_real(f[5], lineno)});
  }
  if (lineno == 0) throw ParseError(1, "empty report");
  return rows;
}

std::vector<MetricsRow> parse_report_json_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    if (j.contains("summary")) continue;
    try {
      rows.push_back({j.at("class").get<std::string>(), j.at("accuracy").get<double>(), j.at("precision").get<double>(),
                      j.at("recall").get<double>(), j.at("specificity").get<double>(), j.at("f1").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return rows;
}

}  // namespace hardc::metrics
