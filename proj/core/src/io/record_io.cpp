#include "hardc/io/record_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "hardc/error.hpp"

namespace hardc::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long> parse_integer(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Calls fn(line_number, line) for each line, including blank ones.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = nl == std::string_view::npos ? text : text.substr(0, nl);
    ++line_no;
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string_view class_name(ClassLabel label) { return kClassNames[static_cast<std::size_t>(label)]; }

std::optional<ClassLabel> class_from_code(long code) {
  if (code < 0 || code >= static_cast<long>(kNumClasses)) return std::nullopt;
  return static_cast<ClassLabel>(code);
}

std::optional<ClassLabel> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return static_cast<ClassLabel>(i);
  return std::nullopt;
}

std::span<const double> BeatDataset::beat(std::size_t i) const {
  return std::span<const double>(values_).subspan(i * segment_len_, segment_len_);
}

void BeatDataset::push_back(std::span<const double> beat, ClassLabel label) {
  if (segment_len_ == 0 && labels_.empty()) segment_len_ = beat.size();
  if (beat.size() != segment_len_)
    throw ShapeMismatch("beat has " + std::to_string(beat.size()) + " samples, dataset expects " +
                        std::to_string(segment_len_));
  values_.insert(values_.end(), beat.begin(), beat.end());
  labels_.push_back(label);
}

void BeatDataset::append(const BeatDataset& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push_back(other.beat(i), other.label(i));
}

BeatDataset BeatDataset::subset(std::span<const std::size_t> rows) const {
  BeatDataset out(segment_len_);
  out.values_.reserve(rows.size() * segment_len_);
  out.labels_.reserve(rows.size());
  for (auto r : rows) out.push_back(beat(r), label(r));
  return out;
}

std::array<std::size_t, kNumClasses> BeatDataset::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (auto l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

BeatDataset parse_beat_csv(std::string_view text, std::size_t expected_len) {
  BeatDataset ds(expected_len);
  std::vector<double> row;
  row.reserve(expected_len);
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    row.clear();
    std::size_t fields = 0;
    std::optional<long> code;
    while (true) {
      const auto comma = line.find(',');
      const std::string_view field = comma == std::string_view::npos ? line : line.substr(0, comma);
      ++fields;
      if (fields > expected_len + 1)
        throw ParseError(line_no, "expected " + std::to_string(expected_len + 1) + " fields");
      if (fields <= expected_len) {
        auto v = parse_double(field);
        if (!v) throw ParseError(line_no, "non-numeric field " + std::to_string(fields));
        row.push_back(*v);
      } else {
        code = parse_integer(field);
        if (!code) throw ParseError(line_no, "class code is not an integer");
      }
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (fields != expected_len + 1)
      throw ParseError(line_no, "expected " + std::to_string(expected_len + 1) + " fields, found " +
                                    std::to_string(fields));
    auto label = class_from_code(*code);
    if (!label) throw ParseError(line_no, "class code " + std::to_string(*code) + " outside 0-4");
    ds.push_back(row, *label);
  });
  return ds;
}

std::string write_beat_csv(const BeatDataset& ds) {
  std::string out;
  out.reserve(ds.size() * (ds.segment_len() * 12 + 4));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.beat(i)) {
      append_number(out, v);
      out.push_back(',');
    }
    out += std::to_string(class_code(ds.label(i)));
    out.push_back('\n');
  }
  return out;
}

RawRecord parse_raw_record(std::string_view samples_text, std::string_view annotation_text) {
  RawRecord rec;
  bool have_header = false;
  for_each_line(samples_text, [&](std::size_t line_no, std::string_view line) {
    line = trim(line);
    if (!have_header) {
      if (line.substr(0, 3) != "fs=") throw ParseError(line_no, "missing 'fs=<float>' header");
      auto fs = parse_double(line.substr(3));
      if (!fs || *fs <= 0.0) throw ParseError(line_no, "sampling rate must be a positive number");
      rec.signal.fs = *fs;
      have_header = true;
      return;
    }
    if (line.empty()) return;
    auto v = parse_double(line);
    if (!v) throw ParseError(line_no, "non-numeric sample");
    rec.signal.samples.push_back(*v);
  });
  if (!have_header) throw ParseError(1, "missing 'fs=<float>' header");

  for_each_line(annotation_text, [&](std::size_t line_no, std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError(line_no, "expected '<index>,<code>'");
    auto index = parse_integer(line.substr(0, comma));
    auto code = parse_integer(line.substr(comma + 1));
    if (!index || *index < 0) throw ParseError(line_no, "sample index must be a non-negative integer");
    if (!code) throw ParseError(line_no, "class code is not an integer");
    auto label = class_from_code(*code);
    if (!label) throw ParseError(line_no, "class code " + std::to_string(*code) + " outside 0-4");
    const auto idx = static_cast<std::size_t>(*index);
    if (idx >= rec.signal.samples.size())
      throw ParseError(line_no, "sample index " + std::to_string(idx) + " beyond signal length " +
                                    std::to_string(rec.signal.samples.size()));
    if (!rec.annotations.empty() && idx <= rec.annotations.back().sample)
      throw ParseError(line_no, "annotation indices must be strictly increasing");
    rec.annotations.push_back({idx, *label});
  });
  return rec;
}

std::string write_raw_record_samples(const Signal& signal) {
  std::string out = "fs=";
  append_number(out, signal.fs);
  out.push_back('\n');
  for (double v : signal.samples) {
    append_number(out, v);
    out.push_back('\n');
  }
  return out;
}

std::string write_raw_record_annotations(const std::vector<Annotation>& annotations) {
  std::string out;
  for (const auto& a : annotations)
    out += std::to_string(a.sample) + "," + std::to_string(class_code(a.label)) + "\n";
  return out;
}

Split stratified_split(const BeatDataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw SpecError("train_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);

  std::mt19937_64 rng(seed);
  Split split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 2)
      throw InsufficientClass("class " + std::string(kClassNames[c]) + " has " + std::to_string(rows.size()) +
                              " member(s); at least 2 are required");
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows.size()) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    split.train_rows.insert(split.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_rows.insert(split.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  split.train = ds.subset(split.train_rows);
  split.test = ds.subset(split.test_rows);
  return split;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace hardc::io
