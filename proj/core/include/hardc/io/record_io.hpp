#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hardc::io {

// Five-way beat taxonomy. Codes are fixed: 0=N, 1=FN, 2=PVC, 3=AP, 4=FVN.
enum class ClassLabel : std::uint8_t { N = 0, FN = 1, PVC = 2, AP = 3, FVN = 4 };

inline constexpr std::size_t kNumClasses = 5;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"N", "FN", "PVC", "AP", "FVN"};

std::string_view class_name(ClassLabel label);
std::optional<ClassLabel> class_from_code(long code);
std::optional<ClassLabel> class_from_name(std::string_view name);
inline int class_code(ClassLabel label) { return static_cast<int>(label); }

struct Signal {
  std::vector<double> samples;  // millivolts
  double fs = 360.0;            // Hz

  std::size_t size() const { return samples.size(); }
};

struct Annotation {
  std::size_t sample = 0;
  ClassLabel label = ClassLabel::N;
  bool operator==(const Annotation&) const = default;
};

struct RawRecord {
  Signal signal;
  std::vector<Annotation> annotations;  // strictly increasing sample index
};

// Fixed-width labeled beat segments stored row-major.
class BeatDataset {
 public:
  BeatDataset() = default;
  explicit BeatDataset(std::size_t segment_len) : segment_len_(segment_len) {}

  std::size_t segment_len() const { return segment_len_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> beat(std::size_t i) const;
  ClassLabel label(std::size_t i) const { return labels_[i]; }
  const std::vector<ClassLabel>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  // Appends one row; throws ShapeMismatch when the width disagrees.
  void push_back(std::span<const double> beat, ClassLabel label);
  void append(const BeatDataset& other);
  BeatDataset subset(std::span<const std::size_t> rows) const;

  std::array<std::size_t, kNumClasses> class_counts() const;

  bool operator==(const BeatDataset&) const = default;

 private:
  std::size_t segment_len_ = 0;
  std::vector<double> values_;
  std::vector<ClassLabel> labels_;
};

// Beat CSV: one beat per line, expected_len values then an integer class code.
BeatDataset parse_beat_csv(std::string_view text, std::size_t expected_len);
std::string write_beat_csv(const BeatDataset& ds);

// Raw record text: "fs=<float>" header then one voltage per line; annotation
// lines are "<sample_index>,<code>".
RawRecord parse_raw_record(std::string_view samples_text, std::string_view annotation_text);
std::string write_raw_record_samples(const Signal& signal);
std::string write_raw_record_annotations(const std::vector<Annotation>& annotations);

struct Split {
  BeatDataset train;
  BeatDataset test;
  std::vector<std::size_t> train_rows;  // indices into the input dataset
  std::vector<std::size_t> test_rows;
};

// Per-class stratified split; each class keeps round(fraction * count) rows
// in train, clamped so both sides receive at least one.
Split stratified_split(const BeatDataset& ds, double train_fraction, std::uint64_t seed);

// File helpers shared by the tools.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hardc::io
