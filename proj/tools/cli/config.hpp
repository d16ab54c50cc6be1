#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hardc/dsp/pipeline.hpp"
#include "hardc/gan/cgan.hpp"
#include "hardc/model/bench.hpp"
#include "hardc/model/hardc.hpp"
#include "hardc/model/train.hpp"

namespace hardc::cli {

// Flattened `section.key` settings. Every key must be known.
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();

  // Throws ConfigError for an unknown key.
  void set(const std::string& key, const std::string& value, std::size_t line = 0);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  // Keys starting with "section." with the prefix removed.
  std::map<std::string, std::string> section(const std::string& name) const;

  std::uint64_t seed() const;
  std::string out_dir() const;

  dsp::PipelineConfig pipeline() const;
  // segment_len falls back to the data's length when not configured.
  model::ModelSpec model_spec(std::size_t data_segment_len) const;
  model::TrainHyper train_hyper() const;
  gan::GanSpec gan_spec(std::size_t data_segment_len) const;
  gan::GanHyper gan_hyper() const;
  gan::BalanceTarget balance_target() const;
  model::DilationBenchConfig bench() const;

 private:
  std::map<std::string, std::string> values_;
};

// `key = value` lines, `#` comments, `[section]` headers.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace hardc::cli
