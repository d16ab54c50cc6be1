#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "hardc/error.hpp"
#include "hardc/io/record_io.hpp"

namespace hardc::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(0, key + ": cannot parse '" + v + "'");
  return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"seed", "out"};
    for (const auto& p : dsp::PipelineConfig::keys()) k.push_back("pipeline." + p);
    for (const auto& m : model::ModelSpec::keys()) k.push_back("model." + m);
    for (const char* t : {"batch", "lr", "epochs", "l2", "stop_accuracy"}) k.push_back(std::string("train.") + t);
    for (const char* g : {"latent_dim", "channels", "lstm_units", "kernel", "downsample", "generator_loss", "epochs",
                          "batch", "lr_d", "lr_g", "beta1", "d_steps", "g_steps"})
      k.push_back(std::string("gan.") + g);
    for (const char* s : {"mode", "counts"}) k.push_back(std::string("synth.") + s);
    for (const char* b : {"width", "levels", "steps", "channels", "iterations", "rounds"})
      k.push_back(std::string("bench.") + b);
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value, std::size_t line) {
  const auto& known = known_keys();
  if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(line, "unknown key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, std::string> RunConfig::section(const std::string& name) const {
  std::map<std::string, std::string> out;
  const std::string prefix = name + ".";
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
  return out;
}

std::uint64_t RunConfig::seed() const {
  auto v = get("seed");
  return v ? number<std::uint64_t>("seed", *v) : 0;
}

std::string RunConfig::out_dir() const { return get("out").value_or("out"); }

dsp::PipelineConfig RunConfig::pipeline() const { return dsp::PipelineConfig::from_map(section("pipeline")); }

model::ModelSpec RunConfig::model_spec(std::size_t data_segment_len) const {
  auto kv = section("model");
  if (!kv.count("segment_len")) kv["segment_len"] = std::to_string(data_segment_len);
  try {
    auto spec = model::ModelSpec::from_map(kv);
    spec.validate();
    return spec;
  } catch (const SpecError& e) {
    throw ConfigError(0, e.what());
  }
}

model::TrainHyper RunConfig::train_hyper() const {
  model::TrainHyper h;
  h.seed = seed();
  for (const auto& [k, v] : section("train")) {
    if (k == "batch") h.batch = number<std::size_t>("train.batch", v);
    else if (k == "lr") h.lr = number<double>("train.lr", v);
    else if (k == "epochs") h.epochs = number<std::size_t>("train.epochs", v);
    else if (k == "l2") h.l2 = number<double>("train.l2", v);
    else if (k == "stop_accuracy") h.stop_accuracy = number<double>("train.stop_accuracy", v);
  }
  if (h.batch == 0) throw ConfigError(0, "train.batch must be positive");
  if (h.epochs > 100) throw ConfigError(0, "train.epochs is capped at 100");
  return h;
}

gan::GanSpec RunConfig::gan_spec(std::size_t data_segment_len) const {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : section("gan"))
    if (k == "latent_dim" || k == "channels" || k == "lstm_units" || k == "kernel" || k == "downsample" ||
        k == "generator_loss")
      kv[k] = v;
  kv["segment_len"] = std::to_string(data_segment_len);
  try {
    auto spec = gan::GanSpec::from_map(kv);
    spec.validate();
    return spec;
  } catch (const SpecError& e) {
    throw ConfigError(0, e.what());
  }
}

gan::GanHyper RunConfig::gan_hyper() const {
  gan::GanHyper h;
  h.seed = seed();
  for (const auto& [k, v] : section("gan")) {
    if (k == "epochs") h.epochs = number<std::size_t>("gan.epochs", v);
    else if (k == "batch") h.batch = number<std::size_t>("gan.batch", v);
    else if (k == "lr_d") h.lr_d = number<double>("gan.lr_d", v);
    else if (k == "lr_g") h.lr_g = number<double>("gan.lr_g", v);
    else if (k == "beta1") h.beta1 = number<double>("gan.beta1", v);
    else if (k == "d_steps") h.d_steps = number<std::size_t>("gan.d_steps", v);
    else if (k == "g_steps") h.g_steps = number<std::size_t>("gan.g_steps", v);
  }
  if (h.batch == 0) throw ConfigError(0, "gan.batch must be positive");
  return h;
}

gan::BalanceTarget RunConfig::balance_target() const {
  gan::BalanceTarget t;
  const std::string mode = get("synth.mode").value_or("match_majority");
  if (mode == "match_majority") {
    t.mode = gan::BalanceMode::match_majority;
  } else if (mode == "per_class") {
    t.mode = gan::BalanceMode::per_class;
    const auto counts = get("synth.counts");
    if (!counts) throw ConfigError(0, "synth.mode = per_class needs synth.counts");
    std::stringstream ss(*counts);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
      if (i >= t.counts.size()) throw ConfigError(0, "synth.counts lists more than 5 classes");
      t.counts[i++] = number<std::size_t>("synth.counts", trim(item));
    }
    if (i != t.counts.size()) throw ConfigError(0, "synth.counts needs one count per class");
  } else {
    throw ConfigError(0, "synth.mode must be match_majority or per_class");
  }
  return t;
}

model::DilationBenchConfig RunConfig::bench() const {
  model::DilationBenchConfig b;
  b.seed = seed();
  for (const auto& [k, v] : section("bench")) {
    if (k == "width") b.width = number<std::size_t>("bench.width", v);
    else if (k == "levels") b.levels = number<std::size_t>("bench.levels", v);
    else if (k == "steps") b.steps = number<std::size_t>("bench.steps", v);
    else if (k == "channels") b.channels = number<std::size_t>("bench.channels", v);
    else if (k == "iterations") b.iterations = number<std::size_t>("bench.iterations", v);
    else if (k == "rounds") b.rounds = number<std::size_t>("bench.rounds", v);
  }
  if (b.width < 2 || b.levels < 1 || b.steps < 1 || b.channels < 1 || b.iterations < 1 || b.rounds < 1)
    throw ConfigError(0, "bench sizes must be positive (width >= 2)");
  return b;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "missing key");
    cfg.set(section.empty() ? key : section + "." + key, value, lineno);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const FormatError&) {
    throw ConfigError(0, "cannot read config file " + path);
  }
  return parse_config(text);
}

}  // namespace hardc::cli
