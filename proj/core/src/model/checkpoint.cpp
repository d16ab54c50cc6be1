#include "hardc/model/checkpoint.hpp"

#include <charconv>
#include <cstdio>

#include "hardc/error.hpp"
#include "hardc/io/record_io.hpp"

namespace hardc::model {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T out{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError(std::string("bad ") + what + " '" + s + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

Checkpoint make_checkpoint(const Model& model, std::vector<EpochStats> history) {
  return {model.spec(), model.seed(), std::move(history), model.state()};
}

Model restore_model(const Checkpoint& ckpt) {
  Model m(ckpt.spec, ckpt.seed);
  m.load_state(ckpt.tensors);
  return m;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  nn::Artifact a;
  a.header.emplace_back("component", "classifier");
  for (const auto& [k, v] : ckpt.spec.to_map()) a.header.emplace_back("spec." + k, v);
  a.header.emplace_back("seed", std::to_string(ckpt.seed));
  std::string hist;
  for (const auto& e : ckpt.history) {
    if (!hist.empty()) hist += ";";
    hist += std::to_string(e.epoch) + ":" + real(e.loss) + ":" + real(e.accuracy);
  }
  a.header.emplace_back("history", hist);
  a.tensors = ckpt.tensors;
  return nn::encode_artifact(a);
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  const nn::Artifact a = nn::decode_artifact(bytes);
  if (a.field("component") != "classifier") throw FormatError("not a classifier checkpoint");
  Checkpoint c;
  std::map<std::string, std::string> spec;
  for (const auto& [k, v] : a.header)
    if (k.rfind("spec.", 0) == 0) spec[k.substr(5)] = v;
  try {
    c.spec = ModelSpec::from_map(spec);
    c.spec.validate();
  } catch (const SpecError& e) {
    throw FormatError(std::string("checkpoint spec: ") + e.what());
  }
  c.seed = parse_number<std::uint64_t>(a.field("seed"), "seed");
  const std::string& hist = a.field("history");
  if (!hist.empty()) {
    for (const auto& item : split(hist, ';')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) throw FormatError("bad history entry '" + item + "'");
      c.history.push_back({parse_number<std::size_t>(parts[0], "epoch"), parse_number<double>(parts[1], "loss"),
                           parse_number<double>(parts[2], "accuracy")});
    }
  }
  c.tensors = a.tensors;
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { io::write_file(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path)); }

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,loss,accuracy\n";
  for (const auto& e : history) out += std::to_string(e.epoch) + "," + real(e.loss) + "," + real(e.accuracy) + "\n";
  return out;
}

}  // namespace hardc::model
