#include "hardc/model/hardc.hpp"

#include <charconv>
#include <cstdio>
#include <random>

#include "hardc/error.hpp"
#include "hardc/model/routing.hpp"
#include "hardc/nn/kernels.hpp"
#include "hardc/nn/layers.hpp"

namespace hardc::model {

using nn::Tensor;
using nn::Var;

void ModelSpec::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw SpecError(what);
  };
  need(segment_len >= 1, "segment_len must be positive");
  need(rnn_units_block1 >= 1 && rnn_units_block2 >= 1, "recurrent units must be positive");
  need(conv_blocks >= 1, "conv_blocks must be at least 1");
  need(conv_blocks <= 24, "conv_blocks above 24 overflows the dilation schedule");
  need(kernel_width >= 2, "kernel_width must be at least 2");
  need(filters >= 1, "filters must be positive");
  need(routing_iters >= 1, "routing_iters must be at least 1");
  need(classes >= 2, "classes must be at least 2");
  need(target_convs >= classes, "target_convs must be at least the number of classes");
  need(attention_dim >= 1, "attention_dim must be positive");
  need(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

std::vector<std::string> ModelSpec::keys() {
  return {"segment_len", "rnn_units_block1", "rnn_units_block2", "conv_blocks", "kernel_width", "filters",
          "routing_iters", "target_convs", "attention_dim", "dropout", "classes"};
}

std::map<std::string, std::string> ModelSpec::to_map() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", dropout);
  return {{"segment_len", std::to_string(segment_len)},
          {"rnn_units_block1", std::to_string(rnn_units_block1)},
          {"rnn_units_block2", std::to_string(rnn_units_block2)},
          {"conv_blocks", std::to_string(conv_blocks)},
          {"kernel_width", std::to_string(kernel_width)},
          {"filters", std::to_string(filters)},
          {"routing_iters", std::to_string(routing_iters)},
          {"target_convs", std::to_string(target_convs)},
          {"attention_dim", std::to_string(attention_dim)},
          {"dropout", buf},
          {"classes", std::to_string(classes)}};
}

namespace {

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw SpecError(key + " expects an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw SpecError(key + " expects a number, got '" + v + "'");
  return out;
}

}  // namespace

ModelSpec ModelSpec::from_map(const std::map<std::string, std::string>& kv) {
  ModelSpec s;
  for (const auto& [k, v] : kv) {
    if (k == "segment_len") s.segment_len = parse_size(k, v);
    else if (k == "rnn_units_block1") s.rnn_units_block1 = parse_size(k, v);
    else if (k == "rnn_units_block2") s.rnn_units_block2 = parse_size(k, v);
    else if (k == "conv_blocks") s.conv_blocks = parse_size(k, v);
    else if (k == "kernel_width") s.kernel_width = parse_size(k, v);
    else if (k == "filters") s.filters = parse_size(k, v);
    else if (k == "routing_iters") s.routing_iters = parse_size(k, v);
    else if (k == "target_convs") s.target_convs = parse_size(k, v);
    else if (k == "attention_dim") s.attention_dim = parse_size(k, v);
    else if (k == "dropout") s.dropout = parse_real(k, v);
    else if (k == "classes") s.classes = parse_size(k, v);
    else throw SpecError("unknown model key '" + k + "'");
  }
  return s;
}

std::vector<std::size_t> dilation_schedule(const ModelSpec& spec) {
  std::vector<std::size_t> d;
  for (std::size_t l = 1; l <= spec.conv_blocks; ++l) d.push_back(l == 1 ? 1 : std::size_t{1} << (l - 2));
  return d;
}

std::size_t receptive_field_span(const ModelSpec& spec) {
  return (spec.kernel_width - 1) * (std::size_t{1} << (spec.conv_blocks - 1));
}

std::size_t receptive_field(const ModelSpec& spec) { return receptive_field_span(spec) + 1; }

std::size_t measure_receptive_field(const ModelSpec& spec) {
  spec.validate();
  const auto dil = dilation_schedule(spec);
  std::size_t reach = 1;
  for (auto d : dil) reach += (spec.kernel_width - 1) * d;
  const std::size_t n = 2 * reach + 1;
  const std::size_t at = reach;  // room on both sides of the impulse
  Tensor x({n, 1}, 0.0);
  x[at] = 1.0;
  const Tensor w({1, 1, spec.kernel_width}, 1.0);
  for (auto d : dil) x = nn::conv1d_dilated(x, w, d, nn::Padding::causal);
  std::size_t first = n, last = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (x[t] != 0.0) {
      first = std::min(first, t);
      last = t;
    }
  return first == n ? 0 : last - first + 1;
}

namespace {

nn::RecurrentWeights recurrent_shapes(nn::CellKind kind, std::size_t in, std::size_t units) {
  return nn::RecurrentWeights::zeros(kind, in, units);
}

void add_recurrent(nn::ParameterSet& ps, const std::string& prefix, nn::CellKind kind, std::size_t in,
                   std::size_t units, std::mt19937_64& rng) {
  const auto z = recurrent_shapes(kind, in, units);
  for (const char* dir : {"fw", "bw"}) {
    const std::string base = prefix + "." + dir + ".";
    ps.add_uniform(base + "w", z.w.shape(), in, rng);
    ps.add_uniform(base + "u", z.u.shape(), units, rng);
    ps.add(base + "b", Tensor(z.b.shape(), 0.0));
  }
}

nn::ops::RecurrentVars bind_recurrent(nn::Graph& g, nn::ParameterSet& ps, const std::string& base) {
  return {g.param(ps.get(base + "w")), g.param(ps.get(base + "u")), g.param(ps.get(base + "b"))};
}

}  // namespace

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  add_recurrent(params_, "bigru", nn::CellKind::gru, 1, spec_.rnn_units_block1, rng);
  add_recurrent(params_, "bilstm", nn::CellKind::lstm, 1, spec_.rnn_units_block2, rng);
  std::size_t in = 2 * (spec_.rnn_units_block1 + spec_.rnn_units_block2);
  for (std::size_t l = 1; l <= spec_.conv_blocks; ++l) {
    const std::string p = "conv" + std::to_string(l) + ".";
    params_.add_uniform(p + "w", {spec_.filters, in, spec_.kernel_width}, in * spec_.kernel_width, rng);
    params_.add(p + "bn.gamma", Tensor({spec_.filters}, 1.0));
    params_.add(p + "bn.beta", Tensor({spec_.filters}, 0.0));
    params_.add(p + "bn.running_mean", Tensor({spec_.filters}, 0.0), false);
    params_.add(p + "bn.running_var", Tensor({spec_.filters}, 1.0), false);
    params_.add_uniform("route" + std::to_string(l) + ".w", {spec_.target_convs, spec_.filters, spec_.attention_dim},
                        spec_.filters, rng);
    params_.add_uniform("attn" + std::to_string(l) + ".q", {spec_.attention_dim}, spec_.attention_dim, rng);
    in = spec_.filters;
  }
  params_.add_uniform("head.w", {spec_.attention_dim, spec_.classes}, spec_.attention_dim, rng);
  params_.add("head.b", Tensor({spec_.classes}, 0.0));
}

std::vector<LayerEntry> Model::layer_plan() const {
  std::vector<LayerEntry> out;
  for (const auto* p : params_.all()) out.push_back({p->name, p->value.shape()});
  return out;
}

Var Model::forward(nn::Graph& g, const Tensor& x) const {
  nn::require_rank(x, 2, "model input");
  if (x.dim(1) != spec_.segment_len)
    throw ShapeMismatch("beat length " + std::to_string(x.dim(1)) + " does not match segment_len " +
                        std::to_string(spec_.segment_len));
  const std::size_t batch = x.dim(0);
  namespace ops = nn::ops;
  const Var in = g.constant(x.reshaped({batch, spec_.segment_len, 1}));
  const Var gru = ops::bidirectional(g, nn::CellKind::gru, in, bind_recurrent(g, params_, "bigru.fw."),
                                     bind_recurrent(g, params_, "bigru.bw."));
  const Var lstm = ops::bidirectional(g, nn::CellKind::lstm, in, bind_recurrent(g, params_, "bilstm.fw."),
                                      bind_recurrent(g, params_, "bilstm.bw."));
  Var h = ops::concat_last(g, gru, lstm);
  const auto dil = dilation_schedule(spec_);
  std::vector<Var> blocks;
  for (std::size_t l = 1; l <= spec_.conv_blocks; ++l) {
    const std::string p = "conv" + std::to_string(l) + ".";
    h = ops::conv1d(g, h, g.param(params_.get(p + "w")), dil[l - 1], nn::Padding::causal);
    h = ops::batch_norm(g, h, g.param(params_.get(p + "bn.gamma")), g.param(params_.get(p + "bn.beta")),
                        params_.get(p + "bn.running_mean").value, params_.get(p + "bn.running_var").value);
    h = ops::relu(g, h);
    const Var cv = routing_op(g, h, g.param(params_.get("route" + std::to_string(l) + ".w")), spec_.routing_iters);
    blocks.push_back(attention_op(g, cv, g.param(params_.get("attn" + std::to_string(l) + ".q"))));
  }
  Var o = ops::stack(g, blocks);  // [B, L, d_v]
  o = ops::max_pool(g, o, std::min<std::size_t>(2, spec_.conv_blocks), 1);
  o = ops::global_avg_pool(g, o);
  o = ops::dropout(g, o, spec_.dropout);
  const Var logits = ops::dense(g, o, g.param(params_.get("head.w")), g.param(params_.get("head.b")));
  return ops::softmax(g, logits);
}

Tensor Model::predict_batch(const Tensor& x) const {
  nn::Graph g(nn::Mode::eval);
  g.set_grad_enabled(false);
  const Var p = forward(g, x);
  return g.value(p);
}

Tensor Model::predict(std::span<const double> beat) const {
  if (beat.size() != spec_.segment_len)
    throw ShapeMismatch("beat length " + std::to_string(beat.size()) + " does not match segment_len " +
                        std::to_string(spec_.segment_len));
  Tensor x({1, beat.size()}, std::vector<double>(beat.begin(), beat.end()));
  return predict_batch(x).reshaped({spec_.classes});
}

}  // namespace hardc::model
