#include "hardc/gan/cgan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "hardc/error.hpp"
#include "hardc/nn/blob.hpp"
#include "hardc/nn/layers.hpp"

namespace hardc::gan {

using nn::Tensor;
using nn::Var;
namespace ops = nn::ops;

namespace {

double mean_log(std::span<const double> d, bool complement) {
  if (d.empty()) throw EmptyDataset("GAN loss over an empty batch");
  double s = 0.0;
  for (double v : d) {
    const double c = std::clamp(v, kGanClip, 1.0 - kGanClip);
    s += std::log(complement ? 1.0 - c : c);
  }
  return s / static_cast<double>(d.size());
}

}  // namespace

GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake, GeneratorLoss kind) {
  GanLosses l;
  l.d = -mean_log(d_real, false) - mean_log(d_fake, true);
  l.g = kind == GeneratorLoss::non_saturating ? -mean_log(d_fake, false) : mean_log(d_fake, true);
  return l;
}

void GanSpec::validate() const {
  if (latent_dim < 1 || segment_len < 4 || channels < 1 || lstm_units < 1 || kernel < 1 || downsample < 1 ||
      classes < 1)
    throw SpecError("GAN sizes must be positive and segment_len at least 4");
}

std::size_t GanSpec::base_steps() const { return (segment_len + downsample - 1) / downsample; }

std::map<std::string, std::string> GanSpec::to_map() const {
  return {{"latent_dim", std::to_string(latent_dim)},
          {"segment_len", std::to_string(segment_len)},
          {"channels", std::to_string(channels)},
          {"lstm_units", std::to_string(lstm_units)},
          {"kernel", std::to_string(kernel)},
          {"downsample", std::to_string(downsample)},
          {"classes", std::to_string(classes)},
          {"generator_loss", generator_loss == GeneratorLoss::minimax ? "minimax" : "non_saturating"}};
}

GanSpec GanSpec::from_map(const std::map<std::string, std::string>& kv) {
  GanSpec s;
  for (const auto& [k, v] : kv) {
    if (k == "generator_loss") {
      if (v == "minimax") s.generator_loss = GeneratorLoss::minimax;
      else if (v == "non_saturating") s.generator_loss = GeneratorLoss::non_saturating;
      else throw SpecError("generator_loss must be non_saturating or minimax, got '" + v + "'");
      continue;
    }
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) throw SpecError(k + " expects an integer, got '" + v + "'");
    if (k == "latent_dim") s.latent_dim = n;
    else if (k == "segment_len") s.segment_len = n;
    else if (k == "channels") s.channels = n;
    else if (k == "lstm_units") s.lstm_units = n;
    else if (k == "kernel") s.kernel = n;
    else if (k == "downsample") s.downsample = n;
    else if (k == "classes") s.classes = n;
    else throw SpecError("unknown GAN key '" + k + "'");
  }
  return s;
}

namespace {

void check_labels(std::span<const std::size_t> labels, std::size_t batch, std::size_t classes) {
  if (labels.size() != batch) throw LengthMismatch("one condition label per row is required");
  for (auto l : labels)
    if (l >= classes) throw IndexOutOfRange("condition label " + std::to_string(l) + " out of range");
}

}  // namespace

Generator::Generator(GanSpec spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t in = spec_.latent_dim + spec_.classes;
  const std::size_t t0 = spec_.base_steps(), c = spec_.channels, u = spec_.lstm_units;
  params_.add_uniform("fc.w", {in, t0 * c}, in, rng);
  params_.add("fc.b", Tensor({t0 * c}, 0.0));
  params_.add_uniform("conv.w", {c, c, spec_.kernel}, c * spec_.kernel, rng);
  params_.add("conv.b", Tensor({c}, 0.0));
  const auto z = nn::RecurrentWeights::zeros(nn::CellKind::lstm, c, u);
  for (const char* dir : {"fw", "bw"}) {
    const std::string base = std::string("lstm.") + dir + ".";
    params_.add_uniform(base + "w", z.w.shape(), c, rng);
    params_.add_uniform(base + "u", z.u.shape(), u, rng);
    params_.add(base + "b", Tensor(z.b.shape(), 0.0));
  }
  params_.add_uniform("out.w", {t0 * 2 * u, spec_.segment_len}, t0 * 2 * u, rng);
  params_.add("out.b", Tensor({spec_.segment_len}, 0.0));
}

Var Generator::forward(nn::Graph& g, const Tensor& z, std::span<const std::size_t> labels) const {
  nn::require_rank(z, 2, "latent batch");
  if (z.dim(1) != spec_.latent_dim) throw ShapeMismatch("latent width does not match latent_dim");
  const std::size_t batch = z.dim(0), ld = spec_.latent_dim, k = spec_.classes;
  check_labels(labels, batch, k);
  Tensor in({batch, ld + k});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(z.ptr() + b * ld, z.ptr() + (b + 1) * ld, in.ptr() + b * (ld + k));
    in.at(b, ld + labels[b]) = 1.0;
  }
  const std::size_t t0 = spec_.base_steps(), c = spec_.channels, u = spec_.lstm_units;
  auto p = [&](const char* name) { return g.param(params_.get(name)); };
  Var h = ops::dense(g, g.constant(std::move(in)), p("fc.w"), p("fc.b"));
  h = ops::relu(g, ops::reshape(g, h, {batch, t0, c}));
  h = ops::relu(g, ops::conv1d(g, h, p("conv.w"), p("conv.b"), 1, nn::Padding::same));
  h = ops::bidirectional(g, nn::CellKind::lstm, h, {p("lstm.fw.w"), p("lstm.fw.u"), p("lstm.fw.b")},
                         {p("lstm.bw.w"), p("lstm.bw.u"), p("lstm.bw.b")});
  h = ops::reshape(g, h, {batch, t0 * 2 * u});
  return ops::dense(g, h, p("out.w"), p("out.b"));
}

Tensor Generator::generate(const Tensor& z, std::span<const std::size_t> labels) const {
  nn::Graph g(nn::Mode::eval);
  g.set_grad_enabled(false);
  return g.value(forward(g, z, labels));
}

Discriminator::Discriminator(GanSpec spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t c = spec_.channels, kw = spec_.kernel;
  const std::size_t pooled = (spec_.segment_len - 2) / 2 + 1;
  params_.add_uniform("conv1.w", {c, 1, kw}, kw, rng);
  params_.add("conv1.b", Tensor({c}, 0.0));
  params_.add_uniform("embed", {spec_.classes, c}, 1, rng);
  params_.add_uniform("conv2.w", {c, c, kw}, c * kw, rng);
  params_.add("conv2.b", Tensor({c}, 0.0));
  params_.add_uniform("out.w", {pooled * c, 1}, pooled * c, rng);
  params_.add("out.b", Tensor({1}, 0.0));
}

Var Discriminator::forward(nn::Graph& g, Var x, std::span<const std::size_t> labels) const {
  const Tensor& xv = g.value(x);
  nn::require_rank(xv, 2, "discriminator input");
  if (xv.dim(1) != spec_.segment_len) throw ShapeMismatch("beat length does not match segment_len");
  const std::size_t batch = xv.dim(0), c = spec_.channels;
  check_labels(labels, batch, spec_.classes);
  auto p = [&](const char* name) { return g.param(params_.get(name)); };
  Var h = ops::reshape(g, x, {batch, spec_.segment_len, 1});
  h = ops::conv1d(g, h, p("conv1.w"), p("conv1.b"), 1, nn::Padding::same);
  h = ops::relu(g, ops::add_class_embedding(g, h, p("embed"), labels));
  h = ops::relu(g, ops::conv1d(g, h, p("conv2.w"), p("conv2.b"), 2, nn::Padding::same));
  h = ops::max_pool(g, h, 2, 2);
  h = ops::reshape(g, h, {batch, g.value(h).dim(1) * c});
  return ops::sigmoid(g, ops::dense(g, h, p("out.w"), p("out.b")));
}

Tensor Discriminator::score(const Tensor& x, std::span<const std::size_t> labels) const {
  nn::Graph g(nn::Mode::eval);
  g.set_grad_enabled(false);
  return g.value(forward(g, g.constant(x), labels));
}

Tensor sample_latent(std::size_t n, std::size_t latent_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor z({n, latent_dim});
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = dist(rng);
  return z;
}

GanTrainer::GanTrainer(Generator& g, Discriminator& d, const GanHyper& hyper)
    : g_(g),
      d_(d),
      adam_g_({hyper.lr_g, hyper.beta1, 0.999, 1e-8, 0.0}),
      adam_d_({hyper.lr_d, hyper.beta1, 0.999, 1e-8, 0.0}) {
  if (!(g.spec() == d.spec())) throw SpecError("generator and discriminator specs differ");
}

GanLosses GanTrainer::evaluate(const GanBatch& batch) const {
  const Tensor real = d_.score(batch.real, batch.real_labels);
  const Tensor fake = d_.score(g_.generate(batch.z, batch.fake_labels), batch.fake_labels);
  return gan_losses(real.data(), fake.data(), g_.spec().generator_loss);
}

double GanTrainer::discriminator_step(const GanBatch& batch) {
  const Tensor fake = g_.generate(batch.z, batch.fake_labels);
  auto params = d_.parameters().trainable();
  for (auto* p : params) p->zero_grad();
  nn::Graph g(nn::Mode::train);
  const Var dr = d_.forward(g, g.constant(batch.real), batch.real_labels);
  const Var df = d_.forward(g, g.constant(fake), batch.fake_labels);
  const Var loss = ops::add(g, ops::mean_log(g, dr, false, -1.0, kGanClip), ops::mean_log(g, df, true, -1.0, kGanClip));
  const double before = g.value(loss).item();
  g.backward(loss);
  adam_d_.step(params);
  return before;
}

double GanTrainer::generator_step(const GanBatch& batch) {
  auto params = g_.parameters().trainable();
  for (auto* p : params) p->zero_grad();
  nn::Graph g(nn::Mode::train);
  const Var fake = g_.forward(g, batch.z, batch.fake_labels);
  const Var df = d_.forward(g, fake, batch.fake_labels);
  const Var loss = g_.spec().generator_loss == GeneratorLoss::non_saturating
                       ? ops::mean_log(g, df, false, -1.0, kGanClip)
                       : ops::mean_log(g, df, true, 1.0, kGanClip);
  const double before = g.value(loss).item();
  g.backward(loss);
  adam_g_.step(params);
  // The discriminator's grads were filled as a side effect; clear them.
  d_.parameters().zero_grad();
  return before;
}

GanResult train_cgan(const io::BeatDataset& real, const GanSpec& spec, const GanHyper& hyper) {
  if (real.empty()) throw EmptyDataset("CGAN needs real beats");
  if (real.segment_len() != spec.segment_len) throw ShapeMismatch("dataset segment length does not match GAN spec");
  if (hyper.batch == 0) throw SpecError("batch size must be positive");
  std::mt19937_64 rng(hyper.seed);
  GanResult r{Generator(spec, rng()), Discriminator(spec, rng()), {}};
  GanTrainer trainer(r.generator, r.discriminator, hyper);
  std::vector<std::size_t> order(real.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum_d = 0.0, sum_g = 0.0;
    std::size_t nd = 0, ng = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      GanBatch b;
      b.real = Tensor({end - start, spec.segment_len});
      for (std::size_t i = start; i < end; ++i) {
        const auto beat = real.beat(order[i]);
        std::copy(beat.begin(), beat.end(), b.real.ptr() + (i - start) * spec.segment_len);
        b.real_labels.push_back(static_cast<std::size_t>(real.label(order[i])));
      }
      b.fake_labels = b.real_labels;
      for (std::size_t s = 0; s < hyper.d_steps; ++s) {
        b.z = sample_latent(end - start, spec.latent_dim, rng());
        sum_d += trainer.discriminator_step(b);
        ++nd;
      }
      for (std::size_t s = 0; s < hyper.g_steps; ++s) {
        b.z = sample_latent(end - start, spec.latent_dim, rng());
        sum_g += trainer.generator_step(b);
        ++ng;
      }
    }
    r.history.push_back({epoch, nd ? sum_d / static_cast<double>(nd) : 0.0, ng ? sum_g / static_cast<double>(ng) : 0.0});
  }
  return r;
}

io::BeatDataset synthesize(const Generator& g, io::ClassLabel cls, std::size_t n, std::uint64_t seed) {
  const GanSpec& spec = g.spec();
  io::BeatDataset out(spec.segment_len);
  if (n == 0) return out;
  const Tensor z = sample_latent(n, spec.latent_dim, seed);
  constexpr std::size_t chunk = 64;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t end = std::min(n, start + chunk);
    Tensor zc({end - start, spec.latent_dim},
              std::vector<double>(z.ptr() + start * spec.latent_dim, z.ptr() + end * spec.latent_dim));
    const std::vector<std::size_t> labels(end - start, static_cast<std::size_t>(cls));
    const Tensor beats = g.generate(zc, labels);
    for (std::size_t i = 0; i < end - start; ++i)
      out.push_back(std::span<const double>(beats.ptr() + i * spec.segment_len, spec.segment_len), cls);
  }
  return out;
}

ClassCounts balance_plan(const ClassCounts& have, const BalanceTarget& target) {
  for (std::size_t c = 0; c < have.size(); ++c)
    if (have[c] == 0)
      throw MissingClass("class " + std::string(io::class_name(static_cast<io::ClassLabel>(c))) +
                         " has no beats to condition on");
  ClassCounts add{};
  const std::size_t majority = *std::max_element(have.begin(), have.end());
  for (std::size_t c = 0; c < have.size(); ++c) {
    const std::size_t want = target.mode == BalanceMode::match_majority ? majority : target.counts[c];
    add[c] = want > have[c] ? want - have[c] : 0;
  }
  return add;
}

io::BeatDataset augment_to_balance(const io::BeatDataset& ds, const Generator& g, const BalanceTarget& target,
                                   std::uint64_t seed) {
  const ClassCounts add = balance_plan(ds.class_counts(), target);
  if (std::any_of(add.begin(), add.end(), [](std::size_t a) { return a > 0; }) &&
      ds.segment_len() != g.spec().segment_len)
    throw ShapeMismatch("generator segment length does not match the dataset");
  io::BeatDataset out = ds;
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < add.size(); ++c) {
    const std::uint64_t class_seed = rng();
    if (add[c] == 0) continue;
    out.append(synthesize(g, static_cast<io::ClassLabel>(c), add[c], class_seed));
  }
  return out;
}

namespace {

nn::Artifact gan_artifact(const char* component, const GanSpec& spec, std::uint64_t seed, nn::NamedTensors tensors) {
  nn::Artifact a;
  a.header.emplace_back("component", component);
  for (const auto& [k, v] : spec.to_map()) a.header.emplace_back("spec." + k, v);
  a.header.emplace_back("seed", std::to_string(seed));
  a.tensors = std::move(tensors);
  return a;
}

GanSpec spec_from(const nn::Artifact& a, const char* component) {
  if (a.field("component") != component) throw FormatError(std::string("artifact is not a ") + component);
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : a.header)
    if (k.rfind("spec.", 0) == 0) kv[k.substr(5)] = v;
  try {
    GanSpec s = GanSpec::from_map(kv);
    s.validate();
    return s;
  } catch (const SpecError& e) {
    throw FormatError(std::string(component) + " spec: " + e.what());
  }
}

}  // namespace

std::string encode_generator(const Generator& g, std::uint64_t seed) {
  return nn::encode_artifact(gan_artifact("generator", g.spec(), seed, g.parameters().state()));
}

Generator decode_generator(const std::string& bytes) {
  const nn::Artifact a = nn::decode_artifact(bytes);
  Generator g(spec_from(a, "generator"), 0);
  g.parameters().load(a.tensors);
  return g;
}

std::string encode_discriminator(const Discriminator& d, std::uint64_t seed) {
  return nn::encode_artifact(gan_artifact("discriminator", d.spec(), seed, d.parameters().state()));
}

Discriminator decode_discriminator(const std::string& bytes) {
  const nn::Artifact a = nn::decode_artifact(bytes);
  Discriminator d(spec_from(a, "discriminator"), 0);
  d.parameters().load(a.tensors);
  return d;
}

}  // namespace hardc::gan
