#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hardc/io/record_io.hpp"
#include "hardc/nn/adam.hpp"
#include "hardc/nn/graph.hpp"
#include "hardc/nn/parameters.hpp"

namespace hardc::gan {

inline constexpr double kGanClip = 1e-7;

enum class GeneratorLoss { non_saturating, minimax };

struct GanLosses {
  double d = 0.0;
  double g = 0.0;
};

// loss_d = -mean(log d_real) - mean(log(1 - d_fake))
// loss_g = -mean(log d_fake) (non-saturating) or mean(log(1 - d_fake)) (minimax)
GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake,
                     GeneratorLoss kind = GeneratorLoss::non_saturating);

struct GanSpec {
  std::size_t latent_dim = 32;
  std::size_t segment_len = 360;
  std::size_t channels = 16;     // conv feature maps in both networks
  std::size_t lstm_units = 16;   // generator BiLSTM units per direction
  std::size_t kernel = 5;
  std::size_t downsample = 4;    // generator works on segment_len / downsample steps
  std::size_t classes = io::kNumClasses;
  GeneratorLoss generator_loss = GeneratorLoss::non_saturating;

  void validate() const;
  std::size_t base_steps() const;
  std::map<std::string, std::string> to_map() const;
  static GanSpec from_map(const std::map<std::string, std::string>& kv);
  bool operator==(const GanSpec&) const = default;
};

// Latent z and one-hot condition -> dense -> [T0, C] -> relu -> conv -> relu
// -> BiLSTM -> flatten -> dense -> segment_len samples.
class Generator {
 public:
  Generator(GanSpec spec, std::uint64_t seed);
  const GanSpec& spec() const { return spec_; }

  // z [B, latent_dim] -> beats [B, segment_len].
  nn::Var forward(nn::Graph& g, const nn::Tensor& z, std::span<const std::size_t> labels) const;
  nn::Tensor generate(const nn::Tensor& z, std::span<const std::size_t> labels) const;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

 private:
  GanSpec spec_;
  mutable nn::ParameterSet params_;
};

// Beat -> conv (+ class embedding) -> relu -> dilated conv -> relu ->
// max_pool -> flatten -> dense -> sigmoid.
class Discriminator {
 public:
  Discriminator(GanSpec spec, std::uint64_t seed);
  const GanSpec& spec() const { return spec_; }

  // x [B, segment_len] -> probabilities [B, 1].
  nn::Var forward(nn::Graph& g, nn::Var x, std::span<const std::size_t> labels) const;
  nn::Tensor score(const nn::Tensor& x, std::span<const std::size_t> labels) const;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

 private:
  GanSpec spec_;
  mutable nn::ParameterSet params_;
};

// Standard normal latent batch.
nn::Tensor sample_latent(std::size_t n, std::size_t latent_dim, std::uint64_t seed);

struct GanHyper {
  std::size_t epochs = 30;
  std::size_t batch = 32;
  double lr_d = 2e-4;
  double lr_g = 2e-4;
  double beta1 = 0.5;
  std::size_t d_steps = 1;  // discriminator steps per generator step
  std::size_t g_steps = 1;
  std::uint64_t seed = 0;
};

// A fixed batch: real beats with their labels plus latent draws and the
// labels they are conditioned on.
struct GanBatch {
  nn::Tensor real;                     // [B, segment_len]
  std::vector<std::size_t> real_labels;
  nn::Tensor z;                        // [B, latent_dim]
  std::vector<std::size_t> fake_labels;
};

class GanTrainer {
 public:
  GanTrainer(Generator& g, Discriminator& d, const GanHyper& hyper);

  GanLosses evaluate(const GanBatch& batch) const;
  // One Adam step on loss_d (generator fixed). Returns loss_d before the step.
  double discriminator_step(const GanBatch& batch);
  // One Adam step on loss_g (discriminator fixed). Returns loss_g before the step.
  double generator_step(const GanBatch& batch);

 private:
  Generator& g_;
  Discriminator& d_;
  nn::Adam adam_g_;
  nn::Adam adam_d_;
};

struct GanEpoch {
  std::size_t epoch = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  bool operator==(const GanEpoch&) const = default;
};

struct GanResult {
  Generator generator;
  Discriminator discriminator;
  std::vector<GanEpoch> history;
};

// Throws EmptyDataset.
GanResult train_cgan(const io::BeatDataset& real, const GanSpec& spec, const GanHyper& hyper);

io::BeatDataset synthesize(const Generator& g, io::ClassLabel cls, std::size_t n, std::uint64_t seed);

using ClassCounts = std::array<std::size_t, io::kNumClasses>;

enum class BalanceMode { match_majority, per_class };

struct BalanceTarget {
  BalanceMode mode = BalanceMode::match_majority;
  ClassCounts counts{};  // used by per_class; a count below the current one leaves the class untouched
};

// Number of synthetic beats to add per class. Throws MissingClass.
ClassCounts balance_plan(const ClassCounts& have, const BalanceTarget& target);

// Originals first, then synthetic beats appended class by class.
io::BeatDataset augment_to_balance(const io::BeatDataset& ds, const Generator& g, const BalanceTarget& target,
                                   std::uint64_t seed);

// Artifact files with a component=generator|discriminator header key.
std::string encode_generator(const Generator& g, std::uint64_t seed);
Generator decode_generator(const std::string& bytes);
std::string encode_discriminator(const Discriminator& d, std::uint64_t seed);
Discriminator decode_discriminator(const std::string& bytes);

}  // namespace hardc::gan
